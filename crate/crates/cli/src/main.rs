mod grid;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use xychain::acceptance::{self, CriterionReport, Tolerances, CRITERIA};
use xychain::correlators::profile_at;
use xychain::entanglement::{
    tangles, xi2se, ConcurrenceProfile, RangeConfig, RangeOutcome, TangleReport, REPORT_COLUMNS, ZERO_TOL,
};
use xychain::figures::figure;
use xychain::gfunction::DEFAULT_TOL;
use xychain::report::{num, Csv};
use xychain::{Error, ModelPoint, Side};

use grid::Grid;

#[derive(Parser)]
#[command(name = "xychain", version, about = "Pairwise entanglement in the XY chain in a transverse field")]
struct Cli {
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlators, concurrences and tangles at one point.
    Point(PointArgs),
    /// Tangles, range and entanglement length over a parameter grid.
    Scan(ScanArgs),
    /// Regenerate the data behind figure N (1..6).
    Figure(FigureArgs),
    /// Two-spin entanglement length at one point.
    Xi2se(ProfileArgs),
    /// Concurrence range at one point.
    Range(ProfileArgs),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Above,
    Below,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Above => Side::Above,
            SideArg::Below => Side::Below,
        }
    }
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    gamma: f64,
    /// Transverse field.
    #[arg(long, conflicts_with = "eps", required_unless_present = "eps")]
    h: Option<f64>,
    /// Distance from the factorizing field, used with --side.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum, default_value = "above")]
    side: SideArg,
}

impl Target {
    fn point(&self) -> Result<ModelPoint, Error> {
        match (self.h, self.eps) {
            (Some(h), _) => ModelPoint::new(self.gamma, h),
            (None, Some(e)) => ModelPoint::near_factorized(self.gamma, e, self.side.into()),
            (None, None) => unreachable!("clap requires --h or --eps"),
        }
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value_t = 10)]
    rmax: usize,
    /// Absolute tolerance of the G quadrature.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    target: Target,
    /// Longest profile the range search may compute.
    #[arg(long, default_value_t = 4096)]
    rmax: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Threshold below which max{C', C''} counts as zero.
    #[arg(long, default_value_t = ZERO_TOL)]
    zero_tol: f64,
}

#[derive(Args)]
struct ScanArgs {
    /// Anisotropy grid: a list, lin:LO:HI:N or geom:LO:HI:N.
    #[arg(long, value_parser = grid::parse_grid)]
    gamma: Grid,
    /// Field grid.
    #[arg(long, value_parser = grid::parse_grid, conflicts_with = "eps", required_unless_present = "eps")]
    h: Option<Grid>,
    /// Grid of distances from the factorizing field, used with --side.
    #[arg(long, value_parser = grid::parse_grid)]
    eps: Option<Grid>,
    #[arg(long, value_enum, default_value = "above")]
    side: SideArg,
    #[arg(long, default_value_t = 4096)]
    rmax: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
    n: u8,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct AcceptArgs {
    /// Run only these criteria (key or number); repeatable.
    #[arg(long)]
    only: Vec<String>,
    /// Override a tolerance, e.g. --set pfeuty_abs=1e-12; repeatable.
    #[arg(long = "set", value_parser = parse_override)]
    set: Vec<(String, f64)>,
    /// Print every measured case under its criterion.
    #[arg(long)]
    verbose: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("'{s}': expected KEY=VALUE"))?;
    let v: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

enum Failure {
    Usage(String),
    Check(String),
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error[usage]: --jobs {n}: {e}");
            return ExitCode::from(2);
        }
    }
    let res = match cli.cmd {
        Command::Point(a) => point(a),
        Command::Scan(a) => scan(a),
        Command::Figure(a) => write_figure(a),
        Command::Xi2se(a) => xi(a),
        Command::Range(a) => range(a),
        Command::Accept(a) => accept(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error[usage]: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error[check]: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error[io]: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(if e.is_numerical() { 3 } else { 1 })
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--tol {tol} must be > 0")))
    }
}

fn point(a: PointArgs) -> Result<(), Failure> {
    check_tol(a.tol)?;
    if a.rmax < 1 {
        return Err(Failure::Usage("--rmax must be >= 1".into()));
    }
    let p = a.target.point()?;
    let cfg = RangeConfig { g_tol: a.tol, ..Default::default() };
    let (_, sets) = profile_at(&p, a.rmax, a.tol)?;
    let prof = ConcurrenceProfile::compute(&p, a.rmax, &cfg)?;
    let t = tangles(&ConcurrenceProfile::grow(&p, &cfg)?)?;

    let mut csv = Csv::new(&[
        "gamma", "h", "r", "gxx", "gyy", "gzz", "mz", "C", "Cp", "Cpp", "channel", "flag",
    ])
    .meta("regime", format!("{:?}", p.regime))
    .meta("h_f", num(p.h_f))
    .meta("g_tol", num(a.tol))
    .meta("mx2", num(prof.mags.mx2.value))
    .meta("tau1", num(t.tau1))
    .meta("tau2", num(t.tau2))
    .meta("R", t.range.label());
    for (cs, e) in sets.iter().zip(&prof.entries) {
        let mut flags = Vec::new();
        if prof.lower_bound_flag {
            flags.push("lower-bound");
        }
        if cs.ill_conditioned {
            flags.push("ill-conditioned");
        }
        csv.row(vec![
            num(p.gamma),
            num(p.h),
            cs.r.to_string(),
            num(cs.gxx),
            num(cs.gyy),
            num(cs.gzz),
            num(cs.mz),
            num(e.c),
            num(e.cp),
            num(e.cpp),
            e.channel.as_str().into(),
            if flags.is_empty() { "ok".into() } else { flags.join("|") },
        ]);
    }
    emit(&csv.render(), a.out.as_deref())?;

    eprintln!("gamma = {}, h = {} ({:?}, h_f = {:.6})", p.gamma, p.h, p.regime, p.h_f);
    eprintln!("M_z = {:.10}, M_x^2 = {:.6e}", prof.mags.mz, prof.mags.mx2.value);
    for e in prof.entries.iter().take(6) {
        eprintln!("C_{} = {:.6e} ({})", e.r, e.c, e.channel.as_str());
    }
    summarize(&t);
    Ok(())
}

fn summarize(t: &TangleReport) {
    eprintln!(
        "tau1 = {:.6e}, tau2 = {:.6e}, ratio = {}, R = {}",
        t.tau1,
        t.tau2,
        t.ratio.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into()),
        t.range.label()
    );
}

fn scan(a: ScanArgs) -> Result<(), Failure> {
    check_tol(a.tol)?;
    let gammas = a.gamma.0;
    let (second, by_eps) = match (a.h, a.eps) {
        (Some(h), _) => (h.0, false),
        (None, Some(e)) => (e.0, true),
        (None, None) => unreachable!("clap requires --h or --eps"),
    };
    let side: Side = a.side.into();
    let grid: Vec<(f64, f64)> =
        gammas.iter().flat_map(|&g| second.iter().map(move |&x| (g, x))).collect();
    let cfg = RangeConfig { r_budget: a.rmax, g_tol: a.tol, ..Default::default() };
    let rows: Vec<Result<Vec<String>, Error>> = grid
        .par_iter()
        .map(|&(g, x)| {
            let p = if by_eps { ModelPoint::near_factorized(g, x, side)? } else { ModelPoint::new(g, x)? };
            let prof = ConcurrenceProfile::grow(&p, &cfg)?;
            let t = tangles(&prof)?;
            let fit = xi2se(&prof).ok();
            Ok(t.row(fit.map(|f| f.xi), fit.map(|f| f.fit_residual)))
        })
        .collect();

    let mut csv = Csv::new(&REPORT_COLUMNS)
        .meta("points", grid.len())
        .meta("grid", if by_eps { format!("eps, side {side:?}") } else { "h".into() })
        .meta("r_budget", a.rmax)
        .meta("g_tol", num(a.tol));
    let mut skipped = 0;
    for ((g, x), row) in grid.iter().zip(rows) {
        match row {
            Ok(r) => csv.row(r),
            Err(e) => {
                skipped += 1;
                eprintln!("warning[{}]: skipped gamma={g}, {}={x}: {e}", e.class(), if by_eps { "eps" } else { "h" });
            }
        }
    }
    csv.push_meta("skipped", skipped);
    emit(&csv.render(), a.out.as_deref())?;
    eprintln!("{} of {} points evaluated", grid.len() - skipped, grid.len());
    if skipped == grid.len() {
        return Err(Failure::Lib(Error::Undetermined("no grid point could be evaluated".into())));
    }
    Ok(())
}

fn write_figure(a: FigureArgs) -> Result<(), Failure> {
    let fig = figure(a.n)?;
    std::fs::create_dir_all(&a.out)?;
    let path = a.out.join(fig.file_name());
    std::fs::write(&path, fig.csv.render())?;
    if !fig.warnings.is_empty() {
        let manifest = a.out.join(format!("fig{}.warnings.txt", a.n));
        std::fs::write(&manifest, fig.warnings.join("\n") + "\n")?;
        for w in &fig.warnings {
            eprintln!("warning: {w}");
        }
        eprintln!("{} points skipped, listed in {}", fig.warnings.len(), manifest.display());
    }
    eprintln!("wrote {} ({} rows)", path.display(), fig.csv.len());
    Ok(())
}

fn profile(a: &ProfileArgs) -> Result<ConcurrenceProfile, Failure> {
    check_tol(a.tol)?;
    if !(a.zero_tol >= 0.0) {
        return Err(Failure::Usage(format!("--zero-tol {} must be >= 0", a.zero_tol)));
    }
    let p = a.target.point()?;
    let cfg = RangeConfig { zero_tol: a.zero_tol, r_budget: a.rmax, g_tol: a.tol, ..Default::default() };
    Ok(ConcurrenceProfile::grow(&p, &cfg)?)
}

fn xi(a: ProfileArgs) -> Result<(), Failure> {
    let prof = profile(&a)?;
    let f = xi2se(&prof)?;
    println!("gamma: {}", prof.point.gamma);
    println!("h: {}", prof.point.h);
    println!("xi: {}", num(f.xi));
    println!("window: {}..{}", f.fit_window.0, f.fit_window.1);
    println!("fit_residual: {}", num(f.fit_residual));
    println!("xi_line: {}", num(f.plain_xi));
    println!("analytic: {}", f.analytic_xi.map(num).unwrap_or_else(|| "n/a".into()));
    println!("monotone: {}", f.monotone);
    Ok(())
}

fn range(a: ProfileArgs) -> Result<(), Failure> {
    let prof = profile(&a)?;
    println!("gamma: {}", prof.point.gamma);
    println!("h: {}", prof.point.h);
    println!("R: {}", prof.range.label());
    if let Some(x) = prof.crossing() {
        println!("R_star: {}", num(x));
    }
    println!("profile_length: {}", prof.r_max);
    println!("interior_zeros: {}", prof.interior_zeros);
    if prof.lower_bound_flag {
        println!("note: concurrence is a lower bound in the symmetry-broken phase");
    }
    match prof.range {
        RangeOutcome::Finite(_) => Ok(()),
        other => Err(Failure::Lib(Error::Undetermined(format!(
            "range {} within r = {}",
            other.label(),
            a.rmax
        )))),
    }
}

fn accept(a: AcceptArgs) -> Result<(), Failure> {
    let mut tol = Tolerances::default();
    for (k, v) in &a.set {
        tol.set(k, *v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let selected = if a.only.is_empty() {
        CRITERIA.to_vec()
    } else {
        a.only
            .iter()
            .map(|k| acceptance::criterion(k).ok_or_else(|| Failure::Usage(format!("unknown criterion '{k}'"))))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut reports: Vec<CriterionReport> = Vec::new();
    for c in selected {
        let r = acceptance::run(c, &tol);
        println!("{}", r.line());
        if a.verbose {
            for d in &r.details {
                println!("      {d}");
            }
        }
        reports.push(r);
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", reports.len() - failed, reports.len());
    if let Some(path) = &a.out {
        let json = serde_json::json!({ "tolerances": tol, "criteria": reports });
        std::fs::write(path, serde_json::to_string_pretty(&json).expect("report serializes") + "\n")?;
    }
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} criteria failed")));
    }
    Ok(())
}
