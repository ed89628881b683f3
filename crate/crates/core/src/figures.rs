//! Data sets behind the six figures of the analysis.
//!
//! Each generator returns a [`Csv`] whose header records the grid and the
//! thresholds used. Grid points are evaluated in parallel and written in grid
//! order. Points that fail are left out and listed in `warnings`.

use crate::entanglement::{
    epsilon0, second_order_cr, xi2se, ConcurrenceProfile, RangeConfig, RangeOutcome,
};
use crate::error::{Error, Result};
use crate::fit::{fit_inverse_power, fit_line, geomspace};
use crate::gfunction::DEFAULT_TOL;
use crate::model::{ModelPoint, Side};
use crate::report::{num, Csv};
use rayon::prelude::*;

/// Zero threshold for the range curves of figures 4 and 5.
pub const RANGE_ZERO_TOL: f64 = 1e-14;
/// Anisotropy of the ξ curve in figure 6.
pub const FIG6_GAMMA: f64 = 7.5e-9;

#[derive(Debug, Clone)]
pub struct FigureData {
    pub index: u8,
    pub csv: Csv,
    /// One entry per skipped grid point.
    pub warnings: Vec<String>,
}

impl FigureData {
    pub fn file_name(&self) -> String {
        format!("fig{}.csv", self.index)
    }
}

/// Builds the data set for figure `n` in 1..=6.
pub fn figure(n: u8) -> Result<FigureData> {
    match n {
        1 => Ok(phase_diagram()),
        2 => Ok(second_order()),
        3 => Ok(xx_concurrences()),
        4 => Ok(log_divergence()),
        5 => Ok(saturation_range()),
        6 => xi_vs_field(),
        _ => Err(Error::Precondition(format!("figure index {n} not in 1..6"))),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn collect<T, U: Send>(
    grid: &[T],
    f: impl Fn(&T) -> Result<U> + Sync,
    label: impl Fn(&T) -> String,
) -> (Vec<(usize, U)>, Vec<String>)
where
    T: Sync,
{
    let out: Vec<Result<U>> = grid.par_iter().map(&f).collect();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (i, (g, r)) in grid.iter().zip(out).enumerate() {
        match r {
            Ok(v) => rows.push((i, v)),
            Err(e) => warnings.push(format!("{}: {} ({e})", label(g), e.class())),
        }
    }
    (rows, warnings)
}

fn finish(index: u8, mut csv: Csv, warnings: Vec<String>) -> FigureData {
    csv.push_meta("skipped", warnings.len());
    FigureData { index, csv, warnings }
}

fn range_of(point: &ModelPoint, r_start: usize, r_budget: usize) -> Result<(usize, f64)> {
    let cfg = RangeConfig { zero_tol: RANGE_ZERO_TOL, r_start, r_budget, ..Default::default() };
    let prof = ConcurrenceProfile::grow(point, &cfg)?;
    match prof.range {
        RangeOutcome::Finite(r) => Ok((r, prof.crossing().unwrap_or(r as f64))),
        other => Err(Error::Undetermined(format!("range {} within r = {r_budget}", other.label()))),
    }
}

/// Columns gamma, h, C1, C2, C3, C4 on γ = 0.05..1, h = 0.025..1.5.
///
/// The regions C_r > 0 for r = 3, 4 and the zero line of C_2 are read off
/// the grid; the rows at γ = 0.5 give the inset.
fn phase_diagram() -> FigureData {
    let gammas = linspace(0.05, 1.0, 20);
    let hs = linspace(0.025, 1.5, 60);
    let grid: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| hs.iter().map(move |&h| (g, h))).collect();
    let (rows, warnings) = collect(
        &grid,
        |&(g, h)| {
            let p = ModelPoint::new(g, h)?;
            let prof = ConcurrenceProfile::compute(&p, 4, &RangeConfig::default())?;
            Ok(prof.entries.iter().map(|e| e.c).collect::<Vec<_>>())
        },
        |(g, h)| format!("gamma={g}, h={h}"),
    );
    let mut csv = Csv::new(&["gamma", "h", "C1", "C2", "C3", "C4"])
        .meta("gamma_grid", "linspace(0.05, 1, 20)")
        .meta("h_grid", "linspace(0.025, 1.5, 60)")
        .meta("g_tol", num(DEFAULT_TOL));
    for (i, c) in rows {
        let (g, h) = grid[i];
        let mut row = vec![num(g), num(h)];
        row.extend(c.into_iter().map(num));
        csv.row(row);
    }
    finish(1, csv, warnings)
}

/// Columns r, h_minus_hf, C, C_series at γ = 0.5 for r = 5 and 8.
///
/// h − h_f spans ±2ε₀(r); C_series is the second-order expression with
/// δA² = 0, left unclipped.
fn second_order() -> FigureData {
    let gamma = 0.5;
    let mut grid = Vec::new();
    for r in [5u32, 8] {
        let e0 = epsilon0(gamma, r).expect("gamma in range");
        grid.extend(linspace(-2.0 * e0, 2.0 * e0, 41).into_iter().map(|d| (r, d)));
    }
    let (rows, warnings) = collect(
        &grid,
        |&(r, d)| {
            let side = if d < 0.0 { Side::Below } else { Side::Above };
            let p = ModelPoint::near_factorized(gamma, d.abs(), side)?;
            let prof = ConcurrenceProfile::compute(&p, r as usize, &RangeConfig::default())?;
            Ok((prof.c(r as usize), second_order_cr(gamma, d.abs(), r)?))
        },
        |(r, d)| format!("r={r}, h-h_f={d:e}"),
    );
    let mut csv = Csv::new(&["r", "h_minus_hf", "C", "C_series"])
        .meta("gamma", gamma)
        .meta("grid", "linspace(-2 eps0(r), 2 eps0(r), 41)")
        .meta("g_tol", num(DEFAULT_TOL));
    for (i, (c, s)) in rows {
        let (r, d) = grid[i];
        csv.row(vec![r.to_string(), num(d), num(c), num(s)]);
    }
    finish(2, csv, warnings)
}

/// Columns h, C1..C7 at γ = 0 for h = 0.02..1.2.
fn xx_concurrences() -> FigureData {
    let hs = linspace(0.02, 1.2, 60);
    let (rows, warnings) = collect(
        &hs,
        |&h| {
            let p = ModelPoint::new(0.0, h)?;
            let prof = ConcurrenceProfile::compute(&p, 7, &RangeConfig::default())?;
            Ok(prof.entries.iter().map(|e| e.c).collect::<Vec<_>>())
        },
        |h| format!("h={h}"),
    );
    let mut csv = Csv::new(&["h", "C1", "C2", "C3", "C4", "C5", "C6", "C7"])
        .meta("gamma", 0)
        .meta("h_grid", "linspace(0.02, 1.2, 60)")
        .meta("g_tol", num(DEFAULT_TOL));
    for (i, c) in rows {
        let mut row = vec![num(hs[i])];
        row.extend(c.into_iter().map(num));
        csv.row(row);
    }
    finish(3, csv, warnings)
}

/// Columns gamma, C1..C6, R, R_star at h = 1.2 for γ from 1e-6 to 1.
fn log_divergence() -> FigureData {
    let h = 1.2;
    let gammas = geomspace(1e-6, 1.0, 25);
    let (rows, warnings) = collect(
        &gammas,
        |&g| {
            let p = ModelPoint::new(g, h)?;
            let prof = ConcurrenceProfile::compute(&p, 6, &RangeConfig::default())?;
            let c: Vec<f64> = prof.entries.iter().map(|e| e.c).collect();
            Ok((c, range_of(&p, 8, 4096)?))
        },
        |g| format!("gamma={g:e}"),
    );
    let mut csv = Csv::new(&["gamma", "C1", "C2", "C3", "C4", "C5", "C6", "R", "R_star"])
        .meta("h", h)
        .meta("gamma_grid", "geomspace(1e-6, 1, 25)")
        .meta("zero_tol", num(RANGE_ZERO_TOL))
        .meta("g_tol", num(DEFAULT_TOL));
    for (i, (c, (r, rs))) in rows {
        let mut row = vec![num(gammas[i])];
        row.extend(c.into_iter().map(num));
        row.push(r.to_string());
        row.push(num(rs));
        csv.row(row);
    }
    finish(4, csv, warnings)
}

/// Columns inv_gamma, gamma, R, R_star at h = 1, with the line fit in the header.
fn saturation_range() -> FigureData {
    let gammas = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4];
    let (rows, warnings) = collect(
        &gammas,
        |&g| range_of(&ModelPoint::new(g, 1.0)?, (1.1 / g) as usize, 8192),
        |g| format!("gamma={g:e}"),
    );
    let mut csv = Csv::new(&["inv_gamma", "gamma", "R", "R_star"])
        .meta("h", 1)
        .meta("gamma_grid", "1e-2 5e-3 2e-3 1e-3 5e-4")
        .meta("zero_tol", num(RANGE_ZERO_TOL))
        .meta("r_budget", 8192);
    let x: Vec<f64> = rows.iter().map(|(i, _)| 1.0 / gammas[*i]).collect();
    let y: Vec<f64> = rows.iter().map(|(_, v)| v.1).collect();
    if let Ok(f) = fit_line(&x, &y) {
        csv.push_meta("fit", format!("R_star = {} + {} / gamma", num(f.intercept), num(f.slope)));
    }
    for (i, (r, rs)) in rows {
        let g = gammas[i];
        csv.row(vec![num(1.0 / g), num(g), r.to_string(), num(rs)]);
    }
    finish(5, csv, warnings)
}

/// Columns h, xi, xi_line, fit_residual at γ = 7.5e-9 for h − 1 from 1e-3 to 0.3.
///
/// The header carries the fit ξ = c0 + c1/(h − 1)^ν.
fn xi_vs_field() -> Result<FigureData> {
    let ds = geomspace(1e-3, 0.3, 10);
    let (rows, warnings) = collect(
        &ds,
        |&d| {
            let p = ModelPoint::new(FIG6_GAMMA, 1.0 + d)?;
            xi2se(&ConcurrenceProfile::grow(&p, &RangeConfig::default())?)
        },
        |d| format!("h-1={d:e}"),
    );
    let x: Vec<f64> = rows.iter().map(|(i, _)| ds[*i]).collect();
    let y: Vec<f64> = rows.iter().map(|(_, f)| f.xi).collect();
    let (c0, c1, nu, _) = fit_inverse_power(&x, &y, 0.1, 1.5)?;
    let mut csv = Csv::new(&["h", "xi", "xi_line", "fit_residual"])
        .meta("gamma", num(FIG6_GAMMA))
        .meta("h_minus_1_grid", "geomspace(1e-3, 0.3, 10)")
        .meta("fit", format!("xi = c0 + c1 / (h - 1)^nu, c0 = {}, c1 = {}, nu = {}", num(c0), num(c1), num(nu)));
    for (i, f) in rows {
        csv.row(vec![num(1.0 + ds[i]), num(f.xi), num(f.plain_xi), num(f.fit_residual)]);
    }
    Ok(finish(6, csv, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_index_is_rejected() {
        assert!(matches!(figure(0), Err(Error::Precondition(_))));
        assert!(matches!(figure(7), Err(Error::Precondition(_))));
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(0.02, 1.2, 60);
        assert_eq!(v.len(), 60);
        assert_eq!(v[0], 0.02);
        assert!((v[59] - 1.2).abs() < 1e-15);
    }
}
