//! Concurrences, concurrence range, tangles and the two-spin entanglement length.
//!
//! For a pair at distance r,
//!
//!   C′_r = |gˣˣ + gʸʸ| − √((1/4 + gᶻᶻ)² − M_z²)     (antiparallel channel),
//!   C″_r = |gˣˣ − gʸʸ| + gᶻᶻ − 1/4                  (parallel channel),
//!   C_r  = 2 max{0, C′_r, C″_r}.
//!
//! Writing m = 1/2 − M_z and c = gᶻᶻ − M_z², the radicand factors as
//! (m² + c)((1 − m)² + c) and 1/4 − gᶻᶻ = m(1 − m) − c. These forms are
//! used throughout: near saturation both m and c are tiny and the textbook
//! expressions lose every significant digit.

mod length;
mod range;
mod tangles;

pub use length::{xi2se, Xi2seFit, XI_MIN_POINTS, XI_R_MIN};
pub use range::{a_squared, epsilon0, range_asymptote, second_order_cr, xx_range, xx_range_cubic};
pub use tangles::{tangles, TangleReport, TangleStatus, REPORT_COLUMNS};

use crate::correlators::{correlator_profile, CorrelatorSet, Magnetizations, MX2_R0, MX2_WINDOW};
use crate::error::{Error, Result};
use crate::gfunction::{GOptions, GTable, DEFAULT_TOL};
use crate::model::ModelPoint;
use crate::report::{num, Csv};
use serde::Serialize;

/// Radicands below −RADICAND_TOL signal a non-positive two-site state.
pub const RADICAND_TOL: f64 = 1e-10;
/// Default threshold below which max{C′, C″} counts as zero.
pub const ZERO_TOL: f64 = 1e-12;
/// Default number of consecutive zeros that closes the range.
pub const K_ZEROS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Channel {
    /// C′ wins: antiparallel Bell-state weight.
    Antiparallel,
    /// C″ wins: parallel Bell-state weight.
    Parallel,
    None,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Antiparallel => "antiparallel",
            Channel::Parallel => "parallel",
            Channel::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Concurrence {
    pub c: f64,
    pub cp: f64,
    pub cpp: f64,
    pub channel: Channel,
    /// (1/4 + gᶻᶻ)² − M_z², before clamping at zero.
    pub radicand: f64,
    /// The pair sits in the broken-symmetry region where C is only a lower bound.
    pub lower_bound: bool,
}

/// Concurrence of the pair described by `cs`.
pub fn concurrence(cs: &CorrelatorSet) -> Result<Concurrence> {
    let m = cs.mz_deficit;
    let conn = cs.gzz_connected;
    let radicand = (m * m + conn) * ((1.0 - m) * (1.0 - m) + conn);
    if radicand < -RADICAND_TOL {
        return Err(Error::Consistency(format!(
            "negative radicand {radicand:e} at gamma={}, h={}, r={}",
            cs.point.gamma, cs.point.h, cs.r
        )));
    }
    let cp = (cs.gxx + cs.gyy).abs() - radicand.max(0.0).sqrt();
    let cpp = (cs.gxx - cs.gyy).abs() - (m * (1.0 - m) - conn);
    let best = cp.max(cpp);
    let channel = if best <= 0.0 {
        Channel::None
    } else if cp > cpp {
        Channel::Antiparallel
    } else {
        Channel::Parallel
    };
    Ok(Concurrence { c: 2.0 * best.max(0.0), cp, cpp, channel, radicand, lower_bound: cs.point.lower_bound() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileEntry {
    pub r: usize,
    pub c: f64,
    pub cp: f64,
    pub cpp: f64,
    pub channel: Channel,
    pub radicand: f64,
}

impl ProfileEntry {
    /// max{C′, C″}, the signed quantity whose sign decides entanglement.
    pub fn margin(&self) -> f64 {
        self.cp.max(self.cpp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RangeOutcome {
    /// Largest entangled separation, 0 when no pair is entangled.
    Finite(usize),
    /// Still entangled at the end of the budget.
    Infinite,
    /// The budget ended inside a run of zeros too short to decide.
    Undetermined,
}

impl RangeOutcome {
    pub fn finite(&self) -> Option<usize> {
        match self {
            RangeOutcome::Finite(r) => Some(*r),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            RangeOutcome::Finite(r) => r.to_string(),
            RangeOutcome::Infinite => "inf".into(),
            RangeOutcome::Undetermined => "undetermined".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeConfig {
    pub zero_tol: f64,
    pub k_zeros: usize,
    /// First profile length tried by the growing scan.
    pub r_start: usize,
    /// Longest profile the growing scan may compute.
    pub r_budget: usize,
    pub g_tol: f64,
}

impl Default for RangeConfig {
    fn default() -> Self {
        RangeConfig { zero_tol: ZERO_TOL, k_zeros: K_ZEROS, r_start: 32, r_budget: 4096, g_tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcurrenceProfile {
    pub point: ModelPoint,
    /// Entry r − 1 holds separation r.
    pub entries: Vec<ProfileEntry>,
    pub r_max: usize,
    pub range: RangeOutcome,
    pub lower_bound_flag: bool,
    /// Some C_r ≤ zero_tol occurs below the range (fewer than K in a row).
    pub interior_zeros: bool,
    pub ill_conditioned: bool,
    pub mags: Magnetizations,
    pub zero_tol: f64,
    pub k_zeros: usize,
}

impl ConcurrenceProfile {
    /// Concurrences for r = 1..=r_max at one point.
    pub fn compute(point: &ModelPoint, r_max: usize, cfg: &RangeConfig) -> Result<Self> {
        let table = profile_table(point, r_max, cfg.g_tol)?;
        Self::from_table(&table, r_max, cfg)
    }

    pub fn from_table(table: &GTable, r_max: usize, cfg: &RangeConfig) -> Result<Self> {
        if r_max < 1 {
            return Err(Error::Precondition("profile needs r_max >= 1".into()));
        }
        let mags = Magnetizations::compute(table)?;
        let sets = correlator_profile(table, r_max, &mags)?;
        Self::from_sets(&sets, &mags, cfg)
    }

    pub fn from_sets(sets: &[CorrelatorSet], mags: &Magnetizations, cfg: &RangeConfig) -> Result<Self> {
        let point = sets.first().map(|s| s.point).ok_or_else(|| {
            Error::Precondition("profile needs at least one correlator set".into())
        })?;
        let entries = sets
            .iter()
            .map(|cs| {
                concurrence(cs).map(|c| ProfileEntry {
                    r: cs.r,
                    c: c.c,
                    cp: c.cp,
                    cpp: c.cpp,
                    channel: c.channel,
                    radicand: c.radicand,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let (range, interior_zeros) = classify_range(&entries, cfg.zero_tol, cfg.k_zeros);
        Ok(ConcurrenceProfile {
            point,
            r_max: entries.len(),
            entries,
            range,
            lower_bound_flag: point.lower_bound(),
            interior_zeros,
            ill_conditioned: sets.iter().any(|s| s.ill_conditioned),
            mags: *mags,
            zero_tol: cfg.zero_tol,
            k_zeros: cfg.k_zeros,
        })
    }

    /// Profile grown by doubling from `r_start` until the range is decided
    /// or `r_budget` is reached.
    pub fn grow(point: &ModelPoint, cfg: &RangeConfig) -> Result<Self> {
        if cfg.r_budget < 2 {
            return Err(Error::Precondition(format!("r_budget {} must be >= 2", cfg.r_budget)));
        }
        let mut r0 = cfg.r_start;
        if point.gamma == 0.0 && point.h < 1.0 && point.eps > 0.0 {
            // The XX range is known in closed form to about 1%; start just past it.
            if let Ok(est) = xx_range(point.eps) {
                r0 = r0.max((1.1 * est) as usize + 2 * cfg.k_zeros);
            }
        }
        let mut r = r0.clamp(cfg.k_zeros + 1, cfg.r_budget);
        loop {
            let prof = Self::compute(point, r, cfg)?;
            if matches!(prof.range, RangeOutcome::Finite(_)) || r >= cfg.r_budget {
                return Ok(prof);
            }
            r = (2 * r).min(cfg.r_budget);
        }
    }

    pub fn c(&self, r: usize) -> f64 {
        self.entries[r - 1].c
    }

    /// Continuous estimate of where max{C′, C″} crosses zero past the range,
    /// by linear interpolation between R and R + 1.
    pub fn crossing(&self) -> Option<f64> {
        let r = self.range.finite()?;
        if r == 0 || r >= self.entries.len() {
            return None;
        }
        let a = self.entries[r - 1].margin();
        let b = self.entries[r].margin();
        if a > b {
            Some(r as f64 + a / (a - b))
        } else {
            Some(r as f64)
        }
    }

    /// Rows with columns gamma, h, r, C, Cp, Cpp, channel, flag.
    pub fn push_rows(&self, csv: &mut Csv) {
        for e in &self.entries {
            let mut flags = Vec::new();
            if self.lower_bound_flag {
                flags.push("lower-bound");
            }
            if self.ill_conditioned {
                flags.push("ill-conditioned");
            }
            let flag = if flags.is_empty() { "ok".to_string() } else { flags.join("|") };
            csv.row(vec![
                num(self.point.gamma),
                num(self.point.h),
                e.r.to_string(),
                num(e.c),
                num(e.cp),
                num(e.cpp),
                e.channel.as_str().into(),
                flag,
            ]);
        }
    }
}

pub const PROFILE_COLUMNS: [&str; 8] = ["gamma", "h", "r", "C", "Cp", "Cpp", "channel", "flag"];

/// G table deep enough for both the profile and the M_x² plateau.
pub fn profile_table(point: &ModelPoint, r_max: usize, tol: f64) -> Result<GTable> {
    let mut depth = r_max + 1;
    if point.is_ordered() {
        depth = depth.max(MX2_R0 + 2 * MX2_WINDOW + 1);
    }
    GTable::build_with(point, depth, &GOptions::with_tol(tol))
}

fn classify_range(entries: &[ProfileEntry], zero_tol: f64, k: usize) -> (RangeOutcome, bool) {
    let mut run = 0;
    let mut interior = false;
    for (i, e) in entries.iter().enumerate() {
        if e.margin() <= zero_tol {
            run += 1;
            if run >= k {
                let r = i + 1 - run;
                return (RangeOutcome::Finite(r), interior);
            }
        } else {
            if run > 0 {
                interior = true;
            }
            run = 0;
        }
    }
    if run == 0 {
        (RangeOutcome::Infinite, interior)
    } else {
        (RangeOutcome::Undetermined, interior)
    }
}

/// Range of the concurrence at `point`, scanning at most `r_budget` separations.
pub fn concurrence_range(point: &ModelPoint, r_budget: usize, zero_tol: f64) -> Result<RangeOutcome> {
    let cfg = RangeConfig { zero_tol, r_budget, ..Default::default() };
    Ok(ConcurrenceProfile::grow(point, &cfg)?.range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Side;

    fn cfg() -> RangeConfig {
        RangeConfig::default()
    }

    #[test]
    fn factorized_point_has_no_entanglement() {
        for &g in &[0.25, 0.5, 1.0] {
            let p = ModelPoint::near_factorized(g, 0.0, Side::Above).unwrap();
            let prof = ConcurrenceProfile::compute(&p, 6, &cfg()).unwrap();
            for e in &prof.entries {
                assert!(e.c < 1e-10, "g={g} r={} C={}", e.r, e.c);
            }
            assert_eq!(prof.range, RangeOutcome::Finite(0));
        }
    }

    #[test]
    fn pfeuty_small_field() {
        let p = ModelPoint::new(1.0, 0.2).unwrap();
        let prof = ConcurrenceProfile::compute(&p, 6, &cfg()).unwrap();
        let h: f64 = 0.2;
        assert!((prof.c(1) - (h * h / 8.0 + 3.0 * h.powi(4) / 128.0)).abs() < 5e-6);
        assert!((prof.c(2) - h.powi(4) / 128.0).abs() < 5e-6);
        assert_eq!(prof.range, RangeOutcome::Finite(2));
    }

    #[test]
    fn first_order_example() {
        let p = ModelPoint::near_factorized(0.5, 0.01, Side::Above).unwrap();
        let prof = ConcurrenceProfile::compute(&p, 4, &cfg()).unwrap();
        let a: f64 = p.alpha;
        let first = a.powi(3) * 0.01 / (2.0 * 0.5);
        assert!((prof.c(2) - first).abs() / first < 0.2);
    }

    #[test]
    fn channel_swaps_at_factorizing_field() {
        for &g in &[0.25, 0.5, 0.75] {
            let above = ModelPoint::near_factorized(g, 1e-3, Side::Above).unwrap();
            let below = ModelPoint::near_factorized(g, 1e-3, Side::Below).unwrap();
            let pa = ConcurrenceProfile::compute(&above, 3, &cfg()).unwrap();
            let pb = ConcurrenceProfile::compute(&below, 3, &cfg()).unwrap();
            for r in 1..=3 {
                assert_eq!(pa.entries[r - 1].channel, Channel::Parallel, "g={g} r={r}");
                assert_eq!(pb.entries[r - 1].channel, Channel::Antiparallel, "g={g} r={r}");
            }
            assert!(pb.lower_bound_flag && !pa.lower_bound_flag);
        }
    }

    #[test]
    fn range_classification() {
        let e = |m: f64| ProfileEntry { r: 0, c: 2.0 * m.max(0.0), cp: m, cpp: -1.0, channel: Channel::None, radicand: 0.0 };
        let v: Vec<_> = [1.0, 1.0, -1.0, 1.0, -1.0, -1.0, -1.0].iter().map(|&m| e(m)).collect();
        assert_eq!(classify_range(&v, 1e-12, 3), (RangeOutcome::Finite(4), true));
        assert_eq!(classify_range(&v[..5], 1e-12, 3).0, RangeOutcome::Undetermined);
        assert_eq!(classify_range(&v[..4], 1e-12, 3).0, RangeOutcome::Infinite);
    }

    #[test]
    fn ising_range_is_two() {
        let p = ModelPoint::new(1.0, 0.5).unwrap();
        assert_eq!(concurrence_range(&p, 64, ZERO_TOL).unwrap(), RangeOutcome::Finite(2));
    }

    #[test]
    fn crossing_lies_between_neighbours() {
        let p = ModelPoint::near_factorized(0.5, 1e-3, Side::Above).unwrap();
        let prof = ConcurrenceProfile::grow(&p, &cfg()).unwrap();
        let r = prof.range.finite().unwrap();
        let x = prof.crossing().unwrap();
        assert!(x >= r as f64 && x <= r as f64 + 1.0);
    }
}
