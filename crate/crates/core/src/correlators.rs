//! Two-point functions and magnetizations from Toeplitz determinants.
//!
//! With M = G(0)/2 along the field,
//!
//!   gˣˣ_r = det[G(i−j−1)]/4,   gʸʸ_r = det[G(i−j+1)]/4,
//!   gᶻᶻ_r = M_z² − G(r) G(−r)/4,
//!
//! where the determinants are r×r. The orientation of the shift is fixed
//! by the product state on the factorized circle, where gʸʸ must vanish;
//! see [`ORIENTATION`].
//!
//! Near saturation and near factorization the interesting quantities are
//! small differences such as 1/2 − M_z and gᶻᶻ − M_z². Both are carried
//! explicitly so that the concurrence never subtracts nearly equal numbers.

use crate::error::{Error, Result};
use crate::gfunction::GTable;
use crate::model::ModelPoint;
use crate::report::{num, Csv};
use crate::toeplitz::{shifted_dets, shifted_pair, HEALTH_RANGE};
use serde::Serialize;

/// Shift applied to the G index of the gˣˣ matrix: entries G(i − j + ORIENTATION).
///
/// The opposite choice makes gʸʸ equal to the full product-state gˣˣ on the
/// factorized circle and is rejected by the calibration test.
pub const ORIENTATION: i64 = -1;

/// First separation of the plateau window for M_x².
pub const MX2_R0: usize = 50;
/// Width of each plateau window.
pub const MX2_WINDOW: usize = 20;
/// Relative drift between consecutive windows accepted as a plateau.
pub const MX2_DRIFT: f64 = 0.01;
/// The window start is doubled up to this separation.
pub const MX2_R0_MAX: usize = 800;

/// Long-distance estimate of M_x² from the plateau of |gˣˣ_r|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mx2Estimate {
    pub value: f64,
    /// Start of the first window; 0 when no window was needed.
    pub r0: usize,
    pub window: usize,
    /// |mean₁ − mean₂| / mean₂ over the two consecutive windows.
    pub drift: f64,
    pub converged: bool,
}

/// Single-site quantities shared by every separation at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Magnetizations {
    pub mz: f64,
    /// 1/2 − M_z.
    pub mz_deficit: f64,
    pub mx2: Mx2Estimate,
}

impl Magnetizations {
    pub fn compute(table: &GTable) -> Result<Self> {
        let mx2 = mx2_plateau(table)?;
        Ok(Self::with_mx2(table, mx2))
    }

    fn with_mx2(table: &GTable, mx2: Mx2Estimate) -> Self {
        Magnetizations { mz: table.get(0) / 2.0, mz_deficit: table.g0_complement / 2.0, mx2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelatorSet {
    pub point: ModelPoint,
    pub r: usize,
    pub gxx: f64,
    pub gyy: f64,
    pub gzz: f64,
    pub mz: f64,
    pub mx2_estimate: f64,
    /// log10 of the largest diagonal dynamic range met in the factorizations.
    pub det_log_condition: f64,
    pub ill_conditioned: bool,
    /// 1/2 − M_z.
    pub mz_deficit: f64,
    /// gᶻᶻ − M_z² = −G(r)G(−r)/4.
    pub gzz_connected: f64,
}

fn assemble(
    table: &GTable,
    r: usize,
    x: f64,
    y: f64,
    log_condition: f64,
    mags: &Magnetizations,
) -> CorrelatorSet {
    let point = table.point;
    let mut gxx = x / 4.0;
    let mut gyy = y / 4.0;
    if point.gamma == 0.0 {
        // G is even at γ = 0, so the two matrices are transposes of each other.
        let mean = 0.5 * (gxx + gyy);
        gxx = mean;
        gyy = mean;
    }
    let ri = r as i64;
    let connected = -table.get(ri) * table.get(-ri) / 4.0;
    CorrelatorSet {
        point,
        r,
        gxx,
        gyy,
        gzz: mags.mz * mags.mz + connected,
        mz: mags.mz,
        mx2_estimate: mags.mx2.value,
        det_log_condition: log_condition,
        ill_conditioned: log_condition > HEALTH_RANGE.log10(),
        mz_deficit: mags.mz_deficit,
        gzz_connected: connected,
    }
}

fn check_point(point: &ModelPoint, table: &GTable) -> Result<()> {
    if point != &table.point {
        return Err(Error::Precondition(format!(
            "table built for (gamma={}, h={}), asked for (gamma={}, h={})",
            table.point.gamma, table.point.h, point.gamma, point.h
        )));
    }
    Ok(())
}

/// Correlators at a single separation r ≥ 1; needs `table.n_max ≥ r + 1`.
pub fn correlator_set(point: &ModelPoint, r: usize, table: &GTable) -> Result<CorrelatorSet> {
    check_point(point, table)?;
    let (x, y) = shifted_pair(table, r)?;
    let mags = Magnetizations::compute(table)?;
    let cond = x.dynamic_range.max(y.dynamic_range).log10();
    Ok(assemble(table, r, x.value(), y.value(), cond, &mags))
}

/// Correlators for r = 1..=r_max from one pass over the shifted determinants.
pub fn correlator_profile(
    table: &GTable,
    r_max: usize,
    mags: &Magnetizations,
) -> Result<Vec<CorrelatorSet>> {
    let dets = shifted_dets(table, r_max)?;
    Ok((1..=r_max)
        .map(|r| assemble(table, r, dets.x[r - 1], dets.y[r - 1], dets.log_condition[r - 1], mags))
        .collect())
}

/// Builds the table and returns correlators for r = 1..=r_max.
pub fn profile_at(point: &ModelPoint, r_max: usize, tol: f64) -> Result<(GTable, Vec<CorrelatorSet>)> {
    let opts = crate::gfunction::GOptions::with_tol(tol);
    let table = GTable::build_with(point, r_max + 1, &opts)?;
    let mags = Magnetizations::compute(&table)?;
    let sets = correlator_profile(&table, r_max, &mags)?;
    Ok((table, sets))
}

/// Plateau of |gˣˣ_r|: mean over [r₀, r₀+W) against mean over [r₀+W, r₀+2W).
///
/// Zero without any work when there is no long-range order (h ≥ 1 or
/// γ = 0). The window start doubles until the drift drops below
/// [`MX2_DRIFT`]; if it never does, the last estimate is returned with
/// `converged = false`.
pub fn mx2_plateau(table: &GTable) -> Result<Mx2Estimate> {
    if !table.point.is_ordered() {
        return Ok(Mx2Estimate { value: 0.0, r0: 0, window: 0, drift: 0.0, converged: true });
    }
    let w = MX2_WINDOW;
    let mut r0 = MX2_R0;
    loop {
        let n = r0 + 2 * w;
        let t = table.extended(n + 1)?;
        let dets = shifted_dets(&t, n)?;
        let mean = |lo: usize| (lo..lo + w).map(|r| dets.x[r - 1].abs() / 4.0).sum::<f64>() / w as f64;
        let (m1, m2) = (mean(r0), mean(r0 + w));
        let drift = if m2 > 0.0 { (m1 - m2).abs() / m2 } else { f64::INFINITY };
        let converged = drift < MX2_DRIFT;
        if converged || 2 * r0 > MX2_R0_MAX {
            return Ok(Mx2Estimate { value: m2.min(0.25), r0, window: w, drift, converged });
        }
        r0 *= 2;
    }
}

pub const CSV_COLUMNS: [&str; 9] = ["gamma", "h", "r", "gxx", "gyy", "gzz", "mz", "mx2", "flag"];

fn flag(cs: &CorrelatorSet, mx2_converged: bool) -> String {
    let mut flags = Vec::new();
    if cs.ill_conditioned {
        flags.push("ill-conditioned");
    }
    if !mx2_converged {
        flags.push("mx2-unconverged");
    }
    if flags.is_empty() {
        "ok".into()
    } else {
        flags.join("|")
    }
}

/// Appends correlator rows to a CSV with [`CSV_COLUMNS`].
pub fn push_rows(csv: &mut Csv, sets: &[CorrelatorSet], mags: &Magnetizations) {
    for cs in sets {
        csv.row(vec![
            num(cs.point.gamma),
            num(cs.point.h),
            cs.r.to_string(),
            num(cs.gxx),
            num(cs.gyy),
            num(cs.gzz),
            num(cs.mz),
            num(cs.mx2_estimate),
            flag(cs, mags.mx2.converged),
        ]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Side;
    use crate::toeplitz::lu_log_det;
    use nalgebra::DMatrix;
    use std::f64::consts::FRAC_PI_4;

    fn dets_with_shift(t: &GTable, r: usize, shift: i64) -> f64 {
        let m = DMatrix::from_fn(r, r, |i, j| t.get(i as i64 - j as i64 + shift));
        lu_log_det(m).value() / 4.0
    }

    #[test]
    fn orientation_calibration() {
        // On the circle the product state has gʸʸ = 0 and gˣˣ = (−1)^r γ/(2(1+γ)).
        for &g in &[0.25, 0.5, 0.75] {
            let p = ModelPoint::near_factorized(g, 0.0, Side::Above).unwrap();
            let t = GTable::build(&p, 6).unwrap();
            let target = g / (2.0 * (1.0 + g));
            for r in 1..=5 {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                let ours_x = dets_with_shift(&t, r, ORIENTATION);
                let ours_y = dets_with_shift(&t, r, -ORIENTATION);
                assert!((ours_x - sign * target).abs() < 1e-11, "g={g} r={r}: {ours_x}");
                assert!(ours_y.abs() < 1e-11, "g={g} r={r}: {ours_y}");
                // The flipped orientation swaps the roles and fails the check.
                let flipped_y = dets_with_shift(&t, r, ORIENTATION);
                assert!(flipped_y.abs() > 0.1 * target);
            }
        }
    }

    #[test]
    fn product_state_values() {
        let p = ModelPoint::near_factorized(0.5, 0.0, Side::Above).unwrap();
        let t = GTable::build(&p, 4).unwrap();
        let cs = correlator_set(&p, 3, &t).unwrap();
        let a = p.alpha;
        assert!((cs.gzz - 1.0 / 12.0).abs() < 1e-11);
        assert!(cs.gyy.abs() < 1e-11);
        assert!((cs.gxx + 1.0 / 6.0).abs() < 1e-11);
        assert!((cs.mz - a / 2.0).abs() < 1e-12);
        assert!((cs.mx2_estimate - 1.0 / 6.0).abs() < 1e-10);
    }

    #[test]
    fn xx_magnetization_at_quarter_filling_angle() {
        let p = ModelPoint::new(0.0, FRAC_PI_4.cos()).unwrap();
        let t = GTable::build(&p, 3).unwrap();
        let cs = correlator_set(&p, 2, &t).unwrap();
        assert!((cs.mz - 0.25).abs() < 1e-15);
        assert_eq!(cs.gxx, cs.gyy);
        assert_eq!(cs.mx2_estimate, 0.0);
    }

    #[test]
    fn ising_small_field_nearest_neighbour() {
        let p = ModelPoint::new(1.0, 0.1).unwrap();
        let t = GTable::build(&p, 2).unwrap();
        let cs = correlator_set(&p, 1, &t).unwrap();
        assert!((cs.gxx.abs() - (0.25 - 0.01 / 16.0)).abs() < 1e-5);
        assert!(cs.gxx < 0.0);
    }

    #[test]
    fn profile_matches_single_separation() {
        let p = ModelPoint::new(0.3, 1.05).unwrap();
        let t = GTable::build(&p, 31).unwrap();
        let mags = Magnetizations::compute(&t).unwrap();
        let prof = correlator_profile(&t, 30, &mags).unwrap();
        for r in [1, 7, 30] {
            let one = correlator_set(&p, r, &t).unwrap();
            let a = &prof[r - 1];
            assert!((a.gxx - one.gxx).abs() < 1e-12);
            assert!((a.gyy - one.gyy).abs() < 1e-12);
            assert_eq!(a.gzz, one.gzz);
        }
    }

    #[test]
    fn table_depth_and_point_checked() {
        let p = ModelPoint::new(0.5, 1.2).unwrap();
        let t = GTable::build(&p, 3).unwrap();
        assert!(matches!(correlator_set(&p, 3, &t), Err(Error::Precondition(_))));
        let q = ModelPoint::new(0.5, 1.3).unwrap();
        assert!(matches!(correlator_set(&q, 1, &t), Err(Error::Precondition(_))));
    }

    #[test]
    fn csv_rows() {
        let (t, sets) = profile_at(&ModelPoint::new(0.5, 1.2).unwrap(), 3, 1e-12).unwrap();
        let mags = Magnetizations::compute(&t).unwrap();
        let mut csv = Csv::new(&CSV_COLUMNS);
        push_rows(&mut csv, &sets, &mags);
        let text = csv.render();
        assert!(text.contains("gamma,h,r,gxx,gyy,gzz,mz,mx2,flag\n"));
        assert_eq!(text.lines().filter(|l| l.ends_with(",ok")).count(), 3);
    }
}
