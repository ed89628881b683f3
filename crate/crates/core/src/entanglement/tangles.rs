//! One-tangle, two-tangle, residual tangle and entanglement ratio.

use super::{ConcurrenceProfile, RangeOutcome};
use crate::error::{Error, Result};
use crate::model::ModelPoint;
use crate::report::num;
use serde::Serialize;

/// Points used to estimate the geometric decay of the tail.
const TAIL_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TangleStatus {
    /// The range closed inside the profile, so the sum is complete.
    Complete,
    /// The tail beyond the profile was added as a geometric series.
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangleReport {
    pub point: ModelPoint,
    pub tau1: f64,
    pub tau2: f64,
    /// τ₁ − τ₂.
    pub residual: f64,
    /// τ₂/τ₁, `None` when τ₁ vanishes.
    pub ratio: Option<f64>,
    pub truncation_r: usize,
    pub truncation_error_bound: f64,
    pub status: TangleStatus,
    pub range: RangeOutcome,
}

/// Tangles from a concurrence profile and the magnetizations it carries.
///
/// τ₁ = 1 − 4(M_x² + M_z²) = 4[m(1 − m) − M_x²] with m = 1/2 − M_z, and
/// τ₂ = 2 Σ_r C_r².
pub fn tangles(profile: &ConcurrenceProfile) -> Result<TangleReport> {
    let m = profile.mags.mz_deficit;
    let tau1 = 4.0 * (m * (1.0 - m) - profile.mags.mx2.value);
    let partial: f64 = 2.0 * profile.entries.iter().map(|e| e.c * e.c).sum::<f64>();
    let n = profile.entries.len();
    let (tail, bound, status, truncation_r) = match profile.range {
        RangeOutcome::Finite(r) => (0.0, 0.0, TangleStatus::Complete, r),
        RangeOutcome::Infinite => {
            if n < TAIL_POINTS {
                return Err(Error::Undetermined(format!("profile of {n} points too short for a tail")));
            }
            let last = profile.entries[n - 1].c;
            let first = profile.entries[n - TAIL_POINTS].c;
            let q = (last / first).powf(1.0 / (TAIL_POINTS - 1) as f64);
            if !(q < 1.0) || !(first > 0.0) {
                return Err(Error::Undetermined(format!(
                    "concurrence tail not decaying at r = {n} (ratio {q:.4}) for gamma={}, h={}",
                    profile.point.gamma, profile.point.h
                )));
            }
            let q2 = q * q;
            let tail = 2.0 * last * last * q2 / (1.0 - q2);
            (tail, tail, TangleStatus::Extrapolated, n)
        }
        RangeOutcome::Undetermined => {
            return Err(Error::Undetermined(format!(
                "range undetermined within r = {n} for gamma={}, h={}",
                profile.point.gamma, profile.point.h
            )))
        }
    };
    let tau2 = partial + tail;
    Ok(TangleReport {
        point: profile.point,
        tau1,
        tau2,
        residual: tau1 - tau2,
        ratio: (tau1 > 0.0).then(|| tau2 / tau1),
        truncation_r,
        truncation_error_bound: bound,
        status,
        range: profile.range,
    })
}

impl TangleReport {
    /// Report row: gamma, h, tau1, tau2, residual, ratio, R, then the given ξ and fit residual.
    pub fn row(&self, xi: Option<f64>, fit_residual: Option<f64>) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "nan".into());
        vec![
            num(self.point.gamma),
            num(self.point.h),
            num(self.tau1),
            num(self.tau2),
            num(self.residual),
            opt(self.ratio),
            self.range.label(),
            opt(xi),
            opt(fit_residual),
        ]
    }
}

pub const REPORT_COLUMNS: [&str; 9] =
    ["gamma", "h", "tau1", "tau2", "residual", "ratio", "R", "xi", "fit_residual"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entanglement::RangeConfig;
    use crate::model::Side;

    #[test]
    fn factorized_point_has_zero_tangles() {
        let p = ModelPoint::near_factorized(0.5, 0.0, Side::Above).unwrap();
        let prof = ConcurrenceProfile::compute(&p, 8, &RangeConfig::default()).unwrap();
        let t = tangles(&prof).unwrap();
        assert!(t.tau1.abs() < 1e-12, "tau1 = {}", t.tau1);
        assert!(t.tau2 < 1e-18);
    }

    #[test]
    fn ratio_near_factorization() {
        let p = ModelPoint::near_factorized(0.5, 1e-3, Side::Above).unwrap();
        let prof = ConcurrenceProfile::grow(&p, &RangeConfig::default()).unwrap();
        let t = tangles(&prof).unwrap();
        assert_eq!(t.status, TangleStatus::Complete);
        assert!(t.tau2 <= t.tau1);
        let limit = 1.5f64.powi(2) / 3.5;
        assert!((t.ratio.unwrap() - limit).abs() < 0.05 * limit, "{:?}", t.ratio);
    }

    #[test]
    fn saturated_state() {
        let p = ModelPoint::new(0.0, 1.5).unwrap();
        let prof = ConcurrenceProfile::compute(&p, 4, &RangeConfig::default()).unwrap();
        let t = tangles(&prof).unwrap();
        assert_eq!(t.tau1, 0.0);
        assert_eq!(t.tau2, 0.0);
        assert_eq!(t.ratio, None);
    }
}
