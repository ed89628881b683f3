//! Closed-form laws for where the concurrence switches off.

use crate::error::{Error, Result};
use std::f64::consts::PI;

fn check_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!("needs 0 < gamma <= 1, got {gamma}")));
    }
    Ok(((1.0 - gamma) / (1.0 + gamma)).sqrt())
}

/// A² = α²(γ + 3)/(32γ³), the ε² coefficient of the large-r concurrence.
pub fn a_squared(gamma: f64) -> Result<f64> {
    let alpha = check_gamma(gamma)?;
    Ok(alpha * alpha * (gamma + 3.0) / (32.0 * gamma.powi(3)))
}

/// Distance from h_f below which C_r is switched on:
/// ε₀ = α^{2r−1}/(4γA²) = α^{2r−3} · 8γ²/(γ + 3).
///
/// Meant for large r. At γ = 1 the value is 0 for r ≥ 2 and +∞ for r = 1,
/// the γ → 1 limit (the nearest-neighbour concurrence never switches off).
pub fn epsilon0(gamma: f64, r: u32) -> Result<f64> {
    let alpha = check_gamma(gamma)?;
    if r == 0 {
        return Err(Error::Domain("epsilon0 needs r >= 1".into()));
    }
    let pref = 8.0 * gamma * gamma / (gamma + 3.0);
    if r == 1 {
        return Ok(if alpha == 0.0 { f64::INFINITY } else { pref / alpha });
    }
    Ok(alpha.powi(2 * r as i32 - 3) * pref)
}

/// Second-order large-r concurrence 2[α^{2r−1}ε/(4γ) − A²ε²], not clipped at zero.
pub fn second_order_cr(gamma: f64, eps: f64, r: u32) -> Result<f64> {
    let alpha = check_gamma(gamma)?;
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be >= 0")));
    }
    if r == 0 {
        return Err(Error::Domain("second_order_cr needs r >= 1".into()));
    }
    let a2 = a_squared(gamma)?;
    Ok(2.0 * (alpha.powi(2 * r as i32 - 1) * eps / (4.0 * gamma) - a2 * eps * eps))
}

/// Asymptotic range ln ε / ln α² + ln(4αγA²)/ln α², for 0 < γ < 1.
pub fn range_asymptote(gamma: f64, eps: f64) -> Result<f64> {
    let alpha = check_gamma(gamma)?;
    if gamma == 1.0 {
        return Err(Error::Domain("range asymptote needs gamma < 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be > 0")));
    }
    let l = (alpha * alpha).ln();
    Ok(eps.ln() / l + (4.0 * alpha * gamma * a_squared(gamma)?).ln() / l)
}

/// Coefficients [k₀, k₁, k₂, k₃] of the γ = 0 concurrence series regarded
/// as a cubic k₀ + k₁r + k₂r² + k₃r³ in the separation.
pub fn xx_range_cubic(eps: f64) -> [f64; 4] {
    let s = eps.sqrt();
    let e32 = eps * s;
    let e2 = eps * eps;
    let (r2, r3) = (2f64.sqrt(), 3f64.sqrt());
    let pi2 = PI * PI;
    let pi3 = pi2 * PI;
    [
        2.0 * r2 / PI * s + e32 / (3.0 * PI * r2),
        -4.0 / (PI * r3) * eps
            + 8.0 * r3 / (3.0 * pi2 * r2) * e32
            + 2.0 * e2 * (30.0 * r3 - 20.0 * PI - 5.0 * r3 * pi2) / (45.0 * pi3),
        -4.0 / (3.0 * PI * r2) * e32,
        2.0 * e2 * (20.0 * PI + 4.0 * r3 * pi2) / (45.0 * pi3),
    ]
}

/// Smallest positive root in r of the γ = 0 concurrence series.
///
/// The four terms balance at r ~ ε^{−1/2}, so the root is bracketed by a
/// scan in units of ε^{−1/2} and refined by bisection.
pub fn xx_range(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("xx_range needs 0 < eps < 1, got {eps}")));
    }
    let k = xx_range_cubic(eps);
    let f = |r: f64| k[0] + r * (k[1] + r * (k[2] + r * k[3]));
    let unit = eps.powf(-0.5);
    let step = unit / 64.0;
    let mut lo = 0.0;
    let mut flo = f(lo);
    let mut hi = None;
    for i in 1..=64 * 16 {
        let x = step * i as f64;
        let fx = f(x);
        if fx.signum() != flo.signum() {
            hi = Some(x);
            break;
        }
        lo = x;
        flo = fx;
    }
    let Some(mut hi) = hi else {
        return Err(Error::Undetermined(format!("no positive root of the XX series at eps = {eps}")));
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;

    #[test]
    fn epsilon0_example() {
        let v = epsilon0(0.5, 8).unwrap();
        let expect = (1.0f64 / 3.0).powf(6.5) * (2.0 / 3.5);
        assert!((v - expect).abs() / expect < 1e-13);
        assert!((v - 4.5256e-4).abs() < 1e-8);
        assert_eq!(epsilon0(1.0, 3).unwrap(), 0.0);
        assert!(epsilon0(0.0, 3).is_err());
    }

    #[test]
    fn epsilon0_decreases_with_r() {
        let mut prev = f64::INFINITY;
        for r in 1..40 {
            let v = epsilon0(0.5, r).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn second_order_vanishes_at_epsilon0() {
        for &g in &[0.25, 0.5, 0.75] {
            for r in [2, 5, 8] {
                let e0 = epsilon0(g, r).unwrap();
                let v = second_order_cr(g, e0, r).unwrap();
                let scale = second_order_cr(g, e0 / 2.0, r).unwrap();
                assert!(v.abs() <= 1e-12 * scale, "g={g} r={r}: {v}");
            }
        }
    }

    #[test]
    fn second_order_below_first_order() {
        let v = second_order_cr(0.5, 2e-4, 8).unwrap();
        let alpha: f64 = (1.0f64 / 3.0).sqrt();
        assert!(v > 0.0 && v < alpha.powi(15) * 2e-4 / (2.0 * 0.5));
    }

    #[test]
    fn xx_root_matches_companion_eigenvalues() {
        for &eps in &[1e-3, 1e-4, 1e-5, 1e-6] {
            let k = xx_range_cubic(eps);
            // Companion matrix of the monic cubic.
            let (a, b, c) = (k[2] / k[3], k[1] / k[3], k[0] / k[3]);
            let m = Matrix3::new(0.0, 0.0, -c, 1.0, 0.0, -b, 0.0, 1.0, -a);
            let roots = m.complex_eigenvalues();
            let oracle = roots
                .iter()
                .filter(|z| z.im.abs() < 1e-9 * z.re.abs() && z.re > 0.0)
                .map(|z| z.re)
                .fold(f64::INFINITY, f64::min);
            let r = xx_range(eps).unwrap();
            assert!((r - oracle).abs() < 1e-8 * oracle, "eps={eps}: {r} vs {oracle}");
        }
    }

    #[test]
    fn xx_root_scales_as_inverse_sqrt() {
        let r = xx_range(1e-8).unwrap();
        // Rescaled cubic 0.9003 − 0.7351 s − 0.3001 s² + 0.1878 s³ has its first root near s ≈ 1.07.
        let s = r * 1e-4;
        assert!((1.0..1.15).contains(&s), "s = {s}");
        assert!(xx_range(1e-4).unwrap() < xx_range(1e-5).unwrap());
    }
}
