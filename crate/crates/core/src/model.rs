//! Points of the (γ, h) parameter plane and their classification.

use crate::error::{Error, Result};
use serde::Serialize;

/// Tolerance used to decide that a point lies on the factorized circle.
pub const CIRCLE_TOL: f64 = 1e-12;

/// Which side of the factorizing field a point sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Above,
    Below,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Above => 1.0,
            Side::Below => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// γ > 0 inside the factorized circle: the concurrence formula is a lower bound.
    BrokenSymLowerBound,
    Unbroken,
    FactorizedCircle,
    FactorizedLine,
}

/// A point of the Hamiltonian parameter plane, in reduced units (J = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelPoint {
    pub gamma: f64,
    pub h: f64,
    /// α = √((1−γ)/(1+γ)).
    pub alpha: f64,
    /// Factorizing field √(1−γ²).
    pub h_f: f64,
    /// Distance |h − h_f| from the factorizing field.
    pub eps: f64,
    pub regime: Regime,
}

impl ModelPoint {
    pub fn new(gamma: f64, h: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(h >= 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("field h = {h} must be finite and >= 0")));
        }
        let h_f = factorizing_field(gamma);
        Ok(Self::assemble(gamma, h, h_f, (h - h_f).abs()))
    }

    /// The point at distance `eps` above or below the factorizing field.
    ///
    /// The stored `eps` is the requested value rather than |h − h_f| recomputed
    /// from the rounded field.
    pub fn near_factorized(gamma: f64, eps: f64, side: Side) -> Result<Self> {
        check_gamma(gamma)?;
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("distance eps = {eps} must be finite and >= 0")));
        }
        let h_f = factorizing_field(gamma);
        let h = h_f + side.sign() * eps;
        if h < 0.0 {
            return Err(Error::Domain(format!(
                "eps = {eps} below h_f = {h_f} gives a negative field"
            )));
        }
        Ok(Self::assemble(gamma, h, h_f, eps))
    }

    fn assemble(gamma: f64, h: f64, h_f: f64, eps: f64) -> Self {
        let alpha = ((1.0 - gamma) / (1.0 + gamma)).sqrt();
        let regime = classify(gamma, h);
        ModelPoint { gamma, h, alpha, h_f, eps, regime }
    }

    /// Sign of h − h_f, zero on the factorizing field.
    pub fn side(&self) -> Option<Side> {
        if self.h > self.h_f {
            Some(Side::Above)
        } else if self.h < self.h_f {
            Some(Side::Below)
        } else {
            None
        }
    }

    /// Long-range order along x exists (γ > 0, h < 1).
    pub fn is_ordered(&self) -> bool {
        self.gamma > 0.0 && self.h < 1.0
    }

    pub fn is_factorized(&self) -> bool {
        matches!(self.regime, Regime::FactorizedCircle | Regime::FactorizedLine)
    }

    pub fn lower_bound(&self) -> bool {
        self.regime == Regime::BrokenSymLowerBound
    }

    /// Fermi angle arccos(h) for h < 1, zero otherwise.
    pub fn fermi_angle(&self) -> f64 {
        if self.h < 1.0 {
            self.h.acos()
        } else {
            0.0
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("anisotropy gamma = {gamma} outside [0, 1]")));
    }
    Ok(())
}

fn factorizing_field(gamma: f64) -> f64 {
    ((1.0 - gamma) * (1.0 + gamma)).sqrt()
}

fn classify(gamma: f64, h: f64) -> Regime {
    let radius2 = h * h + gamma * gamma;
    if gamma == 0.0 && h >= 1.0 {
        Regime::FactorizedLine
    } else if (radius2 - 1.0).abs() <= CIRCLE_TOL {
        Regime::FactorizedCircle
    } else if gamma == 0.0 || radius2 > 1.0 {
        Regime::Unbroken
    } else {
        Regime::BrokenSymLowerBound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let p = ModelPoint::new(0.5, 0.8).unwrap();
        assert!((p.alpha - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((p.h_f * p.h_f + 0.25 - 1.0).abs() < 1e-15);
        assert!((p.eps - (0.75f64.sqrt() - 0.8)).abs() < 1e-15);
        assert_eq!(p.regime, Regime::BrokenSymLowerBound);
    }

    #[test]
    fn alpha_limits() {
        assert_eq!(ModelPoint::new(1.0, 0.3).unwrap().alpha, 0.0);
        assert_eq!(ModelPoint::new(0.0, 0.3).unwrap().alpha, 1.0);
    }

    #[test]
    fn regimes() {
        assert_eq!(ModelPoint::new(0.0, 1.5).unwrap().regime, Regime::FactorizedLine);
        assert_eq!(ModelPoint::new(0.0, 1.0).unwrap().regime, Regime::FactorizedLine);
        assert_eq!(ModelPoint::new(0.0, 0.5).unwrap().regime, Regime::Unbroken);
        assert_eq!(ModelPoint::new(0.6, 0.8).unwrap().regime, Regime::FactorizedCircle);
        assert_eq!(ModelPoint::new(0.5, 1.2).unwrap().regime, Regime::Unbroken);
        let p = ModelPoint::near_factorized(0.5, 0.0, Side::Above).unwrap();
        assert_eq!(p.regime, Regime::FactorizedCircle);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(ModelPoint::new(1.2, 0.5).is_err());
        assert!(ModelPoint::new(-0.1, 0.5).is_err());
        assert!(ModelPoint::new(0.5, -1.0).is_err());
        assert!(ModelPoint::new(0.5, f64::NAN).is_err());
        assert!(ModelPoint::near_factorized(1.0, 0.1, Side::Below).is_err());
    }

    #[test]
    fn near_factorized_keeps_eps() {
        let p = ModelPoint::near_factorized(0.25, 1e-7, Side::Below).unwrap();
        assert_eq!(p.eps, 1e-7);
        assert_eq!(p.side(), Some(Side::Below));
    }
}
