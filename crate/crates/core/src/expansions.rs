//! Closed-form near-factorization series, evaluatable as oracles.
//!
//! Every oracle takes the distance ε from the factorizing field together with
//! the side of the approach, so that the ±(h − h_f) symmetry claims can be
//! tested directly. Oracles refuse parameters outside their domain.

use crate::entanglement::{epsilon0, range_asymptote, second_order_cr, xx_range, xx_range_cubic};
use crate::error::{Error, Result};
use crate::fit::fit_power_law;
use crate::model::Side;
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SeriesId {
    Gxx,
    Gyy,
    Gzz,
    Mz,
    CrFirst,
    CrSecond,
    Epsilon0,
    RAsymptotics,
    XxGxx,
    XxGzz,
    XxMz,
    XxCr,
    XxRExponent,
    OneTangle,
    ResidualTangle,
    Ratio,
    XxOneTangle,
    IsingC1C2,
    IsingGxx,
    IsingTau,
    IsingResidual,
}

/// Parameter constraint an oracle is valid under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Domain {
    /// 0 < γ ≤ 1.
    Anisotropic,
    /// 0 < γ < 1.
    AnisotropicOpen,
    /// γ = 0, h = 1 − ε ≤ 1.
    Isotropic,
    /// γ = 1, h = ε.
    Ising,
}

impl SeriesId {
    pub const ALL: [SeriesId; 21] = [
        SeriesId::Gxx,
        SeriesId::Gyy,
        SeriesId::Gzz,
        SeriesId::Mz,
        SeriesId::CrFirst,
        SeriesId::CrSecond,
        SeriesId::Epsilon0,
        SeriesId::RAsymptotics,
        SeriesId::XxGxx,
        SeriesId::XxGzz,
        SeriesId::XxMz,
        SeriesId::XxCr,
        SeriesId::XxRExponent,
        SeriesId::OneTangle,
        SeriesId::ResidualTangle,
        SeriesId::Ratio,
        SeriesId::XxOneTangle,
        SeriesId::IsingC1C2,
        SeriesId::IsingGxx,
        SeriesId::IsingTau,
        SeriesId::IsingResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SeriesId::Gxx => "gxx",
            SeriesId::Gyy => "gyy",
            SeriesId::Gzz => "gzz",
            SeriesId::Mz => "mz",
            SeriesId::CrFirst => "cr-first",
            SeriesId::CrSecond => "cr-second",
            SeriesId::Epsilon0 => "epsilon0",
            SeriesId::RAsymptotics => "range-asymptote",
            SeriesId::XxGxx => "xx-gxx",
            SeriesId::XxGzz => "xx-gzz",
            SeriesId::XxMz => "xx-mz",
            SeriesId::XxCr => "xx-cr",
            SeriesId::XxRExponent => "xx-range-exponent",
            SeriesId::OneTangle => "tau1",
            SeriesId::ResidualTangle => "residual",
            SeriesId::Ratio => "ratio",
            SeriesId::XxOneTangle => "xx-tau1",
            SeriesId::IsingC1C2 => "ising-c1c2",
            SeriesId::IsingGxx => "ising-gxx",
            SeriesId::IsingTau => "ising-tau1",
            SeriesId::IsingResidual => "ising-residual",
        }
    }

    pub fn from_name(name: &str) -> Option<SeriesId> {
        SeriesId::ALL.into_iter().find(|id| id.name() == name)
    }

    pub fn domain(self) -> Domain {
        use SeriesId::*;
        match self {
            Gxx | Gyy | Gzz | Mz | CrFirst | CrSecond | Epsilon0 | Ratio => Domain::Anisotropic,
            RAsymptotics | OneTangle | ResidualTangle => Domain::AnisotropicOpen,
            XxGxx | XxGzz | XxMz | XxCr | XxRExponent | XxOneTangle => Domain::Isotropic,
            IsingC1C2 | IsingGxx | IsingTau | IsingResidual => Domain::Ising,
        }
    }

    /// Highest power of ε kept in the series.
    pub fn order(self) -> f64 {
        use SeriesId::*;
        match self {
            Gxx | Gyy | Gzz | Mz | CrFirst => 1.0,
            CrSecond | OneTangle | ResidualTangle | XxGxx | XxGzz | XxCr | IsingGxx => 2.0,
            XxOneTangle => 1.0,
            IsingC1C2 => 4.0,
            IsingTau => 4.0,
            IsingResidual => 6.0,
            Ratio => 0.0,
            Epsilon0 | RAsymptotics | XxMz | XxRExponent => 0.0,
        }
    }

    /// Exponent of the leading neglected term, where the series claims one.
    pub fn residual_exponent(self) -> Option<f64> {
        use SeriesId::*;
        match self {
            Gxx | Gyy | Gzz | Mz | CrFirst => Some(2.0),
            XxGxx | XxGzz | XxCr => Some(2.5),
            OneTangle | ResidualTangle => Some(3.0),
            XxOneTangle => Some(1.5),
            Ratio => Some(1.0),
            _ => None,
        }
    }
}

/// Parameters of an oracle evaluation: h − h_f = side·ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesParams {
    pub gamma: f64,
    pub eps: f64,
    pub side: Side,
    pub r: u32,
}

impl SeriesParams {
    pub fn new(gamma: f64, eps: f64, side: Side, r: u32) -> Self {
        SeriesParams { gamma, eps, side, r }
    }

    /// Signed distance h − h_f.
    pub fn delta(&self) -> f64 {
        self.side.sign() * self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        SeriesParams { eps, ..*self }
    }
}

fn check(id: SeriesId, p: &SeriesParams) -> Result<()> {
    let fail = |what: &str| Err(Error::Domain(format!("{}: {what}", id.name())));
    if !(p.eps >= 0.0) || !p.eps.is_finite() {
        return fail(&format!("needs finite eps >= 0, got {}", p.eps));
    }
    match id.domain() {
        Domain::Anisotropic if !(p.gamma > 0.0 && p.gamma <= 1.0) => {
            return fail(&format!("needs 0 < gamma <= 1, got {}", p.gamma))
        }
        Domain::AnisotropicOpen if !(p.gamma > 0.0 && p.gamma < 1.0) => {
            return fail(&format!("needs 0 < gamma < 1, got {}", p.gamma))
        }
        Domain::Isotropic => {
            if p.gamma != 0.0 {
                return fail(&format!("needs gamma = 0, got {}", p.gamma));
            }
            if p.side == Side::Above && p.eps > 0.0 {
                return fail("defined for h <= 1 only");
            }
            if p.eps > 1.0 {
                return fail(&format!("needs eps <= 1, got {}", p.eps));
            }
        }
        Domain::Ising => {
            if p.gamma != 1.0 {
                return fail(&format!("needs gamma = 1, got {}", p.gamma));
            }
            if p.side == Side::Below && p.eps > 0.0 {
                return fail("h_f = 0 leaves no field below it");
            }
        }
        _ => {}
    }
    let needs_r = matches!(
        id,
        SeriesId::Gxx
            | SeriesId::Gyy
            | SeriesId::Gzz
            | SeriesId::CrFirst
            | SeriesId::CrSecond
            | SeriesId::Epsilon0
            | SeriesId::XxGxx
            | SeriesId::XxGzz
            | SeriesId::XxCr
            | SeriesId::IsingC1C2
            | SeriesId::IsingGxx
    );
    if needs_r && p.r == 0 {
        return fail("needs r >= 1");
    }
    let needs_eps = matches!(id, SeriesId::RAsymptotics | SeriesId::XxRExponent);
    if needs_eps && !(p.eps > 0.0 && p.eps < 1.0) {
        return fail(&format!("needs 0 < eps < 1, got {}", p.eps));
    }
    Ok(())
}

fn alpha(gamma: f64) -> f64 {
    ((1.0 - gamma) / (1.0 + gamma)).sqrt()
}

fn stagger(r: u32) -> f64 {
    if r % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Evaluates the truncated series `id` at `p`.
pub fn evaluate(id: SeriesId, p: &SeriesParams) -> Result<f64> {
    check(id, p)?;
    let (g, e, d, r) = (p.gamma, p.eps, p.delta(), p.r);
    let a = alpha(g);
    let ri = r as i32;
    Ok(match id {
        SeriesId::Gxx => {
            stagger(r) / 4.0 * (2.0 * g / (1.0 + g) + (a.powi(2 * ri + 1) - 2.0 * a) / (2.0 * g) * d)
        }
        SeriesId::Gyy => -stagger(r) / 4.0 * a.powi(2 * ri - 1) / (2.0 * g) * d,
        SeriesId::Gzz => 0.25 * (a * a + (a / g + a.powi(2 * ri - 1) / (g + 1.0)) * d),
        SeriesId::Mz => a / 2.0 + d / (4.0 * g),
        SeriesId::CrFirst => a.powi(2 * ri - 1) / (2.0 * g) * e,
        SeriesId::CrSecond => second_order_cr(g, e, r)?,
        SeriesId::Epsilon0 => epsilon0(g, r)?,
        SeriesId::RAsymptotics => range_asymptote(g, e)?,
        SeriesId::XxGxx => {
            let rf = r as f64;
            stagger(r)
                * (e.sqrt() / (PI * SQRT_2) - (4.0 * rf * rf - 1.0) / (12.0 * PI * SQRT_2) * e.powf(1.5)
                    + 2.0 * rf * (rf * rf - 1.0) / (9.0 * PI * PI) * e * e)
        }
        SeriesId::XxGzz => {
            let rf = r as f64;
            0.25 - SQRT_2 / PI * e.sqrt() - e.powf(1.5) / (6.0 * PI * SQRT_2)
                + 4.0 * rf * rf / (3.0 * PI * PI) * e * e
        }
        SeriesId::XxMz => 0.5 - (1.0 - e).acos() / PI,
        SeriesId::XxCr => {
            let k = xx_range_cubic(e);
            let rf = r as f64;
            k[0] + rf * (k[1] + rf * (k[2] + rf * k[3]))
        }
        SeriesId::XxRExponent => {
            // Local slope d ln R / d ln ε of the cubic-root range.
            let step = 1.01f64;
            let (lo, hi) = (xx_range(e / step)?, xx_range((e * step).min(0.999_999))?);
            (hi / lo).ln() / ((e * step).min(0.999_999) / (e / step)).ln()
        }
        SeriesId::OneTangle => (1.0 - g) * (3.0 + g) / (8.0 * g.powi(3) * (1.0 + g)) * e * e,
        SeriesId::ResidualTangle => (1.0 - g).powi(2) * (2.0 + g) / (8.0 * g.powi(3) * (1.0 + g)) * e * e,
        SeriesId::Ratio => (1.0 + g).powi(2) / (3.0 + g),
        SeriesId::XxOneTangle => 4.0 * SQRT_2 / PI * e.sqrt() - 8.0 / (PI * PI) * e,
        SeriesId::IsingC1C2 => match r {
            1 => e * e / 8.0 + 3.0 * e.powi(4) / 128.0,
            2 => e.powi(4) / 128.0,
            _ => 0.0,
        },
        SeriesId::IsingGxx => stagger(r) * (0.25 - e * e / 16.0),
        SeriesId::IsingTau => e.powi(4) / 32.0,
        SeriesId::IsingResidual => e.powi(6) / 64.0,
    })
}

/// First-order coefficient of C_r in ε obtained by pushing the correlator
/// series through the two concurrence channels.
///
/// Above h_f the parallel channel wins and is linear in the correlators;
/// below h_f the antiparallel channel wins and its square root is
/// differentiated at ε = 0.
pub fn crfirst_from_correlators(gamma: f64, r: u32, side: Side) -> Result<f64> {
    let at = |eps: f64| -> Result<[f64; 4]> {
        let p = SeriesParams::new(gamma, eps, side, r);
        Ok([
            evaluate(SeriesId::Gxx, &p)?,
            evaluate(SeriesId::Gyy, &p)?,
            evaluate(SeriesId::Gzz, &p)?,
            evaluate(SeriesId::Mz, &p)?,
        ])
    };
    let c0 = at(0.0)?;
    // The series are linear, so one unit step gives the exact slopes.
    let c1 = at(1.0)?;
    let s: Vec<f64> = (0..4).map(|i| c1[i] - c0[i]).collect();
    let (gxx, gyy, gzz, mz) = (c0[0], c0[1], c0[2], c0[3]);
    let cpp = |sgn: f64| -> f64 { sgn * (s[0] - s[1]) + s[2] };
    let cp = |sgn: f64| -> f64 {
        let u = 0.25 + gzz;
        let root = (u * u - mz * mz).sqrt();
        sgn * (s[0] + s[1]) - (u * s[2] - mz * s[3]) / root
    };
    // |x| is linear once the sign of its zeroth-order value is fixed.
    let linear_pp = cpp((gxx - gyy).signum());
    let linear_p = cp((gxx + gyy).signum());
    Ok(2.0 * linear_pp.max(linear_p).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderStatus {
    Conclusive,
    /// Some residual sits at or below the stated noise floor.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualOrder {
    pub id: SeriesId,
    pub exponent: f64,
    pub expected: Option<f64>,
    pub status: OrderStatus,
    pub eps: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl ResidualOrder {
    pub fn within(&self, tol: f64) -> bool {
        self.status == OrderStatus::Conclusive
            && self.expected.is_some_and(|x| (self.exponent - x).abs() <= tol)
    }
}

/// Fits the log–log slope of |numeric − series| against ε.
///
/// `numeric` supplies full-numerics values at the requested parameters.
/// Residuals at or below `noise_floor` make the result inconclusive rather
/// than failing.
pub fn residual_order<F>(
    id: SeriesId,
    template: &SeriesParams,
    eps_grid: &[f64],
    noise_floor: f64,
    numeric: F,
) -> Result<ResidualOrder>
where
    F: Fn(&SeriesParams) -> Result<f64>,
{
    if eps_grid.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 eps values, got {}", eps_grid.len())));
    }
    let lo = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_grid.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("eps grid [{lo}, {hi}] must span two decades")));
    }
    let mut residuals = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let p = template.with_eps(eps);
        residuals.push((numeric(&p)? - evaluate(id, &p)?).abs());
    }
    let status = if residuals.iter().any(|&x| !(x > noise_floor)) {
        OrderStatus::Inconclusive
    } else {
        OrderStatus::Conclusive
    };
    let exponent = match status {
        OrderStatus::Conclusive => fit_power_law(eps_grid, &residuals)?.slope,
        OrderStatus::Inconclusive => f64::NAN,
    };
    Ok(ResidualOrder {
        id,
        exponent,
        expected: id.residual_exponent(),
        status,
        eps: eps_grid.to_vec(),
        residuals,
    })
}
