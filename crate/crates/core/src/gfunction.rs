//! The G-function whose values fill every Toeplitz matrix of the chain.
//!
//! G(r) = (1/π) ∫₀^π [(h − cos φ) cos rφ + γ sin φ sin rφ] / λ(φ) dφ,
//! λ(φ) = √((h − cos φ)² + γ² sin² φ).
//!
//! Two evaluation routes are provided. [`g_quadrature`] integrates the
//! integrand as written. [`g_split`] subtracts the γ = 0 integrand
//! sgn(h − cos φ) cos rφ, whose integral is known in closed form, and
//! integrates the remainder
//!
//!   −sgn(d) γ² sin²φ / (λ (λ + |d|)) cos rφ + γ sin φ sin rφ / λ,   d = h − cos φ,
//!
//! which is free of the cancellation that ruins the direct route when γ is
//! tiny or h ≥ 1. Tables are built from the split route; the direct route is
//! kept as an independent check.

use crate::error::{Error, Result};
use crate::model::ModelPoint;
use crate::quadrature::{integrate, QuadConfig};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Default absolute quadrature tolerance for G values.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Above this |r| the initial partition resolves every half oscillation.
const OSCILLATORY_R: i64 = 50;

#[derive(Debug, Clone, Copy)]
pub struct GOptions {
    pub tol: f64,
    /// Multiplies the number of initial panels; 1 is the normal resolution.
    pub resolution: usize,
    pub max_subdivisions: usize,
}

impl Default for GOptions {
    fn default() -> Self {
        GOptions { tol: DEFAULT_TOL, resolution: 1, max_subdivisions: 4000 }
    }
}

impl GOptions {
    pub fn with_tol(tol: f64) -> Self {
        GOptions { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    pub value: f64,
    pub err: f64,
}

/// G(r) at γ = 0 in closed form.
///
/// For h < 1 with Fermi angle φ_F = arccos h: G(0) = 1 − 2φ_F/π and
/// G(r) = −2 sin(rφ_F)/(πr). For h ≥ 1 the state is saturated: G(0) = 1, G(r ≠ 0) = 0.
pub fn g_xx_closed_form(h: f64, r: i64) -> Result<f64> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("field h = {h} must be finite and >= 0")));
    }
    if h >= 1.0 {
        return Ok(if r == 0 { 1.0 } else { 0.0 });
    }
    let phi_f = h.acos();
    Ok(if r == 0 {
        1.0 - 2.0 * phi_f / PI
    } else {
        -2.0 * (r as f64 * phi_f).sin() / (PI * r as f64)
    })
}

/// 1 − G(0) at γ = 0, without cancellation near saturation.
fn g0_complement_xx(h: f64) -> f64 {
    if h >= 1.0 {
        0.0
    } else {
        2.0 * h.acos() / PI
    }
}

/// h − cos φ written as (h − 1) + 2 sin²(φ/2), exact near φ = 0 when h ≈ 1.
fn field_gap(h: f64, phi: f64) -> f64 {
    let s = (0.5 * phi).sin();
    (h - 1.0) + 2.0 * s * s
}

fn breakpoints(point: &ModelPoint, r: i64, resolution: usize) -> Vec<f64> {
    let mut base = vec![0.0];
    if point.h < 1.0 {
        base.push(point.h.acos());
    }
    base.push(PI);
    let half_period = if r.abs() > OSCILLATORY_R { PI / r.abs() as f64 } else { PI };
    let mut breaks = vec![0.0];
    for w in base.windows(2) {
        let len = w[1] - w[0];
        let pieces = ((len / half_period).ceil() as usize).max(1) * resolution.max(1);
        for k in 1..=pieces {
            breaks.push(if k == pieces { w[1] } else { w[0] + len * k as f64 / pieces as f64 });
        }
    }
    breaks
}

fn run(point: &ModelPoint, r: i64, opts: &GOptions, f: impl Fn(f64) -> f64) -> Result<GValue> {
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance {} must be positive", opts.tol)));
    }
    let cfg = QuadConfig {
        // The integral carries a 1/π prefactor.
        abs_tol: opts.tol * PI,
        rel_tol: 0.0,
        max_subdivisions: opts.max_subdivisions,
    };
    let breaks = breakpoints(point, r, opts.resolution);
    match integrate(f, &breaks, &cfg) {
        Ok(q) => Ok(GValue { value: q.value / PI, err: q.abs_err / PI }),
        Err(Error::Quadrature { value, err }) => {
            Err(Error::Quadrature { value: value / PI, err: err / PI })
        }
        Err(e) => Err(e),
    }
}

/// G(r, h, γ) by adaptive quadrature of the integrand as written.
pub fn g_quadrature(point: &ModelPoint, r: i64, tol: f64) -> Result<GValue> {
    g_quadrature_with(point, r, &GOptions::with_tol(tol))
}

pub fn g_quadrature_with(point: &ModelPoint, r: i64, opts: &GOptions) -> Result<GValue> {
    let (h, gamma, rf) = (point.h, point.gamma, r as f64);
    run(point, r, opts, move |phi: f64| {
        let s = phi.sin();
        let d = field_gap(h, phi);
        let lambda = d.hypot(gamma * s);
        if lambda == 0.0 {
            return 0.0;
        }
        (d * (rf * phi).cos() + gamma * s * (rf * phi).sin()) / lambda
    })
}

/// G(r) split into the γ = 0 closed form plus a quadrature of the remainder.
pub fn g_split(point: &ModelPoint, r: i64, opts: &GOptions) -> Result<GValue> {
    let base = g_xx_closed_form(point.h, r)?;
    let rem = remainder(point, r, opts)?;
    Ok(GValue { value: base + rem.value, err: rem.err })
}

/// 1 − G(0) evaluated without subtracting nearly equal numbers.
pub fn g0_complement(point: &ModelPoint, opts: &GOptions) -> Result<GValue> {
    let rem = remainder(point, 0, opts)?;
    Ok(GValue { value: g0_complement_xx(point.h) - rem.value, err: rem.err })
}

fn remainder(point: &ModelPoint, r: i64, opts: &GOptions) -> Result<GValue> {
    if point.gamma == 0.0 {
        return Ok(GValue { value: 0.0, err: 0.0 });
    }
    let (h, gamma, rf) = (point.h, point.gamma, r as f64);
    run(point, r, opts, move |phi: f64| {
        let s = phi.sin();
        let d = field_gap(h, phi);
        let gs = gamma * s;
        let lambda = d.hypot(gs);
        if lambda == 0.0 {
            return 0.0;
        }
        let cos_part = -d.signum() * gs * gs / (lambda * (lambda + d.abs()));
        cos_part * (rf * phi).cos() + gs * (rf * phi).sin() / lambda
    })
}

/// Coefficients of G(r) in powers of (h − h_f): `[c0, c1]` (or `[c0]` for order 0).
///
/// G(r>0) = α^r/(2γ)·δ, G(0) = α + δ/(2γ),
/// G(−m) = −(2γ/(1+γ)) α^(m−1) + (1 + 2mγ − (2m²+1)γ²)/(2γ(1+γ)²) α^(m−2) δ.
pub fn g_expansion(gamma: f64, r: i64, order: usize) -> Result<Vec<f64>> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Domain(format!(
            "expansion of G needs 0 < gamma <= 1, got {gamma}"
        )));
    }
    if order > 1 {
        return Err(Error::Domain(format!("expansion known to first order only, asked {order}")));
    }
    let alpha = ((1.0 - gamma) / (1.0 + gamma)).sqrt();
    let (c0, c1) = match r {
        0 => (alpha, 1.0 / (2.0 * gamma)),
        r if r > 0 => (0.0, alpha.powi(r as i32) / (2.0 * gamma)),
        r => {
            let m = (-r) as f64;
            let c0 = -2.0 * gamma / (1.0 + gamma) * alpha.powi(-r as i32 - 1);
            let num = 1.0 + 2.0 * m * gamma - (2.0 * m * m + 1.0) * gamma * gamma;
            let den = 2.0 * gamma * (1.0 + gamma).powi(2);
            let c1 = if r == -1 {
                // num = (1−γ)(1+3γ) and (1−γ)/α = √(1−γ²), finite at γ = 1.
                (1.0 + 3.0 * gamma) * ((1.0 - gamma) * (1.0 + gamma)).sqrt() / den
            } else {
                num / den * alpha.powi(-r as i32 - 2)
            };
            (c0, c1)
        }
    };
    Ok(if order == 0 { vec![c0] } else { vec![c0, c1] })
}

/// G(n) for n ∈ [−n_max, n_max] at one model point.
#[derive(Debug, Clone)]
pub struct GTable {
    pub point: ModelPoint,
    pub n_max: usize,
    values: Vec<f64>,
    errors: Vec<f64>,
    /// 1 − G(0), stored separately so that saturated and near-saturated
    /// points keep their leading digits.
    pub g0_complement: f64,
    /// Quadrature settings the table was built with.
    pub opts: GOptions,
}

impl GTable {
    pub fn build(point: &ModelPoint, n_max: usize) -> Result<Self> {
        Self::build_with(point, n_max, &GOptions::default())
    }

    pub fn build_with(point: &ModelPoint, n_max: usize, opts: &GOptions) -> Result<Self> {
        let n = n_max as i64;
        let entries: Vec<GValue> = (-n..=n)
            .into_par_iter()
            .map(|k| g_split(point, k, opts))
            .collect::<Result<_>>()?;
        let g0c = g0_complement(point, opts)?;
        Ok(GTable {
            point: *point,
            n_max,
            values: entries.iter().map(|g| g.value).collect(),
            errors: entries.iter().map(|g| g.err).collect(),
            g0_complement: g0c.value,
            opts: *opts,
        })
    }

    /// Assembles a table from explicit values indexed −n_max..=n_max.
    pub fn from_values(point: &ModelPoint, values: Vec<f64>, g0_complement: f64) -> Result<Self> {
        if values.len() % 2 == 0 {
            return Err(Error::Precondition("table needs an odd number of entries".into()));
        }
        let n_max = values.len() / 2;
        let errors = vec![0.0; values.len()];
        Ok(GTable { point: *point, n_max, values, errors, g0_complement, opts: GOptions::default() })
    }

    /// The same point tabulated to at least `n_max`, reusing this table when deep enough.
    pub fn extended(&self, n_max: usize) -> Result<GTable> {
        if n_max <= self.n_max {
            return Ok(self.clone());
        }
        Self::build_with(&self.point, n_max, &self.opts)
    }

    pub fn get(&self, n: i64) -> f64 {
        self.values[(n + self.n_max as i64) as usize]
    }

    pub fn error(&self, n: i64) -> f64 {
        self.errors[(n + self.n_max as i64) as usize]
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest |G(n)| over n ≠ 0: the natural scale of off-diagonal entries.
    pub fn offdiag_scale(&self) -> f64 {
        (1..=self.n_max as i64)
            .flat_map(|n| [self.get(n).abs(), self.get(-n).abs()])
            .fold(0.0, f64::max)
    }

    /// Debug dump with columns n, G, err.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# G table gamma={:.12e} h={:.12e}", self.point.gamma, self.point.h);
        out.push_str("n,G,err\n");
        for (i, (v, e)) in self.values.iter().zip(&self.errors).enumerate() {
            let n = i as i64 - self.n_max as i64;
            let _ = writeln!(out, "{n},{v:.17e},{e:.3e}");
        }
        out
    }
}
