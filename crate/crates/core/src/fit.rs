//! Least-squares fits used by the range, entanglement-length and
//! residual-order analyses.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    pub r2: f64,
    pub n: usize,
}

/// `n` points spaced evenly in ln x from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Ordinary least-squares line through (x, y).
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LineFit { slope, intercept, rms: (ss_res / nf).sqrt(), r2, n })
}

/// Fits y = c·x^p through ln y = ln c + p ln x; returns the line in log space.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Weighted linear least squares: minimizes Σ wᵢ (yᵢ − Σ_k c_k bᵢₖ)².
///
/// Returns the coefficients and the weighted residual sum of squares.
pub fn linear_lsq(basis: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (n, k) = basis.shape();
    if y.len() != n || w.len() != n || n < k {
        return Err(Error::Fit(format!("{n} points for {k} coefficients")));
    }
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let a = DMatrix::from_fn(n, k, |i, j| basis[(i, j)] * sw[i]);
    let b = DVector::from_fn(n, |i, _| y[i] * sw[i]);
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).map_err(|e| Error::Fit(e.to_string()))?;
    let res = (&a * &c - &b).norm_squared();
    Ok((c.iter().copied().collect(), res))
}

/// Result of a fit that is linear in its coefficients for fixed θ.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableFit {
    pub theta: f64,
    pub coefficients: Vec<f64>,
    /// Weighted residual sum of squares at the optimum.
    pub residual: f64,
}

/// Minimizes the weighted residual over θ ∈ [lo, hi], solving for the linear
/// coefficients at each θ. A grid scan brackets the minimum, then golden
/// section refines it.
pub fn separable_fit<B>(y: &[f64], w: &[f64], lo: f64, hi: f64, basis: B) -> Result<SeparableFit>
where
    B: Fn(f64) -> DMatrix<f64>,
{
    if !(lo < hi) {
        return Err(Error::Fit(format!("empty parameter interval [{lo}, {hi}]")));
    }
    let cost = |t: f64| linear_lsq(&basis(t), y, w).map(|r| r.1).unwrap_or(f64::INFINITY);
    const GRID: usize = 200;
    let grid: Vec<f64> = (0..=GRID).map(|i| lo + (hi - lo) * i as f64 / GRID as f64).collect();
    let costs: Vec<f64> = grid.iter().map(|&t| cost(t)).collect();
    let best = (0..=GRID).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).unwrap();
    if !costs[best].is_finite() {
        return Err(Error::Fit("no finite residual over the parameter interval".into()));
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(GRID)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    let mut theta = 0.5 * (a + b);
    if costs[best] < cost(theta) {
        theta = grid[best];
    }
    let (coefficients, residual) = linear_lsq(&basis(theta), y, w)?;
    Ok(SeparableFit { theta, coefficients, residual })
}

/// Fits y = c0 + c1 x^(−ν) with ν searched in [nu_lo, nu_hi]; returns (c0, c1, ν).
pub fn fit_inverse_power(x: &[f64], y: &[f64], nu_lo: f64, nu_hi: f64) -> Result<(f64, f64, f64, f64)> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", x.len())));
    }
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("abscissae must be positive".into()));
    }
    let w = vec![1.0; y.len()];
    let fit = separable_fit(y, &w, nu_lo, nu_hi, |nu| {
        DMatrix::from_fn(x.len(), 2, |i, j| if j == 0 { 1.0 } else { x[i].powf(-nu) })
    })?;
    Ok((fit.coefficients[0], fit.coefficients[1], fit.theta, fit.residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 3.0).abs() < 1e-14);
        assert!(f.rms < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[2.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn power_law_exponent() {
        let x = [1e-6, 1e-5, 1e-4, 1e-3];
        let y: Vec<f64> = x.iter().map(|v: &f64| 1.2 * v.powf(-0.5)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.intercept.exp() - 1.2).abs() < 1e-10);
    }

    #[test]
    fn recovers_inverse_power() {
        let x: Vec<f64> = (1..=12).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.055 + 0.69 * v.powf(-0.5)).collect();
        let (c0, c1, nu, _) = fit_inverse_power(&x, &y, 0.1, 1.5).unwrap();
        assert!((nu - 0.5).abs() < 1e-6, "nu = {nu}");
        assert!((c0 - 0.055).abs() < 1e-5);
        assert!((c1 - 0.69).abs() < 1e-5);
    }
}
