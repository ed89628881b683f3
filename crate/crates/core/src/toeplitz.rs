//! Toeplitz determinants of G-values.
//!
//! Single determinants go through LU with partial pivoting and are returned
//! as (log|det|, sign). For whole correlation profiles the shifted minors
//! X_r = [G(i−j−1)] and Y_r = [G(i−j+1)], r = 1..n, are obtained from one
//! unpivoted LU of M_{n+1} = [G(i−j)]: X_r is M_{r+1} without its last row
//! and first column, Y_r is M_{r+1} without its first row and last column,
//! so by Cramer's rule
//!
//!   det X_r = (−1)^r det M_{r+1} (U⁻¹)_{1,r+1},
//!   det Y_r = (−1)^r det M_r (L⁻¹)_{r+1,1}.
//!
//! The first row of U⁻¹ and the first column of L⁻¹ are nested in r, so the
//! whole sequence costs one factorization. The route is only trusted after
//! spot checks against pivoted LU; otherwise every minor is factorized
//! separately.

use crate::error::{Error, Result};
use crate::gfunction::GTable;
use nalgebra::DMatrix;

/// Ratio max|u_ii| / min|u_ii| above which a determinant is flagged.
pub const HEALTH_RANGE: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// ln|det|, −∞ for a singular matrix.
    pub log_abs: f64,
    /// −1, 0 or +1.
    pub sign: i8,
    /// Dynamic range of the triangular factor's diagonal.
    pub dynamic_range: f64,
}

impl LogDet {
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_abs.exp()
        }
    }

    pub fn is_healthy(&self) -> bool {
        self.dynamic_range <= HEALTH_RANGE
    }
}

/// Determinant of a square matrix by LU with partial pivoting.
pub fn lu_log_det(a: DMatrix<f64>) -> LogDet {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "determinant of a non-square matrix");
    // Row-major copy so that row updates run over contiguous memory.
    let mut rows: Vec<f64> = a.transpose().as_slice().to_vec();
    lu_log_det_rows(&mut rows, n)
}

fn lu_log_det_rows(a: &mut [f64], n: usize) -> LogDet {
    let mut log_abs = 0.0;
    let mut sign: i8 = 1;
    let (mut dmax, mut dmin) = (0.0f64, f64::INFINITY);
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot == 0.0 {
            return LogDet { log_abs: f64::NEG_INFINITY, sign: 0, dynamic_range: f64::INFINITY };
        }
        if p != k {
            for j in 0..n {
                a.swap(p * n + j, k * n + j);
            }
            sign = -sign;
        }
        let ukk = a[k * n + k];
        if ukk < 0.0 {
            sign = -sign;
        }
        log_abs += ukk.abs().ln();
        dmax = dmax.max(ukk.abs());
        dmin = dmin.min(ukk.abs());
        eliminate_below(a, n, k, false);
    }
    LogDet { log_abs, sign, dynamic_range: if n == 0 { 1.0 } else { dmax / dmin } }
}

/// Subtracts multiples of row k from the rows below it. With `keep_l` the
/// multipliers are stored in column k (Doolittle layout).
fn eliminate_below(a: &mut [f64], n: usize, k: usize, keep_l: bool) {
    let (head, tail) = a.split_at_mut((k + 1) * n);
    let pivot_row = &head[k * n + k + 1..k * n + n];
    let ukk = head[k * n + k];
    for row in tail.chunks_exact_mut(n) {
        let l = row[k] / ukk;
        if keep_l {
            row[k] = l;
        }
        if l != 0.0 {
            for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                *x -= l * u;
            }
        }
    }
}

/// Builds the r×r Toeplitz matrix A_ij = t(i − j) from `entries`, where
/// `entries[k + r − 1] = t(k)` for k ∈ [−(r−1), r−1].
pub fn toeplitz_matrix(entries: &[f64]) -> Result<DMatrix<f64>> {
    if entries.is_empty() || entries.len() % 2 == 0 {
        return Err(Error::Precondition(format!(
            "Toeplitz entries need odd length 2r−1, got {}",
            entries.len()
        )));
    }
    let r = (entries.len() + 1) / 2;
    Ok(DMatrix::from_fn(r, r, |i, j| entries[i + r - 1 - j]))
}

pub fn toeplitz_log_det(entries: &[f64]) -> Result<LogDet> {
    Ok(lu_log_det(toeplitz_matrix(entries)?))
}

/// det X_r and det Y_r for a single r, each by pivoted LU.
pub fn shifted_pair(table: &GTable, r: usize) -> Result<(LogDet, LogDet)> {
    check_depth(table, r)?;
    let rows = |shift: i64| -> Vec<f64> {
        (0..r * r).map(|idx| table.get((idx / r) as i64 - (idx % r) as i64 + shift)).collect()
    };
    Ok((lu_log_det_rows(&mut rows(-1), r), lu_log_det_rows(&mut rows(1), r)))
}

fn check_depth(table: &GTable, r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::Precondition("separation r must be >= 1".into()));
    }
    if table.n_max < r + 1 {
        return Err(Error::Precondition(format!(
            "G table depth {} too small for r = {r} (need >= {})",
            table.n_max,
            r + 1
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// One unpivoted factorization, verified at checkpoints.
    Nested,
    /// One pivoted factorization per separation.
    PerSeparation,
}

/// det X_r and det Y_r for r = 1..=n (index r − 1).
#[derive(Debug, Clone)]
pub struct ShiftedDets {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// log10 of the diagonal dynamic range behind each entry.
    pub log_condition: Vec<f64>,
    pub route: Route,
}

/// Below this size every minor is factorized separately.
const NESTED_MIN: usize = 24;

pub fn shifted_dets(table: &GTable, n: usize) -> Result<ShiftedDets> {
    check_depth(table, n)?;
    if n >= NESTED_MIN {
        if let Some(nested) = nested_route(table, n) {
            if verify(table, &nested) {
                return Ok(nested);
            }
        }
    }
    Ok(per_separation(table, n))
}

fn per_separation(table: &GTable, n: usize) -> ShiftedDets {
    use rayon::prelude::*;
    let pairs: Vec<(LogDet, LogDet)> = (1..=n)
        .into_par_iter()
        .map(|r| shifted_pair(table, r).expect("depth checked"))
        .collect();
    ShiftedDets {
        x: pairs.iter().map(|p| p.0.value()).collect(),
        y: pairs.iter().map(|p| p.1.value()).collect(),
        log_condition: pairs
            .iter()
            .map(|p| p.0.dynamic_range.max(p.1.dynamic_range).log10())
            .collect(),
        route: Route::PerSeparation,
    }
}

fn nested_route(table: &GTable, n: usize) -> Option<ShiftedDets> {
    let m = n + 1;
    // Row-major M_{n+1}; in-place Doolittle leaves L below and U on/above the diagonal.
    let mut a: Vec<f64> = (0..m * m).map(|idx| table.get((idx / m) as i64 - (idx % m) as i64)).collect();
    for k in 0..m {
        let ukk = a[k * m + k];
        if ukk == 0.0 || !ukk.is_finite() {
            return None;
        }
        eliminate_below(&mut a, m, k, true);
    }
    // y = first row of U⁻¹ (Uᵀ y = e₁), z = first column of L⁻¹ (L z = e₁).
    let mut y = vec![0.0; m];
    let mut z = vec![0.0; m];
    y[0] = 1.0 / a[0];
    z[0] = 1.0;
    for k in 1..m {
        let row = &a[k * m..k * m + k];
        let sz: f64 = row.iter().zip(&z[..k]).map(|(l, zj)| l * zj).sum();
        let sy: f64 = (0..k).map(|j| a[j * m + k] * y[j]).sum();
        y[k] = -sy / a[k * m + k];
        z[k] = -sz;
    }
    let mut x_dets = Vec::with_capacity(n);
    let mut y_dets = Vec::with_capacity(n);
    let mut cond = Vec::with_capacity(n);
    let mut det = a[0];
    let (mut dmax, mut dmin) = (a[0].abs(), a[0].abs());
    for r in 1..=n {
        let parity = if r % 2 == 0 { 1.0 } else { -1.0 };
        let det_r = det;
        let ukk = a[r * m + r];
        det *= ukk;
        dmax = dmax.max(ukk.abs());
        dmin = dmin.min(ukk.abs());
        x_dets.push(parity * det * y[r]);
        y_dets.push(parity * det_r * z[r]);
        cond.push((dmax / dmin).log10());
    }
    let finite = x_dets.iter().chain(&y_dets).all(|v| v.is_finite());
    finite.then_some(ShiftedDets { x: x_dets, y: y_dets, log_condition: cond, route: Route::Nested })
}

/// Compares the nested sequence against pivoted LU at a few separations.
fn verify(table: &GTable, d: &ShiftedDets) -> bool {
    let n = d.x.len();
    let scale = table.offdiag_scale().max(table.get(0).abs()).max(1e-300);
    let mut checks = vec![1, 2, 3, n / 8, n / 4, n / 2, n];
    checks.retain(|&r| r >= 1 && r <= n);
    checks.dedup();
    checks.iter().all(|&r| {
        let (x, y) = shifted_pair(table, r).expect("depth checked");
        close(d.x[r - 1], x.value(), scale) && close(d.y[r - 1], y.value(), scale)
    })
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) + 1e-14 * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelPoint;

    fn cofactor_det(a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        if n == 1 {
            return a[(0, 0)];
        }
        (0..n)
            .map(|j| {
                let minor = a.clone().remove_row(0).remove_column(j);
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                s * a[(0, j)] * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn one_by_one() {
        let d = toeplitz_log_det(&[-0.3]).unwrap();
        assert_eq!(d.sign, -1);
        assert!((d.log_abs - 0.3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn identity_like() {
        let d = toeplitz_log_det(&[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.sign, 1);
        assert_eq!(d.log_abs, 0.0);
    }

    #[test]
    fn singular_sentinel() {
        let d = toeplitz_log_det(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.sign, 0);
        assert_eq!(d.log_abs, f64::NEG_INFINITY);
        assert_eq!(d.value(), 0.0);
    }

    #[test]
    fn even_length_rejected() {
        assert!(toeplitz_log_det(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn matches_cofactor_expansion() {
        // Deterministic pseudo-random entries.
        let mut s: u64 = 0x9e37_79b9_7f4a_7c15;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for r in 1..=6 {
            let entries: Vec<f64> = (0..2 * r - 1).map(|_| next()).collect();
            let m = toeplitz_matrix(&entries).unwrap();
            let oracle = cofactor_det(&m);
            let d = toeplitz_log_det(&entries).unwrap().value();
            assert!((d - oracle).abs() < 1e-12, "r={r}: {d} vs {oracle}");
        }
    }

    #[test]
    fn nested_route_agrees_with_pivoted() {
        for &(g, h) in &[(0.0, 0.95), (0.5, 1.2), (0.05, 1.0), (0.3, 0.96)] {
            let p = ModelPoint::new(g, h).unwrap();
            let t = GTable::build(&p, 41).unwrap();
            let nested = nested_route(&t, 40).expect("nested route");
            for r in [1, 5, 17, 40] {
                let (x, y) = shifted_pair(&t, r).unwrap();
                assert!(close(nested.x[r - 1], x.value(), 1.0), "g={g} h={h} r={r} x");
                assert!(close(nested.y[r - 1], y.value(), 1.0), "g={g} h={h} r={r} y");
            }
        }
    }

    #[test]
    fn ising_zero_field_falls_back() {
        // M has a zero diagonal here, so only the per-separation route works.
        let p = ModelPoint::new(1.0, 0.0).unwrap();
        let t = GTable::build(&p, 31).unwrap();
        let d = shifted_dets(&t, 30).unwrap();
        assert_eq!(d.route, Route::PerSeparation);
        for r in 1..=30 {
            let expect = if r % 2 == 0 { 1.0 } else { -1.0 };
            assert!((d.x[r - 1] - expect).abs() < 1e-10);
        }
    }
}
