//! Exact diagonalization of finite periodic XY rings.
//!
//! The Hamiltonian conserves the parity of the number of up spins, so each
//! parity sector is diagonalized separately with Lanczos and full
//! reorthogonalization. Basis states are bit strings with bit i set when
//! site i points up along z.

use crate::correlators::CorrelatorSet;
use crate::entanglement::{concurrence, Concurrence};
use crate::error::{Error, Result};
use crate::model::ModelPoint;
use crate::report::{num, Csv};
use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

pub const MAX_SITES: usize = 14;
/// Ground states closer than this to the next level are flagged as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Most negative eigenvalue tolerated in a reduced density matrix.
pub const PSD_TOL: f64 = 1e-12;

const LANCZOS_TOL: f64 = 1e-12;
const LANCZOS_MAX: usize = 800;
const SEED: u64 = 0x5eed_0fed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

/// What to do with a ground state whose degeneracy flag is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyPolicy {
    Refuse,
    /// Use the parity eigenstate returned by the solver.
    AcceptSymmetric,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiniteChainGroundState {
    pub n: usize,
    pub point: ModelPoint,
    pub energy: f64,
    /// Distance to the next level found in either sector; +∞ when unresolved.
    pub gap: f64,
    pub parity: Parity,
    pub degeneracy_flag: bool,
    /// Real amplitudes over all 2^N basis states.
    #[serde(skip)]
    pub amplitudes: Vec<f64>,
    pub lanczos_steps: usize,
}

struct Sector {
    states: Vec<u32>,
    index: Vec<u32>,
}

impl Sector {
    fn new(n: usize, parity: Parity) -> Self {
        let want = matches!(parity, Parity::Odd) as u32;
        let mut index = vec![u32::MAX; 1 << n];
        let mut states = Vec::with_capacity(1 << (n - 1));
        for s in 0..(1u32 << n) {
            if s.count_ones() % 2 == want {
                index[s as usize] = states.len() as u32;
                states.push(s);
            }
        }
        Sector { states, index }
    }
}

/// out = H v within one parity sector.
fn apply(n: usize, point: &ModelPoint, sector: &Sector, v: &[f64], out: &mut [f64]) {
    let (hop, pair) = (0.5, 0.5 * point.gamma);
    for (k, &s) in sector.states.iter().enumerate() {
        let up = s.count_ones() as f64;
        let mut acc = -point.h * (up - 0.5 * n as f64) * v[k];
        for i in 0..n {
            let j = (i + 1) % n;
            let (bi, bj) = ((s >> i) & 1, (s >> j) & 1);
            let t = s ^ ((1 << i) | (1 << j));
            let coef = if bi != bj { hop } else { pair };
            if coef != 0.0 {
                acc += coef * v[sector.index[t as usize] as usize];
            }
        }
        out[k] = acc;
    }
}

struct LanczosResult {
    energy: f64,
    second: Option<f64>,
    vector: Vec<f64>,
    steps: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lanczos(n: usize, point: &ModelPoint, sector: &Sector, seed: u64) -> Result<LanczosResult> {
    let dim = sector.states.len();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let limit = dim.min(LANCZOS_MAX);
    loop {
        let j = basis.len() - 1;
        apply(n, point, sector, &basis[j], &mut w);
        let a = dot(&w, &basis[j]);
        alphas.push(a);
        for (x, y) in w.iter_mut().zip(&basis[j]) {
            *x -= a * y;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (x, y) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= b * y;
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let m = alphas.len();
        let exhausted = m == limit || b < 1e-14;
        if m % 8 == 0 || exhausted {
            let t = DMatrix::from_fn(m, m, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c || c + 1 == r {
                    betas[r.min(c)]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let g = order[0];
            let theta = eig.eigenvalues[g];
            let residual = b * eig.eigenvectors[(m - 1, g)].abs();
            if residual < LANCZOS_TOL * theta.abs().max(1.0) || exhausted {
                if residual >= 1e-8 * theta.abs().max(1.0) {
                    return Err(Error::Convergence(format!(
                        "Lanczos residual {residual:e} after {m} steps (dim {dim})"
                    )));
                }
                let second = order.get(1).and_then(|&k| {
                    let res = b * eig.eigenvectors[(m - 1, k)].abs();
                    (res < 1e-8).then_some(eig.eigenvalues[k])
                });
                let mut vector = vec![0.0; dim];
                for (k, q) in basis.iter().enumerate() {
                    let c = eig.eigenvectors[(k, g)];
                    for (x, y) in vector.iter_mut().zip(q) {
                        *x += c * y;
                    }
                }
                let norm = dot(&vector, &vector).sqrt();
                vector.iter_mut().for_each(|x| *x /= norm);
                return Ok(LanczosResult { energy: theta, second, vector, steps: m });
            }
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// Ground state of the N-site periodic ring at `point`.
pub fn ground_state(n: usize, point: &ModelPoint) -> Result<FiniteChainGroundState> {
    if !(2..=MAX_SITES).contains(&n) || n % 2 != 0 {
        return Err(Error::Domain(format!("ring size N = {n} must be even and in [2, {MAX_SITES}]")));
    }
    let mut found = Vec::with_capacity(2);
    for (k, parity) in [Parity::Even, Parity::Odd].into_iter().enumerate() {
        let sector = Sector::new(n, parity);
        let res = lanczos(n, point, &sector, SEED + k as u64)?;
        found.push((parity, sector, res));
    }
    let best = if found[1].2.energy < found[0].2.energy { 1 } else { 0 };
    let other = 1 - best;
    let energy = found[best].2.energy;
    let mut gap = found[other].2.energy - energy;
    if let Some(e2) = found[best].2.second {
        gap = gap.min(e2 - energy);
    }
    let (parity, sector, res) = &found[best];
    let mut amplitudes = vec![0.0; 1 << n];
    for (k, &s) in sector.states.iter().enumerate() {
        amplitudes[s as usize] = res.vector[k];
    }
    Ok(FiniteChainGroundState {
        n,
        point: *point,
        energy,
        gap,
        parity: *parity,
        degeneracy_flag: gap < DEGENERACY_GAP,
        amplitudes,
        lanczos_steps: found[0].2.steps + found[1].2.steps,
    })
}

/// Site-averaged two-point functions of a finite ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdCorrelators {
    pub n: usize,
    pub r: usize,
    pub gxx: f64,
    pub gyy: f64,
    pub gzz: f64,
    pub mz: f64,
}

impl EdCorrelators {
    /// Packs the values as a correlator set so the closed concurrence
    /// formulas can be applied to them.
    pub fn as_set(&self, point: &ModelPoint) -> CorrelatorSet {
        CorrelatorSet {
            point: *point,
            r: self.r,
            gxx: self.gxx,
            gyy: self.gyy,
            gzz: self.gzz,
            mz: self.mz,
            mx2_estimate: 0.0,
            det_log_condition: 0.0,
            ill_conditioned: false,
            mz_deficit: 0.5 - self.mz,
            gzz_connected: self.gzz - self.mz * self.mz,
        }
    }

    pub fn concurrence(&self, point: &ModelPoint) -> Result<Concurrence> {
        concurrence(&self.as_set(point))
    }
}

/// Reduced state of sites (i, i + r), local basis order (↑, ↓).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteRho {
    pub m: Matrix4<Complex64>,
    pub r: usize,
}

impl TwoSiteRho {
    pub fn from_real(m: Matrix4<f64>, r: usize) -> Self {
        TwoSiteRho { m: m.map(|x| Complex64::new(x, 0.0)), r }
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.m - self.m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// Hermitian, unit trace and positive semidefinite within tolerance.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        let tr = self.trace();
        let min = self.eigenvalues()[0];
        if herm > 1e-12 || (tr - 1.0).abs() > 1e-12 || min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix fails checks: hermiticity {herm:e}, trace {tr}, min eigenvalue {min:e}"
            )));
        }
        Ok(())
    }
}

/// Wootters concurrence max{0, λ₁ − λ₂ − λ₃ − λ₄}, with λ the decreasing
/// square roots of the eigenvalues of ρ(σʸ⊗σʸ)ρ*(σʸ⊗σʸ).
///
/// The λ are obtained from the Hermitian matrix √ρ ρ̃ √ρ, which has the same
/// spectrum.
pub fn wootters_concurrence(rho: &TwoSiteRho) -> Result<f64> {
    rho.validate()?;
    let i = Complex64::i();
    let zero = Complex64::new(0.0, 0.0);
    let sy = nalgebra::Matrix2::new(zero, -i, i, zero);
    let flip = sy.kronecker(&sy);
    let herm = (rho.m + rho.m.adjoint()) * Complex64::new(0.5, 0.0);
    let tilde = flip * herm.conjugate() * flip;
    let eig = SymmetricEigen::new(herm);
    let root = eig.eigenvalues.map(|x| Complex64::new(x.max(0.0).sqrt(), 0.0));
    let sqrt_rho = eig.eigenvectors * Matrix4::from_diagonal(&root) * eig.eigenvectors.adjoint();
    let m = sqrt_rho * tilde * sqrt_rho;
    let m = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut lam: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    Ok((lam[0] - lam[1] - lam[2] - lam[3]).max(0.0))
}

impl FiniteChainGroundState {
    pub fn norm(&self) -> f64 {
        dot(&self.amplitudes, &self.amplitudes).sqrt()
    }

    fn pair_masks(&self, r: usize) -> Result<()> {
        if r == 0 || r >= self.n {
            return Err(Error::Domain(format!("separation r = {r} outside [1, {}]", self.n - 1)));
        }
        Ok(())
    }

    /// ⟨Sˣ⟩, ⟨Sʸ⟩, ⟨Sᶻ⟩ on one site. ⟨Sʸ⟩ vanishes identically for real amplitudes.
    pub fn magnetization(&self, site: usize) -> [f64; 3] {
        let bit = 1usize << (site % self.n);
        let psi = &self.amplitudes;
        let mut sx = 0.0;
        let mut sz = 0.0;
        for (s, &a) in psi.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            sx += 0.5 * a * psi[s ^ bit];
            sz += if s & bit != 0 { 0.5 } else { -0.5 } * a * a;
        }
        [sx, 0.0, sz]
    }

    /// Correlators at separation r averaged over the N equivalent pairs.
    pub fn correlators(&self, r: usize) -> Result<EdCorrelators> {
        self.pair_masks(r)?;
        let n = self.n;
        let psi = &self.amplitudes;
        let (mut xx, mut yy, mut zz, mut mz) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            let (bi, bj) = (1usize << i, 1usize << ((i + r) % n));
            let mask = bi | bj;
            for (s, &a) in psi.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let flipped = a * psi[s ^ mask];
                let same = (s & bi != 0) == (s & bj != 0);
                xx += flipped;
                yy += if same { -flipped } else { flipped };
                zz += if same { a * a } else { -a * a };
                mz += if s & bi != 0 { a * a } else { -a * a };
            }
        }
        let nf = n as f64;
        Ok(EdCorrelators { n, r, gxx: xx / (4.0 * nf), gyy: yy / (4.0 * nf), gzz: zz / (4.0 * nf), mz: mz / (2.0 * nf) })
    }

    /// Two-site reduced density matrix at separation r, averaged over sites.
    pub fn rho(&self, r: usize) -> Result<TwoSiteRho> {
        self.pair_masks(r)?;
        let n = self.n;
        let psi = &self.amplitudes;
        let mut m = Matrix4::<f64>::zeros();
        // Local index 0 is ↑ (bit set), 1 is ↓.
        let local = |s: usize, bi: usize, bj: usize| -> usize {
            2 * ((s & bi == 0) as usize) + (s & bj == 0) as usize
        };
        for i in 0..n {
            let (bi, bj) = (1usize << i, 1usize << ((i + r) % n));
            for s in 0..psi.len() {
                if s & (bi | bj) != (bi | bj) {
                    continue;
                }
                // s has both sites up; enumerate the four local configurations.
                let rest = s & !(bi | bj);
                let configs = [rest | bi | bj, rest | bi, rest | bj, rest];
                for &p in &configs {
                    for &q in &configs {
                        m[(local(p, bi, bj), local(q, bi, bj))] += psi[p] * psi[q];
                    }
                }
            }
        }
        Ok(TwoSiteRho::from_real(m / n as f64, r))
    }

    /// 1 − 4|⟨S⟩|² on one site.
    pub fn one_tangle(&self, site: usize, policy: DegeneracyPolicy) -> Result<f64> {
        if self.degeneracy_flag && policy == DegeneracyPolicy::Refuse {
            return Err(Error::InvalidState(format!(
                "ground state of N = {} is degenerate (gap {:e}); choose a policy",
                self.n, self.gap
            )));
        }
        let s = self.magnetization(site);
        Ok(1.0 - 4.0 * (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]))
    }
}

pub const CSV_COLUMNS: [&str; 10] = ["N", "gamma", "h", "r", "gxx", "gyy", "gzz", "mz", "c_wootters", "c_formula"];

/// Debug dump of correlators and both concurrence routes for r = 1..=r_max.
pub fn csv_rows(csv: &mut Csv, state: &FiniteChainGroundState, r_max: usize) -> Result<()> {
    for r in 1..=r_max.min(state.n - 1) {
        let c = state.correlators(r)?;
        let w = wootters_concurrence(&state.rho(r)?)?;
        let f = c.concurrence(&state.point)?.c;
        csv.row(vec![
            state.n.to_string(),
            num(state.point.gamma),
            num(state.point.h),
            r.to_string(),
            num(c.gxx),
            num(c.gyy),
            num(c.gzz),
            num(c.mz),
            num(w),
            num(f),
        ]);
    }
    Ok(())
}
