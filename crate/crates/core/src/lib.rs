//! Ground-state pairwise entanglement of the spin-1/2 XY chain in a
//! transverse field,
//!
//!   H = Σᵢ [(1+γ) Sˣᵢ Sˣᵢ₊₁ + (1−γ) Sʸᵢ Sʸᵢ₊₁ − h Sᶻᵢ],
//!
//! in the thermodynamic limit, with particular attention to the
//! neighbourhood of factorized ground states (the circle h² + γ² = 1 and the
//! saturated line γ = 0, h ≥ 1).
//!
//! The pipeline is G-function quadrature ([`gfunction`]) → Toeplitz
//! determinants ([`toeplitz`]) → correlators ([`correlators`]) →
//! concurrences, tangles, range and entanglement length ([`entanglement`]).
//! Closed-form near-factorization series live in [`expansions`]; an exact
//! diagonalization of finite rings ([`ed`]) provides an independent check.

pub mod acceptance;
pub mod correlators;
pub mod ed;
pub mod entanglement;
pub mod error;
pub mod expansions;
pub mod figures;
pub mod fit;
pub mod gfunction;
pub mod model;
pub mod quadrature;
pub mod report;
pub mod toeplitz;

pub use error::{Error, Result};
pub use model::{ModelPoint, Regime, Side};
