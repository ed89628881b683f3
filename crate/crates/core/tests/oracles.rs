//! Checks against values computed independently of the library pipeline:
//! product-state energetics, the free-fermion spectrum of the finite ring and
//! the factorized-state correlators.

use std::f64::consts::PI;
use xychain::correlators::profile_at;
use xychain::ed::{ground_state, wootters_concurrence, DegeneracyPolicy, DEGENERACY_GAP};
use xychain::entanglement::{ConcurrenceProfile, RangeConfig};
use xychain::gfunction::{g_quadrature, g_xx_closed_form, DEFAULT_TOL};
use xychain::{Error, ModelPoint};

/// Ground energy of the even fermion-parity sector of the N-site ring:
/// −½ Σ_k √((h − cos k)² + γ² sin² k) over antiperiodic k = π(2m+1)/N.
fn free_fermion_energy(n: usize, gamma: f64, h: f64) -> f64 {
    (0..n)
        .map(|m| {
            let k = PI * (2 * m + 1) as f64 / n as f64;
            let (s, c) = k.sin_cos();
            ((h - c).powi(2) + gamma * gamma * s * s).sqrt()
        })
        .sum::<f64>()
        * -0.5
}

/// Lowest energy per site of a Néel-x product state with polar angle θ.
fn product_state_energy(gamma: f64, h: f64) -> f64 {
    let c = (h / (1.0 + gamma)).min(1.0);
    -(1.0 + gamma) / 4.0 * (1.0 - c * c) - h * c / 2.0
}

#[test]
fn ed_energy_matches_free_fermions_in_the_paramagnet() {
    for (g, h) in [(0.5, 1.5), (0.0, 1.2), (0.8, 1.1), (1.0, 2.0)] {
        for n in [6, 8, 10] {
            let p = ModelPoint::new(g, h).unwrap();
            let gs = ground_state(n, &p).unwrap();
            let ff = free_fermion_energy(n, g, h);
            assert!((gs.energy - ff).abs() < 1e-10, "N={n} g={g} h={h}: ED {} vs {ff}", gs.energy);
        }
    }
}

#[test]
fn ed_energy_is_bounded_by_the_even_sector() {
    for (g, h) in [(1.0, 0.3), (0.5, 0.5), (0.25, 0.9)] {
        let p = ModelPoint::new(g, h).unwrap();
        let gs = ground_state(10, &p).unwrap();
        let ff = free_fermion_energy(10, g, h);
        assert!(gs.energy <= ff + 1e-10, "g={g} h={h}: ED {} above sector {ff}", gs.energy);
    }
}

#[test]
fn ed_energy_below_product_states() {
    for (g, h) in [(0.3, 0.2), (0.5, 0.9), (0.9, 1.3), (0.0, 0.5), (1.0, 0.0)] {
        let p = ModelPoint::new(g, h).unwrap();
        let gs = ground_state(8, &p).unwrap();
        let bound = 8.0 * product_state_energy(g, h);
        assert!(gs.energy <= bound + 1e-12, "g={g} h={h}: {} > {bound}", gs.energy);
    }
}

#[test]
fn factorized_ring_energy_is_minus_half_per_site() {
    // On h² + γ² = 1 the product state with cos θ = α is an exact eigenstate at −1/2 per site.
    for g in [0.25, 0.5, 0.75] {
        let p = ModelPoint::new(g, (1.0f64 - g * g).sqrt()).unwrap();
        assert!((product_state_energy(g, p.h) + 0.5).abs() < 1e-14);
        for n in [4, 8, 12] {
            let gs = ground_state(n, &p).unwrap();
            assert!((gs.energy + 0.5 * n as f64).abs() < 1e-10, "g={g} N={n}: {}", gs.energy);
        }
    }
}

#[test]
fn factorized_circle_correlators_are_product_state_values() {
    for g in [0.25, 0.5, 0.75] {
        let p = ModelPoint::new(g, (1.0f64 - g * g).sqrt()).unwrap();
        let (_, sets) = profile_at(&p, 6, DEFAULT_TOL).unwrap();
        let a = p.alpha;
        for cs in &sets {
            let sign = if cs.r % 2 == 0 { 1.0 } else { -1.0 };
            assert!((cs.gxx - sign * (1.0 - a * a) / 4.0).abs() < 1e-10, "g={g} r={}: gxx {}", cs.r, cs.gxx);
            assert!(cs.gyy.abs() < 1e-10);
            assert!((cs.mz - a / 2.0).abs() < 1e-12);
            assert!((cs.gzz - a * a / 4.0).abs() < 1e-10);
        }
    }
}

#[test]
fn toeplitz_matches_ed_at_gapped_points() {
    // Short correlation lengths: the ring converges to the infinite chain exponentially in N.
    for (g, h) in [(1.0, 0.3), (0.5, 1.8), (0.0, 1.5)] {
        let p = ModelPoint::new(g, h).unwrap();
        let (_, sets) = profile_at(&p, 3, DEFAULT_TOL).unwrap();
        let worst = |n: usize| {
            let gs = ground_state(n, &p).unwrap();
            let mut d: f64 = 0.0;
            for cs in &sets {
                let ed = gs.correlators(cs.r).unwrap();
                for (a, b) in [(ed.gxx, cs.gxx), (ed.gyy, cs.gyy), (ed.gzz, cs.gzz), (ed.mz, cs.mz)] {
                    d = d.max((a - b).abs());
                }
            }
            d
        };
        let (d10, d14) = (worst(10), worst(14));
        assert!(d14 < 1e-5, "g={g} h={h}: N=14 off by {d14}");
        assert!(d14 <= d10 + 1e-14, "g={g} h={h}: {d10} -> {d14}");
    }
}

#[test]
fn formula_and_wootters_agree_on_ed_states() {
    for (g, h) in [(0.5, 1.5), (0.0, 1.2), (1.0, 0.3), (0.3, 0.6), (0.7, 0.2)] {
        let p = ModelPoint::new(g, h).unwrap();
        let gs = ground_state(12, &p).unwrap();
        for r in 1..=3 {
            let w = wootters_concurrence(&gs.rho(r).unwrap()).unwrap();
            let f = gs.correlators(r).unwrap().concurrence(&p).unwrap().c;
            assert!((w - f).abs() < 1e-10, "g={g} h={h} r={r}: {w} vs {f}");
        }
    }
}

#[test]
fn near_degenerate_ising_ring() {
    // Deep in the ordered phase the two parity states split by ~h^N.
    let p = ModelPoint::new(1.0, 0.01).unwrap();
    let gs = ground_state(4, &p).unwrap();
    assert!(gs.gap < 1e-8, "gap {}", gs.gap);
    assert_eq!(gs.degeneracy_flag, gs.gap < DEGENERACY_GAP);
    let tau = gs.one_tangle(0, DegeneracyPolicy::AcceptSymmetric).unwrap();
    // Parity eigenstate: ⟨Sˣ⟩ = 0, so τ₁ = 1 − 4M_z².
    let mz = gs.magnetization(0)[2];
    assert!((tau - (1.0 - 4.0 * mz * mz)).abs() < 1e-12);

    let deeper = ground_state(8, &ModelPoint::new(1.0, 0.01).unwrap()).unwrap();
    assert!(deeper.degeneracy_flag);
    assert!(matches!(deeper.one_tangle(0, DegeneracyPolicy::Refuse), Err(Error::InvalidState(_))));
}

#[test]
fn isotropic_g_matches_closed_form() {
    for h in [0.0, 0.3, 0.8, 1.2] {
        let p = ModelPoint::new(0.0, h).unwrap();
        for r in -6i64..=6 {
            let q = g_quadrature(&p, r, DEFAULT_TOL).unwrap().value;
            let exact = g_xx_closed_form(h, r).unwrap();
            assert!((q - exact).abs() < 1e-11, "h={h} r={r}: {q} vs {exact}");
        }
    }
}

#[test]
fn xx_nearest_neighbour_correlator() {
    // At γ = 0, h < 1: gˣˣ₁ = gʸʸ₁ = −sin φ_F/(2π) (half the hopping energy per bond).
    for h in [0.2, 0.5, 0.9] {
        let p = ModelPoint::new(0.0, h).unwrap();
        let (_, sets) = profile_at(&p, 1, DEFAULT_TOL).unwrap();
        let phi = h.acos();
        let exact = -phi.sin() / (2.0 * PI);
        assert!((sets[0].gxx - exact).abs() < 1e-11, "h={h}: {} vs {exact}", sets[0].gxx);
        assert!((sets[0].gyy - exact).abs() < 1e-11);
    }
}

#[test]
fn saturated_xx_chain_is_unentangled() {
    let p = ModelPoint::new(0.0, 1.3).unwrap();
    let prof = ConcurrenceProfile::compute(&p, 10, &RangeConfig::default()).unwrap();
    assert!(prof.entries.iter().all(|e| e.c == 0.0));
    assert!((prof.mags.mz - 0.5).abs() < 1e-13);
}
