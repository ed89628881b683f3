use nalgebra::Matrix4;
use proptest::prelude::*;
use xychain::ed::{ground_state, wootters_concurrence, TwoSiteRho};
use xychain::entanglement::{tangles, ConcurrenceProfile, RangeConfig, RADICAND_TOL};
use xychain::gfunction::{g_quadrature, DEFAULT_TOL};
use xychain::ModelPoint;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn g_is_bounded(gamma in 0.0f64..=1.0, h in 0.0f64..3.0, r in -20i64..=20) {
        let p = ModelPoint::new(gamma, h).unwrap();
        let g = g_quadrature(&p, r, DEFAULT_TOL).unwrap().value;
        prop_assert!(g.abs() <= 1.0 + 1e-12, "G({r}) = {g}");
    }

    #[test]
    fn factorizing_field_on_the_circle(gamma in 0.0f64..=1.0) {
        let p = ModelPoint::new(gamma, 0.5).unwrap();
        prop_assert!((p.h_f * p.h_f + gamma * gamma - 1.0).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&p.alpha));
    }

    #[test]
    fn concurrences_are_physical(gamma in 0.0f64..=1.0, h in 0.0f64..2.5) {
        let p = ModelPoint::new(gamma, h).unwrap();
        let prof = ConcurrenceProfile::compute(&p, 6, &RangeConfig::default()).unwrap();
        for e in &prof.entries {
            prop_assert!((0.0..=1.0).contains(&e.c), "r={} C={}", e.r, e.c);
            prop_assert!(e.radicand >= -RADICAND_TOL, "r={} radicand {}", e.r, e.radicand);
            prop_assert_eq!(e.c, 2.0 * e.cp.max(e.cpp).max(0.0));
        }
    }

    #[test]
    fn monogamy(gamma in 0.0f64..=1.0, h in 0.0f64..2.5) {
        let p = ModelPoint::new(gamma, h).unwrap();
        let t = tangles(&ConcurrenceProfile::grow(&p, &RangeConfig::default()).unwrap()).unwrap();
        prop_assert!(t.tau2 <= t.tau1 + 1e-8, "tau1 {} tau2 {}", t.tau1, t.tau2);
        prop_assert!(t.tau1 >= -1e-12 && t.tau1 <= 1.0 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wootters_on_random_states(a in prop::array::uniform16(-1.0f64..1.0)) {
        let m = Matrix4::from_row_slice(&a);
        let rho = m * m.transpose();
        let tr = rho.trace();
        prop_assume!(tr > 1e-6);
        let state = TwoSiteRho::from_real(rho / tr, 1);
        prop_assert!(state.validate().is_ok());
        let c = wootters_concurrence(&state).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c), "C = {c}");

        // Exchanging the two spins leaves the concurrence unchanged.
        let swap = Matrix4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let swapped = TwoSiteRho::from_real(swap * rho * swap / tr, 1);
        prop_assert!((wootters_concurrence(&swapped).unwrap() - c).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn formula_equals_wootters_on_rings(gamma in 0.0f64..=1.0, h in 0.0f64..2.0, r in 1usize..=3) {
        let p = ModelPoint::new(gamma, h).unwrap();
        let gs = ground_state(8, &p).unwrap();
        let w = wootters_concurrence(&gs.rho(r).unwrap()).unwrap();
        let f = gs.correlators(r).unwrap().concurrence(&p).unwrap().c;
        prop_assert!((w - f).abs() < 1e-10, "{w} vs {f}");
    }
}
