use helikon_core::conemetric::{gauss_bonnet_defect, mu_beta_g_bound, mu_beta_lengths, sector_sk, tkd};
use helikon_core::elliptic::{theta, theta_quasi_factor, Lattice};
use helikon_core::solver::data_at;
use helikon_core::surface::ScrewMotion;
use helikon_core::torus::{make_torus, mu_h, mu_v, place_points, symmetry_images};
use helikon_core::C64;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn theta_identities(th in 0.5f64..2.6, x in -1.5f64..1.5, y in -1.0f64..1.0) {
        let l = Lattice::rhombic(th).unwrap();
        let z = C64::new(x, y);
        let t = theta(z, &l);
        prop_assert!(rel(theta(z + 1.0, &l), -t) < 1e-12);
        prop_assert!(rel(theta(z + l.tau, &l), theta_quasi_factor(z, &l) * t) < 1e-12);
        prop_assert!(rel(theta(-z, &l), -t) < 1e-12);
    }

    #[test]
    fn frame_round_trip(th in 0.3f64..2.8, u in -3.0f64..3.0, v in -3.0f64..3.0) {
        let t = make_torus(th).unwrap();
        let (u2, v2) = t.to_frame(t.from_frame(u, v));
        prop_assert!((u - u2).abs() < 1e-12 && (v - v2).abs() < 1e-12);
    }

    #[test]
    fn diagonal_reflections_are_involutions(th in 0.3f64..2.8, x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let t = make_torus(th).unwrap();
        let z = C64::new(x, y);
        prop_assert!((mu_v(&t, mu_v(&t, z)) - z).norm() < 1e-12);
        prop_assert!((mu_h(&t, mu_h(&t, z)) - z).norm() < 1e-12);
        let s = symmetry_images(&t, z);
        prop_assert!((s.rho + z - 2.0 * t.center).norm() < 1e-12);
    }

    #[test]
    fn placement_law(th in 0.5f64..2.6, k in 0.55f64..6.0, t in 0.01f64..0.99) {
        let lo = 0.5f64.max((k - 1.0) / k);
        let b = lo + (1.0 - lo) * t;
        let tor = make_torus(th).unwrap();
        let p = place_points(&tor, k, b).unwrap();
        prop_assert!((p.a + k * p.b - k).abs() < 1e-12);
        prop_assert!(p.a > 0.0 && p.a < 1.0);
        prop_assert!((p.e1 + p.e2 - 2.0 * tor.center).norm() < 1e-14);
        prop_assert!((p.v1 + p.v2 - 2.0 * tor.center).norm() < 1e-14);
    }

    #[test]
    fn placement_rejects_small_b(k in 1.05f64..6.0, t in 0.0f64..0.99) {
        let b = (k - 1.0) / k * t;
        prop_assert!(place_points(&make_torus(1.8).unwrap(), k, b).is_err());
    }

    #[test]
    fn g_is_one_at_the_centre(th in 1.2f64..2.2, k in 0.6f64..4.0, t in 0.05f64..0.95) {
        let lo = 0.5f64.max((k - 1.0) / k);
        let d = data_at(k, th, lo + (1.0 - lo) * t).unwrap();
        if !d.degenerate {
            let f = d.forms(&d.origin_state());
            prop_assert!((f.g - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn ledgers_balance(k in 0.55f64..50.0, d in 0.01f64..2.0) {
        prop_assert!(gauss_bonnet_defect(&tkd(k, d)).abs() < 1e-13 * k);
        prop_assert!(gauss_bonnet_defect(&sector_sk(k)).abs() < 1e-13 * k);
    }

    #[test]
    fn screw_powers_compose(angle in -10.0f64..10.0, tr in -10.0f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let s = ScrewMotion { angle, translation: tr };
        let p = [x, y, 0.5];
        let twice = s.apply(s.apply(p));
        let direct = s.power(2).apply(p);
        prop_assert!((0..3).all(|i| (twice[i] - direct[i]).abs() < 1e-10));
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn mu_beta_bound(beta in 0.01f64..5.0) {
        let l = mu_beta_lengths(beta).unwrap();
        prop_assert!(l.g <= mu_beta_g_bound(beta));
        prop_assert!(l.f < (-2.0 * beta).exp() / beta);
    }
}
