use helikon_core::periods::{cycle, integrate_forms, PeriodConfig};
use helikon_core::quad::{integrate_circle, integrate_path, QuadConfig};
use helikon_core::solver::data_at;
use helikon_core::torus::{DomainPath, Generator};
use helikon_core::weierstrass::{helicoid_data, immersion_increment, LogState};
use helikon_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

/// Composite Simpson rule along a straight segment, with the branch carried by
/// explicit continuation between consecutive nodes.
fn dense_simpson(th: f64, k: f64, b: f64, from: C64, to: C64, n: usize) -> [C64; 3] {
    let d = data_at(k, th, b).unwrap();
    let mut s = d.advance(&d.origin_state(), from).unwrap();
    let h = (to - from) / n as f64;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for j in 0..=n {
        if j > 0 {
            s = d.advance(&s, from + h * j as f64).unwrap();
        }
        let f = d.forms(&s);
        let w = if j == 0 || j == n {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        for (a, v) in acc.iter_mut().zip([f.dh, f.gdh, f.one_over_g_dh]) {
            *a += v * w;
        }
    }
    acc.map(|a| a * h / 3.0)
}

#[test]
fn generator_periods_match_dense_simpson() {
    for (th, k, b) in [(1.9075, 1.0, 0.63), (1.78, 2.0, 0.8), (1.6, 2.5, 0.86)] {
        let d = data_at(k, th, b).unwrap();
        let cfg = PeriodConfig::default();
        for g in [Generator::One, Generator::Tau] {
            let path = cycle(&d, g, &cfg).unwrap();
            assert_eq!(path.vertices.len(), 2, "straight generators need no detour");
            let (v, _) = integrate_forms(&d, &path, &cfg.quad).unwrap();
            let oracle = dense_simpson(th, k, b, path.vertices[0], path.vertices[1], 4000);
            for i in 0..3 {
                assert!((v[i] - oracle[i]).norm() < 1e-9, "{g:?} form {i}: {} vs {}", v[i], oracle[i]);
            }
        }
    }
}

#[test]
fn circle_rule_against_residue_theorem() {
    let c = C64::new(0.2, -0.1);
    let (v, err) =
        integrate_circle(|z: C64| Ok([(z * z + 1.0) / (z - c), 1.0 / ((z - c) * (z - c))]), c, 0.3, 64).unwrap();
    assert!((v[0] - 2.0 * PI * I * (c * c + 1.0)).norm() < 1e-12);
    assert!(v[1].norm() < 1e-12);
    assert!(err < 1e-12);
}

#[test]
fn helicoid_integration_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let quad = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-14, ..QuadConfig::default() };
    for k in [1.0, 2.0, 2.5] {
        let h = helicoid_data(k).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let r: f64 = rng.gen_range(0.3..3.0);
            let a: f64 = rng.gen_range(-3.0..3.0);
            let mut verts = vec![C64::new(1.0, 0.0), C64::new(r, 0.0)];
            let steps = 16;
            for j in 1..=steps {
                verts.push(C64::from_polar(r, a * j as f64 / steps as f64));
            }
            let path = DomainPath::open(verts, 0.0);
            let start = h.start(C64::new(1.0, 0.0)).unwrap();
            let res = integrate_path(&h, &path, &start, &quad).unwrap();
            let x = immersion_increment(&res.value);
            let closed = h.immersion(&LogState { point: res.end_state.point, log: C64::new(r.ln(), a) });
            for i in 0..3 {
                worst = worst.max((x[i] - closed[i]).abs());
            }
        }
        assert!(worst < 1e-9, "k={k} {worst:e}");
        let (flux, _) = integrate_circle(|z| Ok([h.dh(z)?]), C64::new(0.0, 0.0), 0.7, 64).unwrap();
        assert!((flux[0] - C64::new(-2.0 * PI * k, 0.0)).norm() < 1e-9);
    }
}

#[test]
fn gdh_of_the_helicoid_develops_a_closed_curve() {
    use helikon_core::conemetric::develop_segment;
    use helikon_core::quad::PlainForm;
    let k = 3.0;
    let form = PlainForm(|z: C64| Ok([k * z.powi(2)]));
    let verts: Vec<C64> = (0..=64).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0)).collect();
    let path = DomainPath::open(verts, 0.0);
    let v = develop_segment(&form, &path, &C64::new(1.0, 0.0)).unwrap();
    assert!(v.norm() < 1e-12);
}
