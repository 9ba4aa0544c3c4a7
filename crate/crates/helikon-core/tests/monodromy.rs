use helikon_core::solver::{data_at, default_b_bracket};
use helikon_core::torus::crosses_cut;
use helikon_core::weierstrass::WeierstrassData;
use helikon_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_data(rng: &mut ChaCha8Rng) -> WeierstrassData {
    loop {
        let th = rng.gen_range(1.2..2.2);
        let k = rng.gen_range(0.6..4.0);
        let (lo, hi) = default_b_bracket(k);
        let b = rng.gen_range(lo..hi);
        if let Ok(d) = data_at(k, th, b) {
            if !d.degenerate {
                return d;
            }
        }
    }
}

/// Distance from `x` to the nearest multiple of `2π`.
fn dist_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    r.min(2.0 * PI - r)
}

/// Change of `log g` along the straight loop `p → p + τ`.
fn loop_change(d: &WeierstrassData, p: C64) -> C64 {
    let s0 = d.advance(&d.origin_state(), p).unwrap();
    let mut s = s0;
    let steps = 32;
    for j in 1..=steps {
        s = d.advance(&s, p + d.torus.tau * (j as f64 / steps as f64)).unwrap();
    }
    d.log_g(&s) - d.log_g(&s0)
}

#[test]
fn cut_crossing_tau_loop_turns_by_two_pi_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let d = random_data(&mut rng);
        let b = d.points.b;
        let p = d.torus.from_frame(0.5 + 0.5 * (1.0 + b), -0.5);
        assert!(crosses_cut(&d.torus, b, p, p + d.torus.tau));
        let dl = loop_change(&d, p);
        assert!(dl.re.abs() < 1e-9, "|g| not single-valued: {dl}");
        assert!(dist_2pi(dl.im - 2.0 * PI * d.k) < 1e-8, "k={} dl={dl}", d.k);
    }
}

#[test]
fn loop_avoiding_the_cut_is_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let d = random_data(&mut rng);
        let o = d.torus.center;
        assert!(!crosses_cut(&d.torus, d.points.b, o, o + d.torus.tau));
        let dl = loop_change(&d, o);
        assert!(dl.re.abs() < 1e-9 && dist_2pi(dl.im) < 1e-9, "k={} dl={dl}", d.k);
    }
}

#[test]
fn one_loop_is_trivial() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let d = random_data(&mut rng);
        let o = d.torus.center;
        let s0 = d.origin_state();
        let mut s = s0;
        for j in 1..=32 {
            s = d.advance(&s, o + j as f64 / 32.0).unwrap();
        }
        let dl = d.log_g(&s) - d.log_g(&s0);
        assert!(dl.re.abs() < 1e-9 && dist_2pi(dl.im) < 1e-9, "{dl}");
    }
}
