use helikon_core::periods::{abel_bilinear_check, cross_check_hpc, PeriodConfig};
use helikon_core::solver::{continue_family, data_at, solve_k, vertical_residual_at, Solution, SolverConfig};
use helikon_core::Error;
use std::f64::consts::PI;

fn solve(k: f64) -> Solution {
    solve_k(k, (1.2, 2.2), &SolverConfig::default()).unwrap()
}

#[test]
fn k1_solution_is_pinned() {
    let s = solve(1.0);
    assert!((s.theta_angle - 1.907499376).abs() < 1e-7, "{}", s.theta_angle);
    assert!((s.b - 0.629065054).abs() < 1e-7, "{}", s.b);
    assert!(0.5 < s.b && s.b < 1.0);
    assert!((s.a - (1.0 - s.b)).abs() < 1e-15);
}

#[test]
fn residuals_and_residues_at_solutions() {
    for k in [1.0, 1.5, 2.0, 2.5] {
        let s = solve(k);
        let r = &s.report;
        assert!(s.horiz_residual.abs() < 1e-6 && s.vert_residual.abs() < 1e-6);
        assert!(r.cross_check < 1e-6 * r.period_scale(), "k={k} cross {}", r.cross_check);
        assert!((r.residue_e1 + r.residue_e2).norm() < 1e-10);
        assert!((r.residue_e1.norm() - k).abs() < 1e-9, "2πi·Res has modulus 2πk");
        let d = s.data().unwrap();
        let bil = abel_bilinear_check(&d, 0.0).unwrap();
        assert!(bil.defect < 1e-6, "k={k} bilinear {}", bil.defect);
        assert!((cross_check_hpc(&d).unwrap() - r.cross_check).abs() < 1e-9);
    }
}

#[test]
fn ordering_and_monotone_b_along_the_family() {
    let ks = [1.0, 1.5, 2.0, 3.0, 4.0];
    let sols: Vec<Solution> = continue_family(&ks, &SolverConfig::default()).into_iter().map(Result::unwrap).collect();
    for s in &sols {
        let mid = s.k / (s.k + 1.0);
        assert!(s.a < mid && mid < s.b, "k={} a={} b={}", s.k, s.a, s.b);
    }
    for w in sols.windows(2) {
        assert!(w[1].b > w[0].b);
    }
}

#[test]
fn axis_turning_is_minus_pi_k_minus_one() {
    for k in [1.0, 2.0, 3.0] {
        let s = solve(k);
        assert!((s.axis_turning + PI * (k - 1.0)).abs() < 1e-3, "k={k} {}", s.axis_turning);
    }
}

#[test]
fn vertical_residual_changes_sign_across_the_bracket() {
    let cfg = PeriodConfig::default();
    for th in [1.7205, 1.907499376] {
        let lo = vertical_residual_at(1.0, th, 0.51, &cfg).unwrap();
        let hi = vertical_residual_at(1.0, th, 0.99, &cfg).unwrap();
        assert!(lo * hi < 0.0, "theta={th}: {lo} {hi}");
    }
}

#[test]
fn tighter_tolerance_moves_the_root_little() {
    let a = solve(1.0);
    let cfg = SolverConfig { tol_v: 1e-9, tol_h: 1e-9, ..SolverConfig::default() };
    let b = solve_k(1.0, (1.2, 2.2), &cfg).unwrap();
    assert!((a.theta_angle - b.theta_angle).abs() < 1e-7);
    assert!((a.b - b.b).abs() < 1e-7);
    assert!(b.vert_residual.abs() < 1e-9);
}

#[test]
fn inadmissible_k_is_rejected() {
    assert!(matches!(solve_k(0.4, (1.2, 2.2), &SolverConfig::default()), Err(Error::Domain(_))));
    assert!(data_at(0.4, 1.8, 0.7).is_err());
}

#[test]
fn empty_bracket_reports_the_scan() {
    let cfg = SolverConfig { scan_points: 3, ..SolverConfig::default() };
    match solve_k(1.0, (0.3, 0.35), &cfg) {
        Err(Error::SolveFailure { scan, .. }) => assert_eq!(scan.len(), 3),
        other => panic!("{other:?}"),
    }
}
