//! Nested bracketing solve of the two period conditions in `(θ, b)`.
//!
//! For each `θ` the vertical condition `Re ∫_B dh = 0` is solved for `b`; the
//! outer search then finds a sign change of `Im(P₁/P₂)` along `θ ↦ b(θ)`.
//! `Im(P₁/P₂)` also vanishes where the two periods are antiparallel; those
//! crossings are skipped.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result, ScanRow};
use crate::periods::{axis_turning, compute_report, cycle, integrate_forms, PeriodConfig, PeriodReport};
use crate::quad::{integrate_path, PlainForm};
use crate::torus::{make_torus, place_points, Generator};
use crate::weierstrass::{build_data, WeierstrassData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub theta_bracket: (f64, f64),
    /// `None` picks `[max(1/2, (k−1)/k) + 1e-3, 1 − 1e-3]`.
    pub b_bracket: Option<(f64, f64)>,
    pub tol_h: f64,
    pub tol_v: f64,
    pub theta_xtol: f64,
    pub b_xtol: f64,
    pub scan_points: usize,
    pub max_iter: usize,
    pub periods: PeriodConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta_bracket: (1.2, 2.2),
            b_bracket: None,
            tol_h: 1e-6,
            tol_v: 1e-6,
            theta_xtol: 1e-12,
            b_xtol: 1e-12,
            scan_points: 11,
            max_iter: 200,
            periods: PeriodConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub k: f64,
    pub theta_angle: f64,
    pub b: f64,
    pub a: f64,
    pub horiz_residual: f64,
    pub vert_residual: f64,
    /// `Im ∫_A dg/g`.
    pub axis_turning: f64,
    pub iterations: usize,
    pub report: PeriodReport,
}

impl Solution {
    pub fn data(&self) -> Result<WeierstrassData> {
        data_at(self.k, self.theta_angle, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerticalRoot {
    Root { b: f64, residual: f64, iterations: usize },
    NoSignChange { residual_lo: f64, residual_hi: f64 },
}

pub fn data_at(k: f64, theta_angle: f64, b: f64) -> Result<WeierstrassData> {
    let t = make_torus(theta_angle)?;
    let p = place_points(&t, k, b)?;
    build_data(&t, &p)
}

pub fn default_b_bracket(k: f64) -> (f64, f64) {
    (0.5f64.max((k - 1.0) / k) + 1e-3, 1.0 - 1e-3)
}

/// Brent's method on a bracket with `f(lo)·f(hi) < 0`.
pub fn brent<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    flo: f64,
    fhi: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, flo, fhi);
    if fa == 0.0 {
        return Ok((a, fa, 0));
    }
    if fb == 0.0 {
        return Ok((b, fb, 0));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Contract(format!("bracket [{lo}, {hi}] has no sign change")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for it in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb.abs() <= ftol {
            return Ok((b, fb, it));
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::SolveFailure { reason: format!("root finder exceeded {max_iter} iterations"), scan: Vec::new() })
}

/// `Re ∫_B dh` at `(k, θ, b)`.
pub fn vertical_residual_at(k: f64, theta_angle: f64, b: f64, cfg: &PeriodConfig) -> Result<f64> {
    let d = data_at(k, theta_angle, b)?;
    let path = cycle(&d, Generator::One, cfg)?;
    let form = PlainForm(|z| Ok([d.dh(z)]));
    let r = integrate_path(&form, &path, &path.start(), &cfg.quad)?;
    Ok(r.value[0].re)
}

pub fn solve_vertical_for_b(k: f64, theta_angle: f64, bracket: (f64, f64), cfg: &SolverConfig) -> Result<VerticalRoot> {
    let f = |b: f64| vertical_residual_at(k, theta_angle, b, &cfg.periods);
    let (lo, hi) = bracket;
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.signum() == fhi.signum() && flo != 0.0 && fhi != 0.0 {
        return Ok(VerticalRoot::NoSignChange { residual_lo: flo, residual_hi: fhi });
    }
    let (b, residual, iterations) = brent(f, lo, hi, flo, fhi, cfg.b_xtol, 1e-4 * cfg.tol_v, cfg.max_iter)?;
    Ok(VerticalRoot::Root { b, residual, iterations })
}

/// Horizontal residual along the vertical-solution curve, with `Re(P₁/P_τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CurvePoint {
    b: f64,
    horiz: f64,
    parallel: f64,
}

fn curve_point(k: f64, theta_angle: f64, cfg: &SolverConfig) -> Result<Option<CurvePoint>> {
    let bb = cfg.b_bracket.unwrap_or_else(|| default_b_bracket(k));
    let b = match solve_vertical_for_b(k, theta_angle, bb, cfg)? {
        VerticalRoot::Root { b, .. } => b,
        VerticalRoot::NoSignChange { .. } => return Ok(None),
    };
    let d = data_at(k, theta_angle, b)?;
    let (p1, _) = integrate_forms(&d, &cycle(&d, Generator::One, &cfg.periods)?, &cfg.periods.quad)?;
    let (pt, _) = integrate_forms(&d, &cycle(&d, Generator::Tau, &cfg.periods)?, &cfg.periods.quad)?;
    if pt[1].norm() < 1e-12 {
        return Ok(None);
    }
    let ratio = p1[1] / pt[1];
    Ok(Some(CurvePoint { b, horiz: ratio.im, parallel: ratio.re }))
}

fn scan(k: f64, range: (f64, f64), cfg: &SolverConfig) -> Result<(Vec<(f64, Option<CurvePoint>)>, Option<usize>)> {
    let n = cfg.scan_points.max(2);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let th = range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64;
        rows.push((th, curve_point(k, th, cfg)?));
    }
    let hit = (0..n - 1).find(|&i| match (rows[i].1, rows[i + 1].1) {
        (Some(p), Some(q)) => p.parallel > 0.0 && q.parallel > 0.0 && p.horiz.signum() != q.horiz.signum(),
        _ => false,
    });
    Ok((rows, hit))
}

fn scan_table(rows: &[(f64, Option<CurvePoint>)]) -> Vec<ScanRow> {
    rows.iter()
        .map(|(th, p)| match p {
            Some(p) => (*th, p.b, p.horiz),
            None => (*th, f64::NAN, f64::NAN),
        })
        .collect()
}

pub fn solve_k(k: f64, theta_bracket: (f64, f64), cfg: &SolverConfig) -> Result<Solution> {
    if !(k > 0.5) {
        return Err(Error::Domain(format!("k must exceed 1/2, got {k}")));
    }
    let clamp = |x: f64| x.clamp(0.05, PI - 0.05);
    let (mut rows, mut hit) = scan(k, (clamp(theta_bracket.0), clamp(theta_bracket.1)), cfg)?;
    if hit.is_none() {
        let wide = (clamp(theta_bracket.0 - 0.5), clamp(theta_bracket.1 + 0.5));
        let (r2, h2) = scan(k, wide, cfg)?;
        rows = r2;
        hit = h2;
    }
    let Some(i) = hit else {
        return Err(Error::SolveFailure {
            reason: format!("no admissible sign change of the horizontal residual at k = {k}"),
            scan: scan_table(&rows),
        });
    };
    let (t0, p0) = (rows[i].0, rows[i].1.expect("scan hit has a value"));
    let (t1, p1) = (rows[i + 1].0, rows[i + 1].1.expect("scan hit has a value"));

    let mut last_b = p0.b;
    let h = |th: f64| -> Result<f64> {
        match curve_point(k, th, cfg)? {
            Some(p) => {
                last_b = p.b;
                Ok(p.horiz)
            }
            None => Err(Error::SolveFailure {
                reason: format!("vertical condition lost its sign change at theta = {th}"),
                scan: scan_table(&rows),
            }),
        }
    };
    let (theta_angle, _, iterations) =
        brent(h, t0, t1, p0.horiz, p1.horiz, cfg.theta_xtol, 1e-4 * cfg.tol_h, cfg.max_iter)?;
    let b = match solve_vertical_for_b(k, theta_angle, cfg.b_bracket.unwrap_or_else(|| default_b_bracket(k)), cfg)? {
        VerticalRoot::Root { b, .. } => b,
        VerticalRoot::NoSignChange { .. } => last_b,
    };
    finish(k, theta_angle, b, iterations, cfg)
}

fn finish(k: f64, theta_angle: f64, b: f64, iterations: usize, cfg: &SolverConfig) -> Result<Solution> {
    let d = data_at(k, theta_angle, b)?;
    let report = compute_report(&d, &cfg.periods)?;
    let turning = axis_turning(&d, 0.0)?.im;
    let sol = Solution {
        k,
        theta_angle,
        b,
        a: d.points.a,
        horiz_residual: report.horiz_residual,
        vert_residual: report.vert_residual,
        axis_turning: turning,
        iterations,
        report,
    };
    if sol.horiz_residual.abs() >= cfg.tol_h || sol.vert_residual.abs() >= cfg.tol_v {
        return Err(Error::SolveFailure {
            reason: format!(
                "residuals above tolerance at theta = {theta_angle}, b = {b}: horiz {:e}, vert {:e}",
                sol.horiz_residual, sol.vert_residual
            ),
            scan: Vec::new(),
        });
    }
    Ok(sol)
}

/// Solves `k_values` in order, warm-starting each from the last success.
pub fn continue_family(k_values: &[f64], cfg: &SolverConfig) -> Vec<Result<Solution>> {
    let mut out = Vec::with_capacity(k_values.len());
    let mut prev: Option<f64> = None;
    for &k in k_values {
        let r = match prev {
            Some(th) => solve_k(k, (th - 0.2, th + 0.2), cfg).or_else(|_| solve_k(k, cfg.theta_bracket, cfg)),
            None => solve_k(k, cfg.theta_bracket, cfg),
        };
        if let Ok(s) = &r {
            prev = Some(s.theta_angle);
        }
        out.push(r);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: f64,
    pub theta: f64,
    pub b: f64,
    pub horiz_residual: f64,
    pub vert_residual: f64,
    pub quad_err: f64,
    pub flag: String,
}

pub fn sweep_cell(k: f64, theta_angle: f64, b: f64, cfg: &PeriodConfig) -> SweepRow {
    let eval = || -> Result<PeriodReport> { compute_report(&data_at(k, theta_angle, b)?, cfg) };
    match eval() {
        Ok(r) => SweepRow {
            k,
            theta: theta_angle,
            b,
            horiz_residual: r.horiz_residual,
            vert_residual: r.vert_residual,
            quad_err: r.quadrature_error_estimate,
            flag: String::from("ok"),
        },
        Err(e) => SweepRow {
            k,
            theta: theta_angle,
            b,
            horiz_residual: f64::NAN,
            vert_residual: f64::NAN,
            quad_err: f64::NAN,
            flag: match e {
                Error::Placement(_) => String::from("inadmissible"),
                Error::Accuracy { .. } => String::from("quadrature"),
                Error::Geometry(_) => String::from("geometry"),
                Error::Pole(_) => String::from("pole"),
                _ => String::from("error"),
            },
        },
    }
}

/// Row-major (θ outer, b inner) sweep.
pub fn sweep(k: f64, theta_grid: &[f64], b_grid: &[f64], cfg: &PeriodConfig) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(theta_grid.len() * b_grid.len());
    for &th in theta_grid {
        for &b in b_grid {
            rows.push(sweep_cell(k, th, b, cfg));
        }
    }
    rows
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let (x, _, _) = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, -2.0, 6.0, 1e-14, 0.0, 100).unwrap();
        assert!((x - 2f64.powf(1.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn vertical_sign_change_on_default_bracket() {
        let cfg = SolverConfig::default();
        let r = solve_vertical_for_b(1.0, 1.9, (0.51, 0.99), &cfg).unwrap();
        match r {
            VerticalRoot::Root { b, .. } => assert!(b > 0.5 && b < 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(1.0, 2.0, 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], 1.0);
        assert_eq!(v[4], 2.0);
    }
}
