//! Periods of the Weierstrass forms, period-condition residuals, end residues,
//! the bilinear-relation check and the axis turning of the normal.
//!
//! Cycle `B` is the straight class-[1] segment `O → O+1` (optionally shifted
//! along the vertical diagonal). It never meets the cut or a marked point.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate_circle, integrate_path, PlainForm, QuadConfig};
use crate::torus::{generator_cycle_at, DomainPath, Generator};
use crate::weierstrass::{WeierstrassData, WeierstrassForms};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodConfig {
    pub quad: QuadConfig,
    /// Shift of the cycle anchor along the vertical diagonal, in units of `(1+τ)/2`.
    pub anchor_offset: f64,
    /// Trapezoid nodes on end circles (the check uses twice as many).
    pub circle_nodes: usize,
}

impl Default for PeriodConfig {
    fn default() -> Self {
        Self { quad: QuadConfig::default(), anchor_offset: 0.0, circle_nodes: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodReport {
    pub period_gdh_1: C64,
    pub period_gdh_tau: C64,
    pub period_invg_1: C64,
    pub period_invg_tau: C64,
    pub period_dh_1: C64,
    pub period_dh_tau: C64,
    /// `Res_{E₁} dh`.
    pub residue_e1: C64,
    /// `Res_{E₂} dh`.
    pub residue_e2: C64,
    pub horiz_residual: f64,
    pub vert_residual: f64,
    pub cross_check: f64,
    pub quadrature_error_estimate: f64,
}

impl PeriodReport {
    /// Length scale used for relative comparisons of the gdh periods.
    pub fn period_scale(&self) -> f64 {
        self.period_gdh_1.norm()
    }
}

/// Frozen class-[1] / class-[τ] representative.
pub fn cycle(data: &WeierstrassData, which: Generator, cfg: &PeriodConfig) -> Result<DomainPath> {
    let t = &data.torus;
    let anchor = t.center + t.half_vertical() * cfg.anchor_offset;
    let clearance = data.points.default_clearance();
    generator_cycle_at(t, &data.points, which, clearance, anchor)
}

/// `[∫dh, ∫g dh, ∫dh/g]` over a path, continued from the canonical branch at `O`.
pub fn integrate_forms(data: &WeierstrassData, path: &DomainPath, quad: &QuadConfig) -> Result<([C64; 3], f64)> {
    let start = data.advance(&data.origin_state(), path.start())?;
    let r = integrate_path(&WeierstrassForms(data), path, &start, quad)?;
    Ok((r.value, r.error))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    E1,
    E2,
}

/// Default radius for end circles: half the clearance.
pub fn default_end_radius(data: &WeierstrassData) -> f64 {
    0.5 * data.points.default_clearance()
}

/// `∫_β dh` over the counter-clockwise circle of radius `r` around an end.
pub fn end_residue(data: &WeierstrassData, which: End, r: f64, nodes: usize) -> Result<(C64, f64)> {
    let c = match which {
        End::E1 => data.points.e1,
        End::E2 => data.points.e2,
    };
    let mut nearest = f64::INFINITY;
    for m in -2..=2 {
        for n in -2..=2 {
            let shift = C64::new(m as f64, 0.0) + data.torus.tau * n as f64;
            for p in data.points.all() {
                let d = (p + shift - c).norm();
                if d > 1e-14 {
                    nearest = nearest.min(d);
                }
            }
        }
    }
    if !(r > 0.0 && r < nearest) {
        return Err(Error::Geometry(alloc::format!("end circle radius {r} reaches another marked point ({nearest})")));
    }
    let (v, err) = integrate_circle(|z| Ok([data.dh(z)]), c, r, nodes)?;
    Ok((v[0], err))
}

fn ratio_im(p1: C64, p2: C64) -> Result<f64> {
    if p2.norm() < 1e-12 {
        return Err(Error::DegeneratePeriod(alloc::format!("gdh period on [tau] vanishes ({p2})")));
    }
    Ok((p1 / p2).im)
}

pub fn compute_report(data: &WeierstrassData, cfg: &PeriodConfig) -> Result<PeriodReport> {
    let c1 = cycle(data, Generator::One, cfg)?;
    let ct = cycle(data, Generator::Tau, cfg)?;
    let (v1, e1) = integrate_forms(data, &c1, &cfg.quad)?;
    let (vt, et) = integrate_forms(data, &ct, &cfg.quad)?;
    let r = default_end_radius(data);
    let (b1, eb1) = end_residue(data, End::E1, r, cfg.circle_nodes)?;
    let (b2, eb2) = end_residue(data, End::E2, r, cfg.circle_nodes)?;
    let two_pi_i = 2.0 * PI * I;
    Ok(PeriodReport {
        period_dh_1: v1[0],
        period_gdh_1: v1[1],
        period_invg_1: v1[2],
        period_dh_tau: vt[0],
        period_gdh_tau: vt[1],
        period_invg_tau: vt[2],
        residue_e1: b1 / two_pi_i,
        residue_e2: b2 / two_pi_i,
        horiz_residual: ratio_im(v1[1], vt[1])?,
        vert_residual: v1[0].re,
        cross_check: (v1[1] - v1[2].conj()).norm(),
        quadrature_error_estimate: e1 + et + eb1 + eb2,
    })
}

/// `Im(P₁/P₂)` for the gdh periods on `[1]` and `[τ]`.
pub fn horizontal_residual(data: &WeierstrassData) -> Result<f64> {
    let cfg = PeriodConfig::default();
    let (v1, _) = integrate_forms(data, &cycle(data, Generator::One, &cfg)?, &cfg.quad)?;
    let (vt, _) = integrate_forms(data, &cycle(data, Generator::Tau, &cfg)?, &cfg.quad)?;
    ratio_im(v1[1], vt[1])
}

/// `Re ∫_B dh`.
pub fn vertical_residual(data: &WeierstrassData) -> Result<f64> {
    let cfg = PeriodConfig::default();
    let (v, _) = integrate_forms(data, &cycle(data, Generator::One, &cfg)?, &cfg.quad)?;
    Ok(v[0].re)
}

/// `|∫_B g dh − conj ∫_B dh/g|`.
pub fn cross_check_hpc(data: &WeierstrassData) -> Result<f64> {
    let cfg = PeriodConfig::default();
    let (v, _) = integrate_forms(data, &cycle(data, Generator::One, &cfg)?, &cfg.quad)?;
    Ok((v[1] - v[2].conj()).norm())
}

/// Result of the bilinear-relation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearCheck {
    pub alpha_1: C64,
    pub alpha_tau: C64,
    /// `(α_τ − α₁τ) / (2πi(1−τ))`, which equals `a + kb`.
    pub result: C64,
    pub defect: f64,
}

/// Periods of `dg/g` on cycles based near the top vertex, whose fundamental
/// parallelogram contains `E₁, E₂, V₁, V₂` themselves, fed through
/// `2πi Σ r_j P_j = α_τ − τ α₁`.
pub fn abel_bilinear_check(data: &WeierstrassData, base_shift: f64) -> Result<BilinearCheck> {
    let t = &data.torus;
    let b = data.points.b;
    let delta = 0.5 * (1.0 - b) + base_shift;
    let z0 = t.top_vertex() + t.half_vertical() * delta;
    let form = PlainForm(|z: C64| Ok([data.dlog_g(z)?]));
    let quad = QuadConfig::default();
    let mut alphas = [C64::new(0.0, 0.0); 2];
    for (slot, step) in alphas.iter_mut().zip([C64::new(1.0, 0.0), t.tau]) {
        let path = DomainPath { vertices: alloc::vec![z0, z0 + step], clearance: 0.0, closed: true, homology: (0, 0) };
        *slot = integrate_path(&form, &path, &z0, &quad)?.value[0];
    }
    let tau = t.tau;
    let result = (alphas[1] - alphas[0] * tau) / (2.0 * PI * I * (1.0 - tau));
    let target = data.points.a + data.k * b;
    Ok(BilinearCheck { alpha_1: alphas[0], alpha_tau: alphas[1], result, defect: (result - target).norm() })
}

/// `Im ∫_A dg/g` along `A`: from `O` to the top vertex `0`, trimmed by `offset`
/// (in units of the half-diagonal) at both ends.
pub fn axis_turning(data: &WeierstrassData, offset: f64) -> Result<C64> {
    let t = &data.torus;
    let from = t.from_frame(0.0, -offset);
    let to = t.from_frame(0.0, -1.0 + offset);
    let form = PlainForm(|z: C64| Ok([data.dlog_g(z)?]));
    let path = DomainPath::open(alloc::vec![from, to], 0.0);
    let r = integrate_path(&form, &path, &from, &QuadConfig::default())?;
    Ok(r.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{make_torus, place_points};
    use crate::weierstrass::build_data;

    fn data(th: f64, k: f64, b: f64) -> WeierstrassData {
        let t = make_torus(th).unwrap();
        let p = place_points(&t, k, b).unwrap();
        build_data(&t, &p).unwrap()
    }

    #[test]
    fn residues_cancel() {
        let d = data(1.8, 1.5, 0.75);
        let r = compute_report(&d, &PeriodConfig::default()).unwrap();
        assert!((r.residue_e1 + r.residue_e2).norm() < 1e-10);
        // scale gives |∫_β dh| = 2πk
        assert!(((2.0 * PI * r.residue_e1).norm() - 2.0 * PI * 1.5).abs() < 1e-9);
    }

    #[test]
    fn end_circle_is_radius_independent() {
        let d = data(1.9, 1.0, 0.63);
        let r = default_end_radius(&d);
        let (a, _) = end_residue(&d, End::E1, r, 64).unwrap();
        let (b, _) = end_residue(&d, End::E1, 0.5 * r, 64).unwrap();
        assert!((a - b).norm() < 1e-9);
        assert!(end_residue(&d, End::E1, 10.0, 64).is_err());
    }

    #[test]
    fn bilinear_relation_recovers_placement() {
        for (th, k, b) in [(1.7205, 1.0, 0.7), (1.8, 2.0, 0.85), (1.8, 2.5, 0.92)] {
            let d = data(th, k, b);
            let c = abel_bilinear_check(&d, 0.0).unwrap();
            assert!(c.defect < 1e-6, "{c:?}");
            let shifted = abel_bilinear_check(&d, 0.1 * (1.0 - b)).unwrap();
            assert!((shifted.result - c.result).norm() < 1e-8);
        }
    }

    #[test]
    fn axis_turning_is_a_phase() {
        let d = data(1.85, 2.0, 0.8);
        let v = axis_turning(&d, 0.0).unwrap();
        assert!(v.re.abs() < 1e-8);
    }
}
