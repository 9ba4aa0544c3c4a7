//! Flat cone metrics: Gauss–Bonnet bookkeeping, the sectors `S_k` and their
//! exponential limit, the `μ_β` family on the sphere, annulus moduli and
//! developing maps.
//!
//! A finite cone point of index `k` has cone angle `2πk` and local model
//! `|w^{k−1} dw|`; a zero of order `m` of a one-form is index `m + 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::quad::{integrate_path, integrate_segment, PathForm, PlainForm, QuadConfig};
use crate::torus::DomainPath;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConeKind {
    /// Cone angle `2π·k`.
    Finite(f64),
    ExponentialSimple,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    /// `None` is the point at infinity.
    pub position: Option<C64>,
    pub kind: ConeKind,
}

impl ConePoint {
    pub fn finite(position: Option<C64>, k: f64) -> Self {
        Self { position, kind: ConeKind::Finite(k) }
    }

    /// Cone point of a one-form with a zero of order `m` (poles negative).
    pub fn from_order(position: Option<C64>, m: f64) -> Self {
        Self::finite(position, m + 1.0)
    }

    pub fn exponential(position: Option<C64>) -> Self {
        Self { position, kind: ConeKind::ExponentialSimple }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeMetricDesc {
    pub genus: u32,
    pub points: Vec<ConePoint>,
}

/// `Σk_i − (r + 2(genus − 1) + 2ℓ)` for `r` finite and `ℓ` exponential points.
pub fn gauss_bonnet_defect(desc: &ConeMetricDesc) -> f64 {
    let mut sum = 0.0;
    let mut r = 0.0;
    let mut l = 0.0;
    for p in &desc.points {
        match p.kind {
            ConeKind::Finite(k) => {
                sum += k;
                r += 1.0;
            }
            ConeKind::ExponentialSimple => l += 1.0,
        }
    }
    sum - (r + 2.0 * (desc.genus as f64 - 1.0) + 2.0 * l)
}

/// `|dz|` on the sphere: one cone point of angle `−2π` at infinity.
pub fn sphere_flat() -> ConeMetricDesc {
    ConeMetricDesc { genus: 0, points: vec![ConePoint::finite(None, -1.0)] }
}

/// Slit model of the `k = 1` torus: `dζ` with a double zero at the vertex and a double pole at infinity.
pub fn t1_slit() -> ConeMetricDesc {
    ConeMetricDesc {
        genus: 1,
        points: vec![ConePoint::from_order(Some(C64::new(0.0, 0.0)), 2.0), ConePoint::from_order(None, -2.0)],
    }
}

/// Slit torus with `S_{k−1}` sewn in at `ζ = d·i`: `dζ` has a double zero at
/// `v₂`, a zero of order `k − 1` at `e₂ = d·i` and a pole of order `k + 1` at `e₁ = ∞`.
pub fn tkd(k: f64, d: f64) -> ConeMetricDesc {
    ConeMetricDesc {
        genus: 1,
        points: vec![
            ConePoint::from_order(Some(C64::new(0.0, 0.0)), 2.0),
            ConePoint::from_order(Some(C64::new(0.0, d)), k - 1.0),
            ConePoint::from_order(None, -(k + 1.0)),
        ],
    }
}

/// `|(1 + w/k)^{k−1} dw|` on the sphere: angles `2πk` at `−k` and `−2πk` at infinity.
pub fn sector_sk(k: f64) -> ConeMetricDesc {
    ConeMetricDesc {
        genus: 0,
        points: vec![ConePoint::finite(Some(C64::new(-k, 0.0)), k), ConePoint::finite(None, -k)],
    }
}

/// `μ_β`: index `2` at `−1, −2`, index `0` at `1, 2`, exponential at infinity.
pub fn mu_beta_desc() -> ConeMetricDesc {
    ConeMetricDesc {
        genus: 0,
        points: vec![
            ConePoint::from_order(Some(C64::new(-1.0, 0.0)), 1.0),
            ConePoint::from_order(Some(C64::new(-2.0, 0.0)), 1.0),
            ConePoint::from_order(Some(C64::new(1.0, 0.0)), -1.0),
            ConePoint::from_order(Some(C64::new(2.0, 0.0)), -1.0),
            ConePoint::exponential(None),
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkParam {
    Finite(f64),
    Infinite,
}

/// Density of `S_k` per `|dw|`: `|1 + w/k|^{k−1}`, or `|e^w|` in the limit.
pub fn sk_line_element(k: SkParam, w: C64) -> Result<f64> {
    match k {
        SkParam::Infinite => Ok(w.re.exp()),
        SkParam::Finite(k) => {
            let base = (1.0 + w / k).norm();
            if base == 0.0 && k < 1.0 {
                return Err(domain("S_k density evaluated at its pole"));
            }
            Ok(base.powf(k - 1.0))
        }
    }
}

/// `sup_{|w| ≤ radius} |density_k − density_∞|` on a polar grid.
pub fn sk_sup_error(k: f64, radius: f64, rings: usize, spokes: usize) -> Result<f64> {
    let mut sup = 0.0f64;
    for i in 0..=rings {
        let r = radius * i as f64 / rings as f64;
        for j in 0..spokes {
            let w = C64::from_polar(r, 2.0 * PI * j as f64 / spokes as f64);
            let d = sk_line_element(SkParam::Finite(k), w)? - sk_line_element(SkParam::Infinite, w)?;
            sup = sup.max(d.abs());
        }
    }
    Ok(sup)
}

/// `μ_β` density on the real axis.
pub fn mu_beta_density(beta: f64, x: f64) -> f64 {
    ((x + 1.0) * (x + 2.0) / ((x - 1.0) * (x - 2.0))).abs() * (beta * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuBetaLengths {
    /// Length of `(−∞, −2]`.
    pub f: f64,
    /// Length of `[−2, −1]`.
    pub g: f64,
    /// Upper bound of the truncated tail of `f`.
    pub tail_bound: f64,
}

fn real_integral(beta: f64, lo: f64, hi: f64) -> Result<f64> {
    let form = PlainForm(move |z: C64| Ok([C64::new(mu_beta_density(beta, z.re), 0.0)]));
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-13, ..QuadConfig::default() };
    let r = integrate_segment(&form, &C64::new(lo, 0.0), C64::new(lo, 0.0), C64::new(hi, 0.0), &cfg)?;
    Ok(r.value[0].re)
}

/// Lengths of `(−∞, −2]` and `[−2, −1]` in `μ_β`. On `x < −2` the density is
/// below `e^{βx}`, so the tail beyond `X` is at most `e^{βX}/β`.
pub fn mu_beta_lengths(beta: f64) -> Result<MuBetaLengths> {
    if !(beta > 0.0) {
        return Err(domain("mu_beta needs beta > 0"));
    }
    let g = real_integral(beta, -2.0, -1.0)?;
    let chunk = (1.0 / beta).max(1.0);
    let mut f = 0.0;
    let mut hi = -2.0;
    loop {
        let lo = hi - chunk;
        f += real_integral(beta, lo, hi)?;
        hi = lo;
        let tail = (beta * hi).exp() / beta;
        if tail < 1e-12 * f {
            return Ok(MuBetaLengths { f, g, tail_bound: tail });
        }
    }
}

/// `(e^{−β} − e^{−2β}) / β`.
pub fn mu_beta_g_bound(beta: f64) -> f64 {
    ((-beta).exp() - (-2.0 * beta).exp()) / beta
}

/// `log(r₂ / r₁)`.
pub fn annulus_modulus(r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(domain("annulus needs 0 < r1 < r2"));
    }
    Ok((r2 / r1).ln())
}

/// Extremal length of the core-curve family of the annulus.
pub fn annulus_core_extremal_length(r1: f64, r2: f64) -> Result<f64> {
    Ok(1.0 / annulus_modulus(r1, r2)?)
}

/// `F(end) − F(start)` for `F = ∫ω` along the path.
pub fn develop_segment<P: PathForm<1>>(form: &P, path: &DomainPath, start: &P::State) -> Result<C64> {
    Ok(integrate_path(form, path, start, &QuadConfig::default())?.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_bonnet_ledgers_balance() {
        assert_eq!(gauss_bonnet_defect(&sphere_flat()), 0.0);
        assert_eq!(gauss_bonnet_defect(&t1_slit()), 0.0);
        for k in [0.75, 1.0, 2.5, 7.0] {
            assert_eq!(gauss_bonnet_defect(&tkd(k, 0.3)), 0.0);
            assert_eq!(gauss_bonnet_defect(&sector_sk(k)), 0.0);
        }
    }

    #[test]
    fn sk_density_examples() {
        assert_eq!(sk_line_element(SkParam::Finite(3.0), C64::new(0.0, 0.0)).unwrap(), 1.0);
        let v = sk_line_element(SkParam::Finite(1e6), C64::new(1.0, 0.0)).unwrap();
        assert!((v - 1f64.exp()).abs() < 1e-5);
    }

    #[test]
    fn annulus() {
        assert!((annulus_modulus(1.0, 1f64.exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!((annulus_modulus(1.0, 2f64.exp()).unwrap() - 2.0).abs() < 1e-15);
        assert!(annulus_modulus(2.0, 1.0).is_err());
        assert!((annulus_core_extremal_length(1.0, 2f64.exp()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn develop_power_form() {
        let k = 2.5;
        let form = PlainForm(move |z: C64| Ok([z.powf(k - 1.0)]));
        let r = 3.0;
        let path = DomainPath::open(vec![C64::new(1.0, 0.0), C64::new(r, 0.0)], 0.0);
        let v = develop_segment(&form, &path, &C64::new(1.0, 0.0)).unwrap();
        assert!((v.re - (r.powf(k) - 1.0) / k).abs() < 1e-12);
    }
}
