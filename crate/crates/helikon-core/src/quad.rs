//! Adaptive Gauss–Kronrod (7/15) quadrature of holomorphic forms along paths.
//!
//! A form is anything that can carry a continuation state along a straight
//! segment and report coefficients `f(z)` of `f(z) dz` at a state. Panels are
//! visited strictly left to right so the state at every node is obtained by
//! continuing from the start of its panel.

use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::torus::DomainPath;
use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// A form `f(z) dz` with `N` components and a path-continuation state.
pub trait PathForm<const N: usize> {
    type State: Clone;

    fn advance(&self, from: &Self::State, to: C64) -> Result<Self::State>;

    fn coefficients(&self, at: &Self::State) -> Result<[C64; N]>;
}

/// Single-valued form given by a closure; the state is just the point.
pub struct PlainForm<F>(pub F);

impl<F, const N: usize> PathForm<N> for PlainForm<F>
where
    F: Fn(C64) -> Result<[C64; N]>,
{
    type State = C64;

    fn advance(&self, _from: &C64, to: C64) -> Result<C64> {
        Ok(to)
    }

    fn coefficients(&self, at: &C64) -> Result<[C64; N]> {
        (self.0)(*at)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, max_panels: 20_000, max_depth: 48 }
    }
}

impl QuadConfig {
    /// Same rule with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }
}

#[derive(Debug, Clone)]
pub struct Integral<const N: usize, S> {
    pub value: [C64; N],
    pub error: f64,
    pub panels: usize,
    pub end_state: S,
}

fn zero<const N: usize>() -> [C64; N] {
    [C64::new(0.0, 0.0); N]
}

/// Integrates over the straight segment from the state's point to `to`.
pub fn integrate_segment<const N: usize, P: PathForm<N>>(
    form: &P,
    start: &P::State,
    from: C64,
    to: C64,
    cfg: &QuadConfig,
) -> Result<Integral<N, P::State>> {
    let mut value = zero::<N>();
    let mut error = 0.0;
    let mut panels = 0usize;
    let mut failed = false;
    let mut state = start.clone();
    // stack of (a, b, depth); the state at `a` is always `state` when popped
    let mut stack: alloc::vec::Vec<(C64, C64, u32)> = alloc::vec![(from, to, 0)];
    while let Some((a, b, depth)) = stack.pop() {
        panels += 1;
        let mid = (a + b) * 0.5;
        let half = (b - a) * 0.5;
        let mut kron = zero::<N>();
        let mut gauss = zero::<N>();
        for j in 0..8 {
            let nodes: &[f64] = if j == 7 { &[0.0] } else { &[-1.0, 1.0] };
            for &sgn in nodes {
                let z = mid + half * (sgn * XGK[j]);
                let s = form.advance(&state, z)?;
                let f = form.coefficients(&s)?;
                for i in 0..N {
                    kron[i] += f[i] * WGK[j];
                    if j % 2 == 1 {
                        gauss[i] += f[i] * WG[j / 2];
                    }
                }
            }
        }
        let mut err = 0.0f64;
        let mut mag = 0.0f64;
        for i in 0..N {
            kron[i] *= half;
            gauss[i] *= half;
            err = err.max((kron[i] - gauss[i]).norm());
            mag = mag.max(kron[i].norm());
        }
        let accept = err <= cfg.abs_tol || err <= cfg.rel_tol * mag;
        if accept || depth >= cfg.max_depth || panels >= cfg.max_panels {
            if !accept {
                failed = true;
            }
            for i in 0..N {
                value[i] += kron[i];
            }
            error += err;
            state = form.advance(&state, b)?;
        } else {
            stack.push((mid, b, depth + 1));
            stack.push((a, mid, depth + 1));
        }
    }
    if failed {
        return Err(Error::Accuracy { best_error: error });
    }
    Ok(Integral { value, error, panels, end_state: state })
}

/// Integrates along every segment of a polygonal path.
pub fn integrate_path<const N: usize, P: PathForm<N>>(
    form: &P,
    path: &DomainPath,
    start: &P::State,
    cfg: &QuadConfig,
) -> Result<Integral<N, P::State>> {
    let mut value = zero::<N>();
    let mut error = 0.0;
    let mut panels = 0;
    let mut state = start.clone();
    for (a, b) in path.segments() {
        let r = integrate_segment(form, &state, a, b, cfg)?;
        for i in 0..N {
            value[i] += r.value[i];
        }
        error += r.error;
        panels += r.panels;
        state = r.end_state;
    }
    Ok(Integral { value, error, panels, end_state: state })
}

/// Periodic trapezoid rule on the circle `|z − c| = r` (counter-clockwise),
/// returning the `m`-node value and `|I_m − I_{2m}|` as its error estimate.
pub fn integrate_circle<const N: usize, F>(f: F, c: C64, r: f64, m: usize) -> Result<([C64; N], f64)>
where
    F: Fn(C64) -> Result<[C64; N]>,
{
    let rule = |m: usize| -> Result<[C64; N]> {
        let mut acc = zero::<N>();
        for j in 0..m {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
            let z = c + e * r;
            let dz = C64::new(0.0, 1.0) * e * r * (2.0 * PI / m as f64);
            let v = f(z)?;
            for i in 0..N {
                acc[i] += v[i] * dz;
            }
        }
        Ok(acc)
    };
    let coarse = rule(m)?;
    let fine = rule(2 * m)?;
    let mut err = 0.0f64;
    for i in 0..N {
        err = err.max((coarse[i] - fine[i]).norm());
    }
    Ok((fine, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dz_over_unit_step() {
        let f = PlainForm(|_z: C64| Ok([C64::new(1.0, 0.0)]));
        let r =
            integrate_segment(&f, &C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), &QuadConfig::default())
                .unwrap();
        assert!((r.value[0] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn polynomial_along_polyline() {
        let f = PlainForm(|z: C64| Ok([z * z]));
        let path = DomainPath::open(vec![C64::new(0.0, 0.0), C64::new(1.0, 1.0), C64::new(2.0, 0.0)], 0.0);
        let r = integrate_path(&f, &path, &C64::new(0.0, 0.0), &QuadConfig::default()).unwrap();
        assert!((r.value[0] - 8.0 / 3.0).norm() < 1e-13);
    }

    #[test]
    fn circle_residue() {
        let (v, err) = integrate_circle(|z: C64| Ok([(z - 0.1).inv()]), C64::new(0.0, 0.0), 1.0, 64).unwrap();
        assert!((v[0] - C64::new(0.0, 2.0 * PI)).norm() < 1e-13);
        assert!(err < 1e-12);
    }
}
