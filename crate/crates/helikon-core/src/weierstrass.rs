//! Weierstrass data on a marked rhombic torus.
//!
//! ```text
//! dh = c · θ(z−V₁)θ(z−V₂) / (θ(z−E₁)θ(z−E₂)) dz
//! g  = ρ e^{iψ} · θ(z−V₂) θ(z−E₂−τ)^k / (θ(z−V₁) θ(z−E₁)^k)
//! ```
//!
//! `c = s·e^{it}` makes `dh` real and positive along the upward axis direction
//! (toward the top vertex `0`) at `O` and scales the end translation to `2πk`;
//! `ρ e^{iψ}` makes `g(O) = 1`. For non-integer `k` the powers are tracked by
//! continuing the logarithm of every theta factor separately along paths.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::elliptic::{theta, theta_eval, theta_prime_zero, Lattice};
use crate::error::{Error, Result};
use crate::quad::PathForm;
use crate::torus::{DomainPath, MarkedPoints, RhombicTorus};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
/// Largest phase change of any factor allowed in one continuation step.
const MAX_STEP_PHASE: f64 = PI / 4.0;
const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassData {
    pub torus: RhombicTorus,
    pub points: MarkedPoints,
    pub k: f64,
    /// `t` in the `e^{it}` factor of `dh`.
    pub phase_t: f64,
    /// Positive factor of `dh` fixing `|∫_β dh| = 2πk`.
    pub dh_scale: f64,
    /// `ρ` in `g`.
    pub rho_scale: f64,
    /// `ψ` in `g`; together with `ρ` gives `g(O) = 1`.
    pub g_phase: f64,
    pub degenerate: bool,
    dh_coeff: C64,
    log_g_norm: C64,
    shifts: [C64; 5],
}

/// Continuation state: the point, the five theta values there and continuous
/// logarithms of the four factors entering `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchState {
    pub point: C64,
    /// `θ(z−V₁), θ(z−V₂), θ(z−E₁), θ(z−E₂), θ(z−E₂−τ)`
    theta: [C64; 5],
    /// continuous `log θ` of `z−V₂, z−E₂−τ, z−V₁, z−E₁`
    logs: [C64; 4],
}

impl BranchState {
    /// Continuous determination of `log g` at the current point.
    pub fn accumulated_log_g(&self, data: &WeierstrassData) -> C64 {
        data.log_g(self)
    }
}

/// The four evaluated forms (coefficients of `dz`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forms {
    pub g: C64,
    pub dh: C64,
    pub gdh: C64,
    pub one_over_g_dh: C64,
}

const LOG_SLOTS: [usize; 4] = [1, 4, 0, 2];

fn raw_thetas(shifts: &[C64; 5], lattice: &Lattice, z: C64) -> [C64; 5] {
    let mut out = [C64::new(0.0, 0.0); 5];
    for (o, s) in out.iter_mut().zip(shifts) {
        *o = theta(z - s, lattice);
    }
    out
}

pub fn build_data(torus: &RhombicTorus, points: &MarkedPoints) -> Result<WeierstrassData> {
    let p = points;
    let k = p.k;
    if ((p.a + k * p.b) - k).abs() > 1e-12 * k.max(1.0) {
        return Err(Error::Contract(format!("placement law a + kb = k violated ({} + {k}·{})", p.a, p.b)));
    }
    let lattice = torus.lattice;
    let shifts = [p.v1, p.v2, p.e1, p.e2, p.e2 + torus.tau];
    let o = torus.center;
    let th = raw_thetas(&shifts, &lattice, o);

    let dh_raw = th[0] * th[1] / (th[2] * th[3]);
    let up = -(1.0 + torus.tau);
    let d = dh_raw * up;
    let phase_t = -d.arg();
    let rot = C64::from_polar(1.0, phase_t);

    // Res_{E₁} of the rotated raw form
    let res = rot * theta(p.e1 - p.v1, &lattice) * theta(p.e1 - p.v2, &lattice)
        / (theta_prime_zero(&lattice) * theta(p.e1 - p.e2, &lattice));
    let degenerate = p.is_degenerate() || res.norm() < 1e-300;
    let dh_scale = if degenerate { 1.0 } else { k / res.norm() };

    let mut logs_o = C64::new(0.0, 0.0);
    let coef = [1.0, k, -1.0, -k];
    for (c, slot) in coef.iter().zip(LOG_SLOTS) {
        logs_o += *c * th[slot].ln();
    }
    let log_g_norm = -logs_o;

    Ok(WeierstrassData {
        torus: *torus,
        points: *points,
        k,
        phase_t,
        dh_scale,
        rho_scale: log_g_norm.re.exp(),
        g_phase: log_g_norm.im,
        degenerate,
        dh_coeff: rot * dh_scale,
        log_g_norm,
        shifts,
    })
}

impl WeierstrassData {
    pub fn lattice(&self) -> &Lattice {
        &self.torus.lattice
    }

    /// State with principal logarithms at `z` (equals the canonical branch at `O`).
    pub fn principal_state(&self, z: C64) -> Result<BranchState> {
        let th = raw_thetas(&self.shifts, self.lattice(), z);
        if th.iter().any(|t| t.norm() == 0.0 || !t.re.is_finite()) {
            return Err(Error::Pole(format!("Weierstrass data evaluated at a marked point ({z})")));
        }
        let mut logs = [C64::new(0.0, 0.0); 4];
        for (l, slot) in logs.iter_mut().zip(LOG_SLOTS) {
            *l = th[slot].ln();
        }
        Ok(BranchState { point: z, theta: th, logs })
    }

    /// Branch with `log g(O) = 0`.
    pub fn origin_state(&self) -> BranchState {
        self.principal_state(self.torus.center).expect("centre is never a marked point")
    }

    /// Continues along the straight segment to `to`, halving steps until every
    /// factor changes phase by less than π/4.
    pub fn advance(&self, from: &BranchState, to: C64) -> Result<BranchState> {
        self.advance_depth(from, to, 0)
    }

    fn advance_depth(&self, from: &BranchState, to: C64, depth: u32) -> Result<BranchState> {
        let th = raw_thetas(&self.shifts, self.lattice(), to);
        if th.iter().any(|t| t.norm() == 0.0) {
            return Err(Error::Pole(format!("continuation hit a zero or pole at {to}")));
        }
        let mut logs = from.logs;
        let mut ok_power = true;
        let mut ok_simple = true;
        for (i, (l, slot)) in logs.iter_mut().zip(LOG_SLOTS).enumerate() {
            let d = (th[slot] / from.theta[slot]).ln();
            if d.im.abs() > MAX_STEP_PHASE {
                if i % 2 == 0 {
                    ok_simple = false;
                } else {
                    ok_power = false;
                }
            }
            *l += d;
        }
        // V factors carry exponent ±1: steps through their zeros are accepted
        if ok_power && (ok_simple || depth >= MAX_HALVINGS) {
            return Ok(BranchState { point: to, theta: th, logs });
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::Pole(format!("continuation step collapsed near {to}")));
        }
        let mid = (from.point + to) * 0.5;
        let m = self.advance_depth(from, mid, depth + 1)?;
        self.advance_depth(&m, to, depth + 1)
    }

    pub fn log_g(&self, s: &BranchState) -> C64 {
        self.log_g_norm + s.logs[0] + self.k * s.logs[1] - s.logs[2] - self.k * s.logs[3]
    }

    /// `dh` coefficient (single-valued).
    pub fn dh(&self, z: C64) -> C64 {
        let th = raw_thetas(&self.shifts, self.lattice(), z);
        self.dh_coeff * th[0] * th[1] / (th[2] * th[3])
    }

    pub fn forms(&self, s: &BranchState) -> Forms {
        let dh = self.dh_coeff * s.theta[0] * s.theta[1] / (s.theta[2] * s.theta[3]);
        let lg = self.log_g(s);
        let g = lg.exp();
        let ginv = (-lg).exp();
        Forms { g, dh, gdh: g * dh, one_over_g_dh: ginv * dh }
    }

    /// `dg/g` coefficient, single-valued.
    pub fn dlog_g(&self, z: C64) -> Result<C64> {
        let l = self.lattice();
        let psi = |s: C64| -> Result<C64> {
            let e = theta_eval(z - s, l);
            if e.value.norm() == 0.0 {
                return Err(Error::Pole(format!("dg/g at a marked point ({z})")));
            }
            Ok(e.derivative / e.value)
        };
        let s = &self.shifts;
        Ok(psi(s[1])? + self.k * psi(s[4])? - psi(s[0])? - self.k * psi(s[2])?)
    }

    /// Distance from `z` to the nearest lattice translate of a marked point.
    pub fn marked_distance(&self, z: C64) -> f64 {
        let mut best = f64::INFINITY;
        for m in -2..=2 {
            for n in -2..=2 {
                let shift = C64::new(m as f64, 0.0) + self.torus.tau * n as f64;
                for p in self.points.all() {
                    best = best.min((z - p - shift).norm());
                }
            }
        }
        best
    }

    /// Continuation along a path; the returned trace holds the state at every vertex.
    pub fn continue_g(&self, path: &DomainPath, start: &BranchState) -> Result<Vec<BranchState>> {
        let mut out = Vec::with_capacity(path.vertices.len());
        let mut s = *start;
        if (s.point - path.start()).norm() > 1e-14 {
            s = self.advance(&s, path.start())?;
        }
        out.push(s);
        for &v in &path.vertices[1..] {
            s = self.advance(&s, v)?;
            out.push(s);
        }
        Ok(out)
    }
}

/// Checked evaluation: rejects points closer than `clearance / 10` to a marked point.
pub fn eval_forms(data: &WeierstrassData, z: C64, branch: &BranchState, clearance: f64) -> Result<Forms> {
    if data.marked_distance(z) < clearance / 10.0 {
        return Err(Error::Pole(format!("evaluation too close to a marked point ({z})")));
    }
    if (branch.point - z).norm() > 1e-12 {
        return Err(Error::Contract(format!("branch state sits at {} not {z}", branch.point)));
    }
    Ok(data.forms(branch))
}

/// `ds = |g dh| + |dh/g|` per unit `|dz|`.
pub fn metric_ds(data: &WeierstrassData, branch: &BranchState) -> Result<f64> {
    if data.marked_distance(branch.point) < 1e-12 {
        return Err(Error::Pole(format!("metric at a marked point ({})", branch.point)));
    }
    let f = data.forms(branch);
    Ok(f.gdh.norm() + f.one_over_g_dh.norm())
}

/// `[dh, g dh, dh/g]` along paths with branch tracking.
pub struct WeierstrassForms<'a>(pub &'a WeierstrassData);

impl PathForm<3> for WeierstrassForms<'_> {
    type State = BranchState;

    fn advance(&self, from: &BranchState, to: C64) -> Result<BranchState> {
        self.0.advance(from, to)
    }

    fn coefficients(&self, at: &BranchState) -> Result<[C64; 3]> {
        let f = self.0.forms(at);
        Ok([f.dh, f.gdh, f.one_over_g_dh])
    }
}

/// Reference helicoid `g = i z^k`, `dh = k i dz / z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelicoidData {
    pub k: f64,
}

/// Point together with a continuous `log z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogState {
    pub point: C64,
    pub log: C64,
}

pub fn helicoid_data(k: f64) -> Result<HelicoidData> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("helicoid twist must be positive, got {k}")));
    }
    Ok(HelicoidData { k })
}

impl HelicoidData {
    pub fn g(&self, s: &LogState) -> C64 {
        I * (self.k * s.log).exp()
    }

    pub fn dh(&self, z: C64) -> Result<C64> {
        if z.norm() == 0.0 {
            return Err(Error::Pole("helicoid dh at the origin".into()));
        }
        Ok(I * self.k / z)
    }

    /// `X` with `2(x₁+ix₂) = z^{−k} − z̄^k`, `x₃ = −k arg z` (so `X(1) = 0`).
    pub fn immersion(&self, s: &LogState) -> [f64; 3] {
        let zk = (self.k * s.log).exp();
        let h = (zk.inv() - zk.conj()) * 0.5;
        [h.re, h.im, -self.k * s.log.im]
    }

    pub fn start(&self, z: C64) -> Result<LogState> {
        if z.norm() == 0.0 {
            return Err(Error::Pole("helicoid at the origin".into()));
        }
        Ok(LogState { point: z, log: z.ln() })
    }
}

impl PathForm<3> for HelicoidData {
    type State = LogState;

    fn advance(&self, from: &LogState, to: C64) -> Result<LogState> {
        if to.norm() == 0.0 {
            return Err(Error::Pole("helicoid continuation through the origin".into()));
        }
        let d = (to / from.point).ln();
        if d.im.abs() <= MAX_STEP_PHASE {
            return Ok(LogState { point: to, log: from.log + d });
        }
        let mid = (from.point + to) * 0.5;
        let m = self.advance(from, mid)?;
        self.advance(&m, to)
    }

    fn coefficients(&self, at: &LogState) -> Result<[C64; 3]> {
        let dh = self.dh(at.point)?;
        let g = self.g(at);
        Ok([dh, g * dh, dh / g])
    }
}

/// `X` increment from the integrals `[∫dh, ∫g dh, ∫dh/g]`.
pub fn immersion_increment(v: &[C64; 3]) -> [f64; 3] {
    let (h, p, q) = (v[0], v[1], v[2]);
    [(0.5 * (p - q)).re, (I * 0.5 * (p + q)).re, h.re]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{make_torus, place_points};

    fn data(th: f64, k: f64, b: f64) -> WeierstrassData {
        let t = make_torus(th).unwrap();
        let p = place_points(&t, k, b).unwrap();
        build_data(&t, &p).unwrap()
    }

    #[test]
    fn normalisations_at_centre() {
        let d = data(1.7205, 1.0, 0.7);
        let f = d.forms(&d.origin_state());
        assert!((f.g - 1.0).norm() < 1e-12);
        assert!((f.gdh - f.dh).norm() < 1e-12 && (f.one_over_g_dh - f.dh).norm() < 1e-12);
        let up = -(1.0 + d.torus.tau);
        let v = f.dh * up;
        assert!(v.im.abs() < 1e-12 * v.norm() && v.re > 0.0);
    }

    #[test]
    fn dh_is_real_along_the_vertical_diagonal() {
        let d = data(1.7205, 1.0, 0.7);
        let up = -(1.0 + d.torus.tau);
        for j in 1..50 {
            let z = (1.0 + d.torus.tau) * (j as f64 / 50.0);
            let v = d.dh(z) * up;
            assert!(v.im.abs() < 1e-10 * v.norm().max(1.0), "j={j} v={v}");
        }
    }

    #[test]
    fn g_unitary_on_axis_and_g_squared_real_on_horizontal() {
        let d = data(1.9, 1.5, 0.75);
        let o = d.origin_state();
        for j in 1..50 {
            let s = j as f64 / 50.0;
            let z = d.torus.from_frame(0.0, -0.98 * s);
            let st = d.advance(&o, z).unwrap();
            assert!((d.forms(&st).g.norm() - 1.0).abs() < 1e-8);
            let z = d.torus.from_frame(0.6 * s - 0.3 + 0.01, 0.0);
            let st = d.advance(&o, z).unwrap();
            let g2 = d.forms(&st).g.powi(2);
            assert!(g2.im.abs() < 1e-8 * g2.norm(), "{g2}");
        }
    }

    #[test]
    fn small_loop_around_v2_winds_once() {
        let d = data(1.9, 2.5, 0.92);
        let o = d.origin_state();
        let c = d.points.v2;
        let r = 0.3 * d.points.min_pairwise_distance();
        let mut s = d.advance(&o, c + r).unwrap();
        let l0 = d.log_g(&s);
        for j in 1..=64 {
            s = d.advance(&s, c + C64::from_polar(r, 2.0 * PI * j as f64 / 64.0)).unwrap();
        }
        let dl = d.log_g(&s) - l0;
        assert!((dl - 2.0 * PI * I).norm() < 1e-10);
    }

    #[test]
    fn integer_k_is_one_periodic() {
        let d = data(1.8, 2.0, 0.8);
        let z = C64::new(0.41, 0.23);
        let a = d.principal_state(z).unwrap();
        let b = d.principal_state(z + 1.0).unwrap();
        let ga = d.forms(&a).g;
        let gb = d.forms(&b).g;
        assert!((ga - gb).norm() < 1e-10 * ga.norm());
    }

    #[test]
    fn helicoid_closed_form_at_one() {
        let h = helicoid_data(1.0).unwrap();
        let s = h.start(C64::new(1.0, 0.0)).unwrap();
        assert_eq!(h.immersion(&s), [0.0, 0.0, 0.0]);
        let h2 = helicoid_data(2.0).unwrap();
        let s = h2.start(C64::from_polar(1.0, PI / 4.0)).unwrap();
        assert!((h2.immersion(&s)[2] + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_placement_is_constructible() {
        let d = data(1.9, 1.0, 0.5);
        assert!(d.degenerate);
        let f = d.forms(&d.origin_state());
        assert!(f.dh.norm().is_finite());
    }
}
