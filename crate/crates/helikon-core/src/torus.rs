//! Marked rhombic tori and puncture-avoiding cycles.
//!
//! The torus is `ℂ / {1, τ}` with `τ = e^{iθ}` and centre `O = (1+τ)/2`.
//! The vertical diagonal runs `0 → 1+τ`, the horizontal one `1 → τ`; the
//! top vertex of the rhombus is `0`. Frame coordinates `(u, v)` are defined by
//! `z = O + u·(1−τ)/2 + v·(1+τ)/2`, so the horizontal diagonal is `v = 0`,
//! `|u| ≤ 1` and the lattice is `{(p, q) : p + q even}`.
//!
//! The branch cut for non-integer `k` is the part of the horizontal diagonal
//! from `E₂` through the vertex to `E₁`: on the line `v = n` it is
//! `|u − n| ≥ b` with `u − n` reduced mod 2.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::elliptic::Lattice;
use crate::error::{domain, Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhombicTorus {
    pub theta_angle: f64,
    pub tau: C64,
    pub center: C64,
    pub lattice: Lattice,
}

impl RhombicTorus {
    /// `(1 − τ)/2`: unit step of `u`, from `O` toward vertex `1`.
    pub fn half_horizontal(&self) -> C64 {
        (1.0 - self.tau) * 0.5
    }

    /// `(1 + τ)/2`: unit step of `v`, from `O` toward vertex `1 + τ`.
    pub fn half_vertical(&self) -> C64 {
        (1.0 + self.tau) * 0.5
    }

    /// Endpoints of the vertical diagonal `0 → 1+τ`.
    pub fn vertical_diagonal(&self) -> (C64, C64) {
        (C64::new(0.0, 0.0), 1.0 + self.tau)
    }

    /// Endpoints of the horizontal diagonal `1 → τ`.
    pub fn horizontal_diagonal(&self) -> (C64, C64) {
        (C64::new(1.0, 0.0), self.tau)
    }

    pub fn top_vertex(&self) -> C64 {
        C64::new(0.0, 0.0)
    }

    pub fn to_frame(&self, z: C64) -> (f64, f64) {
        let d = z - self.center;
        let h = self.half_horizontal();
        let w = self.half_vertical();
        // d = u h + v w, solved as a real 2×2 system.
        let det = h.re * w.im - h.im * w.re;
        let u = (d.re * w.im - d.im * w.re) / det;
        let v = (h.re * d.im - h.im * d.re) / det;
        (u, v)
    }

    pub fn from_frame(&self, u: f64, v: f64) -> C64 {
        self.center + self.half_horizontal() * u + self.half_vertical() * v
    }

    pub fn generator(&self, which: Generator) -> C64 {
        match which {
            Generator::One => C64::new(1.0, 0.0),
            Generator::Tau => self.tau,
        }
    }
}

pub fn make_torus(theta_angle: f64) -> Result<RhombicTorus> {
    let lattice = Lattice::rhombic(theta_angle)?;
    let tau = lattice.tau;
    Ok(RhombicTorus { theta_angle, tau, center: (1.0 + tau) * 0.5, lattice })
}

/// Ends `E₁, E₂` and vertical points `V₁, V₂` on the horizontal diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkedPoints {
    pub k: f64,
    pub b: f64,
    pub a: f64,
    pub e1: C64,
    pub e2: C64,
    pub v1: C64,
    pub v2: C64,
}

impl MarkedPoints {
    pub fn all(&self) -> [C64; 4] {
        [self.e1, self.e2, self.v1, self.v2]
    }

    /// Ends coincide with vertical points.
    pub fn is_degenerate(&self) -> bool {
        (self.a - self.b).abs() < 1e-12
    }

    /// `0 < a < k/(k+1) < b < 1`.
    pub fn is_admissible(&self) -> bool {
        let m = self.k / (self.k + 1.0);
        0.0 < self.a && self.a < m && m < self.b && self.b < 1.0
    }

    pub fn min_pairwise_distance(&self) -> f64 {
        let p = self.all();
        let mut m = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                let d = (p[i] - p[j]).norm();
                if d > 1e-14 {
                    m = m.min(d);
                }
            }
        }
        m
    }

    /// `0.02 ×` the minimal nonzero pairwise distance.
    pub fn default_clearance(&self) -> f64 {
        0.02 * self.min_pairwise_distance()
    }
}

pub fn place_points(torus: &RhombicTorus, k: f64, b: f64) -> Result<MarkedPoints> {
    if !(k > 0.5) {
        return Err(Error::Placement(format!("k must exceed 1/2, got {k}")));
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::Placement(format!("b must lie in (0, 1), got {b}")));
    }
    let a = k * (1.0 - b);
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Placement(format!("a = k(1-b) = {a} leaves (0, 1); need b > {}", (k - 1.0) / k)));
    }
    let h = torus.half_horizontal();
    let o = torus.center;
    Ok(MarkedPoints { k, b, a, e1: o - h * b, e2: o + h * b, v1: o - h * a, v2: o + h * a })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    One,
    Tau,
}

/// Polygonal path in the universal cover.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPath {
    pub vertices: Vec<C64>,
    pub clearance: f64,
    pub closed: bool,
    /// `(m, n)`: class `m·[1] + n·[τ]` of a closed path.
    pub homology: (i32, i32),
}

impl DomainPath {
    pub fn open(vertices: Vec<C64>, clearance: f64) -> Self {
        Self { vertices, clearance, closed: false, homology: (0, 0) }
    }

    pub fn segments(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn start(&self) -> C64 {
        self.vertices[0]
    }

    pub fn end(&self) -> C64 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_point_distance(a: C64, b: C64, p: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Lattice translates of the marked points within reach of the segment.
fn nearby_translates(torus: &RhombicTorus, points: &MarkedPoints, a: C64, b: C64) -> Vec<C64> {
    let mut out = Vec::new();
    let reach = (b - a).norm() + 2.0;
    let mid = (a + b) * 0.5;
    for m in -4..=4 {
        for n in -4..=4 {
            let shift = C64::new(m as f64, 0.0) + torus.tau * n as f64;
            for p in points.all() {
                let q = p + shift;
                if (q - mid).norm() <= reach {
                    out.push(q);
                }
            }
        }
    }
    out
}

/// Whether the segment crosses (or touches) a translate of the branch cut.
pub fn crosses_cut(torus: &RhombicTorus, b: f64, s0: C64, s1: C64) -> bool {
    let (u0, v0) = torus.to_frame(s0);
    let (u1, v1) = torus.to_frame(s1);
    let (lo, hi) = if v0 <= v1 { (v0, v1) } else { (v1, v0) };
    let mut n = lo.ceil() as i64;
    while (n as f64) <= hi {
        let nf = n as f64;
        let check = |u: f64| -> bool {
            let r = num_traits::Euclid::rem_euclid(&(u - nf), &2.0);
            let r = if r > 1.0 { r - 2.0 } else { r };
            r.abs() >= b - 1e-14
        };
        if (v1 - v0).abs() < 1e-14 {
            // running along the line itself
            if check(u0) || check(u1) || check(0.5 * (u0 + u1)) {
                return true;
            }
        } else if check(u0 + (u1 - u0) * (nf - v0) / (v1 - v0)) {
            return true;
        }
        n += 1;
    }
    false
}

/// Straight representative of `[1]` or `[τ]` anchored at `O`.
pub fn generator_cycle(
    torus: &RhombicTorus,
    points: &MarkedPoints,
    which: Generator,
    clearance: f64,
) -> Result<DomainPath> {
    generator_cycle_at(torus, points, which, clearance, torus.center)
}

/// Representative of `[1]` or `[τ]` starting at `anchor`, with rectangular
/// detours around marked points closer than `clearance`.
pub fn generator_cycle_at(
    torus: &RhombicTorus,
    points: &MarkedPoints,
    which: Generator,
    clearance: f64,
    anchor: C64,
) -> Result<DomainPath> {
    let min_d = points.min_pairwise_distance();
    if !(clearance > 0.0) || clearance >= 0.5 * min_d {
        return Err(Error::Geometry(format!(
            "clearance {clearance} must be positive and below half the marked-point spacing {min_d}"
        )));
    }
    let step = torus.generator(which);
    let end = anchor + step;
    let dir = step / step.norm();
    let normal = dir * C64::new(0.0, 1.0);

    let mut blockers: Vec<(f64, C64)> = nearby_translates(torus, points, anchor, end)
        .into_iter()
        .filter(|&p| segment_point_distance(anchor, end, p) < clearance)
        .map(|p| (((p - anchor) * dir.conj()).re, p))
        .collect();
    blockers.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut vertices = vec![anchor];
    let pad = 2.0 * clearance;
    for (t, p) in blockers {
        if t - pad <= 0.0 || t + pad >= step.norm() {
            return Err(Error::Geometry(format!("marked point {p} sits at a cycle endpoint")));
        }
        let side = ((p - anchor) * normal.conj()).re;
        let away = if side > 0.0 { -normal } else { normal };
        let foot = anchor + dir * t;
        vertices.push(foot - dir * pad);
        vertices.push(foot - dir * pad + away * pad);
        vertices.push(foot + dir * pad + away * pad);
        vertices.push(foot + dir * pad);
    }
    vertices.push(end);

    let path = DomainPath {
        vertices,
        clearance,
        closed: true,
        homology: match which {
            Generator::One => (1, 0),
            Generator::Tau => (0, 1),
        },
    };
    check_path(torus, points, &path, false)?;
    Ok(path)
}

/// Verifies clearance and, unless `allow_cut` is set, that the cut is never crossed.
pub fn check_path(torus: &RhombicTorus, points: &MarkedPoints, path: &DomainPath, allow_cut: bool) -> Result<()> {
    for (s0, s1) in path.segments() {
        for p in nearby_translates(torus, points, s0, s1) {
            if segment_point_distance(s0, s1, p) < path.clearance * (1.0 - 1e-12) {
                return Err(Error::Geometry(format!("path segment passes within clearance of {p}")));
            }
        }
        if !allow_cut && crosses_cut(torus, points.b, s0, s1) {
            return Err(Error::Geometry(format!("segment {s0} -> {s1} crosses the branch cut")));
        }
    }
    Ok(())
}

/// Images of `z` under the half-turn `ρ` and the reflections in the diagonals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryImages {
    pub rho: C64,
    pub mu_v: C64,
    pub mu_h: C64,
}

fn reflect(z: C64, through: C64, along: C64) -> C64 {
    let e = along / along.norm();
    through + e * e * (z - through).conj()
}

pub fn symmetry_images(torus: &RhombicTorus, z: C64) -> SymmetryImages {
    let o = torus.center;
    SymmetryImages {
        rho: 2.0 * o - z,
        mu_v: reflect(z, o, torus.half_vertical()),
        mu_h: reflect(z, o, torus.half_horizontal()),
    }
}

/// Reflection in the vertical diagonal line.
pub fn mu_v(torus: &RhombicTorus, z: C64) -> C64 {
    reflect(z, torus.center, torus.half_vertical())
}

/// Reflection in the horizontal diagonal line.
pub fn mu_h(torus: &RhombicTorus, z: C64) -> C64 {
    reflect(z, torus.center, torus.half_horizontal())
}

/// Checks an angle for the rhombic range.
pub fn validate_angle(theta_angle: f64) -> Result<()> {
    if theta_angle > 0.0 && theta_angle < PI {
        Ok(())
    } else {
        Err(domain(format!("angle {theta_angle} outside (0, pi)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_torus() {
        let t = make_torus(PI / 2.0).unwrap();
        assert!((t.tau - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((t.center - C64::new(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn frame_round_trip() {
        let t = make_torus(1.9).unwrap();
        let z = C64::new(0.37, -0.21);
        let (u, v) = t.to_frame(z);
        assert!((t.from_frame(u, v) - z).norm() < 1e-14);
        let (u, v) = t.to_frame(C64::new(1.0, 0.0));
        assert!((u - 1.0).abs() < 1e-14 && v.abs() < 1e-14);
        let (u, v) = t.to_frame(C64::new(0.0, 0.0));
        assert!(u.abs() < 1e-14 && (v + 1.0).abs() < 1e-14);
    }

    #[test]
    fn placement_examples() {
        let t = make_torus(1.9).unwrap();
        let p = place_points(&t, 1.0, 0.7).unwrap();
        assert!((p.a - 0.3).abs() < 1e-15 && (p.a + p.b - 1.0).abs() < 1e-15);
        let p = place_points(&t, 2.0, 0.9).unwrap();
        assert!((p.a - 0.2).abs() < 1e-12 && p.is_admissible());
        let p = place_points(&t, 1.0, 0.5).unwrap();
        assert!(p.is_degenerate() && (p.e1 - p.v1).norm() < 1e-15);
        assert!(place_points(&t, 2.0, 0.4).is_err());
        assert!(place_points(&t, 0.4, 0.9).is_err());
    }

    #[test]
    fn straight_generators_avoid_the_cut() {
        let t = make_torus(1.9).unwrap();
        let p = place_points(&t, 1.0, 0.63).unwrap();
        let c = p.default_clearance();
        for which in [Generator::One, Generator::Tau] {
            let path = generator_cycle(&t, &p, which, c).unwrap();
            assert_eq!(path.vertices.len(), 2);
            assert!((path.end() - path.start() - t.generator(which)).norm() < 1e-15);
        }
    }

    #[test]
    fn cut_detection() {
        let t = make_torus(1.9).unwrap();
        // a [τ] step based near the vertex crosses the cut, one based at O does not
        let near_vertex = t.from_frame(0.0, -0.95);
        assert!(crosses_cut(&t, 0.7, near_vertex, near_vertex + t.tau));
        assert!(!crosses_cut(&t, 0.7, t.center, t.center + t.tau));
    }

    #[test]
    fn detour_is_inserted() {
        let t = make_torus(1.9).unwrap();
        let p = place_points(&t, 1.0, 0.7).unwrap();
        // anchor placed so the [1] segment grazes a translate of V₂
        let anchor = p.v2 - C64::new(0.4, 0.0) + C64::new(0.0, 1e-4);
        let c = p.default_clearance();
        let path = generator_cycle_at(&t, &p, Generator::One, c, anchor).unwrap();
        assert!(path.vertices.len() > 2);
    }

    #[test]
    fn symmetries_fix_centre_and_swap_ends() {
        let t = make_torus(1.8).unwrap();
        let p = place_points(&t, 1.5, 0.75).unwrap();
        let s = symmetry_images(&t, t.center);
        for z in [s.rho, s.mu_v, s.mu_h] {
            assert!((z - t.center).norm() < 1e-15);
        }
        assert!((symmetry_images(&t, p.e1).rho - p.e2).norm() < 1e-15);
        // E's lie on the horizontal diagonal, so μ_h fixes them
        assert!((mu_h(&t, p.e1) - p.e1).norm() < 1e-14);
        assert!((mu_v(&t, p.e1) - p.e2).norm() < 1e-14);
    }
}
