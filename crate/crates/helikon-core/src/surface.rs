//! Immersion of the fundamental domain, screw-motion tiling and geometric checks.
//!
//! The torus is sampled on the grid `z = (i + jτ)/n` and triangulated along
//! anti-diagonals, so the horizontal-diagonal loop `i + j ≡ 0 (mod n)` is a
//! union of edges. Nodes on the cut part of that loop are doubled, one copy per
//! side, and nodes within `end_cutoff` of an end are dropped. `X` is integrated
//! from `O` along a breadth-first spanning tree of grid edges; a second,
//! depth-first tree measures path independence.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Euclid;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::periods::{compute_report, default_end_radius, end_residue, End, PeriodConfig};
use crate::quad::{integrate_segment, PathForm, QuadConfig};
use crate::weierstrass::{immersion_increment, metric_ds, HelicoidData, LogState, WeierstrassData, WeierstrassForms};
use crate::C64;

pub type Vec3 = [f64; 3];

/// Bit flags stored in [`Mesh::boundary_tags`].
pub mod tags {
    /// Vertical diagonal.
    pub const AXIS: u8 = 1;
    /// Horizontal diagonal between the ends, through `O`.
    pub const GAP: u8 = 2;
    /// Cut part of the horizontal diagonal, side of larger `v`.
    pub const CUT_PLUS: u8 = 4;
    pub const CUT_MINUS: u8 = 8;
    /// Next to a removed end disk.
    pub const RIM: u8 = 16;
    /// Moved off a zero of `dh`.
    pub const NUDGED: u8 = 32;
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Source point of every vertex in the parameter domain.
    pub domain_uv: Vec<C64>,
    pub boundary_tags: Vec<u8>,
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

impl Mesh {
    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|i| self.vertices[i]);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    /// Bounding-box diagonal.
    pub fn diameter(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        norm(sub(hi, lo))
    }

    /// Finite coordinates, valid indices, no face of area below `1e-14`.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.domain_uv.len() != n || self.boundary_tags.len() != n {
            return Err(Error::Geometry("per-vertex arrays differ in length".into()));
        }
        if let Some(i) = self.vertices.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::Geometry(format!("vertex {i} is not finite")));
        }
        for (f, face) in self.faces.iter().enumerate() {
            if face.iter().any(|&i| i >= n) {
                return Err(Error::Geometry(format!("face {f} indexes past the vertex list")));
            }
            if self.face_area(f) <= 1e-14 {
                return Err(Error::Geometry(format!("face {f} has zero area")));
            }
        }
        Ok(())
    }

    /// Unique undirected edges, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }
}

/// Rotation by `angle` about the `x₃` axis followed by translation by `translation` along it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewMotion {
    pub angle: f64,
    pub translation: f64,
}

impl ScrewMotion {
    pub fn apply(&self, p: Vec3) -> Vec3 {
        let (s, c) = self.angle.sin_cos();
        [c * p[0] - s * p[1], s * p[0] + c * p[1], p[2] + self.translation]
    }

    pub fn power(&self, j: i32) -> Self {
        Self { angle: self.angle * j as f64, translation: self.translation * j as f64 }
    }
}

/// Concatenation of `σ^j(mesh)` for `j = 0..copies`.
pub fn apply_screw(mesh: &Mesh, screw: &ScrewMotion, copies: usize) -> Result<Mesh> {
    if copies == 0 {
        return Err(Error::Domain("at least one copy is required".into()));
    }
    let nv = mesh.vertices.len();
    let mut out = Mesh::default();
    for j in 0..copies {
        let s = screw.power(j as i32);
        out.vertices.extend(mesh.vertices.iter().map(|&p| s.apply(p)));
        out.faces.extend(mesh.faces.iter().map(|f| f.map(|i| i + j * nv)));
        out.domain_uv.extend_from_slice(&mesh.domain_uv);
        out.boundary_tags.extend_from_slice(&mesh.boundary_tags);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshConfig {
    /// Grid size `n` (even, at least 8).
    pub resolution: usize,
    pub end_cutoff: f64,
    pub quad: QuadConfig,
    /// Largest period residual accepted as solved.
    pub residual_tol: f64,
    pub allow_unsolved: bool,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            end_cutoff: 0.05,
            quad: QuadConfig { abs_tol: 1e-12, rel_tol: 1e-13, ..QuadConfig::default() },
            residual_tol: 1e-6,
            allow_unsolved: false,
        }
    }
}

/// An immersed parameter domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub mesh: Mesh,
    /// Vertex pairs glued by the screw motion: `(plus side, minus side)`.
    pub seams: Vec<(usize, usize)>,
    /// Largest vertex-wise difference between the two spanning trees.
    pub path_independence: f64,
    /// Sum of quadrature error estimates along the main tree.
    pub quadrature_error: f64,
    /// Grid size, or 0 for surfaces not built on the torus grid.
    pub resolution: usize,
    pub end_cutoff: f64,
    /// Vertex ids of torus grid node `j·n + i`, plus copy first.
    pub node_ids: Vec<[Option<usize>; 2]>,
}

/// Lattice distance from `z` to `p`.
fn torus_distance(data: &WeierstrassData, z: C64, p: C64) -> f64 {
    let t = &data.torus;
    let mut best = f64::INFINITY;
    for m in -2..=2 {
        for n in -2..=2 {
            best = best.min((z - p - (C64::new(m as f64, 0.0) + t.tau * n as f64)).norm());
        }
    }
    best
}

/// `u` on the nearest horizontal-diagonal line, in `(−1, 1]`, and whether `z` lies on it.
fn loop_coordinate(data: &WeierstrassData, z: C64) -> (f64, bool) {
    let (u, v) = data.torus.to_frame(z);
    let m = v.round();
    let r = Euclid::rem_euclid(&(u - m), &2.0);
    let r = if r > 1.0 { r - 2.0 } else { r };
    (r, (v - m).abs() < 1e-9)
}

/// Spanning-tree integration of `[dh, gdh, dh/g]` over a graph whose edges
/// carry their displacement in the universal cover.
fn tree_integrate<P: PathForm<3>>(
    form: &P,
    adj: &[Vec<(usize, C64)>],
    root: usize,
    root_state: (C64, P::State, Vec3),
    depth_first: bool,
    quad: &QuadConfig,
) -> Result<(Vec<Vec3>, f64)> {
    let nv = adj.len();
    let mut x: Vec<Option<Vec3>> = vec![None; nv];
    let mut st: Vec<Option<(C64, P::State)>> = vec![None; nv];
    let (p0, s0, x0) = root_state;
    x[root] = Some(x0);
    st[root] = Some((p0, s0));
    let mut queue = VecDeque::from([root]);
    let mut err = 0.0;
    loop {
        let a = if depth_first { queue.pop_back() } else { queue.pop_front() };
        let Some(a) = a else { break };
        let (pa, sa) = st[a].clone().expect("queued vertices are reached");
        let xa = x[a].expect("queued vertices are reached");
        let order: Vec<&(usize, C64)> =
            if depth_first { adj[a].iter().rev().collect() } else { adj[a].iter().collect() };
        for &(b, d) in order {
            if x[b].is_some() {
                continue;
            }
            let r = integrate_segment(form, &sa, pa, pa + d, quad)?;
            err += r.error;
            x[b] = Some(add(xa, immersion_increment(&r.value)));
            st[b] = Some((pa + d, r.end_state));
            queue.push_back(b);
        }
    }
    let mut out = Vec::with_capacity(nv);
    for (i, v) in x.into_iter().enumerate() {
        out.push(v.ok_or_else(|| Error::Geometry(format!("vertex {i} is not connected to the base point")))?);
    }
    Ok((out, err))
}

fn max_deviation(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(p, q)| norm(sub(*p, *q))).fold(0.0, f64::max)
}

/// Integrates the immersion over the punctured, slit fundamental domain.
pub fn immerse(data: &WeierstrassData, cfg: &MeshConfig) -> Result<Surface> {
    let n = cfg.resolution;
    if n < 8 || n % 2 == 1 {
        return Err(Error::Contract(format!("resolution must be even and at least 8, got {n}")));
    }
    if data.degenerate {
        return Err(Error::Contract("degenerate data has no surface".into()));
    }
    if !cfg.allow_unsolved {
        let r = compute_report(data, &PeriodConfig::default())?;
        if r.horiz_residual.abs() >= cfg.residual_tol || r.vert_residual.abs() >= cfg.residual_tol {
            return Err(Error::Contract(format!(
                "data is not a solution (horizontal {:e}, vertical {:e})",
                r.horiz_residual, r.vert_residual
            )));
        }
    }
    let t = &data.torus;
    let pts = &data.points;
    let b = pts.b;
    let step = (1.0 - t.tau).norm() / n as f64;
    if cfg.end_cutoff <= 0.5 * step {
        return Err(Error::Geometry(format!(
            "end cutoff {} is below half a diagonal step {}",
            cfg.end_cutoff,
            0.5 * step
        )));
    }
    let sep = [pts.e2, pts.v1, pts.v2].iter().map(|&p| torus_distance(data, pts.e1, p)).fold(f64::INFINITY, f64::min);
    let sep = sep.min([pts.v1, pts.v2].iter().map(|&p| torus_distance(data, pts.e2, p)).fold(f64::INFINITY, f64::min));
    if cfg.end_cutoff >= 0.5 * sep {
        return Err(Error::Geometry(format!(
            "end cutoff {} reaches past half the end separation {sep}",
            cfg.end_cutoff
        )));
    }

    struct Node {
        z: C64,
        removed: bool,
        cut: bool,
        tag: u8,
    }
    let up = (1.0 + t.tau) / (1.0 + t.tau).norm();
    let mut nodes = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let mut z = (C64::new(i as f64, 0.0) + t.tau * j as f64) / n as f64;
            let removed =
                torus_distance(data, z, pts.e1) < cfg.end_cutoff || torus_distance(data, z, pts.e2) < cfg.end_cutoff;
            let on_loop = (i + j) % n == 0;
            let (r, _) = loop_coordinate(data, z);
            let cut = on_loop && r.abs() >= b;
            let mut tag = 0;
            if i == j {
                tag |= tags::AXIS;
            }
            if on_loop && !cut {
                tag |= tags::GAP;
            }
            if torus_distance(data, z, pts.v1).min(torus_distance(data, z, pts.v2)) < 1e-9 {
                z += up * (1e-6 * step);
                tag |= tags::NUDGED;
            }
            nodes.push(Node { z, removed, cut, tag });
        }
    }
    let near_end = |i: usize, j: usize| -> bool {
        [(1, 0), (0, 1), (n - 1, 0), (0, n - 1), (1, n - 1), (n - 1, 1)]
            .iter()
            .any(|&(di, dj)| nodes[((j + dj) % n) * n + (i + di) % n].removed)
    };

    // faces keyed by (node, side) before ids are assigned
    let mut keyed: Vec<[(usize, usize); 3]> = Vec::new();
    let mut disp: BTreeMap<((usize, usize), (usize, usize)), C64> = BTreeMap::new();
    for j in 0..n {
        for i in 0..n {
            let a = (i, j);
            let bb = (i + 1, j);
            let c = (i + 1, j + 1);
            let d = (i, j + 1);
            for tri in [[a, bb, d], [bb, c, d]] {
                let idx = tri.map(|(ci, cj)| (cj % n) * n + ci % n);
                if idx.iter().any(|&k| nodes[k].removed) {
                    continue;
                }
                let sc = tri.iter().map(|&(ci, cj)| (ci + cj) as f64).sum::<f64>() / 3.0;
                let mut key = [(0, 0); 3];
                for m in 0..3 {
                    let (ci, cj) = tri[m];
                    let side = if nodes[idx[m]].cut && ((ci + cj) as f64) > sc { 1 } else { 0 };
                    key[m] = (idx[m], side);
                }
                for (p, q) in [(0, 1), (1, 2), (2, 0)] {
                    let dz = (C64::new(tri[q].0 as f64 - tri[p].0 as f64, 0.0)
                        + t.tau * (tri[q].1 as f64 - tri[p].1 as f64))
                        / n as f64;
                    disp.insert((key[p], key[q]), dz);
                    disp.insert((key[q], key[p]), -dz);
                }
                keyed.push(key);
            }
        }
    }
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for key in &keyed {
        for k in key {
            ids.entry(*k).or_insert(0);
        }
    }
    let mut node_ids = vec![[None, None]; n * n];
    let mut mesh = Mesh::default();
    for (next, (key, id)) in ids.iter_mut().enumerate() {
        *id = next;
        node_ids[key.0][key.1] = Some(next);
        let node = &nodes[key.0];
        let mut tag = node.tag;
        if node.cut {
            tag |= if key.1 == 0 { tags::CUT_PLUS } else { tags::CUT_MINUS };
        }
        if near_end(key.0 % n, key.0 / n) {
            tag |= tags::RIM;
        }
        mesh.domain_uv.push(node.z);
        mesh.boundary_tags.push(tag);
    }
    mesh.faces = keyed.iter().map(|k| k.map(|kk| ids[&kk])).collect();
    let mut adj: Vec<Vec<(usize, C64)>> = vec![Vec::new(); ids.len()];
    for ((p, q), dz) in &disp {
        adj[ids[p]].push((ids[q], *dz));
    }
    for a in &mut adj {
        a.sort_by(|x, y| x.0.cmp(&y.0));
    }
    let seams: Vec<(usize, usize)> =
        node_ids.iter().filter_map(|s| if let [Some(p), Some(m)] = s { Some((*p, *m)) } else { None }).collect();

    let root = node_ids[(n / 2) * n + n / 2][0].ok_or_else(|| Error::Geometry("centre was removed".into()))?;
    let o = data.origin_state();
    let form = WeierstrassForms(data);
    let (x1, err) = tree_integrate(&form, &adj, root, (o.point, o, [0.0; 3]), false, &cfg.quad)?;
    let (x2, _) = tree_integrate(&form, &adj, root, (o.point, o, [0.0; 3]), true, &cfg.quad)?;
    mesh.vertices = x1;
    Ok(Surface {
        path_independence: max_deviation(&mesh.vertices, &x2),
        mesh,
        seams,
        quadrature_error: err,
        resolution: n,
        end_cutoff: cfg.end_cutoff,
        node_ids,
    })
}

/// Screw motion relating the two sides of the cut, read from the end residue
/// (magnitude) and the seam pairs (orientation), with its seam mismatch.
pub fn seam_screw(data: &WeierstrassData, surface: &Surface) -> Result<(ScrewMotion, f64)> {
    let k = data.k;
    let (flux, _) = end_residue(data, End::E1, default_end_radius(data), 128)?;
    let translation = flux.norm();
    if (translation - 2.0 * PI * k).abs() > 1e-6 * 2.0 * PI * k {
        return Err(Error::Geometry(format!("end translation {translation} does not match 2πk = {}", 2.0 * PI * k)));
    }
    if surface.seams.is_empty() {
        return Err(Error::Geometry("surface has no seam".into()));
    }
    let v = &surface.mesh.vertices;
    let mut best = (ScrewMotion { angle: 0.0, translation: 0.0 }, f64::INFINITY);
    for sa in [1.0, -1.0] {
        for st in [1.0, -1.0] {
            let s = ScrewMotion { angle: sa * 2.0 * PI * k, translation: st * translation };
            let mis = surface.seams.iter().map(|&(p, m)| norm(sub(s.apply(v[p]), v[m]))).fold(0.0, f64::max);
            if mis < best.1 {
                best = (s, mis);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceChecks {
    pub diameter: f64,
    /// `max(|x₁|, |x₂|)` over the vertical diagonal.
    pub axis_max_xy: f64,
    /// `x₃` spread along the horizontal diagonal through `O`.
    pub gap_x3_spread: f64,
    /// `x₃` spread along each copy of the cut part (the larger of the two).
    pub cut_x3_spread: f64,
    /// Largest horizontal distance of either part from its fitted line.
    pub line_straightness: f64,
    /// Directed angle from the gap line to the plus copy of the cut line, in
    /// `(−π, π]`, both oriented along the diagonal loop.
    pub line_angle: f64,
    /// Distance of the angle between the two (unoriented) lines from `±πk`, modulo `π`.
    pub angle_deviation: f64,
    pub path_independence: f64,
    /// Largest deviation from the half-turn about the normal line at `X(O)` under `ρ`.
    pub symmetry_rho: f64,
    pub screw: ScrewMotion,
    pub seam_mismatch: f64,
    /// Largest relative difference between edge chords and metric lengths.
    pub metric_max_rel: f64,
    /// The same over edges at least twice the end cutoff away from the ends.
    pub metric_interior_max_rel: f64,
}

fn wrap_angle(a: f64) -> f64 {
    let r = Euclid::rem_euclid(&(a + PI), &(2.0 * PI)) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Oriented horizontal direction of points ordered by `param`, and the largest
/// distance of the points from the fitted line.
fn fit_line(points: &[(f64, Vec3)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mean_s = points.iter().map(|p| p.0).sum::<f64>() / m;
    let cx = points.iter().map(|p| p.1[0]).sum::<f64>() / m;
    let cy = points.iter().map(|p| p.1[1]).sum::<f64>() / m;
    let (mut dx, mut dy) = (0.0, 0.0);
    for (s, p) in points {
        dx += (s - mean_s) * (p[0] - cx);
        dy += (s - mean_s) * (p[1] - cy);
    }
    let l = (dx * dx + dy * dy).sqrt();
    if l == 0.0 {
        return None;
    }
    let (ux, uy) = (dx / l, dy / l);
    let off = points.iter().map(|(_, p)| ((p[0] - cx) * uy - (p[1] - cy) * ux).abs()).fold(0.0, f64::max);
    Some((uy.atan2(ux), off))
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

/// Axis, horizontal-line, symmetry, seam and metric checks for a torus surface.
pub fn surface_checks(data: &WeierstrassData, surface: &Surface) -> Result<SurfaceChecks> {
    let mesh = &surface.mesh;
    let v = &mesh.vertices;
    let tg = &mesh.boundary_tags;
    let n = surface.resolution;
    if n == 0 {
        return Err(Error::Contract("surface was not built on the torus grid".into()));
    }
    let usable = |i: usize| tg[i] & tags::NUDGED == 0;

    let axis_max_xy =
        (0..v.len()).filter(|&i| tg[i] & tags::AXIS != 0).map(|i| v[i][0].abs().max(v[i][1].abs())).fold(0.0, f64::max);

    let line = |flag: u8, shift: bool| -> Vec<(f64, Vec3)> {
        let mut pts: Vec<(f64, Vec3)> = (0..v.len())
            .filter(|&i| tg[i] & flag != 0 && usable(i))
            .map(|i| {
                let (r, _) = loop_coordinate(data, mesh.domain_uv[i]);
                let s = if shift && r < 0.0 { r + 2.0 } else { r };
                (s, v[i])
            })
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts
    };
    let gap = line(tags::GAP, false);
    let plus = line(tags::CUT_PLUS, true);
    let minus = line(tags::CUT_MINUS, true);
    let gap_x3_spread = spread(gap.iter().map(|p| p.1[2]));
    let cut_x3_spread = spread(plus.iter().map(|p| p.1[2])).max(spread(minus.iter().map(|p| p.1[2])));
    let (a0, s0) = fit_line(&gap).ok_or_else(|| Error::Geometry("horizontal diagonal has too few vertices".into()))?;
    let (a1, s1) = fit_line(&plus).ok_or_else(|| Error::Geometry("cut line has too few vertices".into()))?;
    let s2 = fit_line(&minus).map_or(0.0, |x| x.1);
    let line_angle = wrap_angle(a1 - a0);
    let pk = PI * data.k;
    let mod_pi = |x: f64| (x - PI * (x / PI).round()).abs();
    let angle_deviation = mod_pi(line_angle - pk).min(mod_pi(line_angle + pk));

    // ρ(z) = 2O − z sends node (i, j) to (−i, −j) and swaps the cut sides
    let mut symmetry_rho = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            let here = surface.node_ids[j * n + i];
            let there = surface.node_ids[((n - j) % n) * n + (n - i) % n];
            for side in 0..2 {
                let (Some(p), Some(q)) = (here[side], there[if here[1].is_some() { 1 - side } else { 0 }]) else {
                    continue;
                };
                if !usable(p) || !usable(q) {
                    continue;
                }
                let r = [v[p][0], -v[p][1], -v[p][2]];
                symmetry_rho = symmetry_rho.max(norm(sub(r, v[q])));
            }
        }
    }

    let (screw, seam_mismatch) = seam_screw(data, surface)?;

    let mut metric_max_rel = 0.0f64;
    let mut metric_interior_max_rel = 0.0f64;
    for (a, b) in mesh.edges() {
        let za = mesh.domain_uv[a];
        let mut dz = mesh.domain_uv[b] - za;
        // nearest lattice representative of the edge vector
        let (mut best, tau) = (dz, data.torus.tau);
        for m in -1..=1 {
            for l in -1..=1 {
                let c = dz + C64::new(m as f64, 0.0) + tau * l as f64;
                if c.norm() < best.norm() {
                    best = c;
                }
            }
        }
        dz = best;
        let ds = |z: C64| -> Result<f64> { metric_ds(data, &data.principal_state(z)?) };
        let predicted = 0.5 * dz.norm() * (ds(za)? + 4.0 * ds(za + dz * 0.5)? + ds(za + dz)?) / 6.0;
        let rel = (norm(sub(v[a], v[b])) / predicted - 1.0).abs();
        metric_max_rel = metric_max_rel.max(rel);
        let far = |z: C64| {
            torus_distance(data, z, data.points.e1).min(torus_distance(data, z, data.points.e2))
                >= 2.0 * surface.end_cutoff
        };
        if far(za) && far(za + dz) {
            metric_interior_max_rel = metric_interior_max_rel.max(rel);
        }
    }

    Ok(SurfaceChecks {
        diameter: mesh.diameter(),
        axis_max_xy,
        gap_x3_spread,
        cut_x3_spread,
        line_straightness: s0.max(s1).max(s2),
        line_angle,
        angle_deviation,
        path_independence: surface.path_independence,
        symmetry_rho,
        screw,
        seam_mismatch,
        metric_max_rel,
        metric_interior_max_rel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelicoidMeshConfig {
    pub r_inner: f64,
    pub r_outer: f64,
    pub radial: usize,
    pub angular: usize,
    /// Starting angle of the sheet; `2π` gives the next period.
    pub phase_offset: f64,
    pub quad: QuadConfig,
}

impl Default for HelicoidMeshConfig {
    fn default() -> Self {
        Self {
            r_inner: 0.25,
            r_outer: 4.0,
            radial: 16,
            angular: 64,
            phase_offset: 0.0,
            quad: QuadConfig { abs_tol: 1e-13, rel_tol: 1e-14, ..QuadConfig::default() },
        }
    }
}

/// One turn of the reference helicoid over the annulus `r_inner ≤ |ζ| ≤ r_outer`,
/// integrated numerically from `ζ = 1`, with its deviation from the closed form.
pub fn helicoid_surface(h: &HelicoidData, cfg: &HelicoidMeshConfig) -> Result<(Surface, f64)> {
    let (nr, na) = (cfg.radial, cfg.angular);
    if nr < 1 || na < 3 || !(0.0 < cfg.r_inner && cfg.r_inner <= 1.0 && 1.0 <= cfg.r_outer) {
        return Err(Error::Domain("helicoid annulus must contain the unit circle and have a grid".into()));
    }
    let radius = |i: usize| cfg.r_inner * (cfg.r_outer / cfg.r_inner).powf(i as f64 / nr as f64);
    let angle = |j: usize| cfg.phase_offset + 2.0 * PI * j as f64 / na as f64;
    let id = |i: usize, j: usize| j * (nr + 1) + i;
    let mut mesh = Mesh::default();
    let mut logs = Vec::new();
    for j in 0..=na {
        for i in 0..=nr {
            let (r, a) = (radius(i), angle(j));
            mesh.domain_uv.push(C64::from_polar(r, a));
            logs.push(C64::new(r.ln(), a));
            let mut tag = 0;
            if j == 0 {
                tag |= tags::CUT_PLUS;
            }
            if j == na {
                tag |= tags::CUT_MINUS;
            }
            if i == 0 {
                tag |= tags::RIM;
            }
            mesh.boundary_tags.push(tag);
        }
    }
    let mut adj: Vec<Vec<(usize, C64)>> = vec![Vec::new(); mesh.domain_uv.len()];
    let link = |p: usize, q: usize, adj: &mut Vec<Vec<(usize, C64)>>| {
        let d = mesh.domain_uv[q] - mesh.domain_uv[p];
        if !adj[p].iter().any(|e| e.0 == q) {
            adj[p].push((q, d));
            adj[q].push((p, -d));
        }
    };
    for j in 0..na {
        for i in 0..nr {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            mesh.faces.push([a, b, d]);
            mesh.faces.push([b, c, d]);
            for (p, q) in [(a, b), (b, d), (d, a), (b, c), (c, d)] {
                link(p, q, &mut adj);
            }
        }
    }
    for a in &mut adj {
        a.sort_by(|x, y| x.0.cmp(&y.0));
    }

    // walk the unit circle from ζ = 1 to the sheet's starting angle, then radially to the root
    let mut s = h.start(C64::new(1.0, 0.0))?;
    let mut x = [0.0; 3];
    let steps = ((cfg.phase_offset.abs() / (2.0 * PI) * 64.0).ceil() as usize).max(1);
    let walk = |s: &mut LogState, x: &mut Vec3, to: C64| -> Result<()> {
        let r = integrate_segment(h, s, s.point, to, &cfg.quad)?;
        *x = add(*x, immersion_increment(&r.value));
        *s = r.end_state;
        Ok(())
    };
    for m in 1..=steps {
        walk(&mut s, &mut x, C64::from_polar(1.0, cfg.phase_offset * m as f64 / steps as f64))?;
    }
    let i_root = (0..=nr).min_by(|&p, &q| radius(p).ln().abs().total_cmp(&radius(q).ln().abs())).unwrap_or(0);
    let root = id(i_root, 0);
    walk(&mut s, &mut x, mesh.domain_uv[root])?;
    let (xs, err) = tree_integrate(h, &adj, root, (s.point, s, x), false, &cfg.quad)?;
    let (xs2, _) = tree_integrate(h, &adj, root, (s.point, s, x), true, &cfg.quad)?;

    let closed: Vec<Vec3> =
        logs.iter().zip(&mesh.domain_uv).map(|(l, z)| h.immersion(&LogState { point: *z, log: *l })).collect();
    let deviation = max_deviation(&xs, &closed);
    mesh.vertices = xs;
    let seams = (0..=nr).map(|i| (id(i, 0), id(i, na))).collect();
    Ok((
        Surface {
            path_independence: max_deviation(&mesh.vertices, &xs2),
            mesh,
            seams,
            quadrature_error: err,
            resolution: 0,
            end_cutoff: cfg.r_inner,
            node_ids: Vec::new(),
        },
        deviation,
    ))
}

/// Helicoid end `g = C w^m`, `dh = R dw / w` in a local coordinate `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalHelicoid {
    pub center: C64,
    pub coeff: C64,
    pub power: f64,
    pub residue: C64,
}

impl LocalHelicoid {
    /// `X` up to translation, for `w` with a chosen `log w`.
    pub fn point(&self, log_w: C64) -> Vec3 {
        let wm = (self.power * log_w).exp();
        let p = self.coeff * self.residue * wm / self.power;
        let q = self.residue / self.coeff / wm / (-self.power);
        immersion_increment(&[self.residue * log_w, p, q])
    }
}

/// Symmetric Hausdorff distance after centroid alignment and the best rotation
/// about the `x₃` axis, divided by the diameter of `model`.
pub fn aligned_deviation(actual: &[Vec3], model: &[Vec3]) -> f64 {
    let centroid = |p: &[Vec3]| {
        let m = p.len() as f64;
        let mut c = [0.0; 3];
        for q in p {
            c = add(c, *q);
        }
        c.map(|x| x / m)
    };
    let (ca, cm) = (centroid(actual), centroid(model));
    let a: Vec<Vec3> = actual.iter().map(|p| sub(*p, ca)).collect();
    let b: Vec<Vec3> = model.iter().map(|p| sub(*p, cm)).collect();
    let (mut sdot, mut scross) = (0.0, 0.0);
    for (p, q) in a.iter().zip(&b) {
        sdot += p[0] * q[0] + p[1] * q[1];
        scross += p[0] * q[1] - p[1] * q[0];
    }
    let rot = ScrewMotion { angle: scross.atan2(sdot), translation: 0.0 };
    let a: Vec<Vec3> = a.iter().map(|p| rot.apply(*p)).collect();
    let directed = |x: &[Vec3], y: &[Vec3]| {
        x.iter().map(|p| y.iter().map(|q| norm(sub(*p, *q))).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    let h = directed(&a, &b).max(directed(&b, &a));
    let diam = b.iter().flat_map(|p| b.iter().map(move |q| norm(sub(*p, *q)))).fold(0.0, f64::max);
    if diam == 0.0 {
        h
    } else {
        h / diam
    }
}

/// Deviation of the immersed ring `|z − E| = ring_radius` from the helicoid end
/// given by the leading Laurent terms of `g` and `dh` at `E`.
pub fn asymptotic_compare(data: &WeierstrassData, end: End, ring_radius: f64, samples: usize) -> Result<f64> {
    if data.degenerate {
        return Err(Error::Contract("degenerate data has no helicoidal end".into()));
    }
    let pts = &data.points;
    let (c, power) = match end {
        End::E1 => (pts.e1, -data.k),
        End::E2 => (pts.e2, data.k),
    };
    let nearest =
        pts.all().iter().map(|&p| torus_distance(data, c, p)).filter(|&d| d > 1e-14).fold(f64::INFINITY, f64::min);
    if !(ring_radius > 0.0 && ring_radius < 0.5 * nearest) || samples < 8 {
        return Err(Error::Geometry(format!("ring of radius {ring_radius} around the end meets another puncture")));
    }
    let form = WeierstrassForms(data);
    let quad = MeshConfig::default().quad;
    let t = &data.torus;
    let normal = C64::new(0.0, 1.0) * (1.0 - t.tau) / (1.0 - t.tau).norm();
    let phi0 = normal.arg();
    let start = c + normal * ring_radius;
    let o = data.origin_state();
    let r = integrate_segment(&form, &o, o.point, start, &quad)?;
    let mut x = immersion_increment(&r.value);
    let mut s = r.end_state;

    let eps = 1e-5 * ring_radius;
    let inner = data.advance(&s, c + normal * eps)?;
    let log_eps = C64::new(eps.ln(), phi0);
    let coeff = data.forms(&inner).g * (-power * log_eps).exp();
    let (flux, _) = end_residue(data, end, 0.5 * ring_radius, 128)?;
    let residue = flux / (2.0 * PI * C64::new(0.0, 1.0));
    let model = LocalHelicoid { center: c, coeff, power, residue };

    let mut actual = Vec::with_capacity(samples + 1);
    let mut reference = Vec::with_capacity(samples + 1);
    for j in 0..=samples {
        let phi = phi0 + 2.0 * PI * j as f64 / samples as f64;
        if j > 0 {
            let z = c + C64::from_polar(ring_radius, phi);
            let r = integrate_segment(&form, &s, s.point, z, &quad)?;
            x = add(x, immersion_increment(&r.value));
            s = r.end_state;
        }
        actual.push(x);
        reference.push(model.point(C64::new(ring_radius.ln(), phi)));
    }
    Ok(aligned_deviation(&actual, &reference))
}

/// [`asymptotic_compare`] for the reference helicoid's end at `ζ = 0`.
pub fn asymptotic_compare_helicoid(h: &HelicoidData, ring_radius: f64, samples: usize) -> Result<f64> {
    if !(ring_radius > 0.0 && ring_radius < 1.0) || samples < 8 {
        return Err(Error::Geometry(format!("ring radius {ring_radius} must lie in (0, 1)")));
    }
    let quad = HelicoidMeshConfig::default().quad;
    let mut s = h.start(C64::new(1.0, 0.0))?;
    let r = integrate_segment(h, &s, s.point, C64::new(ring_radius, 0.0), &quad)?;
    let mut x = immersion_increment(&r.value);
    s = r.end_state;
    let i = C64::new(0.0, 1.0);
    let model = LocalHelicoid { center: C64::new(0.0, 0.0), coeff: i, power: h.k, residue: i * h.k };
    let mut actual = Vec::with_capacity(samples + 1);
    let mut reference = Vec::with_capacity(samples + 1);
    for j in 0..=samples {
        let phi = 2.0 * PI * j as f64 / samples as f64;
        if j > 0 {
            let r = integrate_segment(h, &s, s.point, C64::from_polar(ring_radius, phi), &quad)?;
            x = add(x, immersion_increment(&r.value));
            s = r.end_state;
        }
        actual.push(x);
        reference.push(model.point(C64::new(ring_radius.ln(), phi)));
    }
    Ok(aligned_deviation(&actual, &reference))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntersectionReport {
    /// Intersecting face pairs, smaller index first.
    pub pairs: Vec<(usize, usize)>,
    pub candidate_pairs: usize,
    pub skipped_degenerate: usize,
}

/// Mean of the largest bounding-box extent over faces.
pub fn default_grid_cell(mesh: &Mesh) -> f64 {
    if mesh.faces.is_empty() {
        return 1.0;
    }
    let total: f64 = mesh
        .faces
        .iter()
        .map(|f| {
            let p = f.map(|i| mesh.vertices[i]);
            (0..3).map(|c| spread(p.iter().map(|q| q[c]))).fold(0.0, f64::max)
        })
        .sum();
    (total / mesh.faces.len() as f64).max(1e-12)
}

/// Whether the open segment `p → q` crosses the interior of triangle `t`.
fn segment_hits_triangle(p: Vec3, q: Vec3, t: [Vec3; 3], eps: f64) -> bool {
    let d = sub(q, p);
    let e1 = sub(t[1], t[0]);
    let e2 = sub(t[2], t[0]);
    let h = cross(d, e2);
    let a = dot(e1, h);
    let scale = norm(d) * norm(e1) * norm(e2);
    if a.abs() <= 1e-12 * scale {
        return false;
    }
    let f = 1.0 / a;
    let s = sub(p, t[0]);
    let u = f * dot(s, h);
    if u <= eps || u >= 1.0 - eps {
        return false;
    }
    let qv = cross(s, e1);
    let v = f * dot(d, qv);
    if v <= eps || u + v >= 1.0 - eps {
        return false;
    }
    let tt = f * dot(e2, qv);
    tt > eps && tt < 1.0 - eps
}

fn triangles_intersect(a: [Vec3; 3], b: [Vec3; 3]) -> bool {
    let eps = 1e-9;
    (0..3).any(|i| segment_hits_triangle(a[i], a[(i + 1) % 3], b, eps))
        || (0..3).any(|i| segment_hits_triangle(b[i], b[(i + 1) % 3], a, eps))
}

/// Spatial-hash broad phase and edge-through-triangle narrow phase over all
/// face pairs that share no vertex.
pub fn self_intersection_check(mesh: &Mesh, grid_cell: f64) -> IntersectionReport {
    let mut report = IntersectionReport::default();
    let cell = grid_cell.max(1e-12);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut boxes = Vec::with_capacity(mesh.faces.len());
    let mut grid: BTreeMap<(i64, i64, i64), Vec<usize>> = BTreeMap::new();
    for (fi, f) in mesh.faces.iter().enumerate() {
        let p = f.map(|i| mesh.vertices[i]);
        let lo = [0, 1, 2].map(|c| p.iter().map(|q| q[c]).fold(f64::INFINITY, f64::min));
        let hi = [0, 1, 2].map(|c| p.iter().map(|q| q[c]).fold(f64::NEG_INFINITY, f64::max));
        boxes.push((lo, hi));
        if mesh.face_area(fi) <= 1e-14 {
            report.skipped_degenerate += 1;
            continue;
        }
        for x in key(lo[0])..=key(hi[0]) {
            for y in key(lo[1])..=key(hi[1]) {
                for z in key(lo[2])..=key(hi[2]) {
                    grid.entry((x, y, z)).or_default().push(fi);
                }
            }
        }
    }
    for (&(x, y, z), list) in &grid {
        for (m, &fa) in list.iter().enumerate() {
            for &fb in &list[m + 1..] {
                let (la, ha) = boxes[fa];
                let (lb, hb) = boxes[fb];
                if (0..3).any(|c| ha[c] < lb[c] || hb[c] < la[c]) {
                    continue;
                }
                // test each pair once, in the cell holding the low corner of the box overlap
                let low = [0, 1, 2].map(|c| key(la[c].max(lb[c])));
                if low != [x, y, z] {
                    continue;
                }
                let (a, b) = (mesh.faces[fa], mesh.faces[fb]);
                if a.iter().any(|i| b.contains(i)) {
                    continue;
                }
                report.candidate_pairs += 1;
                if triangles_intersect(a.map(|i| mesh.vertices[i]), b.map(|i| mesh.vertices[i])) {
                    report.pairs.push((fa.min(fb), fa.max(fb)));
                }
            }
        }
    }
    report.pairs.sort_unstable();
    report
}
