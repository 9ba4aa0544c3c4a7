//! The four commands as library functions. Each `*_output` function renders the
//! bytes a command writes, so callers can compare runs without touching disk.

use std::f64::consts::PI;
use std::path::PathBuf;

use helikon_core::periods::End;
use helikon_core::solver::{data_at, default_b_bracket, linspace, solve_k, sweep_cell, SolverConfig};
use helikon_core::surface::{
    apply_screw, asymptotic_compare, asymptotic_compare_helicoid, default_grid_cell, helicoid_surface, immerse,
    self_intersection_check, surface_checks, HelicoidMeshConfig, Mesh, MeshConfig, ScrewMotion,
};
use helikon_core::weierstrass::helicoid_data;
use helikon_core::Error;
use serde::{Deserialize, Serialize};

use crate::io::{self, SolutionFile, SolveFailureFile, VERSION};
use crate::parallel::ordered_map;
use crate::CliError;

fn check_tol(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {x}")))
    }
}

fn check_k(k: f64) -> Result<(), CliError> {
    if k > 0.5 && k.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("k must exceed 1/2, got {k}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub ks: Vec<f64>,
    pub theta_bracket: (f64, f64),
    pub tol_h: f64,
    pub tol_v: f64,
    pub threads: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self { ks: vec![1.0], theta_bracket: s.theta_bracket, tol_h: s.tol_h, tol_v: s.tol_v, threads: 1 }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.ks.is_empty() {
            return Err(CliError::Config("no k given".into()));
        }
        self.ks.iter().try_for_each(|&k| check_k(k))?;
        check_tol("tol-h", self.tol_h)?;
        check_tol("tol-v", self.tol_v)?;
        if !(self.theta_bracket.0 < self.theta_bracket.1) {
            return Err(CliError::Config("theta bracket must be increasing".into()));
        }
        if self.threads == 0 {
            return Err(CliError::Config("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolveEntry {
    Solved(SolutionFile),
    Failed(SolveFailureFile),
}

/// Rendered JSON and whether every `k` was solved. A single `k` gives an
/// object, several give an array in input order.
pub fn solve_output(cfg: &SolveConfig) -> Result<(Vec<u8>, bool), CliError> {
    cfg.validate()?;
    let scfg = SolverConfig {
        theta_bracket: cfg.theta_bracket,
        tol_h: cfg.tol_h,
        tol_v: cfg.tol_v,
        ..SolverConfig::default()
    };
    let results = ordered_map(cfg.threads, &cfg.ks, |&k| solve_k(k, cfg.theta_bracket, &scfg))?;
    let mut entries = Vec::with_capacity(results.len());
    let mut ok = true;
    for (&k, r) in cfg.ks.iter().zip(results) {
        entries.push(match r {
            Ok(s) => SolveEntry::Solved(SolutionFile::from(&s)),
            Err(Error::SolveFailure { reason, scan }) => {
                ok = false;
                let finite = |x: f64| x.is_finite().then_some(x);
                SolveEntry::Failed(SolveFailureFile {
                    k,
                    error: reason,
                    scan: scan.iter().map(|&(t, b, h)| [Some(t), finite(b), finite(h)]).collect(),
                    version: VERSION.to_string(),
                })
            }
            Err(e) => return Err(e.into()),
        });
    }
    let text = if entries.len() == 1 { io::to_json(&entries[0])? } else { io::to_json(&entries)? };
    Ok((text.into_bytes(), ok))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k: f64,
    /// `(lo, hi, count)`
    pub theta: (f64, f64, usize),
    /// `None` spans the admissible `b` range of `k` with 9 points.
    pub b: Option<(f64, f64, usize)>,
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { k: 1.0, theta: (1.6, 2.1, 6), b: None, threads: 1 }
    }
}

pub fn sweep_output(cfg: &SweepConfig) -> Result<Vec<u8>, CliError> {
    check_k(cfg.k)?;
    if cfg.threads == 0 {
        return Err(CliError::Config("parallelism must be at least 1".into()));
    }
    let (blo, bhi, bn) = cfg.b.unwrap_or_else(|| {
        let (lo, hi) = default_b_bracket(cfg.k);
        (lo, hi, 9)
    });
    let (tlo, thi, tn) = cfg.theta;
    if tn == 0 || bn == 0 {
        return Err(CliError::Config("sweep grids need at least one point".into()));
    }
    let cells: Vec<(f64, f64)> = linspace(tlo, thi, tn)
        .into_iter()
        .flat_map(|t| linspace(blo, bhi, bn).into_iter().map(move |b| (t, b)))
        .collect();
    let pcfg = SolverConfig::default().periods;
    let rows = ordered_map(cfg.threads, &cells, |&(t, b)| sweep_cell(cfg.k, t, b, &pcfg))?;
    let mut buf = Vec::new();
    io::write_sweep_csv(&mut buf, &rows)?;
    Ok(buf)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Solution(PathBuf),
    Params { k: f64, theta: f64, b: f64 },
    Helicoid { k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshCommand {
    pub source: MeshSource,
    pub resolution: usize,
    pub end_cutoff: f64,
    pub copies: usize,
    pub force: bool,
    pub format: MeshFormat,
    /// Skip the self-intersection search.
    pub skip_intersections: bool,
}

impl Default for MeshCommand {
    fn default() -> Self {
        let m = MeshConfig::default();
        Self {
            source: MeshSource::Helicoid { k: 1.0 },
            resolution: m.resolution,
            end_cutoff: m.end_cutoff,
            copies: 1,
            force: false,
            format: MeshFormat::Obj,
            skip_intersections: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub axis_max_xy: f64,
    pub axis_max_xy_rel: f64,
    pub gap_x3_spread: f64,
    pub cut_x3_spread: f64,
    pub line_straightness: f64,
    pub line_angle: f64,
    pub angle_deviation: f64,
    pub symmetry_rho: f64,
    pub seam_mismatch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSummary {
    pub checked: bool,
    pub empty: bool,
    pub pairs: usize,
    pub candidate_pairs: usize,
    pub skipped_degenerate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub end: &'static str,
    pub radius: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub version: &'static str,
    pub source: &'static str,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub resolution: usize,
    pub end_cutoff: f64,
    pub copies: usize,
    pub vertices: usize,
    pub faces: usize,
    pub diameter: f64,
    pub path_independence: f64,
    pub quadrature_error: f64,
    pub screw: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric_max_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric_interior_max_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_deviation: Option<f64>,
    pub intersections: IntersectionSummary,
    pub asymptotic: Vec<AsymptoticRow>,
}

pub struct MeshOutput {
    pub mesh: Mesh,
    pub report: MeshReport,
}

impl MeshOutput {
    pub fn mesh_bytes(&self, format: MeshFormat) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        match format {
            MeshFormat::Obj => io::write_obj(&mut buf, &self.mesh)?,
            MeshFormat::Ply => io::write_ply(&mut buf, &self.mesh)?,
        }
        Ok(buf)
    }

    pub fn report_bytes(&self) -> Result<Vec<u8>, CliError> {
        Ok(io::to_json(&self.report)?.into_bytes())
    }
}

const RING_RADII: [f64; 3] = [0.1, 0.05, 0.025];

fn intersections(mesh: &Mesh, skip: bool) -> IntersectionSummary {
    if skip {
        return IntersectionSummary {
            checked: false,
            empty: false,
            pairs: 0,
            candidate_pairs: 0,
            skipped_degenerate: 0,
        };
    }
    let r = self_intersection_check(mesh, default_grid_cell(mesh));
    IntersectionSummary {
        checked: true,
        empty: r.pairs.is_empty(),
        pairs: r.pairs.len(),
        candidate_pairs: r.candidate_pairs,
        skipped_degenerate: r.skipped_degenerate,
    }
}

pub fn mesh_output(cmd: &MeshCommand) -> Result<MeshOutput, CliError> {
    if cmd.resolution < 8 {
        return Err(CliError::Config(format!("resolution must be at least 8, got {}", cmd.resolution)));
    }
    if cmd.copies == 0 {
        return Err(CliError::Config("copies must be at least 1".into()));
    }
    check_tol("end cutoff", cmd.end_cutoff)?;
    let (k, theta, b, source) = match &cmd.source {
        MeshSource::Helicoid { k } => return helicoid_output(*k, cmd),
        MeshSource::Params { k, theta, b } => (*k, *theta, *b, "params"),
        MeshSource::Solution(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let s = io::read_solution(&text)?;
            (s.k, s.theta, s.b, "solution")
        }
    };
    check_k(k)?;
    if cmd.resolution % 2 == 1 {
        return Err(CliError::Config(format!("torus meshes need an even resolution, got {}", cmd.resolution)));
    }
    let data = data_at(k, theta, b)?;
    let mcfg = MeshConfig {
        resolution: cmd.resolution,
        end_cutoff: cmd.end_cutoff,
        allow_unsolved: cmd.force,
        ..MeshConfig::default()
    };
    let surface = match immerse(&data, &mcfg) {
        Err(Error::Contract(m)) => return Err(CliError::Math(format!("{m}; pass --force to mesh anyway"))),
        Err(Error::Geometry(m)) => return Err(CliError::Config(m)),
        r => r?,
    };
    let checks = surface_checks(&data, &surface)?;
    let mesh = apply_screw(&surface.mesh, &checks.screw, cmd.copies)?;
    let mut asymptotic = Vec::new();
    for (end, name) in [(End::E1, "E1"), (End::E2, "E2")] {
        for r in RING_RADII {
            if let Ok(deviation) = asymptotic_compare(&data, end, r, 64) {
                asymptotic.push(AsymptoticRow { end: name, radius: r, deviation });
            }
        }
    }
    let report = MeshReport {
        version: VERSION,
        source,
        k,
        theta: Some(theta),
        b: Some(b),
        resolution: cmd.resolution,
        end_cutoff: cmd.end_cutoff,
        copies: cmd.copies,
        vertices: mesh.vertices.len(),
        faces: mesh.faces.len(),
        diameter: checks.diameter,
        path_independence: checks.path_independence,
        quadrature_error: surface.quadrature_error,
        screw: [checks.screw.angle, checks.screw.translation],
        symmetry: Some(SymmetryReport {
            axis_max_xy: checks.axis_max_xy,
            axis_max_xy_rel: checks.axis_max_xy / checks.diameter,
            gap_x3_spread: checks.gap_x3_spread,
            cut_x3_spread: checks.cut_x3_spread,
            line_straightness: checks.line_straightness,
            line_angle: checks.line_angle,
            angle_deviation: checks.angle_deviation,
            symmetry_rho: checks.symmetry_rho,
            seam_mismatch: checks.seam_mismatch,
        }),
        metric_max_rel: Some(checks.metric_max_rel),
        metric_interior_max_rel: Some(checks.metric_interior_max_rel),
        closed_form_deviation: None,
        intersections: intersections(&mesh, cmd.skip_intersections),
        asymptotic,
    };
    Ok(MeshOutput { mesh, report })
}

fn helicoid_output(k: f64, cmd: &MeshCommand) -> Result<MeshOutput, CliError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(CliError::Config(format!("helicoid k must be positive, got {k}")));
    }
    let h = helicoid_data(k)?;
    let hcfg = HelicoidMeshConfig {
        angular: cmd.resolution,
        radial: (cmd.resolution / 4).max(2),
        ..HelicoidMeshConfig::default()
    };
    let (surface, deviation) = helicoid_surface(&h, &hcfg)?;
    let screw = ScrewMotion { angle: -2.0 * PI * k, translation: -2.0 * PI * k };
    let mesh = apply_screw(&surface.mesh, &screw, cmd.copies)?;
    let asymptotic = RING_RADII
        .iter()
        .filter_map(|&r| {
            asymptotic_compare_helicoid(&h, r, 64).ok().map(|d| AsymptoticRow { end: "E", radius: r, deviation: d })
        })
        .collect();
    let report = MeshReport {
        version: VERSION,
        source: "helicoid",
        k,
        theta: None,
        b: None,
        resolution: cmd.resolution,
        end_cutoff: hcfg.r_inner,
        copies: cmd.copies,
        vertices: mesh.vertices.len(),
        faces: mesh.faces.len(),
        diameter: surface.mesh.diameter(),
        path_independence: surface.path_independence,
        quadrature_error: surface.quadrature_error,
        screw: [screw.angle, screw.translation],
        symmetry: None,
        metric_max_rel: None,
        metric_interior_max_rel: None,
        closed_form_deviation: Some(deviation),
        intersections: intersections(&mesh, cmd.skip_intersections),
        asymptotic,
    };
    Ok(MeshOutput { mesh, report })
}
