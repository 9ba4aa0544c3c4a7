//! File formats: solution and report JSON, sweep CSV, OBJ and PLY meshes.
//!
//! Every file carries the crate version, as a `version` field or a comment.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use helikon_core::solver::{Solution, SweepRow};
use helikon_core::surface::{Mesh, Vec3};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub horiz: f64,
    pub vert: f64,
    pub cross_check: f64,
}

/// End residues of `dh` as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residues {
    #[serde(rename = "E1")]
    pub e1: [f64; 2],
    #[serde(rename = "E2")]
    pub e2: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub k: f64,
    pub theta: f64,
    pub b: f64,
    pub a: f64,
    pub residuals: Residuals,
    pub residues: Residues,
    pub axis_turning: f64,
    pub iterations: usize,
    pub version: String,
}

impl From<&Solution> for SolutionFile {
    fn from(s: &Solution) -> Self {
        let r = &s.report;
        Self {
            k: s.k,
            theta: s.theta_angle,
            b: s.b,
            a: s.a,
            residuals: Residuals { horiz: s.horiz_residual, vert: s.vert_residual, cross_check: r.cross_check },
            residues: Residues { e1: [r.residue_e1.re, r.residue_e1.im], e2: [r.residue_e2.re, r.residue_e2.im] },
            axis_turning: s.axis_turning,
            iterations: s.iterations,
            version: VERSION.to_string(),
        }
    }
}

/// Written instead of a solution when the solver finds no root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveFailureFile {
    pub k: f64,
    pub error: String,
    /// `[theta, b, horizontal residual]`; `null` where the vertical condition had no root.
    pub scan: Vec<[Option<f64>; 3]>,
    pub version: String,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn read_solution(text: &str) -> Result<SolutionFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("not a solution file: {e}")))
}

pub const SWEEP_HEADER: [&str; 7] = ["k", "theta", "b", "horiz_residual", "vert_residual", "quad_err", "flag"];

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.theta.to_string(),
            r.b.to_string(),
            r.horiz_residual.to_string(),
            r.vert_residual.to_string(),
            r.quad_err.to_string(),
            r.flag.clone(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Parses a file written by [`write_sweep_csv`].
pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(|e| CliError::Io(e.to_string()))?.iter().map(String::from).collect();
    if header != SWEEP_HEADER {
        return Err(CliError::Config(format!("unexpected sweep header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| CliError::Config(format!("column {i}: {e}")));
        rows.push(SweepRow {
            k: num(0)?,
            theta: num(1)?,
            b: num(2)?,
            horiz_residual: num(3)?,
            vert_residual: num(4)?,
            quad_err: num(5)?,
            flag: rec[6].to_string(),
        });
    }
    Ok(rows)
}

/// Nine significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_obj<W: Write>(mut out: W, mesh: &Mesh) -> Result<(), CliError> {
    let mut s = String::new();
    let _ = writeln!(s, "# helikon {VERSION}");
    let _ = writeln!(s, "# vertices {} faces {}", mesh.vertices.len(), mesh.faces.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", sig9(v[0]), sig9(v[1]), sig9(v[2]));
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out.write_all(s.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

pub fn write_ply<W: Write>(mut out: W, mesh: &Mesh) -> Result<(), CliError> {
    let mut s = String::new();
    s.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(s, "comment helikon {VERSION}");
    let _ = writeln!(s, "element vertex {}", mesh.vertices.len());
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    let _ = writeln!(s, "element face {}", mesh.faces.len());
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} {}", sig9(v[0]), sig9(v[1]), sig9(v[2]));
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out.write_all(s.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

/// Geometry read back from a file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeshData {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    pub version: Option<String>,
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, CliError> {
    tok.ok_or_else(|| CliError::Config(format!("line {line}: missing coordinate")))?
        .parse()
        .map_err(|e| CliError::Config(format!("line {line}: {e}")))
}

fn parse_index(tok: &str, line: usize) -> Result<usize, CliError> {
    let head = tok.split('/').next().unwrap_or(tok);
    head.parse().map_err(|e| CliError::Config(format!("line {line}: {e}")))
}

pub fn read_obj<R: BufRead>(input: R) -> Result<MeshData, CliError> {
    let mut m = MeshData::default();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        let mut it = line.split_whitespace();
        match it.next() {
            Some("#") => {
                if let (Some("helikon"), Some(v)) = (it.next(), it.next()) {
                    m.version = Some(v.to_string());
                }
            }
            Some("v") => {
                m.vertices.push([parse_f64(it.next(), n)?, parse_f64(it.next(), n)?, parse_f64(it.next(), n)?])
            }
            Some("f") => {
                let idx: Vec<usize> = it.map(|t| parse_index(t, n)).collect::<Result<_, _>>()?;
                if idx.len() != 3 || idx.iter().any(|&i| i == 0) {
                    return Err(CliError::Config(format!("line {n}: only 1-based triangles are supported")));
                }
                m.faces.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(m)
}

pub fn read_ply<R: BufRead>(input: R) -> Result<MeshData, CliError> {
    let mut lines = input.lines().enumerate();
    let mut next = || -> Result<Option<(usize, String)>, CliError> {
        match lines.next() {
            Some((n, l)) => Ok(Some((n, l.map_err(|e| CliError::Io(e.to_string()))?))),
            None => Ok(None),
        }
    };
    let mut m = MeshData::default();
    let (mut nv, mut nf) = (0usize, 0usize);
    match next()? {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(CliError::Config("missing ply magic".into())),
    }
    loop {
        let Some((n, l)) = next()? else {
            return Err(CliError::Config("unterminated ply header".into()));
        };
        let t: Vec<&str> = l.split_whitespace().collect();
        match t.as_slice() {
            ["format", fmt, ..] if *fmt != "ascii" => {
                return Err(CliError::Config("only ascii ply is supported".into()))
            }
            ["comment", "helikon", v, ..] => m.version = Some(v.to_string()),
            ["element", "vertex", c] => nv = c.parse().map_err(|e| CliError::Config(format!("line {n}: {e}")))?,
            ["element", "face", c] => nf = c.parse().map_err(|e| CliError::Config(format!("line {n}: {e}")))?,
            ["end_header"] => break,
            _ => {}
        }
    }
    for _ in 0..nv {
        let (n, l) = next()?.ok_or_else(|| CliError::Config("truncated vertex list".into()))?;
        let mut it = l.split_whitespace();
        m.vertices.push([parse_f64(it.next(), n)?, parse_f64(it.next(), n)?, parse_f64(it.next(), n)?]);
    }
    for _ in 0..nf {
        let (n, l) = next()?.ok_or_else(|| CliError::Config("truncated face list".into()))?;
        let idx: Vec<usize> = l.split_whitespace().map(|t| parse_index(t, n)).collect::<Result<_, _>>()?;
        if idx.len() != 4 || idx[0] != 3 {
            return Err(CliError::Config(format!("line {n}: only triangles are supported")));
        }
        m.faces.push([idx[1], idx[2], idx[3]]);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> Mesh {
        Mesh {
            vertices: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0 / 3.0]],
            faces: vec![[0, 1, 2], [0, 1, 3], [1, 2, 3], [0, 2, 3]],
            ..Mesh::default()
        }
    }

    #[test]
    fn obj_round_trip() {
        let mut buf = Vec::new();
        write_obj(&mut buf, &tetra()).unwrap();
        let m = read_obj(buf.as_slice()).unwrap();
        assert_eq!(m.faces, tetra().faces);
        assert_eq!(m.version.as_deref(), Some(VERSION));
        assert!((m.vertices[3][2] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn ply_round_trip() {
        let mut buf = Vec::new();
        write_ply(&mut buf, &tetra()).unwrap();
        let m = read_ply(buf.as_slice()).unwrap();
        assert_eq!(m.faces, tetra().faces);
        assert_eq!(m.vertices.len(), 4);
        assert_eq!(m.version.as_deref(), Some(VERSION));
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(std::f64::consts::PI), "3.14159265e0");
        assert_eq!(sig9(-0.000123456789123), "-1.23456789e-4");
    }

    #[test]
    fn sweep_csv_round_trip() {
        let rows = vec![SweepRow {
            k: 1.0,
            theta: 1.8,
            b: 0.7,
            horiz_residual: -0.25,
            vert_residual: f64::NAN,
            quad_err: 1e-14,
            flag: "ok".into(),
        }];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,theta,b,horiz_residual,vert_residual,quad_err,flag\n"));
        let back = read_sweep_csv(&text).unwrap();
        assert_eq!(back[0].theta, 1.8);
        assert!(back[0].vert_residual.is_nan());
    }
}
