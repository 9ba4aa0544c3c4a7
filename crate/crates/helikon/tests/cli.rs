use std::path::Path;
use std::process::{Command, Output};

use helikon::io::{read_obj, read_ply, read_solution, read_sweep_csv};

fn helikon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helikon")).args(args).env_remove("HELIKON_THREADS").output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_writes_a_solution_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    let o = helikon(&["solve", "--k", "1", "-o", p(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let s = read_solution(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert!(0.5 < s.b && s.b < 1.0);
    assert!(s.residuals.horiz.abs() < 1e-6 && s.residuals.vert.abs() < 1e-6);
    assert!((s.residues.e1[1] + s.residues.e2[1]).abs() < 1e-10);
    assert_eq!(s.version, env!("CARGO_PKG_VERSION"));

    let g = dir.path().join("tight.json");
    assert!(helikon(&["solve", "--k", "1", "--tol-v", "1e-9", "-o", p(&g)]).status.success());
    let t = read_solution(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert!(t.residuals.vert.abs() < 1e-9);
    assert!((t.theta - s.theta).abs() < 1e-7 && (t.b - s.b).abs() < 1e-7);
}

#[test]
fn exit_codes() {
    assert_eq!(helikon(&["solve", "--k", "0.4"]).status.code(), Some(1));
    assert_eq!(helikon(&["solve", "--k", "1", "--tol-h", "-1"]).status.code(), Some(1));
    assert_eq!(helikon(&["sweep", "--threads", "0"]).status.code(), Some(1));
    assert_eq!(helikon(&["frobnicate"]).status.code(), Some(1));
    let o = helikon(&["solve", "--k", "1", "--theta-lo", "0.3", "--theta-hi", "0.35"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!v["scan"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_grid_and_signs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.csv");
    let o = helikon(&["sweep", "--k", "1", "--theta", "1.8,1.9,2", "--b", "0.6,0.7,2", "-o", p(&f)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&f).unwrap();
    assert_eq!(text.lines().count(), 5);
    let rows = read_sweep_csv(&text).unwrap();
    assert_eq!((rows[0].theta, rows[0].b, rows[1].b), (1.8, 0.6, 0.7));

    let d = dir.path().join("default.csv");
    assert!(helikon(&["sweep", "--k", "1", "-o", p(&d)]).status.success());
    let rows = read_sweep_csv(&std::fs::read_to_string(&d).unwrap()).unwrap();
    assert!(rows.iter().any(|r| r.vert_residual > 0.0) && rows.iter().any(|r| r.vert_residual < 0.0));
}

#[test]
fn mesh_from_solution_with_copies() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.json");
    assert!(helikon(&["solve", "--k", "1", "-o", p(&s)]).status.success());
    let m = dir.path().join("h1.obj");
    let o = helikon(&["mesh", "--from", p(&s), "--res", "32", "--cutoff", "0.08", "--copies", "3", "-o", p(&m)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mesh = read_obj(std::io::BufReader::new(std::fs::File::open(&m).unwrap())).unwrap();
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h1.obj.report.json")).unwrap()).unwrap();
    assert_eq!(rep["copies"], 3);
    assert_eq!(rep["faces"].as_u64().unwrap() as usize, mesh.faces.len());
    assert_eq!(mesh.faces.len() % 3, 0);
    assert!(rep["symmetry"]["axis_max_xy_rel"].as_f64().unwrap() < 1e-5);
    assert_eq!(rep["intersections"]["empty"], true);
    assert_eq!(rep["asymptotic"].as_array().unwrap().len(), 6);
}

#[test]
fn mesh_refuses_unsolved_parameters_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("x.ply");
    let args = ["mesh", "--k", "1", "--theta", "1.5", "--b", "0.7", "--res", "16", "--cutoff", "0.08", "-o", p(&m)];
    assert_eq!(helikon(&args).status.code(), Some(2));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert!(helikon(&forced).status.success());
    let mesh = read_ply(std::io::BufReader::new(std::fs::File::open(&m).unwrap())).unwrap();
    assert!(!mesh.faces.is_empty());
}

#[test]
fn helicoid_mesh_is_closed_form_verified() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("hel.obj");
    let r = dir.path().join("hel.json");
    assert!(helikon(&["mesh", "--helicoid", "--k", "1", "-o", p(&m), "--report", p(&r)]).status.success());
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&r).unwrap()).unwrap();
    assert!(rep["closed_form_deviation"].as_f64().unwrap() < 1e-8);
    let mesh = read_obj(std::io::BufReader::new(std::fs::File::open(&m).unwrap())).unwrap();
    assert_eq!(mesh.version.as_deref(), Some(env!("CARGO_PKG_VERSION")));
}

#[test]
fn verify_filter_and_negative_control() {
    let o = helikon(&["verify", "--only", "theta"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 1);
    assert_eq!(v["checks"][0]["name"], "theta");

    let bad = helikon(&["verify", "--only", "theta", "--perturb", "quasi-sign"]);
    assert_eq!(bad.status.code(), Some(2));

    let shifted = helikon(&["verify", "--only", "placement", "--perturb", "shift-theta"]);
    assert_eq!(shifted.status.code(), Some(2));
    assert_eq!(helikon(&["verify", "--only", "bogus"]).status.code(), Some(1));
}
