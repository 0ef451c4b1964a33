use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use smoothrecon::io::{load_mesh, save_mesh, MeshFormat};
use smoothrecon::synthetic::icosphere;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smoothrecon"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = path(dir, name);
    let mut args = vec!["synth", "-o", s(&out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn data_lines(p: &Path) -> Vec<String> {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn points(p: &Path) -> Vec<[f64; 3]> {
    data_lines(p)
        .iter()
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().take(3).map(|t| t.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect()
}

#[test]
fn sphere_with_defaults_is_watertight() {
    let dir = tempfile::tempdir().unwrap();
    let pts = synth(dir.path(), "sphere.xyz", &["--n", "20000", "--seed", "1", "--noise", "0.005"]);
    let mesh = path(dir.path(), "sphere.obj");
    let o = run(&["reconstruct", "-i", s(&pts), "-o", s(&mesh)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = stderr(&o);
    assert!(log.contains("config: grid = 64"), "{log}");
    assert!(log.contains("level converged") && log.contains("wrote mesh"), "{log}");
    let m = load_mesh(&mesh, MeshFormat::Obj).unwrap();
    let t = m.topology();
    assert!(t.is_watertight() && t.euler_characteristic() == 2, "{t:?}");
}

#[test]
fn total_variation_logs_reweighting_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let pts = synth(dir.path(), "s.xyz", &["--n", "3000", "--seed", "2"]);
    let mesh = path(dir.path(), "s.ply");
    let o = run(&["reconstruct", "-i", s(&pts), "-o", s(&mesh), "--energy", "2", "--grid", "32", "--tv-max-outer", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("irls outer iteration"), "{}", stderr(&o));
    assert!(load_mesh(&mesh, MeshFormat::Ply).unwrap().triangles.len() > 100);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let pts = synth(dir.path(), "s.xyz", &["--n", "3000", "--seed", "3"]);
    let mesh = path(dir.path(), "s.obj");
    let cfg = path(dir.path(), "recon.conf");
    std::fs::write(&cfg, format!("# test\ninput = {}\ngrid = 40\nlambda = 0.5\nlevels = 2\n", s(&pts))).unwrap();
    let o = run(&["reconstruct", "--config", s(&cfg), "-o", s(&mesh), "--grid", "32"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let log = stderr(&o);
    assert!(log.contains("config: grid = 32x32x32") || log.contains("config: grid = 32"), "{log}");
    assert!(log.contains("config: lambda = 0.5"), "{log}");
    assert!(log.contains("config: levels = 2"), "{log}");

    std::fs::write(&cfg, "grid = 40\nbogus = 1\n").unwrap();
    let o = run(&["reconstruct", "--config", s(&cfg), "-i", s(&pts), "-o", s(&mesh)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn bad_inputs_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let empty = path(dir.path(), "empty.xyz");
    std::fs::write(&empty, "").unwrap();
    let out = path(dir.path(), "m.obj");
    let o = run(&["reconstruct", "-i", s(&empty), "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("empty.xyz"), "{}", stderr(&o));
    assert!(!out.exists());

    let pts = synth(dir.path(), "s.xyz", &["--n", "500"]);
    let o = run(&["reconstruct", "-i", s(&pts), "-o", s(&out), "--lambda", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));

    let o = run(&["reconstruct", "-i", s(&pts), "-o", s(&out), "--energy", "7"]);
    assert_eq!(o.status.code(), Some(2));

    let garbage = path(dir.path(), "g.obj");
    std::fs::write(&garbage, "v 0 0 0\nf 1 2 oops\n").unwrap();
    let o = run(&["metrics", "--points", s(&pts), "--mesh", s(&garbage)]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("error"), "{}", stderr(&o));
}

#[test]
fn metrics_on_own_vertices_has_zero_rms() {
    let dir = tempfile::tempdir().unwrap();
    let ico = icosphere(2.0, 3);
    let mesh = path(dir.path(), "ico.obj");
    save_mesh(&ico, &mesh, MeshFormat::Obj).unwrap();
    let pts = path(dir.path(), "ico.xyz");
    let text: String = ico.vertices.iter().map(|v| format!("{} {} {} {} {} {}\n", v.x, v.y, v.z, v.x, v.y, v.z)).collect();
    std::fs::write(&pts, text).unwrap();
    let o = run(&["metrics", "--points", s(&pts), "--mesh", s(&mesh), "--tsv", "--label", "ico"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = out.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "ico");
    assert_eq!(row[1].parse::<usize>().unwrap(), ico.triangles.len());
    assert!(row[2].parse::<f64>().unwrap() < 1e-9);
    let avg_k: f64 = row[5].parse().unwrap();
    assert!((avg_k - 0.25).abs() < 0.025, "{avg_k}");
}

#[test]
fn synth_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--shape", "torus", "--n", "2000", "--seed", "42", "--noise", "0.01", "--outliers", "0.05"];
    let a = synth(dir.path(), "a.xyz", &args);
    let b = synth(dir.path(), "b.xyz", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let mut other = args;
    other[5] = "43";
    let c = synth(dir.path(), "c.xyz", &other);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(data_lines(&a).len(), 2000);
}

#[test]
fn synth_holes_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let holed = synth(dir.path(), "h.xyz", &["--n", "5000", "--holes", "cap:+z:30deg"]);
    let p = points(&holed);
    assert!(!p.is_empty() && p.len() < 5000);
    // The cap is measured from the bounding-box center, close to the origin.
    let cos = 30f64.to_radians().cos();
    let cosine = |q: &[f64; 3]| q[2] / (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    assert!(p.iter().all(|q| cosine(q) <= cos + 0.01));
    assert!(p.iter().any(|q| cosine(q) > cos - 0.01));

    let split = synth(dir.path(), "d.xyz", &["--n", "20000", "--density-split", "x=0:0.02", "--seed", "4"]);
    let p = points(&split);
    let pos = p.iter().filter(|q| q[0] > 0.0).count() as f64;
    let neg = p.iter().filter(|q| q[0] <= 0.0).count() as f64;
    let ratio = neg / pos;
    assert!((35.0..70.0).contains(&ratio), "ratio {ratio}");

    let o = run(&["synth", "-o", s(&path(dir.path(), "x.xyz")), "--holes", "wedge:1"]);
    assert_eq!(o.status.code(), Some(2));
}
