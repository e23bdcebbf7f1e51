mod common;

use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fvm-simplex")).args(args).env_remove("FVM_OUT_DIR").output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn cfl_verdict() {
    let out = cli(&["cfl", "--d", "3", "--m", "6", "--h", "5e-6"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    assert!(s.starts_with("admissible\n"), "{s}");
    assert!(s.contains("bound = 1.4222222222222222e-5"));
    let out = cli(&["cfl", "--d", "3", "--m", "6", "--h", "2e-5"]);
    assert!(text(&out.stdout).starts_with("violates"));
    let out = cli(&["cfl", "--d", "4", "--m", "4", "--T", "1", "--N", "100000"]);
    assert!(text(&out.stdout).starts_with("admissible"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["cfl", "--d", "3"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["simulate", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("missing required keys: d, m, T, N"));

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "d = 3\nm = 2\nT = soon\nN = 10\n").unwrap();
    let out = cli(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("bad.cfg:3") && err.contains("T = soon"), "{err}");
}

#[test]
fn module_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "simulate",
        "--d",
        "3",
        "--m",
        "3",
        "--T",
        "1",
        "--N",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("CFL"));
    let out = cli(&["spectrum", "--d", "3", "--m", "8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn preset_snapshot_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "simulate",
        "--preset",
        "gasket-paper",
        "--m",
        "4",
        "--T",
        "0.01",
        "--N",
        "1000",
        "--snapshots",
        "0,10,100,500",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "manifest.txt",
            "snapshot_00000000.csv",
            "snapshot_00000010.csv",
            "snapshot_00000100.csv",
            "snapshot_00000500.csv",
            "summary.txt"
        ]
    );
    let snap = read(dir.path(), "snapshot_00000010.csv");
    assert!(snap.starts_with("step,time,word,x1,x2,value\n"));
    assert_eq!(snap.lines().count(), 1 + 81);
    assert!(snap.lines().nth(1).unwrap().starts_with("10,0.0001,1111,"));
    let manifest = read(dir.path(), "manifest.txt");
    assert!(manifest.contains("# cfl = admissible"));
    assert!(manifest.contains("initial = spline:1:1\n"));
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = cli(&[
        "simulate",
        "--d",
        "4",
        "--m",
        "2",
        "--T",
        "0.02",
        "--N",
        "400",
        "--scheme",
        "implicit",
        "--boundary",
        "neumann-cells",
        "--initial",
        "spline:2:3",
        "--out",
        a.path().to_str().unwrap(),
    ]);
    assert!(first.status.success(), "{}", text(&first.stderr));
    let manifest = a.path().join("manifest.txt");
    let again =
        cli(&["simulate", "--config", manifest.to_str().unwrap(), "--out", b.path().to_str().unwrap()]);
    assert!(again.status.success(), "{}", text(&again.stderr));
    for step in [0, 10, 100, 400] {
        let name = format!("snapshot_{step:08}.csv");
        assert_eq!(read(a.path(), &name), read(b.path(), &name), "{name}");
    }
}

#[test]
fn initial_condition_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let values = dir.path().join("u0.txt");
    let body: String = (0..9).map(|i| format!("{}\n", i as f64 / 8.0)).collect();
    std::fs::write(&values, format!("# ramp\n{body}")).unwrap();
    let out_dir = dir.path().join("out");
    let initial = format!("file:{}", values.display());
    let out = cli(&[
        "simulate",
        "--d",
        "3",
        "--m",
        "2",
        "--T",
        "0",
        "--N",
        "1",
        "--initial",
        &initial,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let snap = read(&out_dir, "snapshot_00000000.csv");
    assert!(snap.lines().last().unwrap().ends_with(",1.0"));
}

#[test]
fn vertex_laplacian_a0() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&[
        "laplacian",
        "--d",
        "4",
        "--m",
        "0",
        "--graph",
        "vertex",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mtx = read(dir.path(), "vertex_laplacian.mtx");
    let mut lines = mtx.lines().skip(1);
    assert_eq!(lines.next(), Some("4 4 16"));
    for line in lines {
        let t: Vec<&str> = line.split(' ').collect();
        let expect = if t[0] == t[1] { "3.0" } else { "-1.0" };
        assert_eq!(t[2], expect);
    }
    let out = cli(&["laplacian", "--d", "3", "--m", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mtx = read(dir.path(), "laplacian.mtx");
    assert!(mtx.contains("\n1 1 4.0\n"), "{mtx}");
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fvm-simplex"))
        .args(["export-geometry", "--d", "4", "--m", "2"])
        .env("FVM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let geo = read(dir.path(), "geometry.csv");
    assert!(geo.starts_with("word,level,x1,x2,x3,measure\n"));
    assert_eq!(geo.lines().count(), 17);
    assert!(geo.lines().nth(1).unwrap().ends_with(",0.0625"));
}

#[test]
fn spectrum_and_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = cli(&["spectrum", "--d", "3", "--m", "1", "--boundary", "dirichlet-ghost", "--out", d]);
    assert!(out.status.success());
    let csv = read(dir.path(), "spectrum.csv");
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "eigenvalue,multiplicity,provenance,residual");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("2.0") || rows[1].starts_with("1.99999"), "{}", rows[1]);
    assert!(rows[2].contains(",2,"));

    let out = cli(&["convergence", "--d", "3", "--levels", "2,3", "--out", d]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let csv = read(dir.path(), "convergence.csv");
    assert!(csv.starts_with("m,h,error,rate\n2,0.0001,"));
}

#[test]
fn convergence_exit_status_tracks_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    // T = 0 leaves only restriction errors of a level-1 spline, which vanish
    // at every level: not strictly decreasing.
    let out = cli(&[
        "convergence",
        "--d",
        "3",
        "--levels",
        "2,3",
        "--T",
        "0",
        "--N",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out.stdout));
}
