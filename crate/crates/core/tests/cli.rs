use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use massfit::metrics::STATS_HEADER;

fn massfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_massfit")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn synth(dir: &Path, scene: &str) {
    let o = massfit(&["synth", "--scene", scene, "--seed", "4", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_writes_scene_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "box");
    for f in ["mesh.obj", "materials.mtl", "truth.obj", "gis.geojson", "truth.geojson"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let truth = fs::read_to_string(dir.path().join("truth.geojson")).unwrap();
    assert!(truth.contains("\"mass\""));
}

#[test]
fn reconstruct_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "house");
    let mesh = dir.path().join("mesh.obj");
    let gis = dir.path().join("gis.geojson");
    let out = dir.path().join("out");
    let o = massfit(&[
        "reconstruct",
        "--mesh",
        mesh.to_str().unwrap(),
        "--gis",
        gis.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--name",
        "house",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("stats.csv").is_file());
    assert!(!out.join(".massfit.lock").exists());

    let o = massfit(&["stats", "--mesh", mesh.to_str().unwrap(), "--gis", gis.to_str().unwrap(), "--name", "house"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], STATS_HEADER);
    assert!(lines[1].starts_with("house,"));
}

#[test]
fn locked_output_directory_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(".massfit.lock"), "1\n").unwrap();
    let o = massfit(&["reconstruct", "--scene", "box", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("locked"));
}

#[test]
fn stage_failure_exits_two() {
    let o = massfit(&["stats", "--scene", "box", "--gamma", "1000000"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lower gamma"));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(code(&massfit(&["stats", "--scene", "nowhere.scene"])), 1);
    assert_eq!(code(&massfit(&["stats", "--scene", "box", "--gamma", "-3"])), 1);
    assert_eq!(code(&massfit(&["stats", "--scene", "box", "--wobble", "1"])), 1);
    assert_eq!(code(&massfit(&["frobnicate"])), 1);
    assert_eq!(code(&massfit(&["--help"])), 0);
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_massfit"))
        .args(["stats", "--scene", "box"])
        .env("MASSFIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_massfit"))
        .args(["stats", "--scene", "box"])
        .env("MASSFIT_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn sweep_params_table() {
    let o = massfit(&["sweep-params", "--scene", "terrace", "--gammas", "50,10", "--alphas", "40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,beta,gamma,footprints,sweep_edges,variables,time_sec,error_m2");
    assert_eq!(lines.len(), 3);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\nname = fromfile\ngamma = 8\n").unwrap();
    let o = massfit(&["stats", "--scene", "box", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap().starts_with("fromfile,"));
    let o = massfit(&["stats", "--scene", "box", "--config", cfg.to_str().unwrap(), "--name", "flag"]);
    assert!(String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap().starts_with("flag,"));
}
