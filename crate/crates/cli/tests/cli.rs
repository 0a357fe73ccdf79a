use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn cli(scene: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pole-assist"))
        .arg("--scene")
        .arg(workspace(&format!("scenes/{scene}.json")))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn coverage_to_stdout_keeps_summary_on_stderr() {
    let o = cli(
        "reference",
        &["coverage", "--r-range", "1,2", "--dh-range", "-1,0", "--step", "0.5", "--pitch", "0"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("r_q,dh,crossarm_metric,pole_metric"));
    assert_eq!(lines.count(), 9);
    assert!(stderr(&o).contains("recommended zone"));
}

#[test]
fn coverage_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let o = cli(
        "reference",
        &["--out", p(&csv), "coverage", "--r-range", "0.5,3", "--dh-range", "-2,2", "--step", "0.5"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("recommended zone"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 6 * 9);
}

#[test]
fn coverage_rejects_empty_range() {
    let o = cli("reference", &["coverage", "--r-range", "3,1"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty interval"));
    let o = cli("reference", &["coverage", "--step", "0"]);
    assert!(!o.status.success());
}

#[test]
fn simulate_writes_log_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.csv");
    let trace = workspace("traces/push_in.json");
    let o = cli("reference", &["--out", p(&log), "simulate", "--trace", p(&trace)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for key in ["min range", "breaches: 0", "states:", "state 4 dwell"] {
        assert!(out.contains(key), "{out}");
    }
    let csv = std::fs::read_to_string(&log).unwrap();
    assert_eq!(csv.lines().count(), 61);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["control"]["rz"], 2.0);
}

#[test]
fn simulate_is_repeatable_with_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let trace = workspace("traces/bias_breach.json");
    let run = |name: &str| {
        let log = dir.path().join(name);
        let o = cli("bias_breach", &["--seed", "3", "--out", p(&log), "simulate", "--trace", p(&trace)]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(&log).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn simulate_missing_trace_leaves_no_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("run.csv");
    let o = cli(
        "reference",
        &["--out", p(&log), "simulate", "--trace", p(&dir.path().join("absent.json"))],
    );
    assert!(!o.status.success());
    assert!(stderr(&o).contains("absent.json"));
    assert!(!log.exists());
    assert!(!dir.path().join("run.meta.json").exists());
}

#[test]
fn missing_scene_is_an_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_pole-assist"))
        .args(["--scene", "/nonexistent/scene.json", "simulate", "--trace", "x.json"])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("loading scene"));
}

#[test]
fn synth_then_detect_finds_the_pole() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("cloud");
    let o = cli("dual_camera_rig", &["--out", p(&stem), "synth", "--position", "2.5,0,5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let c0 = dir.path().join("cloud_0.xyz");
    let c1 = dir.path().join("cloud_1.xyz");
    let o = cli("dual_camera_rig", &["detect", p(&c0), p(&c1)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let d: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(d["valid"], true);
    assert!((d["range"].as_f64().unwrap() - 2.5).abs() < 0.45);
    assert!(d["bearing"].as_f64().unwrap().abs() < 0.1);
}

#[test]
fn detect_empty_cloud_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("empty.xyz");
    std::fs::write(&f, "").unwrap();
    let o = cli("reference", &["detect", p(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let d: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(d["valid"], false);

    let o = cli("reference", &["detect", "--platform-frame", p(&f)]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn detect_rejects_wrong_file_count_and_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.xyz");
    std::fs::write(&f, "1 2 3\n1 2\n").unwrap();
    let o = cli("dual_camera_rig", &["detect", p(&f)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("2 camera"));
    let o = cli("reference", &["detect", p(&f)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn serve_runs_a_bounded_session() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("served.csv");
    let o = cli(
        "reference",
        &["--out", p(&log), "serve", "--bind", "127.0.0.1:0", "--speed", "50", "--ticks", "5"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("serving on ws://127.0.0.1:"));
    assert!(stdout(&o).contains("ticks: 5"));
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 6);
}
