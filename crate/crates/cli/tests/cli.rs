use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stepforce"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn mode_kfg_flagship() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["mode", "--theory", "kfg", "--energy", "2", "--v0", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# resolved config (seed 0)"));
    assert!(out.contains("route A force = 1.84661"), "{out}");
    let v = json(dir.path(), "mode.json");
    assert!((v["route_a"].as_f64().unwrap() - 0.1846612).abs() < 1e-6);
    assert_eq!(v["regime"], "propagating");
}

#[test]
fn mode_without_step_has_zero_force() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["mode", "--theory", "s", "--energy", "1", "--v0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(dir.path(), "mode.json")["route_a"].as_f64(), Some(0.0));
}

#[test]
fn below_threshold_is_a_physics_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["mode", "--theory", "kfg", "--energy", "0.5", "--v0", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("KFG incidence requires E > mc^2"), "{}", stderr(&o));
}

#[test]
fn usage_and_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["limits", "sideways"]).status.code(), Some(2));

    let cfg = write_config(dir.path(), r#"{"converge": {"epsilons": []}}"#);
    let o = run(dir.path(), &["converge", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("converge.epsilons"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), r#"{"mode": {"theory": "kfg", "energy": 2"#);
    assert_eq!(run(dir.path(), &["report", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(dir.path(), r#"{"mode": {"temperature": 3}}"#);
    assert_eq!(run(dir.path(), &["mode", "--config", &cfg]).status.code(), Some(2));

    let missing = dir.path().join("absent.json");
    let o = run(dir.path(), &["mode", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn converge_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["converge", "--theory", "s", "--energy", "1", "--v0", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict = matches closed-form (route A)"), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    assert!(csv.starts_with("theory,shape,epsilon,force,defect\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 5);

    let o = run(dir.path(), &["converge", "--theory", "kfg", "--energy", "2", "--v0", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).contains("verdict = matches midpoint convention within 5e-3"),
        "{}",
        stdout(&o)
    );
    assert!(stdout(&o).contains("differs from closed-form (route A)"));
}

#[test]
fn limits_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["limits", "nonrel", "--c-list", "10,100,1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let slope = json(dir.path(), "nonrel.json")["force_slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 0.2);
    let csv = fs::read_to_string(dir.path().join("nonrel.csv")).unwrap();
    assert!(csv.starts_with("c,status,density_residual,force_residual\n"));

    let o = run(dir.path(), &["limits", "infinite-step", "--energy", "1", "--v0-list", "10,100,1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(dir.path(), "infinite_step.json");
    for row in v["table"]["rows"].as_array().unwrap() {
        assert!((row["route_a"].as_f64().unwrap() + 4.0).abs() < 1e-12);
    }
    assert!(dir.path().join("weak_product.csv").exists());
}

#[test]
fn ehrenfest_default_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ehrenfest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(dir.path(), "ehrenfest.json");
    let runs = v["runs"].as_array().unwrap();
    let get = |label: &str| runs.iter().find(|r| r["label"] == label).unwrap();
    assert!(get("free")["max_abs_deviation"].as_f64().unwrap() <= 1e-8);
    assert!(get("scattering")["relative_deviation"].as_f64().unwrap() <= 0.02);
    let csv = fs::read_to_string(dir.path().join("ehrenfest.csv")).unwrap();
    assert!(csv.starts_with("run,t,px_expect,dpdt,force_expect,norm\n"));
}

#[test]
fn ehrenfest_box_too_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["ehrenfest", "--duration", "400"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("box-too-small"), "{}", stderr(&o));
}

#[test]
fn identical_inputs_give_identical_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["converge", "--theory", "d", "--shapes", "linear-ramp"];
    let (oa, ob) = (run(a.path(), &args), run(b.path(), &args));
    assert_eq!(oa.stdout, ob.stdout);
    for name in ["converge.csv", "converge.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}
