use std::path::Path;
use std::process::{Command, Output};

fn qtraj(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtraj"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .output()
        .expect("spawn qtraj")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

const CONFIG: &str = r#"
name = "cfg"
initial_points = [[1.5, 0.0]]
t_span = [0.0, 6.283185307179586]
samples = 200

[field]
kind = "ho_coherent_closed"
lambda = 2.1
"#;

#[test]
fn lists_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let o = qtraj(dir.path(), &["list-presets"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(names, qtraj_core::scenario::PRESET_NAMES);
}

#[test]
fn preset_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = qtraj(dir.path(), &["preset", "fig1_ho_eigen_n2", "--samples", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let names = files(dir.path());
    assert!(names.contains(&"fig1_ho_eigen_n2.json".to_string()));
    assert!(names.contains(&"fig1_ho_eigen_n2.svg".to_string()));
    assert!(names.iter().any(|n| n.ends_with("_00.csv")));
    assert!(stderr(&o).contains("wall time"));
    let report = std::fs::read_to_string(dir.path().join("fig1_ho_eigen_n2.json")).unwrap();
    assert!(report.contains("\"samples\": 300"));
}

#[test]
fn format_flag_limits_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, CONFIG).unwrap();
    let out = dir.path().join("out");
    let o = qtraj(&out, &["run", path.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(files(&out), vec!["cfg_00.csv"]);
}

#[test]
fn empty_initial_points_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, CONFIG.replace("[[1.5, 0.0]]", "[]")).unwrap();
    let out = dir.path().join("out");
    let o = qtraj(&out, &["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("initial_points"), "{}", stderr(&o));
    assert!(files(&out).is_empty());
}

#[test]
fn malformed_toml_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "name = \n").unwrap();
    let o = qtraj(dir.path(), &["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_preset_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = qtraj(dir.path(), &["preset", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope"));
}

#[test]
fn early_stop_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("node.toml");
    std::fs::write(
        &path,
        r#"
name = "node"
initial_points = [[1e-300, 0.0]]
t_span = [0.0, 1.0]

[field]
kind = "quantum_log_derivative"
state = { family = "ho_eigen", n = 1 }
"#,
    )
    .unwrap();
    let o = qtraj(dir.path(), &["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PoleProximity"), "{stdout}");
}
