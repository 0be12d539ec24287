use num_complex::Complex64;
use qtraj_core::analysis::Orientation;
use qtraj_core::scenario::{
    parse_csv, preset, run_scenario, AnalysisValue, OutputFormat, ScenarioConfig, ScenarioError,
};

const MINIMAL: &str = r#"
name = "mini"
initial_points = [[2.5, 0.0], [2.9, 0.0]]
t_span = [0.0, 20.0]
samples = 1200

[field]
kind = "ho_coherent_closed"
lambda = 2.1

[[analyses]]
kind = "ellipse_fit"

[[analyses]]
kind = "period"
"#;

#[test]
fn minimal_config_resolves_defaults() {
    let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
    assert_eq!(cfg.integrator.samples, 1200);
    assert_eq!(cfg.integrator.rel_tol, 1e-10);
    assert_eq!(cfg.outputs, vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg]);
    assert_eq!(cfg.params.hbar, 1.0);
}

#[test]
fn run_writes_artifacts_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
    let out = run_scenario(&cfg, Some(dir.path())).unwrap();
    assert!(out.report.all_completed());
    assert_eq!(
        out.report.artifacts,
        vec!["mini_00.csv", "mini_01.csv", "mini.svg", "mini.json"]
    );
    for t in &out.report.trajectories {
        assert_eq!(t.analyses.len(), 2);
        match t.analysis("period") {
            Some(AnalysisValue::Period(p)) => {
                assert_eq!(p.orientation, Orientation::Clockwise);
                assert!((p.period.unwrap() - std::f64::consts::TAU).abs() < 5e-3);
            }
            other => panic!("{other:?}"),
        }
    }

    let csv = std::fs::read_to_string(dir.path().join("mini_01.csv")).unwrap();
    let (ts, xs, ps) = parse_csv(&csv).unwrap();
    assert_eq!(ts, out.trajectories[1].times);
    assert_eq!(xs, out.trajectories[1].positions);
    assert!(ps.is_none());

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mini.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], 1);
    assert_eq!(json["config"]["integrator"]["abs_tol"], 1e-10);
    assert_eq!(json["trajectories"][0]["stop"]["kind"], "COMPLETED");

    let svg = std::fs::read_to_string(dir.path().join("mini.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn report_echo_reproduces_the_run() {
    let cfg = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
    let first = run_scenario(&cfg, None).unwrap();
    let echoed = ScenarioConfig::from_toml_str(&first.report.config.to_toml_string()).unwrap();
    let second = run_scenario(&echoed, None).unwrap();
    assert_eq!(first.report, second.report);
}

#[test]
fn empty_initial_points_names_the_field() {
    let text = MINIMAL.replace("[[2.5, 0.0], [2.9, 0.0]]", "[]");
    let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
    match run_scenario(&cfg, None) {
        Err(ScenarioError::Invalid(v)) => assert!(v.iter().any(|m| m.starts_with("initial_points"))),
        other => panic!("{:?}", other.err()),
    }
}

#[test]
fn every_violation_is_listed() {
    let text = MINIMAL
        .replace("[[2.5, 0.0], [2.9, 0.0]]", "[]")
        .replace("t_span = [0.0, 20.0]", "t_span = [1.0, 0.0]")
        .replace("samples = 1200", "samples = 1");
    let v = ScenarioConfig::from_toml_str(&text).unwrap().violations();
    for field in ["initial_points", "t_span", "samples"] {
        assert!(v.iter().any(|m| m.starts_with(field)), "{field} missing from {v:?}");
    }
}

#[test]
fn points_outside_a_well_are_rejected() {
    let mut cfg = preset("fig6_well_coherent_j016").unwrap();
    cfg.initial_points.push(Complex64::new(3.5, 0.0));
    let v = cfg.violations();
    assert!(v.iter().any(|m| m.starts_with("initial_points[4]")), "{v:?}");
}

#[test]
fn unknown_keys_are_parse_errors() {
    let text = format!("{MINIMAL}\nbogus = 1\n");
    assert!(matches!(ScenarioConfig::from_toml_str(&text), Err(ScenarioError::Parse(_))));
}

#[test]
fn classical_runs_emit_momenta() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset("pt_classical").unwrap();
    cfg.outputs = vec![OutputFormat::Csv];
    cfg.set_samples(300);
    let out = run_scenario(&cfg, Some(dir.path())).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("pt_classical_00.csv")).unwrap();
    assert!(csv.starts_with("t,x_re,x_im,p_re,p_im\n"));
    let (_, _, ps) = parse_csv(&csv).unwrap();
    assert_eq!(ps.unwrap(), out.trajectories[0].momenta.clone().unwrap());
    match out.report.trajectories[0].analysis("energy_drift") {
        Some(AnalysisValue::Scalar { value }) => assert!(*value < 1e-8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn classical_preset_draws_nested_ellipses() {
    let out = run_scenario(&preset("fig3_classical_ho").unwrap(), None).unwrap();
    let mut last_b = 0.0;
    for t in &out.report.trajectories {
        match t.analysis("ellipse_fit") {
            Some(AnalysisValue::EllipseFit(fit)) => {
                assert!(fit.center.norm() < 1e-9);
                assert!(fit.b > last_b);
                last_b = fit.b;
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn early_stop_is_reported_not_raised() {
    // Starting on the real axis just beside a node of the first excited
    // oscillator state: the pole at 0 is hit immediately.
    let text = r#"
name = "node"
initial_points = [[1e-300, 0.0]]
t_span = [0.0, 1.0]
outputs = []

[field]
kind = "quantum_log_derivative"
state = { family = "ho_eigen", n = 1 }
"#;
    let out = run_scenario(&ScenarioConfig::from_toml_str(text).unwrap(), None).unwrap();
    assert!(!out.report.all_completed());
}
