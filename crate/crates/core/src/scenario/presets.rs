//! Builtin scenarios reproducing the published figures.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::fields::ClassicalKind;
use crate::integrate::IntegratorConfig;
use crate::states::{ModelParams, StateSpec};

use super::config::{AnalysisSpec, FieldConfig, OutputFormat, ScenarioConfig};

pub const PRESET_NAMES: &[&str] = &[
    "fig1_ho_eigen_n0",
    "fig1_ho_eigen_n1",
    "fig1_ho_eigen_n2",
    "fig1_ho_eigen_n3",
    "fig1_ho_eigen_n4",
    "fig2_well_eigen_n0",
    "fig2_well_eigen_n1",
    "fig2_well_eigen_n2",
    "fig2_well_eigen_n3",
    "fig3_classical_ho",
    "fig4_ho_coherent",
    "ho_coherent_closed",
    "dbb_ho_coherent",
    "pt_classical",
    "fig6_well_coherent_j004",
    "fig6_well_coherent_j009",
    "fig6_well_coherent_j016",
    "fig6_well_coherent_j025",
    "fig6_well_coherent_j036",
    "fig7_pt_coherent",
];

fn reals(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

fn base(name: &str, field: FieldConfig, points: Vec<Complex64>, t_span: (f64, f64)) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        name: name.to_string(),
        params: ModelParams::default(),
        field,
        initial_points: points,
        t_span,
        samples: 2000,
        integrator: IntegratorConfig::default(),
        outputs: vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg],
        analyses: Vec::new(),
    };
    cfg.resolve();
    cfg
}

fn ho_eigen_points() -> Vec<Complex64> {
    reals(&[0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])
}

/// Eight interior points `π(2k − 1)/16`, clear of the nodes of the first
/// four well eigenstates.
fn well_eigen_points() -> Vec<Complex64> {
    (1..=8)
        .map(|k| Complex64::new(PI * (2 * k - 1) as f64 / 16.0, 0.0))
        .collect()
}

fn fig7_points() -> Vec<Complex64> {
    reals(&[0.2, 0.67, 0.7015])
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let quantum = |state| FieldConfig::QuantumLogDerivative { state };
    let cfg = match name {
        "fig1_ho_eigen_n0" => {
            let mut c = base(name, quantum(StateSpec::HoEigen { n: 0 }), ho_eigen_points(), (0.0, TAU));
            c.analyses = vec![AnalysisSpec::AbsPositionDrift, AnalysisSpec::EllipseFit];
            c
        }
        "fig1_ho_eigen_n1" | "fig1_ho_eigen_n2" | "fig1_ho_eigen_n3" | "fig1_ho_eigen_n4" => {
            let n = name.as_bytes()[name.len() - 1] - b'0';
            base(
                name,
                quantum(StateSpec::HoEigen { n: n as usize }),
                ho_eigen_points(),
                (0.0, 20.0),
            )
        }
        "fig2_well_eigen_n0" | "fig2_well_eigen_n1" | "fig2_well_eigen_n2" | "fig2_well_eigen_n3" => {
            let n = name.as_bytes()[name.len() - 1] - b'0';
            base(
                name,
                quantum(StateSpec::WellEigen { n: n as usize }),
                well_eigen_points(),
                (0.0, 20.0),
            )
        }
        "fig3_classical_ho" => {
            let mut c = base(
                name,
                FieldConfig::ClassicalAnalytic {
                    potential: ClassicalKind::Harmonic { k: 1.0 },
                    energy: 4.5,
                    momentum_sign: 1.0,
                },
                reals(&[3.2, 3.5, 4.0, 4.5, 5.0]),
                (0.0, TAU),
            );
            c.analyses = vec![AnalysisSpec::EllipseFit];
            c
        }
        "fig4_ho_coherent" => {
            let mut c = base(
                name,
                quantum(StateSpec::HoCoherentSeries {
                    lambda: 2.1,
                    kappa: 0.0,
                    n_max: 4,
                    renormalize: false,
                }),
                reals(&[2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9]),
                (0.0, TAU),
            );
            c.analyses = vec![AnalysisSpec::EllipseFit, AnalysisSpec::HoCongruence];
            c
        }
        "ho_coherent_closed" => {
            let mut c = base(
                name,
                FieldConfig::HoCoherentClosed {
                    lambda: 2.1,
                    kappa: 0.0,
                },
                reals(&[2.2, 2.3, 2.4, 2.5, 2.6, 2.7, 2.8, 2.9]),
                (0.0, TAU),
            );
            c.analyses = vec![AnalysisSpec::EllipseFit, AnalysisSpec::HoCongruence];
            c
        }
        "dbb_ho_coherent" => base(
            name,
            FieldConfig::Dbb {
                lambda: 2.1,
                kappa: 0.0,
            },
            reals(&[-1.0, -0.5, 0.0, 0.5, 1.0]),
            (0.0, TAU),
        ),
        "pt_classical" => {
            let mut c = base(
                name,
                FieldConfig::ClassicalHamiltonian {
                    potential: ClassicalKind::PoschlTeller { l: 1.5 },
                    energy: 2.25,
                    momentum_sign: 1.0,
                },
                reals(&[0.2, 0.3, 0.5, 0.7, 0.785]),
                (0.0, 20.0),
            );
            c.analyses = vec![AnalysisSpec::EnergyDrift];
            c
        }
        "fig6_well_coherent_j004" => well_coherent(name, 0.04),
        "fig6_well_coherent_j009" => well_coherent(name, 0.09),
        "fig6_well_coherent_j016" => well_coherent(name, 0.16),
        "fig6_well_coherent_j025" => well_coherent(name, 0.25),
        "fig6_well_coherent_j036" => well_coherent(name, 0.36),
        "fig7_pt_coherent" => {
            let mut c = base(
                name,
                quantum(StateSpec::PtCoherent {
                    j: 0.16,
                    l: 1.5,
                    n_max: 4,
                }),
                fig7_points(),
                (0.0, 100.0),
            );
            c.samples = 10_000;
            c.resolve();
            c.analyses = vec![
                AnalysisSpec::Period {
                    window: Some((50.0, 100.0)),
                },
                AnalysisSpec::CycleExtrema { cycle: None },
                AnalysisSpec::ClassicalCongruence {
                    potential: ClassicalKind::PoschlTeller { l: 1.5 },
                    energy: 2.25,
                },
            ];
            c
        }
        _ => return None,
    };
    Some(cfg)
}

fn well_coherent(name: &str, j: f64) -> ScenarioConfig {
    let mut c = base(
        name,
        FieldConfig::QuantumLogDerivative {
            state: StateSpec::WellCoherent { j, n_max: 7 },
        },
        reals(&[1.6, 2.0, 2.4, 3.1]),
        (0.0, TAU),
    );
    c.analyses = vec![AnalysisSpec::FlatFraction { ratio: 0.1 }];
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap_or_else(|| panic!("missing preset {name}"));
            assert_eq!(cfg.name, *name);
            assert!(cfg.violations().is_empty(), "{name}: {:?}", cfg.violations());
        }
        assert!(preset("no_such_preset").is_none());
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }

    #[test]
    fn well_points_avoid_nodes() {
        for x in well_eigen_points() {
            for n in 0..4 {
                assert!(((n + 1) as f64 * x.re).sin().abs() > 0.1);
            }
        }
    }
}
