use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    centroid, conserved_drift, curve_distance, cycle_extrema, detect_period, fit_ellipse, flat_sample_counts,
    DriftQuantity, EllipseFit, PeriodEstimate,
};
use crate::fields::{
    classical_ho_solution, free_particle_solution, initial_momentum, ClassicalKind, ClassicalSystem, DbbField,
    EnergySpec, HoCoherentField, QuantumField,
};
use crate::integrate::{integrate_field, integrate_hamiltonian, sample_times, StopReason, Trajectory};
use crate::states::Wavefunction;

use super::config::{point_label, AnalysisSpec, FieldConfig, OutputFormat, ScenarioConfig};
use super::emit::{csv_string, json_string, svg_string, write_atomic};
use super::ScenarioError;

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnalysisValue {
    EllipseFit(EllipseFit),
    Period(PeriodEstimate),
    Scalar { value: f64 },
    Extrema { cycle: f64, center: Complex64, values: Vec<f64> },
    Counts { flat: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisRecord {
    pub analysis: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<AnalysisValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub index: usize,
    pub label: String,
    pub x0: Complex64,
    pub p0: Option<Complex64>,
    pub stop: StopReason,
    pub samples: usize,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub final_position: Complex64,
    pub analyses: Vec<AnalysisRecord>,
}

impl TrajectoryReport {
    pub fn analysis(&self, name: &str) -> Option<&AnalysisValue> {
        self.analyses
            .iter()
            .find(|a| a.analysis == name)
            .and_then(|a| a.value.as_ref())
    }
}

/// Flat-sample counts summed over the batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PooledFlatFraction {
    pub flat: usize,
    pub total: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: ScenarioConfig,
    pub field_period: Option<f64>,
    pub trajectories: Vec<TrajectoryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled_flat_fraction: Option<PooledFlatFraction>,
    pub artifacts: Vec<String>,
}

impl RunReport {
    pub fn all_completed(&self) -> bool {
        self.trajectories.iter().all(|t| t.stop.completed())
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub trajectories: Vec<Trajectory>,
    /// Kept out of the report so artifacts stay byte-identical.
    pub wall_time: Duration,
}

fn classical_system(kind: ClassicalKind, cfg: &ScenarioConfig) -> ClassicalSystem {
    ClassicalSystem {
        kind,
        params: cfg.params,
    }
}

fn integrate_point(cfg: &ScenarioConfig, wf: Option<&Wavefunction>, x0: Complex64) -> Result<Trajectory, ScenarioError> {
    let span = cfg.t_span;
    let icfg = &cfg.integrator;
    let traj = match cfg.field {
        FieldConfig::QuantumLogDerivative { .. } => {
            let wf = wf.expect("wavefunction built for quantum fields");
            integrate_field(&QuantumField::new(wf), x0, span, icfg)?
        }
        FieldConfig::HoCoherentClosed { lambda, kappa } => integrate_field(
            &HoCoherentField {
                params: cfg.params,
                lambda,
                kappa,
            },
            x0,
            span,
            icfg,
        )?,
        FieldConfig::Dbb { lambda, kappa } => integrate_field(
            &DbbField {
                params: cfg.params,
                lambda,
                kappa,
            },
            x0,
            span,
            icfg,
        )?,
        FieldConfig::ClassicalHamiltonian {
            potential,
            energy,
            momentum_sign,
        } => {
            let sys = classical_system(potential, cfg);
            let p0 = momentum_sign * initial_momentum(&sys, x0, EnergySpec { energy });
            integrate_hamiltonian(&sys, x0, p0, span, icfg)?
        }
        FieldConfig::ClassicalAnalytic {
            potential,
            energy,
            momentum_sign,
        } => {
            let e = EnergySpec { energy };
            let ts = sample_times(span.0, span.1, cfg.samples);
            let xs = ts
                .iter()
                .map(|&t| match potential {
                    ClassicalKind::Harmonic { .. } => classical_ho_solution(x0.re, e, &cfg.params, t),
                    _ => free_particle_solution(e, x0.re, x0.im, momentum_sign, &cfg.params, t),
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| ScenarioError::Invalid(vec![format!("field: {e}")]))?;
            Trajectory::from_samples(ts, xs, "")
        }
    };
    let mut traj = traj;
    traj.meta.label = point_label(x0);
    Ok(traj)
}

fn record<T>(analysis: &'static str, result: Result<T, String>, wrap: impl FnOnce(T) -> AnalysisValue) -> AnalysisRecord {
    match result {
        Ok(v) => AnalysisRecord {
            analysis,
            value: Some(wrap(v)),
            error: None,
        },
        Err(e) => AnalysisRecord {
            analysis,
            value: None,
            error: Some(e),
        },
    }
}

fn analyze(cfg: &ScenarioConfig, field_period: Option<f64>, traj: &Trajectory) -> Vec<AnalysisRecord> {
    cfg.analyses
        .iter()
        .map(|spec| {
            let name = spec.name();
            match *spec {
                AnalysisSpec::EllipseFit => record(name, fit_ellipse(traj).map_err(|e| e.to_string()), AnalysisValue::EllipseFit),
                AnalysisSpec::Period { window } => record(
                    name,
                    detect_period(traj, window.unwrap_or(cfg.t_span)).map_err(|e| e.to_string()),
                    AnalysisValue::Period,
                ),
                AnalysisSpec::AbsPositionDrift => record(
                    name,
                    conserved_drift(traj, DriftQuantity::AbsPosition).map_err(|e| e.to_string()),
                    |value| AnalysisValue::Scalar { value },
                ),
                AnalysisSpec::EnergyDrift => {
                    let result = match cfg.field {
                        FieldConfig::ClassicalHamiltonian { potential, .. } => {
                            let sys = classical_system(potential, cfg);
                            conserved_drift(traj, DriftQuantity::ComplexEnergy(&sys)).map_err(|e| e.to_string())
                        }
                        _ => Err("energy drift needs a Hamiltonian run".to_string()),
                    };
                    record(name, result, |value| AnalysisValue::Scalar { value })
                }
                AnalysisSpec::HoCongruence => record(name, ho_congruence(cfg, traj), |value| AnalysisValue::Scalar {
                    value,
                }),
                AnalysisSpec::ClassicalCongruence { potential, energy } => {
                    let sys = classical_system(potential, cfg);
                    let x0 = traj.meta.x0;
                    let p0 = initial_momentum(&sys, x0, EnergySpec { energy });
                    let result = integrate_hamiltonian(&sys, x0, p0, cfg.t_span, &cfg.integrator)
                        .map_err(|e| e.to_string())
                        .and_then(|c| curve_distance(&traj.positions, &c.positions).map_err(|e| e.to_string()));
                    record(name, result, |value| AnalysisValue::Scalar { value })
                }
                AnalysisSpec::CycleExtrema { cycle } => {
                    let result = cycle
                        .or(field_period)
                        .ok_or_else(|| "no cycle length".to_string())
                        .map(|cycle| {
                            let center = centroid(&traj.positions);
                            (cycle, center, cycle_extrema(traj, cycle, center))
                        });
                    record(name, result, |(cycle, center, values)| AnalysisValue::Extrema {
                        cycle,
                        center,
                        values,
                    })
                }
                AnalysisSpec::FlatFraction { ratio } => {
                    let result = middle_third(cfg)
                        .ok_or_else(|| "no bounded domain".to_string())
                        .map(|band| flat_sample_counts(traj, band, ratio));
                    record(name, result, |(flat, total)| AnalysisValue::Counts { flat, total })
                }
            }
        })
        .collect()
}

fn middle_third(cfg: &ScenarioConfig) -> Option<(f64, f64)> {
    cfg.domain().map(|(lo, hi)| {
        let w = (hi - lo) / 3.0;
        (lo + w, hi - w)
    })
}

/// Distance to `A cos ωt + i B sin ωt` with `A`, `B` from the fitted ellipse.
fn ho_congruence(cfg: &ScenarioConfig, traj: &Trajectory) -> Result<f64, String> {
    let fit = fit_ellipse(traj).map_err(|e| e.to_string())?;
    let p = &cfg.params;
    let energy = 0.5 * p.mass * p.omega * p.omega * (fit.a * fit.a - fit.b * fit.b);
    if !(energy > 0.0) {
        return Err(format!("fitted semi-axes A = {}, B = {} give no positive energy", fit.a, fit.b));
    }
    let e = EnergySpec { energy };
    let ts = sample_times(traj.times[0], traj.times[0] + std::f64::consts::TAU / p.omega, traj.len().max(2));
    let classical = ts
        .iter()
        .map(|&t| classical_ho_solution(fit.a, e, p, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    curve_distance(&traj.positions, &classical).map_err(|e| e.to_string())
}

/// Integrate every initial point, analyze, and write the requested
/// artifacts into `out_dir` when given.
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunOutcome, ScenarioError> {
    let start = Instant::now();
    let mut cfg = config.clone();
    cfg.resolve();
    cfg.validate()?;

    let wf = match cfg.field {
        FieldConfig::QuantumLogDerivative { state } => Some(Wavefunction::new(cfg.params, state)?),
        _ => None,
    };
    let field_period = cfg.field_period();

    let results: Vec<(Trajectory, Vec<AnalysisRecord>)> = cfg
        .initial_points
        .par_iter()
        .map(|&x0| {
            let traj = integrate_point(&cfg, wf.as_ref(), x0)?;
            let analyses = analyze(&cfg, field_period, &traj);
            Ok((traj, analyses))
        })
        .collect::<Result<_, ScenarioError>>()?;

    let mut trajectories = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    for (index, (traj, analyses)) in results.into_iter().enumerate() {
        reports.push(TrajectoryReport {
            index,
            label: traj.meta.label.clone(),
            x0: traj.meta.x0,
            p0: traj.meta.p0,
            stop: traj.stop,
            samples: traj.len(),
            accepted_steps: traj.meta.accepted_steps,
            rejected_steps: traj.meta.rejected_steps,
            final_position: traj.final_position(),
            analyses,
        });
        trajectories.push(traj);
    }

    let pooled_flat_fraction = cfg
        .analyses
        .iter()
        .any(|a| matches!(a, AnalysisSpec::FlatFraction { .. }))
        .then(|| {
            let (mut flat, mut total) = (0, 0);
            for r in &reports {
                if let Some(AnalysisValue::Counts { flat: f, total: t }) = r.analysis("flat_fraction") {
                    flat += f;
                    total += t;
                }
            }
            PooledFlatFraction {
                flat,
                total,
                fraction: if total > 0 { flat as f64 / total as f64 } else { 0.0 },
            }
        });

    let mut artifacts = Vec::new();
    let mut files: Vec<(String, String)> = Vec::new();
    if cfg.outputs.contains(&OutputFormat::Csv) {
        for (i, traj) in trajectories.iter().enumerate() {
            let name = format!("{}_{i:02}.csv", cfg.name);
            files.push((name.clone(), csv_string(traj)));
            artifacts.push(name);
        }
    }
    if cfg.outputs.contains(&OutputFormat::Svg) {
        let refs: Vec<&Trajectory> = trajectories.iter().collect();
        let labels: Vec<String> = trajectories.iter().map(|t| t.meta.label.clone()).collect();
        let name = format!("{}.svg", cfg.name);
        files.push((name.clone(), svg_string(&refs, &labels, &cfg.name)));
        artifacts.push(name);
    }
    let json_name = format!("{}.json", cfg.name);
    if cfg.outputs.contains(&OutputFormat::Json) {
        artifacts.push(json_name.clone());
    }

    let report = RunReport {
        schema: REPORT_SCHEMA,
        config: cfg.clone(),
        field_period,
        trajectories: reports,
        pooled_flat_fraction,
        artifacts,
    };
    if cfg.outputs.contains(&OutputFormat::Json) {
        files.push((json_name, json_string(&report)));
    }

    if let Some(dir) = out_dir {
        for (name, contents) in &files {
            write_atomic(&dir.join(name), contents)?;
        }
    }

    Ok(RunOutcome {
        report,
        trajectories,
        wall_time: start.elapsed(),
    })
}
