use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fields::ClassicalKind;
use crate::integrate::IntegratorConfig;
use crate::states::{ModelParams, StateSpec, Wavefunction};

use super::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// What drives the trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    /// `v = -i(ħ/m) ψ'/ψ` of a wavefunction.
    QuantumLogDerivative { state: StateSpec },
    /// Closed-form oscillator coherent field.
    HoCoherentClosed {
        lambda: f64,
        #[serde(default)]
        kappa: f64,
    },
    /// Real-axis de Broglie–Bohm velocity of the oscillator coherent state.
    Dbb {
        lambda: f64,
        #[serde(default)]
        kappa: f64,
    },
    /// Hamilton's equations at energy `energy`, launched with momentum
    /// `momentum_sign · √(2m(E − V(x₀)))`.
    ClassicalHamiltonian {
        potential: ClassicalKind,
        energy: f64,
        #[serde(default = "one")]
        momentum_sign: f64,
    },
    /// Closed-form classical solution (harmonic: amplitude `Re x₀`; free:
    /// offset `x₀`).
    ClassicalAnalytic {
        potential: ClassicalKind,
        energy: f64,
        #[serde(default = "one")]
        momentum_sign: f64,
    },
}

impl FieldConfig {
    pub fn is_classical(&self) -> bool {
        matches!(
            self,
            FieldConfig::ClassicalHamiltonian { .. } | FieldConfig::ClassicalAnalytic { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisSpec {
    EllipseFit,
    /// Period and orientation on `window` (default: the whole run).
    Period {
        #[serde(default)]
        window: Option<(f64, f64)>,
    },
    AbsPositionDrift,
    /// Complex energy drift of a Hamiltonian run.
    EnergyDrift,
    /// Distance to the classical oscillator ellipse with the fitted
    /// semi-axes.
    HoCongruence,
    /// Distance to the Hamiltonian trajectory launched from the same point.
    ClassicalCongruence { potential: ClassicalKind, energy: f64 },
    /// Largest distance from the trajectory centroid per cycle (default
    /// cycle: the field period).
    CycleExtrema {
        #[serde(default)]
        cycle: Option<f64>,
    },
    /// Samples in the middle third of the domain whose velocity is nearly
    /// parallel to the real axis.
    FlatFraction {
        #[serde(default = "default_flat_ratio")]
        ratio: f64,
    },
}

fn default_flat_ratio() -> f64 {
    0.1
}

impl AnalysisSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AnalysisSpec::EllipseFit => "ellipse_fit",
            AnalysisSpec::Period { .. } => "period",
            AnalysisSpec::AbsPositionDrift => "abs_position_drift",
            AnalysisSpec::EnergyDrift => "energy_drift",
            AnalysisSpec::HoCongruence => "ho_congruence",
            AnalysisSpec::ClassicalCongruence { .. } => "classical_congruence",
            AnalysisSpec::CycleExtrema { .. } => "cycle_extrema",
            AnalysisSpec::FlatFraction { .. } => "flat_fraction",
        }
    }
}

fn default_samples() -> usize {
    2000
}

fn default_outputs() -> Vec<OutputFormat> {
    vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Svg]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub params: ModelParams,
    pub field: FieldConfig,
    pub initial_points: Vec<Complex64>,
    pub t_span: (f64, f64),
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputFormat>,
    #[serde(default)]
    pub analyses: Vec<AnalysisSpec>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        cfg.resolve();
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Propagate top-level settings into the integrator configuration.
    pub fn resolve(&mut self) {
        self.integrator.samples = self.samples;
    }

    pub fn set_samples(&mut self, samples: usize) {
        self.samples = samples;
        self.resolve();
    }

    pub fn set_tolerance(&mut self, tol: f64) {
        self.integrator = self.integrator.with_tolerance(tol);
    }

    /// Open interval of admissible `Re x` for the configured field.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match &self.field {
            FieldConfig::QuantumLogDerivative { state } => match state {
                StateSpec::WellEigen { .. } | StateSpec::WellCoherent { .. } => {
                    Some((0.0, std::f64::consts::PI * self.params.a))
                }
                StateSpec::PtEigen { .. } | StateSpec::PtCoherent { .. } => Some((0.0, std::f64::consts::FRAC_PI_2)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Every violated constraint, each naming its field.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            out.push(format!(
                "name: must be non-empty and use only [A-Za-z0-9_-], got `{}`",
                self.name
            ));
        }
        if self.initial_points.is_empty() {
            out.push("initial_points: at least one initial point is required".into());
        }
        for (i, x) in self.initial_points.iter().enumerate() {
            if !(x.re.is_finite() && x.im.is_finite()) {
                out.push(format!("initial_points[{i}]: not finite"));
            }
        }
        let (t0, t1) = self.t_span;
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            out.push(format!("t_span: must be increasing, got ({t0}, {t1})"));
        }
        if self.samples < 2 {
            out.push(format!("samples: must be at least 2, got {}", self.samples));
        }
        for v in self.integrator.violations() {
            out.push(format!("integrator: {v}"));
        }
        match &self.field {
            FieldConfig::QuantumLogDerivative { state } => {
                if let Err(e) = Wavefunction::new(self.params, *state) {
                    out.push(format!("field.state: {e}"));
                }
            }
            FieldConfig::HoCoherentClosed { lambda, kappa } | FieldConfig::Dbb { lambda, kappa } => {
                if !(lambda.is_finite() && *lambda >= 0.0 && kappa.is_finite()) {
                    out.push(format!("field: need finite lambda >= 0 and kappa, got ({lambda}, {kappa})"));
                }
            }
            FieldConfig::ClassicalHamiltonian {
                potential,
                energy,
                momentum_sign,
            }
            | FieldConfig::ClassicalAnalytic {
                potential,
                energy,
                momentum_sign,
            } => {
                if !energy.is_finite() {
                    out.push(format!("field.energy: not finite ({energy})"));
                }
                if *momentum_sign != 1.0 && *momentum_sign != -1.0 {
                    out.push(format!("field.momentum_sign: must be 1 or -1, got {momentum_sign}"));
                }
                if let ClassicalKind::PoschlTeller { l } = potential {
                    if !(l.is_finite() && *l > 0.5) {
                        out.push(format!("field.potential.l: must exceed 1/2, got {l}"));
                    }
                }
                if matches!(self.field, FieldConfig::ClassicalAnalytic { .. }) {
                    match potential {
                        ClassicalKind::PoschlTeller { .. } => out.push(
                            "field.potential: no closed-form solution for poschl_teller; use classical_hamiltonian"
                                .into(),
                        ),
                        ClassicalKind::Harmonic { k } => {
                            let mw2 = self.params.mass * self.params.omega * self.params.omega;
                            if (k - mw2).abs() > 1e-12 * mw2 {
                                out.push(format!(
                                    "field.potential.k: analytic harmonic runs need k = m w^2 = {mw2}, got {k}"
                                ));
                            }
                            if self.initial_points.iter().any(|x| x.im != 0.0 || x.re <= 0.0) {
                                out.push(
                                    "initial_points: analytic harmonic runs take real positive amplitudes".into(),
                                );
                            }
                        }
                        ClassicalKind::Free => {
                            if !(*energy > 0.0) {
                                out.push(format!("field.energy: free particle needs E > 0, got {energy}"));
                            }
                        }
                    }
                }
            }
        }
        if let Some((lo, hi)) = self.domain() {
            for (i, x) in self.initial_points.iter().enumerate() {
                if !(x.re > lo && x.re < hi) {
                    out.push(format!("initial_points[{i}]: Re x = {} outside ({lo}, {hi})", x.re));
                }
            }
        }
        for (i, a) in self.analyses.iter().enumerate() {
            match a {
                AnalysisSpec::Period { window: Some((lo, hi)) } => {
                    if !(lo < hi && *lo >= t0 && *hi <= t1) {
                        out.push(format!("analyses[{i}].window: ({lo}, {hi}) not inside t_span"));
                    }
                }
                AnalysisSpec::EnergyDrift => {
                    if !matches!(self.field, FieldConfig::ClassicalHamiltonian { .. }) {
                        out.push(format!("analyses[{i}]: energy_drift needs a classical_hamiltonian field"));
                    }
                }
                AnalysisSpec::CycleExtrema { cycle } => match cycle {
                    Some(c) if !(*c > 0.0) => out.push(format!("analyses[{i}].cycle: must be positive")),
                    None if self.field_period().is_none() => out.push(format!(
                        "analyses[{i}].cycle: required when the field has no period"
                    )),
                    _ => {}
                },
                AnalysisSpec::FlatFraction { ratio } => {
                    if self.domain().is_none() {
                        out.push(format!("analyses[{i}]: flat_fraction needs a bounded domain"));
                    }
                    if !(*ratio > 0.0) {
                        out.push(format!("analyses[{i}].ratio: must be positive"));
                    }
                }
                AnalysisSpec::ClassicalCongruence { energy, .. } => {
                    if !energy.is_finite() {
                        out.push(format!("analyses[{i}].energy: not finite"));
                    }
                }
                _ => {}
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(v))
        }
    }

    /// Time period of the driving field, when it has one.
    pub fn field_period(&self) -> Option<f64> {
        match &self.field {
            FieldConfig::QuantumLogDerivative { state } => {
                Wavefunction::new(self.params, *state).ok()?.field_period()
            }
            FieldConfig::HoCoherentClosed { .. } | FieldConfig::Dbb { .. } => {
                Some(std::f64::consts::TAU / self.params.omega)
            }
            _ => None,
        }
    }
}

pub fn point_label(x: Complex64) -> String {
    if x.im == 0.0 {
        format!("x0 = {}", x.re)
    } else if x.im > 0.0 {
        format!("x0 = {}+{}i", x.re, x.im)
    } else {
        format!("x0 = {}-{}i", x.re, -x.im)
    }
}
