//! Declarative runs: configuration, builtin presets, batch execution and
//! artifact emission.

use std::path::PathBuf;

use thiserror::Error;

use crate::integrate::IntegrateError;
use crate::states::StateError;

pub mod config;
pub mod emit;
pub mod presets;
pub mod run;

pub use config::{point_label, AnalysisSpec, FieldConfig, OutputFormat, ScenarioConfig};
pub use emit::{emit_csv, emit_json, emit_svg, parse_csv};
pub use presets::{preset, PRESET_NAMES};
pub use run::{run_scenario, AnalysisRecord, AnalysisValue, RunOutcome, RunReport, TrajectoryReport};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    State(#[from] StateError),
}
