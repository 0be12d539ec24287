use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qtraj_core::scenario::{preset, run_scenario, OutputFormat, ScenarioConfig, PRESET_NAMES};

/// Complex quantum and classical trajectory runner.
#[derive(Parser, Debug)]
#[command(name = "qtraj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for CSV, JSON and SVG artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Override the number of output samples per trajectory.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Override both integrator tolerances.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Restrict artifacts to these formats (repeatable).
    #[arg(long = "format", global = true, value_parser = parse_format)]
    formats: Vec<OutputFormat>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario from a TOML file.
    Run { config: PathBuf },
    /// Run a builtin scenario.
    Preset { name: String },
    /// Print the builtin scenario names.
    ListPresets,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn execute(cli: &Cli, mut cfg: ScenarioConfig) -> Result<ExitCode> {
    if let Some(n) = cli.samples {
        cfg.set_samples(n);
    }
    if let Some(tol) = cli.tol {
        cfg.set_tolerance(tol);
    }
    if !cli.formats.is_empty() {
        cfg.outputs = cli.formats.clone();
    }
    let outcome = run_scenario(&cfg, Some(&cli.out_dir))?;
    let report = &outcome.report;
    for t in &report.trajectories {
        println!(
            "{:>3}  {:<24} {:?} at t = {:.6}  ({} samples, {} steps)",
            t.index, t.label, t.stop.kind, t.stop.t, t.samples, t.accepted_steps
        );
    }
    for name in &report.artifacts {
        println!("wrote {}", cli.out_dir.join(name).display());
    }
    eprintln!("wall time {:.3} s", outcome.wall_time.as_secs_f64());
    Ok(if report.all_completed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    ScenarioConfig::from_path(path).with_context(|| format!("loading {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ListPresets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config } => load(config).and_then(|cfg| execute(&cli, cfg)),
        Command::Preset { name } => match preset(name) {
            Some(cfg) => execute(&cli, cfg),
            None => Err(anyhow::anyhow!(
                "unknown preset `{name}`; try `qtraj list-presets`"
            )),
        },
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
