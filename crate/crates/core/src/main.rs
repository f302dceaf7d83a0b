//! Command-line front end.
//!
//! Subcommands: `run` (one simulation → per-step CSV, optional summary
//! JSON), `ensemble` (replicas over consecutive seeds → JSON), `sweep`
//! (one parameter over a grid → CSV), `curve` (infection probability over
//! distance and time → CSV).
//!
//! Exit codes: 0 success, 1 configuration/validation error, 2 numerical
//! failure, 3 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use droplet_channel::config::parse_config;
use droplet_channel::engine::run_simulation;
use droplet_channel::error::{ConfigError, SimError};
use droplet_channel::model::ScenarioConfig;
use droplet_channel::output::{
    curve_csv, ensemble_json, run_summary_json, sweep_csv, timeseries_csv,
};
use droplet_channel::sweeps::{
    probability_curve, run_ensemble, sweep, GridPoint, SweepParam,
};

#[derive(Parser)]
#[command(
    name = "droplet-channel",
    version,
    about = "Cough-droplet transmission channel simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and emit its per-step CSV
    Run {
        /// Scenario configuration file
        #[arg(long)]
        config: PathBuf,
        /// Random seed override (defaults to controls.seed)
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a run-summary JSON here
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Replicate one scenario across consecutive seeds
    Ensemble {
        /// Scenario configuration file
        #[arg(long)]
        config: PathBuf,
        /// Number of replicas
        #[arg(long)]
        runs: usize,
        /// Seed of the first replica
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// JSON destination
        #[arg(long)]
        out: PathBuf,
    },
    /// Walk one parameter over a grid
    Sweep {
        /// Scenario configuration file
        #[arg(long)]
        config: PathBuf,
        /// Parameter to walk: x_R, gamma, theta0, or sex
        #[arg(long)]
        param: String,
        /// Grid: `start:stop:step`, a comma list of numbers (theta0 in
        /// degrees), or comma-separated sex labels
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// CSV destination
        #[arg(long)]
        out: PathBuf,
    },
    /// Infection probability over receiver distance and exposure time
    Curve {
        /// Scenario configuration file
        #[arg(long)]
        config: PathBuf,
        /// Receiver distances: `start:stop:step` or a comma list (m)
        #[arg(long = "x-grid", allow_hyphen_values = true)]
        x_grid: String,
        /// Exposure times, comma-separated (s)
        #[arg(long, allow_hyphen_values = true)]
        times: String,
        /// CSV destination
        #[arg(long)]
        out: PathBuf,
    },
}

/// CLI failure with its process exit code.
enum CliError {
    /// Configuration or grid validation problem (exit 1).
    Validation(String),
    /// Numerical failure inside the simulation (exit 2).
    Numerical(String),
    /// Filesystem problem (exit 3).
    Io(String),
}

impl CliError {
    fn report(&self) -> (&str, u8) {
        match self {
            CliError::Validation(msg) => (msg, 1),
            CliError::Numerical(msg) => (msg, 2),
            CliError::Io(msg) => (msg, 3),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(inner) => CliError::Validation(inner.to_string()),
            SimError::InvalidGrid { .. } => CliError::Validation(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (msg, code) = e.report();
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            summary,
        } => {
            let cfg = read_config(&config)?;
            let seed = seed.unwrap_or(cfg.controls.seed);
            let ts = run_simulation(&cfg, seed)?;
            let csv = timeseries_csv(&cfg, &ts);
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(path) = summary {
                write_file(&path, &run_summary_json(&cfg, seed, &ts))?;
            }
            Ok(())
        }
        Command::Ensemble {
            config,
            runs,
            base_seed,
            out,
        } => {
            let cfg = read_config(&config)?;
            let stats = run_ensemble(&cfg, runs, base_seed)?;
            write_file(&out, &ensemble_json(&cfg, &stats))
        }
        Command::Sweep {
            config,
            param,
            grid,
            out,
        } => {
            let cfg = read_config(&config)?;
            let param: SweepParam = param.parse()?;
            let points = parse_grid(param, &grid)?;
            let result = sweep(&cfg, param, &points)?;
            write_file(&out, &sweep_csv(&result))
        }
        Command::Curve {
            config,
            x_grid,
            times,
            out,
        } => {
            let cfg = read_config(&config)?;
            let xs = parse_numbers(&x_grid)
                .map_err(|m| CliError::Validation(format!("--x-grid: {m}")))?;
            let ts = parse_numbers(&times)
                .map_err(|m| CliError::Validation(format!("--times: {m}")))?;
            let result = probability_curve(&cfg, &xs, &ts)?;
            write_file(&out, &curve_csv(&result))
        }
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Numeric grid: `start:stop:step` (inclusive of `stop` up to rounding) or
/// a comma-separated list.
fn parse_numbers(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty grid".to_string());
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("`{spec}` is not start:stop:step"));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("`{spec}` has a non-numeric bound"))?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0 && step.is_finite()) {
            return Err(format!("step must be positive, got {step}"));
        }
        if stop < start {
            return Err(format!("stop {stop} is below start {start}"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| start + i as f64 * step).collect())
    } else {
        spec.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("`{p}` is not a number"))
            })
            .collect()
    }
}

fn parse_grid(param: SweepParam, spec: &str) -> Result<Vec<GridPoint>, CliError> {
    match param {
        SweepParam::Sex => Ok(spec
            .split(',')
            .map(|p| GridPoint::Label(p.trim().to_string()))
            .collect()),
        _ => parse_numbers(spec)
            .map(|v| v.into_iter().map(GridPoint::Number).collect())
            .map_err(|m| CliError::Validation(format!("--grid: {m}"))),
    }
}
