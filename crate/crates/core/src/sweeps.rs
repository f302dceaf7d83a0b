//! Batch drivers above the single-run engine: seeded ensembles, parameter
//! sweeps, and the distance/time infection-probability surface.
//!
//! Ensembles fan runs out across threads with consecutive seeds and gather
//! infection frequency plus per-step reception statistics. Sweeps rebuild
//! the scenario at every grid point, validate the whole grid before any
//! run, and report both the engine verdict and the closed-form infection
//! probability. The probability surface propagates the receiver-free mean
//! channel once and replays the receiver geometry at each distance.

use rayon::prelude::*;

use crate::config::config_fingerprint;
use crate::engine::{run_channel, run_simulation, step_geometry, Channel};
use crate::error::SimError;
use crate::infection::{exposure_moments, infection_probability};
use crate::model::{face_breadths, ReceiverGeometry, ScenarioConfig, Sex};
use crate::receiver::OverlapBranch;

/// Reception statistics for one time step across an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStat {
    /// Step time (s).
    pub t: f64,
    /// Mean received count over the ensemble.
    pub mean_n_r: f64,
    /// Sample standard deviation of the received count (0 for one run).
    pub sd_n_r: f64,
}

/// Aggregate outcome of a seeded ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    /// Runs attempted.
    pub n_runs: usize,
    /// Runs that failed numerically (tolerated up to 1%).
    pub n_failures: usize,
    /// Seed of the first run; run i uses `base_seed + i`.
    pub base_seed: u64,
    /// Fraction of successful runs whose infection state was ever 1.
    pub infection_frequency: f64,
    /// Three-sigma half width of the frequency estimate.
    pub half_width_3sigma: f64,
    /// Per-step reception statistics over the successful runs.
    pub per_step: Vec<StepStat>,
}

/// Runs `n_runs` independent replicas with seeds `base_seed..base_seed+n`.
/// Individual numerical failures are tolerated up to 1% of the batch;
/// beyond that the whole ensemble errors.
pub fn run_ensemble(
    cfg: &ScenarioConfig,
    n_runs: usize,
    base_seed: u64,
) -> Result<EnsembleStats, SimError> {
    if n_runs == 0 {
        return Err(SimError::InvalidGrid {
            param: "runs".to_string(),
            reason: "ensemble needs at least one run".to_string(),
        });
    }
    cfg.validate()?;

    let results: Vec<Result<_, SimError>> = (0..n_runs)
        .into_par_iter()
        .map(|i| run_simulation(cfg, base_seed.wrapping_add(i as u64)))
        .collect();

    let n_failures = results.iter().filter(|r| r.is_err()).count();
    if n_failures * 100 > n_runs {
        let first_error = results
            .iter()
            .find_map(|r| r.as_ref().err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(SimError::EnsembleFailure {
            failed: n_failures,
            total: n_runs,
            first_error,
        });
    }

    let successes: Vec<_> = results.into_iter().filter_map(Result::ok).collect();
    let n_ok = successes.len();
    let infected = successes
        .iter()
        .filter(|ts| ts.summary.final_state == 1)
        .count();
    let p = infected as f64 / n_ok as f64;
    let half_width_3sigma = 3.0 * (p * (1.0 - p) / n_ok as f64).sqrt();

    let n_steps = successes[0].steps.len();
    let mut per_step = Vec::with_capacity(n_steps);
    for i in 0..n_steps {
        let t = successes[0].steps[i].point.t;
        let values: Vec<f64> = successes
            .iter()
            .map(|ts| ts.steps[i].reception.n_r as f64)
            .collect();
        let mean = values.iter().sum::<f64>() / n_ok as f64;
        let sd = if n_ok > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n_ok - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        per_step.push(StepStat {
            t,
            mean_n_r: mean,
            sd_n_r: sd,
        });
    }

    Ok(EnsembleStats {
        n_runs,
        n_failures,
        base_seed,
        infection_frequency: p,
        half_width_3sigma,
        per_step,
    })
}

/// Scenario dimension a sweep can walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Receiver distance along the discharge axis (m).
    XR,
    /// Detection threshold (droplets).
    Gamma,
    /// Initial discharge inclination (grid values in degrees).
    Theta0,
    /// Receiver face-breadth preset.
    Sex,
}

impl SweepParam {
    /// CSV/CLI label.
    pub fn label(self) -> &'static str {
        match self {
            SweepParam::XR => "x_R",
            SweepParam::Gamma => "gamma",
            SweepParam::Theta0 => "theta0",
            SweepParam::Sex => "sex",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "x_R" => Ok(SweepParam::XR),
            "gamma" => Ok(SweepParam::Gamma),
            "theta0" => Ok(SweepParam::Theta0),
            "sex" => Ok(SweepParam::Sex),
            other => Err(SimError::InvalidGrid {
                param: other.to_string(),
                reason: "sweepable parameters are x_R, gamma, theta0, sex".to_string(),
            }),
        }
    }
}

/// One grid coordinate: numeric for x_R/gamma/theta0, a label for sex.
#[derive(Debug, Clone, PartialEq)]
pub enum GridPoint {
    Number(f64),
    Label(String),
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridPoint::Number(v) => write!(f, "{v}"),
            GridPoint::Label(l) => write!(f, "{l}"),
        }
    }
}

/// Cumulative/instantaneous infection probability at one requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProbability {
    /// Requested time, snapped to the step grid (s).
    pub t: f64,
    /// Largest single-step infection probability at any step up to `t`.
    pub probability: f64,
    /// Single-step infection probability at the step itself.
    pub probability_instant: f64,
    /// Overlap branch at the step.
    pub branch: OverlapBranch,
}

/// Outcome at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    /// Display form of the grid coordinate.
    pub value: String,
    /// Engine verdict (1 if the detector ever fired).
    pub infected: u8,
    /// First detection time from the engine, if any (s).
    pub first_infection_time: Option<f64>,
    /// Closed-form infection probability: running maximum over the swept
    /// span (all steps for a sweep, the requested times for a surface).
    pub probability: f64,
    /// Per-time samples; empty for plain parameter sweeps.
    pub time_probabilities: Vec<TimeProbability>,
}

/// Provenance stamped into sweep outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetadata {
    /// Fingerprint of the base configuration.
    pub config_hash: String,
    /// How seeds were assigned across grid points.
    pub seed_policy: String,
}

/// A finished sweep or probability surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Swept parameter label.
    pub param: String,
    pub metadata: SweepMetadata,
    /// One summary per grid point, in grid order.
    pub outcomes: Vec<PointSummary>,
}

/// Builds the scenario at one grid coordinate. Numeric parameters expect
/// `GridPoint::Number` (theta0 in degrees); `sex` expects a label.
pub fn apply_param(
    cfg: &ScenarioConfig,
    param: SweepParam,
    point: &GridPoint,
) -> Result<ScenarioConfig, SimError> {
    let mut out = cfg.clone();
    match (param, point) {
        (SweepParam::XR, GridPoint::Number(v)) => out.receiver.position[0] = *v,
        (SweepParam::Gamma, GridPoint::Number(v)) => {
            if !(v.is_finite() && *v >= 0.0 && v.fract() == 0.0) {
                return Err(SimError::InvalidGrid {
                    param: "gamma".to_string(),
                    reason: format!("threshold must be a non-negative integer, got {v}"),
                });
            }
            out.controls.gamma = *v as u64;
        }
        (SweepParam::Theta0, GridPoint::Number(v)) => {
            out.transmitter.theta0 = v.to_radians();
        }
        (SweepParam::Sex, GridPoint::Label(l)) => {
            let sex = match l.as_str() {
                "female" => Sex::Female,
                "male" => Sex::Male,
                "average" => Sex::Average,
                other => {
                    return Err(SimError::InvalidGrid {
                        param: "sex".to_string(),
                        reason: format!("labels are female, male, average; got `{other}`"),
                    })
                }
            };
            let (bb, ss) = face_breadths(sex);
            out.receiver = ReceiverGeometry::from_face(out.receiver.position, bb, ss)?;
        }
        (p, GridPoint::Label(l)) => {
            return Err(SimError::InvalidGrid {
                param: p.label().to_string(),
                reason: format!("needs numeric grid values, got `{l}`"),
            })
        }
        (SweepParam::Sex, GridPoint::Number(v)) => {
            return Err(SimError::InvalidGrid {
                param: "sex".to_string(),
                reason: format!("needs female/male/average labels, got {v}"),
            })
        }
    }
    out.validate()?;
    Ok(out)
}

/// Running maximum of the single-step infection probability over the whole
/// span of a mean channel, plus the per-step instantaneous values.
fn probability_profile(cfg: &ScenarioConfig, channel: &Channel) -> (Vec<f64>, Vec<f64>, Vec<OverlapBranch>) {
    let n = channel.steps.len();
    let mut instant = Vec::with_capacity(n);
    let mut running = Vec::with_capacity(n);
    let mut branches = Vec::with_capacity(n);
    let mut peak: f64 = 0.0;
    for i in 0..n {
        let geometry = step_geometry(cfg, &channel.steps[i].point);
        let moments = exposure_moments(&channel.lambdas[..=i], &geometry);
        let p = infection_probability(cfg.controls.gamma, &moments, cfg.controls.probability_form);
        peak = peak.max(p);
        instant.push(p);
        running.push(peak);
        branches.push(geometry.branch);
    }
    (instant, running, branches)
}

/// Walks `grid` along `param`. Every grid point is validated before any
/// simulation runs; each point then gets an engine run (with the
/// scenario's own mode and seed) and a closed-form probability from the
/// mean channel.
pub fn sweep(
    cfg: &ScenarioConfig,
    param: SweepParam,
    grid: &[GridPoint],
) -> Result<SweepResult, SimError> {
    if grid.is_empty() {
        return Err(SimError::InvalidGrid {
            param: param.label().to_string(),
            reason: "grid is empty".to_string(),
        });
    }
    let configs: Vec<(String, ScenarioConfig)> = grid
        .iter()
        .map(|point| Ok((point.to_string(), apply_param(cfg, param, point)?)))
        .collect::<Result<_, SimError>>()?;

    let outcomes: Vec<PointSummary> = configs
        .par_iter()
        .map(|(value, cfg_point)| {
            let ts = run_simulation(cfg_point, cfg_point.controls.seed)?;
            let channel = run_channel(cfg_point)?;
            let (_, running, _) = probability_profile(cfg_point, &channel);
            Ok(PointSummary {
                value: value.clone(),
                infected: ts.summary.final_state,
                first_infection_time: ts.summary.first_infection_time,
                probability: running.last().copied().unwrap_or(0.0),
                time_probabilities: Vec::new(),
            })
        })
        .collect::<Result<_, SimError>>()?;

    Ok(SweepResult {
        param: param.label().to_string(),
        metadata: SweepMetadata {
            config_hash: config_fingerprint(cfg),
            seed_policy: format!("fixed seed {} at every grid point", cfg.controls.seed),
        },
        outcomes,
    })
}

/// Infection probability over receiver distance and exposure time. The
/// mean channel is propagated once (it does not depend on the receiver)
/// and re-read against the receiver disc at each distance; each requested
/// time is snapped to the nearest step.
pub fn probability_curve(
    cfg: &ScenarioConfig,
    x_grid: &[f64],
    times: &[f64],
) -> Result<SweepResult, SimError> {
    if x_grid.is_empty() {
        return Err(SimError::InvalidGrid {
            param: "x_R".to_string(),
            reason: "grid is empty".to_string(),
        });
    }
    if times.is_empty() {
        return Err(SimError::InvalidGrid {
            param: "times".to_string(),
            reason: "time list is empty".to_string(),
        });
    }
    cfg.validate()?;
    let n_steps = cfg.controls.num_steps();
    let mut indices = Vec::with_capacity(times.len());
    for &t in times {
        let idx = (t / cfg.controls.dt).round();
        if !(t.is_finite() && t >= 0.0) || idx as usize > n_steps {
            return Err(SimError::InvalidGrid {
                param: "times".to_string(),
                reason: format!("time {t} is outside the simulated span"),
            });
        }
        indices.push(idx as usize);
    }

    let channel = run_channel(cfg)?;
    let mut outcomes = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let point = GridPoint::Number(x);
        let cfg_x = apply_param(cfg, SweepParam::XR, &point)?;
        let (instant, running, branches) = probability_profile(&cfg_x, &channel);

        let mut verdict_cfg = cfg_x.clone();
        verdict_cfg.controls.stochastic = false;
        let ts = run_simulation(&verdict_cfg, verdict_cfg.controls.seed)?;

        let time_probabilities: Vec<TimeProbability> = indices
            .iter()
            .map(|&idx| TimeProbability {
                t: channel.steps[idx].point.t,
                probability: running[idx],
                probability_instant: instant[idx],
                branch: branches[idx],
            })
            .collect();
        let probability = time_probabilities
            .iter()
            .map(|tp| tp.probability)
            .fold(0.0, f64::max);
        outcomes.push(PointSummary {
            value: point.to_string(),
            infected: ts.summary.final_state,
            first_infection_time: ts.summary.first_infection_time,
            probability,
            time_probabilities,
        });
    }

    Ok(SweepResult {
        param: "x_R".to_string(),
        metadata: SweepMetadata {
            config_hash: config_fingerprint(cfg),
            seed_policy: "mean-channel analytics; engine verdicts use mean propagation".to_string(),
        },
        outcomes,
    })
}
