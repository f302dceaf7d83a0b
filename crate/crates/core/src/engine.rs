//! The end-to-end discrete-time simulation loop.
//!
//! Each step does, in order: (1) solve the shared cloud trajectory under
//! the current buoyant mass deficit, (2) update every droplet class —
//! Reynolds number, settling velocity, mean-count decay, and (in stochastic
//! mode) a fresh count sample, (3) let the receiver intercept the cloud:
//! geometric overlap, exposure accumulation, quantization, detection, and
//! depletion of the received droplets from the cloud.
//!
//! Two propagation styles share the loop: `run_simulation` is the full
//! engine with reception feedback, while `run_channel` propagates mean
//! counts with settling only (no receiver back-action) — the series the
//! closed-form infection probabilities are defined over.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::{
    buoyant_mass_deficit, cloud_density, lambda_step, reynolds, sample_count, settling_velocity,
    ClassState,
};
use crate::error::SimError;
use crate::infection::StepGeometry;
use crate::model::ScenarioConfig;
use crate::receiver::{
    accumulate_quantize, center_distance, cross_section_radius, deplete, detect,
    intersection_area, overlap_branch, OverlapBranch, ReceptionRecord,
};
use crate::trajectory::{advance_position, initial_point, solve_s, theta_at, TrajectoryPoint};

/// Everything recorded about one simulation step.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStep {
    /// Cloud kinematics at the step.
    pub point: TrajectoryPoint,
    /// Per-class population state after settling and depletion.
    pub classes: Vec<ClassState>,
    /// Reception outcome of the step.
    pub reception: ReceptionRecord,
    /// Buoyant mass deficit used in this step's trajectory solve (kg).
    pub z: f64,
    /// Cloud density from the recorded counts (kg/m³); NaN at release,
    /// where the cloud has no volume yet.
    pub rho_c: f64,
    /// Geometric flow factors the receiver saw this step.
    pub geometry: StepGeometry,
    /// Droplets actually removed from the cloud by reception this step
    /// (≤ reception.n_r, which may over-ask when a class runs dry).
    pub delivered: f64,
}

/// Run-level outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// First time at which the infection state was 1, if ever (s).
    pub first_infection_time: Option<f64>,
    /// Total droplets delivered to the receiver over the run.
    pub total_received: f64,
    /// 1 if any step's state was 1 (run-level verdict; per-step states are
    /// re-evaluated each step without latching).
    pub final_state: u8,
}

/// Full record of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub steps: Vec<SimStep>,
    pub summary: RunSummary,
}

/// Geometric reception factors for a cloud at `point` against the
/// scenario's receiver: overlap branch plus the flow factors
/// v_c·A·Δt/(η·r³) for the actual intersection area and for the whole
/// disc. A cloud without extent (release step) has no reception.
pub fn step_geometry(cfg: &ScenarioConfig, point: &TrajectoryPoint) -> StepGeometry {
    if point.r <= 0.0 {
        return StepGeometry::none();
    }
    let rx = &cfg.receiver;
    let Some(r_cs) = cross_section_radius(point.r, point.x, rx.position[0]) else {
        return StepGeometry::none();
    };
    let d_rc = center_distance(rx, point.y, point.z);
    let branch = overlap_branch(rx.r_r, r_cs, d_rc);
    let base =
        point.v_c * cfg.controls.dt / (cfg.transmitter.eta * point.r * point.r * point.r);
    let area = match branch {
        OverlapBranch::None => 0.0,
        OverlapBranch::Encompassed => rx.a_r,
        OverlapBranch::Partial => intersection_area(rx.r_r, r_cs, d_rc),
    };
    StepGeometry {
        branch,
        factor_partial: base * area,
        factor_disc: base * rx.a_r,
    }
}

/// Runs the full engine. Deterministic for a given `(cfg, seed)` pair: the
/// seed feeds one counter-based generator consumed in fixed class order.
pub fn run_simulation(cfg: &ScenarioConfig, seed: u64) -> Result<TimeSeries, SimError> {
    cfg.validate()?;
    let tx = &cfg.transmitter;
    let env = &cfg.environment;
    let ctl = &cfg.controls;
    let n_classes = cfg.classes.len();
    let n_steps = ctl.num_steps();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Per-class count history, one row per class; entry i is the count of
    // step i after that step's depletion. The exposure sum of step i reads
    // the current step pre-depletion and earlier steps post-depletion,
    // which is the order the records are updated in below.
    let mut history: Vec<Vec<f64>> = vec![Vec::with_capacity(n_steps + 1); n_classes];

    // Release step: full spectrum on board, no displacement, no reception.
    let point0 = initial_point(tx);
    let classes0: Vec<ClassState> = cfg
        .classes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            history[k].push(c.initial_count as f64);
            ClassState {
                class_index: k,
                lambda: c.initial_count as f64,
                count: c.initial_count as f64,
                v_s: 0.0,
                re: 0.0,
            }
        })
        .collect();
    let z0 = buoyant_mass_deficit(&classes0, cfg);
    let mut steps = Vec::with_capacity(n_steps + 1);
    steps.push(SimStep {
        point: point0,
        classes: classes0,
        reception: ReceptionRecord {
            t: 0.0,
            per_class_received: vec![0; n_classes],
            n_r: 0,
            state: 0,
        },
        z: z0,
        rho_c: f64::NAN,
        geometry: StepGeometry::none(),
        delivered: 0.0,
    });

    let mut first_infection_time = None;
    let mut total_received = 0.0;

    for i in 1..=n_steps {
        let t = i as f64 * ctl.dt;
        let prev = steps.last().expect("at least the release step");

        // (1) Shared trajectory under the current droplet load.
        let z = buoyant_mass_deficit(&prev.classes, cfg);
        let s = solve_s(t, z, tx, env)?;
        let theta = theta_at(t, tx);
        let mut point = advance_position(&prev.point, s, theta, ctl.dt, tx.alpha_e)?;
        // Keep the recorded time on the exact i·Δt grid rather than the
        // accumulated sum the increment produces.
        point.t = t;

        // (2) Per-class settling and count update.
        let mut classes = Vec::with_capacity(n_classes);
        for k in 0..n_classes {
            let d = cfg.classes[k].diameter;
            let re = reynolds(d, point.v_c, env);
            let v_s = settling_velocity(d, point.v_c, env, ctl.settling_law)?;
            let prev_lambda = prev.classes[k].lambda;
            let d_lambda = lambda_step(prev_lambda, v_s, s, tx.alpha_e, ctl.dt)?;
            let lambda = (prev_lambda + d_lambda).max(0.0);
            let count = if ctl.stochastic {
                sample_count(lambda, &mut rng)
            } else {
                lambda
            };
            history[k].push(count);
            classes.push(ClassState {
                class_index: k,
                lambda,
                count,
                v_s,
                re,
            });
        }

        // (3) Reception: overlap geometry, accumulation + quantization,
        // detection, depletion.
        let geometry = step_geometry(cfg, &point);
        let mut per_class_received = vec![0u64; n_classes];
        let mut n_r = 0u64;
        let mut delivered = 0.0;
        if geometry.branch != OverlapBranch::None {
            for k in 0..n_classes {
                let received = accumulate_quantize(geometry.factor_partial, &history[k]);
                per_class_received[k] = received;
                n_r += received;
                let class = &mut classes[k];
                let count_after = deplete(class.count, received);
                delivered += class.count - count_after;
                class.count = count_after;
                class.lambda = deplete(class.lambda, received);
                *history[k].last_mut().expect("pushed above") = count_after;
            }
        }
        let state = detect(n_r, ctl.gamma);
        if state == 1 && first_infection_time.is_none() {
            first_infection_time = Some(t);
        }
        total_received += delivered;

        let rho_c = cloud_density(&classes, s, cfg)?;
        steps.push(SimStep {
            point,
            classes,
            reception: ReceptionRecord {
                t,
                per_class_received,
                n_r,
                state,
            },
            z,
            rho_c,
            geometry,
            delivered,
        });
    }

    let final_state = u8::from(steps.iter().any(|s| s.reception.state == 1));
    Ok(TimeSeries {
        steps,
        summary: RunSummary {
            first_infection_time,
            total_received,
            final_state,
        },
    })
}

/// One step of the receiver-free mean channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStep {
    pub point: TrajectoryPoint,
    /// Buoyant mass deficit used in the step's trajectory solve (kg).
    pub z: f64,
}

/// Mean-count propagation without reception: the λ series the closed-form
/// probability expressions are built on. Entirely independent of the
/// receiver, so one channel serves any number of receiver placements.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub steps: Vec<ChannelStep>,
    /// One row per step, one λ per class.
    pub lambdas: Vec<Vec<f64>>,
}

/// Propagates the mean channel: trajectory plus settling decay only.
pub fn run_channel(cfg: &ScenarioConfig) -> Result<Channel, SimError> {
    cfg.validate()?;
    let tx = &cfg.transmitter;
    let env = &cfg.environment;
    let ctl = &cfg.controls;
    let n_steps = ctl.num_steps();

    let lambda0: Vec<f64> = cfg.classes.iter().map(|c| c.initial_count as f64).collect();
    let mut lambdas = Vec::with_capacity(n_steps + 1);
    lambdas.push(lambda0);
    let mut steps = Vec::with_capacity(n_steps + 1);
    steps.push(ChannelStep {
        point: initial_point(tx),
        z: z_of(&lambdas[0], cfg),
    });

    for i in 1..=n_steps {
        let t = i as f64 * ctl.dt;
        let z = z_of(lambdas.last().expect("release row"), cfg);
        let s = solve_s(t, z, tx, env)?;
        let theta = theta_at(t, tx);
        let mut point = advance_position(&steps[i - 1].point, s, theta, ctl.dt, tx.alpha_e)?;
        point.t = t;

        let prev_lambda = &lambdas[i - 1];
        let mut row = Vec::with_capacity(prev_lambda.len());
        for (k, &lambda_prev) in prev_lambda.iter().enumerate() {
            let d = cfg.classes[k].diameter;
            let v_s = settling_velocity(d, point.v_c, env, ctl.settling_law)?;
            let d_lambda = lambda_step(lambda_prev, v_s, s, tx.alpha_e, ctl.dt)?;
            row.push((lambda_prev + d_lambda).max(0.0));
        }
        lambdas.push(row);
        steps.push(ChannelStep { point, z });
    }
    Ok(Channel { steps, lambdas })
}

/// Buoyant mass deficit of a bare λ row.
fn z_of(lambdas: &[f64], cfg: &ScenarioConfig) -> f64 {
    let delta = cfg.environment.rho_d - cfg.environment.rho_f;
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &l)| delta * cfg.classes[k].volume * l)
        .sum()
}
