//! Droplet population dynamics inside the travelling cloud.
//!
//! Each size class carries a mean count λ that decays as droplets settle out
//! of the expanding cloud, and (in stochastic runs) a sampled count drawn
//! from the Gaussian approximation N ~ N(λ, λ) of the underlying counting
//! process. Settling speed depends on the flow regime around a droplet,
//! classified by the Reynolds number of the cloud motion. The module also
//! aggregates the per-class loads into the buoyant mass deficit that feeds
//! back into the trajectory solve, and the bulk cloud density.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::SimError;
use crate::model::{Environment, ScenarioConfig, SettlingLaw};

/// Per-class population state at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassState {
    /// Index into the scenario's droplet class list.
    pub class_index: usize,
    /// Mean droplet count λ of the class (dimensionless, ≥ 0).
    pub lambda: f64,
    /// Working droplet count of the class (sampled in stochastic mode,
    /// equal to λ in mean mode; ≥ 0).
    pub count: f64,
    /// Settling velocity applied this step (m/s).
    pub v_s: f64,
    /// Reynolds number of the flow around the droplet this step.
    pub re: f64,
}

/// Flow regime around a droplet, selected by Reynolds number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowRegime {
    /// Re < 2: viscous creeping flow.
    Stokes,
    /// 2 ≤ Re ≤ 500: transitional.
    Intermediate,
    /// 500 < Re ≤ 2e5: turbulent wake, constant drag.
    Newton,
}

/// Classifies a Reynolds number into a drag regime.
pub fn flow_regime(re: f64) -> Result<FlowRegime, SimError> {
    if !re.is_finite() || re < 0.0 || re > 2e5 {
        return Err(SimError::OutOfRegime { re });
    }
    Ok(if re < 2.0 {
        FlowRegime::Stokes
    } else if re <= 500.0 {
        FlowRegime::Intermediate
    } else {
        FlowRegime::Newton
    })
}

/// Reynolds number of the flow a droplet of diameter d sees, built from the
/// cloud speed: d·ρ_a·v_c/μ_a.
pub fn reynolds(d: f64, v_c: f64, env: &Environment) -> f64 {
    debug_assert!(d > 0.0);
    debug_assert!(v_c >= 0.0);
    d * env.rho_a * v_c / env.mu_a
}

/// Drag coefficient for a sphere in the given regime:
/// 24/Re (Stokes), 18.5/Re^(3/5) (intermediate), 0.44 (Newton).
pub fn drag_coefficient(re: f64) -> Result<f64, SimError> {
    if !(re > 0.0) {
        return Err(SimError::OutOfRegime { re });
    }
    Ok(match flow_regime(re)? {
        FlowRegime::Stokes => 24.0 / re,
        FlowRegime::Intermediate => 18.5 / re.powf(0.6),
        FlowRegime::Newton => 0.44,
    })
}

/// Drag coefficient without the upper Reynolds bound, for use inside the
/// terminal-velocity iteration where intermediate guesses may overshoot;
/// the caller re-checks the converged Reynolds number.
fn drag_coefficient_unchecked(re: f64) -> f64 {
    if re < 2.0 {
        24.0 / re
    } else if re <= 500.0 {
        18.5 / re.powf(0.6)
    } else {
        0.44
    }
}

/// Settling velocity of a droplet of diameter d (m/s).
///
/// `Paper` evaluates one closed-form expression per regime, with the regime
/// chosen by the cloud-velocity Reynolds number. `Derived` instead solves
/// the drag force balance v = sqrt(4·d·g·(ρ_d−ρ_a)/(3·ρ_a·C_D(Re(v))))
/// self-consistently by bisection: the same balance the closed forms are
/// quoted from, kept as an independent cross-check because the two routes
/// agree exactly only in the Stokes regime.
pub fn settling_velocity(
    d: f64,
    v_c: f64,
    env: &Environment,
    law: SettlingLaw,
) -> Result<f64, SimError> {
    debug_assert!(d > 0.0);
    debug_assert!(v_c >= 0.0);
    let re = reynolds(d, v_c, env);
    let regime = flow_regime(re)?;
    let delta_rho = env.rho_d - env.rho_a;
    match law {
        SettlingLaw::Paper => Ok(match regime {
            FlowRegime::Stokes => env.g * d * d * delta_rho / (18.0 * env.mu_a),
            FlowRegime::Intermediate => {
                env.g * d.powf(1.6) * delta_rho
                    / (13.875 * env.rho_d.powf(0.4) * env.mu_a.powf(0.6))
            }
            FlowRegime::Newton => 3.03 * env.g * d * delta_rho / env.rho_d,
        }),
        SettlingLaw::Derived => {
            // Force balance residual, monotone in v: drag term minus driving
            // buoyant weight. Negative below the terminal velocity.
            let residual = |v: f64| {
                let re_v = d * env.rho_a * v / env.mu_a;
                3.0 * env.rho_a * drag_coefficient_unchecked(re_v) * v * v
                    - 4.0 * d * env.g * delta_rho
            };
            let mut lo = 0.0_f64; // residual(0⁺) < 0
            let mut hi = 1.0_f64;
            let mut growth = 0;
            while residual(hi) < 0.0 {
                hi *= 2.0;
                growth += 1;
                if growth > 60 {
                    return Err(SimError::OutOfRegime {
                        re: d * env.rho_a * hi / env.mu_a,
                    });
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if residual(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            let v = 0.5 * (lo + hi);
            let re_v = d * env.rho_a * v / env.mu_a;
            if re_v > 2e5 {
                return Err(SimError::OutOfRegime { re: re_v });
            }
            Ok(v)
        }
    }
}

/// Mean-count decrement over one step from settling through the cloud's
/// lower cap: Δλ = −3·v_s·λ·Δt/(2·α_e·s). Always ≤ 0; the caller clamps
/// λ + Δλ at zero.
pub fn lambda_step(
    lambda: f64,
    v_s: f64,
    s: f64,
    alpha_e: f64,
    dt: f64,
) -> Result<f64, SimError> {
    debug_assert!(lambda >= 0.0);
    debug_assert!(dt > 0.0);
    if s <= 0.0 {
        return Err(SimError::SingularGeometry {
            context: "settling update",
        });
    }
    Ok(-3.0 * v_s * lambda * dt / (2.0 * alpha_e * s))
}

/// Draws a realized droplet count from the Gaussian approximation
/// N ~ N(λ, λ), clamped below at zero. An empty class yields exactly zero
/// without advancing the generator.
pub fn sample_count<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    debug_assert!(lambda >= 0.0);
    if lambda <= 0.0 {
        return 0.0;
    }
    let normal = Normal::new(lambda, lambda.sqrt()).expect("positive standard deviation");
    normal.sample(rng).max(0.0)
}

/// Buoyant mass deficit of the droplet load (kg): Σ_k (ρ_d − ρ_f)·V_k·N_k.
/// This is the `Z` that resists cloud displacement in the trajectory solve.
pub fn buoyant_mass_deficit(classes: &[ClassState], cfg: &ScenarioConfig) -> f64 {
    let delta = cfg.environment.rho_d - cfg.environment.rho_f;
    classes
        .iter()
        .map(|c| delta * cfg.classes[c.class_index].volume * c.count)
        .sum()
}

/// Bulk density of the cloud (kg/m³): ambient air plus the volume-fraction
/// weighted droplet excess, with the cloud volume η·(α_e·s)³.
pub fn cloud_density(classes: &[ClassState], s: f64, cfg: &ScenarioConfig) -> Result<f64, SimError> {
    if s <= 0.0 {
        return Err(SimError::SingularGeometry {
            context: "cloud density",
        });
    }
    let tx = &cfg.transmitter;
    let volume = tx.eta * (tx.alpha_e * tx.alpha_e * tx.alpha_e) * s * s * s;
    let delta = cfg.environment.rho_d - cfg.environment.rho_f;
    let excess: f64 = classes
        .iter()
        .map(|c| delta * cfg.classes[c.class_index].volume * c.count / volume)
        .sum();
    Ok(cfg.environment.rho_a + excess)
}
