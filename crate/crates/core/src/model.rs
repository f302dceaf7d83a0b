//! Scenario parameters: who coughs, where the exposed person stands, what the
//! air is like, and how the simulation is controlled.
//!
//! All quantities are SI internally (metres, seconds, kilograms, radians).
//! The bundled defaults describe a desk-scale indoor scenario: a cough
//! released at mouth height 1.7 m with a measured droplet size spectrum, and
//! a receiver whose exposed cross-section is a disc sized from face
//! anthropometry (bitragion breadths). Every default can be overridden
//! through the text config format in [`crate::config`].

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::ConfigError;

/// Ambient air and droplet fluid properties.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    /// Density of ambient air (kg/m³).
    pub rho_a: f64,
    /// Density of the exhaled air carrying the droplets (kg/m³).
    pub rho_f: f64,
    /// Density of the droplet liquid (kg/m³).
    pub rho_d: f64,
    /// Dynamic viscosity of air (kg/(m·s)).
    pub mu_a: f64,
    /// Gravitational acceleration (m/s²).
    pub g: f64,
}

/// The cough/sneeze source: initial momentum, direction, and cloud shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transmitter {
    /// Mouth position (x, y, z) in metres.
    pub position: [f64; 3],
    /// Initial momentum magnitude of the exhaled puff (kg·m/s).
    pub i0: f64,
    /// Constant buoyancy-driven momentum gain rate (kg·m/s²).
    pub f0: f64,
    /// Initial discharge angle from the horizontal (radians, signed;
    /// must lie strictly inside (-π/2, π/2)).
    pub theta0: f64,
    /// Initial cloud velocity (m/s). Reported at t = 0; subsequent cloud
    /// velocities come from the displacement series.
    pub v_c0: f64,
    /// Entrainment coefficient: cloud radius = alpha_e × travelled distance.
    pub alpha_e: f64,
    /// Cloud shape factor: cloud volume = eta × radius³ (4π/3 for a sphere).
    pub eta: f64,
}

/// One droplet size class of the emitted spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropletClass {
    /// Droplet diameter (m).
    pub diameter: f64,
    /// Number of droplets of this size released by the cough.
    pub initial_count: u64,
    /// Volume of a single droplet (m³), π·d³/6.
    pub volume: f64,
}

impl DropletClass {
    /// Builds a class from a diameter in metres and a droplet count.
    pub fn new(diameter: f64, initial_count: u64) -> Self {
        DropletClass {
            diameter,
            initial_count,
            // Written as plain multiplications: `powi` has unspecified
            // precision, and this value must reproduce bit-for-bit when a
            // written configuration is parsed back.
            volume: PI * (diameter * diameter * diameter) / 6.0,
        }
    }
}

/// The exposed person: position of the face centre and the disc-shaped
/// cross-section through which droplets are received.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceiverGeometry {
    /// Face centre position (x, y, z) in metres.
    pub position: [f64; 3],
    /// Bitragion breadth across the back of the head (m).
    pub beta_bb: f64,
    /// Bitragion breadth across the chin (m).
    pub beta_ss: f64,
    /// Radius of the receiving disc (m), half the diagonal of the two breadths.
    pub r_r: f64,
    /// Area of the receiving disc (m²).
    pub a_r: f64,
}

impl ReceiverGeometry {
    /// Builds the receiving disc from face breadths (in metres).
    pub fn from_face(position: [f64; 3], beta_bb: f64, beta_ss: f64) -> Result<Self, ConfigError> {
        let r_r = receiver_radius(beta_bb, beta_ss)?;
        Ok(ReceiverGeometry {
            position,
            beta_bb,
            beta_ss,
            r_r,
            a_r: PI * r_r * r_r,
        })
    }
}

/// Radius of the receiving disc spanned by two face breadths (all metres):
/// half the diagonal of the rectangle they span.
pub fn receiver_radius(beta_bb: f64, beta_ss: f64) -> Result<f64, ConfigError> {
    if !(beta_bb > 0.0) || !beta_bb.is_finite() {
        return Err(ConfigError::validation(
            "receiver.beta_bb",
            format!("face breadth must be positive and finite, got {beta_bb}"),
        ));
    }
    if !(beta_ss > 0.0) || !beta_ss.is_finite() {
        return Err(ConfigError::validation(
            "receiver.beta_ss",
            format!("face breadth must be positive and finite, got {beta_ss}"),
        ));
    }
    Ok((beta_bb * beta_bb + beta_ss * beta_ss).sqrt() / 2.0)
}

/// Which settling-velocity formulation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SettlingLaw {
    /// Closed-form per-regime expressions (Stokes / intermediate / Newton).
    Paper,
    /// Self-consistent terminal velocity from the drag-coefficient force
    /// balance, solved iteratively.
    Derived,
}

/// Which closed-form infection-probability expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityForm {
    /// Q(γ/Ω − Ω): the original published form.
    AsPrinted,
    /// Q((γ − Ω)/σ): mean/variance-consistent Gaussian tail.
    MomentConsistent,
}

/// Discrete-time controls and run-mode switches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimControls {
    /// Step size (s).
    pub dt: f64,
    /// Total simulated time (s).
    pub t_s: f64,
    /// Detection threshold: a step marks the receiver infected when its
    /// received droplet count strictly exceeds this.
    pub gamma: u64,
    /// Seed for the deterministic random stream.
    pub seed: u64,
    /// Settling-velocity formulation.
    pub settling_law: SettlingLaw,
    /// Infection-probability formulation.
    pub probability_form: ProbabilityForm,
    /// true: sample per-step droplet counts from the Gaussian count model;
    /// false: propagate the means.
    pub stochastic: bool,
}

impl SimControls {
    /// Number of steps after t = 0; the time grid has `num_steps() + 1`
    /// entries. A small slack absorbs f64 representation error so a span
    /// that is an exact multiple of dt is not truncated (10/0.1 is
    /// 99.999… in f64).
    pub fn num_steps(&self) -> usize {
        (self.t_s / self.dt + 1e-9).floor() as usize
    }
}

/// A complete, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub environment: Environment,
    pub transmitter: Transmitter,
    pub receiver: ReceiverGeometry,
    pub classes: Vec<DropletClass>,
    pub controls: SimControls,
}

/// Receiver sex selects which measured face breadths size the receiving disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
    /// Arithmetic mean of the female and male breadths.
    Average,
}

/// Measured bitragion coronal breadth (m) by sex: (female, male).
pub const BETA_BB: (f64, f64) = (0.08853, 0.09131);
/// Measured bitragion submandibular breadth (m) by sex: (female, male).
pub const BETA_SS: (f64, f64) = (0.06901, 0.0757);

/// Face breadths (beta_bb, beta_ss) in metres for a given sex.
pub fn face_breadths(sex: Sex) -> (f64, f64) {
    match sex {
        Sex::Female => (BETA_BB.0, BETA_SS.0),
        Sex::Male => (BETA_BB.1, BETA_SS.1),
        Sex::Average => ((BETA_BB.0 + BETA_BB.1) / 2.0, (BETA_SS.0 + BETA_SS.1) / 2.0),
    }
}

/// Measured cough droplet size spectrum: (diameter in µm, droplet count).
/// The seventeen classes sum to 4973 droplets.
pub const COUGH_SPECTRUM_UM: [(f64, u64); 17] = [
    (2.0, 50),
    (4.0, 290),
    (8.0, 970),
    (16.0, 1600),
    (24.0, 870),
    (32.0, 420),
    (40.0, 240),
    (50.0, 110),
    (75.0, 140),
    (100.0, 85),
    (125.0, 48),
    (150.0, 38),
    (200.0, 35),
    (250.0, 29),
    (500.0, 34),
    (1000.0, 12),
    (2000.0, 2),
];

/// The reference indoor cough scenario. The transmitter stands at the origin
/// with the mouth at 1.7 m; the receiver faces it 1.5 m away at the same
/// height. Override any field through the config format.
pub fn default_scenario(sex: Sex) -> ScenarioConfig {
    let (beta_bb, beta_ss) = face_breadths(sex);
    let receiver = ReceiverGeometry::from_face([1.5, 1.7, 0.0], beta_bb, beta_ss)
        .expect("default face breadths are positive");
    ScenarioConfig {
        environment: Environment {
            rho_a: 1.172,
            rho_f: 0.98,
            rho_d: 993.0,
            mu_a: 19e-6,
            g: 9.81,
        },
        transmitter: Transmitter {
            position: [0.0, 1.7, 0.0],
            i0: 0.0131,
            f0: 0.0023,
            theta0: 0.0,
            v_c0: 11.2,
            alpha_e: 0.2116,
            eta: 4.0 * PI / 3.0,
        },
        receiver,
        classes: COUGH_SPECTRUM_UM
            .iter()
            .map(|&(d_um, n)| DropletClass::new(d_um * 1e-6, n))
            .collect(),
        controls: SimControls {
            dt: 0.1,
            t_s: 10.0,
            // Calibrated immune threshold of the stock scenario: at 106
            // droplets the safe coughing angle of the default geometry
            // lands at −25° (−24°…0° infect, −25° and below do not).
            gamma: 106,
            seed: 0,
            settling_law: SettlingLaw::Paper,
            probability_form: ProbabilityForm::AsPrinted,
            stochastic: true,
        },
    }
}

impl ScenarioConfig {
    /// Total droplets released across all classes.
    pub fn total_initial_count(&self) -> u64 {
        self.classes.iter().map(|c| c.initial_count).sum()
    }

    /// Checks every physical precondition; errors name the offending field
    /// using the config-file key spelling.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let env = &self.environment;
        for (field, value) in [
            ("environment.rho_a", env.rho_a),
            ("environment.rho_f", env.rho_f),
            ("environment.rho_d", env.rho_d),
            ("environment.mu_a", env.mu_a),
            ("environment.g", env.g),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::validation(
                    field,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if !(env.rho_f < env.rho_a) {
            return Err(ConfigError::validation(
                "environment.rho_f",
                format!(
                    "exhaled air must be lighter than ambient air \
                     (rho_f = {} >= rho_a = {})",
                    env.rho_f, env.rho_a
                ),
            ));
        }
        if !(env.rho_a < env.rho_d) {
            return Err(ConfigError::validation(
                "environment.rho_d",
                format!(
                    "droplet liquid must be denser than air \
                     (rho_d = {} <= rho_a = {})",
                    env.rho_d, env.rho_a
                ),
            ));
        }

        let tx = &self.transmitter;
        for (field, value) in [
            ("transmitter.I0", tx.i0),
            ("transmitter.v_c0", tx.v_c0),
            ("transmitter.alpha_e", tx.alpha_e),
            ("transmitter.eta", tx.eta),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::validation(
                    field,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if !(tx.f0 >= 0.0) || !tx.f0.is_finite() {
            return Err(ConfigError::validation(
                "transmitter.F0",
                format!("must be non-negative and finite, got {}", tx.f0),
            ));
        }
        if !(tx.theta0 > -PI / 2.0 && tx.theta0 < PI / 2.0) {
            return Err(ConfigError::validation(
                "transmitter.theta0_deg",
                format!(
                    "discharge angle must lie strictly inside (-90°, 90°), got {}°",
                    tx.theta0.to_degrees()
                ),
            ));
        }
        if !tx.position.iter().all(|p| p.is_finite()) {
            return Err(ConfigError::validation(
                "transmitter.x",
                "position components must be finite".to_string(),
            ));
        }

        let rx = &self.receiver;
        let expect_r = receiver_radius(rx.beta_bb, rx.beta_ss)?;
        if (rx.r_r - expect_r).abs() > 1e-12 * expect_r {
            return Err(ConfigError::validation(
                "receiver.r_R",
                format!(
                    "disc radius {} inconsistent with face breadths (expected {expect_r})",
                    rx.r_r
                ),
            ));
        }
        if (rx.a_r - PI * rx.r_r * rx.r_r).abs() > 1e-12 * rx.a_r {
            return Err(ConfigError::validation(
                "receiver.A_R",
                format!(
                    "disc area {} inconsistent with its radius (expected {})",
                    rx.a_r,
                    PI * rx.r_r * rx.r_r
                ),
            ));
        }
        if !rx.position.iter().all(|p| p.is_finite()) {
            return Err(ConfigError::validation(
                "receiver.x_R",
                "position components must be finite".to_string(),
            ));
        }

        if self.classes.is_empty() {
            return Err(ConfigError::validation(
                "droplet_class",
                "at least one droplet class is required".to_string(),
            ));
        }
        for (k, class) in self.classes.iter().enumerate() {
            if !(class.diameter > 0.0) || !class.diameter.is_finite() {
                return Err(ConfigError::validation(
                    "droplet_class",
                    format!("class {k}: diameter must be positive, got {}", class.diameter),
                ));
            }
            let expect_v = PI * class.diameter.powi(3) / 6.0;
            if (class.volume - expect_v).abs() > 1e-12 * expect_v {
                return Err(ConfigError::validation(
                    "droplet_class",
                    format!(
                        "class {k}: volume {} inconsistent with diameter (expected {expect_v})",
                        class.volume
                    ),
                ));
            }
        }
        for k in 1..self.classes.len() {
            if !(self.classes[k].diameter > self.classes[k - 1].diameter) {
                return Err(ConfigError::validation(
                    "droplet_class",
                    format!(
                        "diameters must be strictly increasing; class {k} ({} m) \
                         does not exceed class {} ({} m)",
                        self.classes[k].diameter,
                        k - 1,
                        self.classes[k - 1].diameter
                    ),
                ));
            }
        }

        let ctl = &self.controls;
        if !(ctl.dt > 0.0) || !ctl.dt.is_finite() {
            return Err(ConfigError::validation(
                "controls.dt",
                format!("step size must be positive and finite, got {}", ctl.dt),
            ));
        }
        if !(ctl.t_s >= ctl.dt) || !ctl.t_s.is_finite() {
            return Err(ConfigError::validation(
                "controls.t_s",
                format!(
                    "total time must be finite and at least one step (dt = {}), got {}",
                    ctl.dt, ctl.t_s
                ),
            ));
        }
        Ok(())
    }
}
