//! Plain-text scenario configuration.
//!
//! The format is line-oriented `key = value`. `#` starts a comment (whole
//! line or trailing), blank lines are skipped, and every key is optional —
//! an empty document yields the built-in default scenario. Scalar keys may
//! appear at most once; `droplet_class` lines repeat, and the first one
//! replaces the entire default droplet spectrum.
//!
//! Convenience keys use field units (`theta0_deg` in degrees, face
//! breadths in centimetres, droplet diameters in micrometres); each has an
//! SI twin (`theta0_rad`, `*_m`, `droplet_class_m`) used by the writer so
//! that a saved configuration reloads bit-for-bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::ConfigError;
use crate::model::{
    default_scenario, face_breadths, DropletClass, ProbabilityForm, ReceiverGeometry,
    ScenarioConfig, SettlingLaw, Sex,
};

/// Parses a configuration document. Any absent key keeps its default.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = default_scenario(Sex::Average);

    // Raw captures; applied in a fixed order afterwards so that line order
    // never matters (e.g. an explicit breadth beats `sex` even when the
    // `sex` line comes later).
    let mut sex: Option<Sex> = None;
    let mut beta_bb: Option<f64> = None;
    let mut beta_ss: Option<f64> = None;
    let mut theta0: Option<f64> = None;
    let mut classes: Vec<DropletClass> = Vec::new();
    let mut seen: Vec<&str> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::malformed(line_no, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::malformed(line_no, format!("key `{key}` has no value")));
        }

        // Duplicate detection treats unit twins as one logical key.
        let logical = match key {
            "transmitter.theta0_deg" | "transmitter.theta0_rad" => "transmitter.theta0",
            "receiver.beta_bb_cm" | "receiver.beta_bb_m" => "receiver.beta_bb",
            "receiver.beta_ss_cm" | "receiver.beta_ss_m" => "receiver.beta_ss",
            other => other,
        };
        if logical != "droplet_class" && logical != "droplet_class_m" {
            if seen.iter().any(|k| *k == logical) {
                return Err(ConfigError::malformed(
                    line_no,
                    format!("key `{logical}` given more than once"),
                ));
            }
            // The `seen` entries borrow from a static key list below.
            seen.push(match_logical(logical, line_no)?);
        }

        match key {
            "environment.rho_a" => cfg.environment.rho_a = number(key, value, line_no)?,
            "environment.rho_f" => cfg.environment.rho_f = number(key, value, line_no)?,
            "environment.rho_d" => cfg.environment.rho_d = number(key, value, line_no)?,
            "environment.mu_a" => cfg.environment.mu_a = number(key, value, line_no)?,
            "environment.g" => cfg.environment.g = number(key, value, line_no)?,
            "transmitter.x" => cfg.transmitter.position[0] = number(key, value, line_no)?,
            "transmitter.y" => cfg.transmitter.position[1] = number(key, value, line_no)?,
            "transmitter.z" => cfg.transmitter.position[2] = number(key, value, line_no)?,
            "transmitter.I0" => cfg.transmitter.i0 = number(key, value, line_no)?,
            "transmitter.F0" => cfg.transmitter.f0 = number(key, value, line_no)?,
            "transmitter.theta0_deg" => {
                theta0 = Some(number(key, value, line_no)?.to_radians())
            }
            "transmitter.theta0_rad" => theta0 = Some(number(key, value, line_no)?),
            "transmitter.v_c0" => cfg.transmitter.v_c0 = number(key, value, line_no)?,
            "transmitter.alpha_e" => cfg.transmitter.alpha_e = number(key, value, line_no)?,
            "transmitter.eta" => cfg.transmitter.eta = number(key, value, line_no)?,
            "receiver.x_R" => cfg.receiver.position[0] = number(key, value, line_no)?,
            "receiver.y_R" => cfg.receiver.position[1] = number(key, value, line_no)?,
            "receiver.z_R" => cfg.receiver.position[2] = number(key, value, line_no)?,
            "receiver.sex" => {
                sex = Some(match value {
                    "female" => Sex::Female,
                    "male" => Sex::Male,
                    "average" => Sex::Average,
                    other => {
                        return Err(ConfigError::malformed(
                            line_no,
                            format!("receiver.sex must be female, male, or average, got `{other}`"),
                        ))
                    }
                })
            }
            "receiver.beta_bb_cm" => beta_bb = Some(number(key, value, line_no)? / 100.0),
            "receiver.beta_bb_m" => beta_bb = Some(number(key, value, line_no)?),
            "receiver.beta_ss_cm" => beta_ss = Some(number(key, value, line_no)? / 100.0),
            "receiver.beta_ss_m" => beta_ss = Some(number(key, value, line_no)?),
            "controls.dt" => cfg.controls.dt = number(key, value, line_no)?,
            "controls.t_s" => cfg.controls.t_s = number(key, value, line_no)?,
            "controls.gamma" => cfg.controls.gamma = integer(key, value, line_no)?,
            "controls.seed" => cfg.controls.seed = integer(key, value, line_no)?,
            "controls.settling_law" => {
                cfg.controls.settling_law = match value {
                    "paper" => SettlingLaw::Paper,
                    "derived" => SettlingLaw::Derived,
                    other => {
                        return Err(ConfigError::malformed(
                            line_no,
                            format!("controls.settling_law must be paper or derived, got `{other}`"),
                        ))
                    }
                }
            }
            "controls.probability_form" => {
                cfg.controls.probability_form = match value {
                    "as_printed" => ProbabilityForm::AsPrinted,
                    "moment_consistent" => ProbabilityForm::MomentConsistent,
                    other => {
                        return Err(ConfigError::malformed(
                            line_no,
                            format!(
                                "controls.probability_form must be as_printed or \
                                 moment_consistent, got `{other}`"
                            ),
                        ))
                    }
                }
            }
            "controls.stochastic" => {
                cfg.controls.stochastic = match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(ConfigError::malformed(
                            line_no,
                            format!("controls.stochastic must be true or false, got `{other}`"),
                        ))
                    }
                }
            }
            "droplet_class" => classes.push(droplet_line(value, 1e-6, line_no)?),
            "droplet_class_m" => classes.push(droplet_line(value, 1.0, line_no)?),
            other => {
                return Err(ConfigError::malformed(line_no, format!("unknown key `{other}`")))
            }
        }
    }

    if let Some(angle) = theta0 {
        cfg.transmitter.theta0 = angle;
    }
    if !classes.is_empty() {
        cfg.classes = classes;
    }
    // Receiver resolution: `sex` chooses default breadths, explicit
    // breadths override, and the detection disc is rebuilt either way.
    let (mut bb, mut ss) = match sex {
        Some(s) => face_breadths(s),
        None => (cfg.receiver.beta_bb, cfg.receiver.beta_ss),
    };
    if let Some(v) = beta_bb {
        bb = v;
    }
    if let Some(v) = beta_ss {
        ss = v;
    }
    cfg.receiver = ReceiverGeometry::from_face(cfg.receiver.position, bb, ss)?;

    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a configuration file; read failures are reported as a
/// malformed document at line 0.
pub fn load_config<P: AsRef<Path>>(path: P) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(&path).map_err(|e| {
        ConfigError::malformed(0, format!("cannot read {}: {e}", path.as_ref().display()))
    })?;
    parse_config(&text)
}

/// Serializes a scenario so that `parse_config` reproduces it exactly.
/// All values are written in SI units with shortest round-trip float
/// formatting.
pub fn write_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut kv = |key: &str, value: String| {
        let _ = writeln!(out, "{key} = {value}");
    };
    kv("environment.rho_a", fmt_f64(cfg.environment.rho_a));
    kv("environment.rho_f", fmt_f64(cfg.environment.rho_f));
    kv("environment.rho_d", fmt_f64(cfg.environment.rho_d));
    kv("environment.mu_a", fmt_f64(cfg.environment.mu_a));
    kv("environment.g", fmt_f64(cfg.environment.g));
    kv("transmitter.x", fmt_f64(cfg.transmitter.position[0]));
    kv("transmitter.y", fmt_f64(cfg.transmitter.position[1]));
    kv("transmitter.z", fmt_f64(cfg.transmitter.position[2]));
    kv("transmitter.I0", fmt_f64(cfg.transmitter.i0));
    kv("transmitter.F0", fmt_f64(cfg.transmitter.f0));
    kv("transmitter.theta0_rad", fmt_f64(cfg.transmitter.theta0));
    kv("transmitter.v_c0", fmt_f64(cfg.transmitter.v_c0));
    kv("transmitter.alpha_e", fmt_f64(cfg.transmitter.alpha_e));
    kv("transmitter.eta", fmt_f64(cfg.transmitter.eta));
    kv("receiver.x_R", fmt_f64(cfg.receiver.position[0]));
    kv("receiver.y_R", fmt_f64(cfg.receiver.position[1]));
    kv("receiver.z_R", fmt_f64(cfg.receiver.position[2]));
    kv("receiver.beta_bb_m", fmt_f64(cfg.receiver.beta_bb));
    kv("receiver.beta_ss_m", fmt_f64(cfg.receiver.beta_ss));
    kv("controls.dt", fmt_f64(cfg.controls.dt));
    kv("controls.t_s", fmt_f64(cfg.controls.t_s));
    kv("controls.gamma", cfg.controls.gamma.to_string());
    kv("controls.seed", cfg.controls.seed.to_string());
    kv(
        "controls.settling_law",
        match cfg.controls.settling_law {
            SettlingLaw::Paper => "paper",
            SettlingLaw::Derived => "derived",
        }
        .to_string(),
    );
    kv(
        "controls.probability_form",
        match cfg.controls.probability_form {
            ProbabilityForm::AsPrinted => "as_printed",
            ProbabilityForm::MomentConsistent => "moment_consistent",
        }
        .to_string(),
    );
    kv("controls.stochastic", cfg.controls.stochastic.to_string());
    for class in &cfg.classes {
        kv(
            "droplet_class_m",
            format!("{} {}", fmt_f64(class.diameter), class.initial_count),
        );
    }
    out
}

/// 64-bit FNV-1a over the canonical serialization, as 16 hex digits; used
/// to stamp derived outputs with the configuration they came from.
pub fn config_fingerprint(cfg: &ScenarioConfig) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in write_config(cfg).as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

/// Shortest string that parses back to exactly the same f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn number(key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| {
        ConfigError::malformed(line, format!("key `{key}` needs a number, got `{value}`"))
    })
}

fn integer(key: &str, value: &str, line: usize) -> Result<u64, ConfigError> {
    value.parse::<u64>().map_err(|_| {
        ConfigError::malformed(
            line,
            format!("key `{key}` needs a non-negative integer, got `{value}`"),
        )
    })
}

fn droplet_line(value: &str, diameter_scale: f64, line: usize) -> Result<DropletClass, ConfigError> {
    let mut parts = value.split_whitespace();
    let (Some(d), Some(n), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(ConfigError::malformed(
            line,
            "droplet class needs exactly `<diameter> <count>`",
        ));
    };
    let diameter: f64 = d.parse().map_err(|_| {
        ConfigError::malformed(line, format!("droplet diameter `{d}` is not a number"))
    })?;
    let count: u64 = n.parse().map_err(|_| {
        ConfigError::malformed(line, format!("droplet count `{n}` is not a non-negative integer"))
    })?;
    Ok(DropletClass::new(diameter * diameter_scale, count))
}

/// Interns a logical key name so duplicate tracking can borrow statically.
fn match_logical(logical: &str, line: usize) -> Result<&'static str, ConfigError> {
    const KEYS: &[&str] = &[
        "environment.rho_a",
        "environment.rho_f",
        "environment.rho_d",
        "environment.mu_a",
        "environment.g",
        "transmitter.x",
        "transmitter.y",
        "transmitter.z",
        "transmitter.I0",
        "transmitter.F0",
        "transmitter.theta0",
        "transmitter.v_c0",
        "transmitter.alpha_e",
        "transmitter.eta",
        "receiver.x_R",
        "receiver.y_R",
        "receiver.z_R",
        "receiver.sex",
        "receiver.beta_bb",
        "receiver.beta_ss",
        "controls.dt",
        "controls.t_s",
        "controls.gamma",
        "controls.seed",
        "controls.settling_law",
        "controls.probability_form",
        "controls.stochastic",
    ];
    KEYS.iter()
        .find(|k| **k == logical)
        .copied()
        .ok_or_else(|| ConfigError::malformed(line, format!("unknown key `{logical}`")))
}
