//! Serialization of simulation products: per-step CSV, run summary JSON,
//! ensemble JSON, and sweep/curve CSV tables.
//!
//! Floating-point cells are printed with nine significant digits
//! (`1.23456789e0` style), NaN prints as `NaN`, and integer cells print
//! plainly, so files from identical runs are byte-identical.

use serde_json::json;

use crate::config::{config_fingerprint, write_config};
use crate::engine::TimeSeries;
use crate::model::{ProbabilityForm, ScenarioConfig, SettlingLaw};
use crate::receiver::OverlapBranch;
use crate::sweeps::{EnsembleStats, SweepResult};

/// Nine-significant-digit scientific notation; NaN stays literal.
pub fn fmt_cell(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.8e}")
    }
}

fn settling_label(law: SettlingLaw) -> &'static str {
    match law {
        SettlingLaw::Paper => "paper",
        SettlingLaw::Derived => "derived",
    }
}

fn form_label(form: ProbabilityForm) -> &'static str {
    match form {
        ProbabilityForm::AsPrinted => "as_printed",
        ProbabilityForm::MomentConsistent => "moment_consistent",
    }
}

fn branch_label(branch: OverlapBranch) -> &'static str {
    match branch {
        OverlapBranch::None => "none",
        OverlapBranch::Partial => "partial",
        OverlapBranch::Encompassed => "encompassed",
    }
}

/// Per-step CSV of a run. Columns: kinematics, buoyant mass deficit and
/// cloud density, then `lambda_k,count_k,received_k` for each droplet
/// class in configuration order, then the step's total received count and
/// infection state. Counts reflect end-of-step (post-depletion) state.
pub fn timeseries_csv(cfg: &ScenarioConfig, ts: &TimeSeries) -> String {
    let mut out = String::from("t,s,theta_rad,x,y,z,r,v_c,Z,rho_c");
    for k in 1..=cfg.classes.len() {
        out.push_str(&format!(",lambda_{k},count_{k},received_{k}"));
    }
    out.push_str(",N_R,state\n");
    for step in &ts.steps {
        let p = &step.point;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_cell(p.t),
            fmt_cell(p.s),
            fmt_cell(p.theta),
            fmt_cell(p.x),
            fmt_cell(p.y),
            fmt_cell(p.z),
            fmt_cell(p.r),
            fmt_cell(p.v_c),
            fmt_cell(step.z),
            fmt_cell(step.rho_c),
        ));
        for (k, class) in step.classes.iter().enumerate() {
            out.push_str(&format!(
                ",{},{},{}",
                fmt_cell(class.lambda),
                fmt_cell(class.count),
                step.reception.per_class_received[k]
            ));
        }
        out.push_str(&format!(",{},{}\n", step.reception.n_r, step.reception.state));
    }
    out
}

/// Run summary as pretty JSON: configuration echo (canonical text form),
/// seed, infection verdict, and the propagation mode.
pub fn run_summary_json(cfg: &ScenarioConfig, seed: u64, ts: &TimeSeries) -> String {
    let value = json!({
        "config_text": write_config(cfg),
        "config_hash": config_fingerprint(cfg),
        "seed": seed,
        "first_infection_time": ts.summary.first_infection_time,
        "total_received": ts.summary.total_received,
        "final_state": ts.summary.final_state,
        "mode": {
            "stochastic": cfg.controls.stochastic,
            "settling_law": settling_label(cfg.controls.settling_law),
            "probability_form": form_label(cfg.controls.probability_form),
        },
    });
    let mut text = serde_json::to_string_pretty(&value).expect("static JSON shape");
    text.push('\n');
    text
}

/// Ensemble statistics as pretty JSON.
pub fn ensemble_json(cfg: &ScenarioConfig, stats: &EnsembleStats) -> String {
    let value = json!({
        "config_hash": config_fingerprint(cfg),
        "n_runs": stats.n_runs,
        "n_failures": stats.n_failures,
        "base_seed": stats.base_seed,
        "infection_frequency": stats.infection_frequency,
        "half_width_3sigma": stats.half_width_3sigma,
        "per_step": stats.per_step.iter().map(|s| json!({
            "t": s.t,
            "mean_n_r": s.mean_n_r,
            "sd_n_r": s.sd_n_r,
        })).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&value).expect("static JSON shape");
    text.push('\n');
    text
}

/// Parameter sweep as CSV: one row per grid point. An absent first
/// infection time prints as an empty cell.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("param,value,infected,first_infection_time,probability\n");
    for point in &result.outcomes {
        let first = point
            .first_infection_time
            .map(fmt_cell)
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            result.param,
            point.value,
            point.infected,
            first,
            fmt_cell(point.probability)
        ));
    }
    out
}

/// Distance/time probability surface as CSV: one row per (x_R, t) pair,
/// with both the cumulative (running-maximum) probability and the
/// instantaneous single-step value, plus the overlap branch at that step.
pub fn curve_csv(result: &SweepResult) -> String {
    let mut out = String::from("x_R,t,probability,probability_instant,branch\n");
    for point in &result.outcomes {
        for sample in &point.time_probabilities {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                point.value,
                fmt_cell(sample.t),
                fmt_cell(sample.probability),
                fmt_cell(sample.probability_instant),
                branch_label(sample.branch)
            ));
        }
    }
    out
}
