//! Acceptance suite: one test per shipping criterion. Each test prints a
//! single `criterion N (...): PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`) before asserting, so a
//! red run still reports every verdict it reached.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use droplet_channel::engine::{run_simulation, step_geometry};
use droplet_channel::infection::{exposure_moments, infection_probability, StepGeometry};
use droplet_channel::model::{default_scenario, ProbabilityForm, ScenarioConfig, Sex};
use droplet_channel::output::timeseries_csv;
use droplet_channel::receiver::{accumulate_quantize, detect, intersection_area, OverlapBranch};
use droplet_channel::sweeps::{probability_curve, sweep, GridPoint, SweepParam};
use droplet_channel::trajectory::{displacement_rhs, solve_s};

fn mean_scenario() -> ScenarioConfig {
    let mut cfg = default_scenario(Sex::Average);
    cfg.controls.stochastic = false;
    cfg
}

fn verdict(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Criterion 1 — the horizontal-cough safe zone: sweeping receiver
/// distance at a zero threshold, the smallest never-infected distance
/// falls in [1.6, 1.8] m.
#[test]
fn criterion_1_safe_distance() {
    let mut cfg = mean_scenario();
    cfg.controls.gamma = 0;
    cfg.transmitter.theta0 = 0.0;
    let xs: Vec<f64> = (0..=40).map(|i| 0.5 + i as f64 * 0.05).collect();
    let grid: Vec<GridPoint> = xs.iter().map(|&v| GridPoint::Number(v)).collect();
    let result = sweep(&cfg, SweepParam::XR, &grid).expect("sweep runs");

    let first_safe = result.outcomes.iter().position(|o| o.infected == 0);
    let contiguous = match first_safe {
        Some(i) => {
            result.outcomes[..i].iter().all(|o| o.infected == 1)
                && result.outcomes[i..].iter().all(|o| o.infected == 0)
        }
        None => false,
    };
    let boundary = first_safe.map(|i| xs[i]);
    let in_band = boundary.is_some_and(|b| (1.6 - 1e-9..=1.8 + 1e-9).contains(&b));

    verdict(
        "1 (safe distance)",
        contiguous && in_band,
        &format!(
            "smallest never-infected x_R = {:?} m on 0.5–2.5 m grid (expected within [1.6, 1.8]), \
             infected/safe split contiguous: {contiguous}",
            boundary
        ),
    );
}

/// Criterion 2 — the safe coughing angle: sweeping the discharge angle at
/// the default geometry, the infected→safe transition (lower edge of the
/// infected band) falls in [−30°, −20°], with every angle below it safe.
#[test]
fn criterion_2_safe_angle() {
    let mut cfg = mean_scenario();
    let mut states = Vec::new();
    for deg in -40..=10 {
        cfg.transmitter.theta0 = (deg as f64).to_radians();
        let ts = run_simulation(&cfg, 0).expect("run");
        states.push((deg, ts.summary.final_state));
    }
    let lower = states.iter().find(|(_, s)| *s == 1).map(|(d, _)| *d);
    let upper = states.iter().rev().find(|(_, s)| *s == 1).map(|(d, _)| *d);
    let below_all_safe = lower
        .map(|b| states.iter().filter(|(d, _)| *d < b).all(|(_, s)| *s == 0))
        .unwrap_or(false);
    let contiguous = match (lower, upper) {
        (Some(lo), Some(hi)) => states
            .iter()
            .all(|(d, s)| ((lo..=hi).contains(d)) == (*s == 1)),
        _ => false,
    };
    let in_band = lower.is_some_and(|b| (-30..=-20).contains(&b));

    verdict(
        "2 (safe angle)",
        in_band && below_all_safe && contiguous,
        &format!(
            "infected band [{lower:?}°, {upper:?}°] on the −40°…+10° grid; lower transition \
             expected in [−30°, −20°]; below-band all safe: {below_all_safe}, band contiguous: \
             {contiguous}"
        ),
    );
}

/// Criterion 3 — exposure time: at each of ten distances, infection
/// probability at 1, 2, 4, 8 s is non-decreasing in time. Exact, no
/// tolerance.
#[test]
fn criterion_3_exposure_time_monotonicity() {
    let cfg = mean_scenario();
    let xs: Vec<f64> = (0..10).map(|i| 1.2 + 0.1 * i as f64).collect();
    let times = [1.0, 2.0, 4.0, 8.0];
    let result = probability_curve(&cfg, &xs, &times).expect("curve");

    let mut violations = Vec::new();
    for point in &result.outcomes {
        for pair in point.time_probabilities.windows(2) {
            if pair[1].probability < pair[0].probability {
                violations.push(format!(
                    "x_R={} t={}→{}: {} → {}",
                    point.value, pair[0].t, pair[1].t, pair[0].probability, pair[1].probability
                ));
            }
        }
    }
    verdict(
        "3 (exposure-time monotonicity)",
        violations.is_empty(),
        &format!(
            "{} (x_R, t) pairs over 10 distances × {{1,2,4,8}} s, violations: {:?}",
            result.outcomes.len() * times.len(),
            violations
        ),
    );
}

/// Criterion 4 — sex asymmetry: across a threshold sweep there is a γ
/// interval where the male receiver is infected and the female is not,
/// and never the reverse at equal γ.
#[test]
fn criterion_4_sex_asymmetry() {
    let mut male = default_scenario(Sex::Male);
    let mut female = default_scenario(Sex::Female);
    male.controls.stochastic = false;
    female.controls.stochastic = false;

    let mut male_only = Vec::new();
    let mut female_only = Vec::new();
    for gamma in (0..=400).step_by(5) {
        male.controls.gamma = gamma;
        female.controls.gamma = gamma;
        let m = run_simulation(&male, 0).expect("male run").summary.final_state;
        let f = run_simulation(&female, 0).expect("female run").summary.final_state;
        if m == 1 && f == 0 {
            male_only.push(gamma);
        }
        if f == 1 && m == 0 {
            female_only.push(gamma);
        }
    }
    verdict(
        "4 (sex asymmetry)",
        !male_only.is_empty() && female_only.is_empty(),
        &format!(
            "male-infected/female-safe at γ ∈ {:?}…{:?} ({} grid points); female-infected/male-safe \
             at {} points (must be 0)",
            male_only.first(),
            male_only.last(),
            male_only.len(),
            female_only.len()
        ),
    );
}

/// Criterion 5 — trajectory solver: on 1000 random (t, Z, θ0) triples the
/// quartic root has relative residual < 1e-9 and agrees with an
/// independent bisection to 1e-9 m.
#[test]
fn criterion_5_trajectory_solver() {
    let cfg = mean_scenario();
    let env = &cfg.environment;
    let base_tx = &cfg.transmitter;
    let c4 = base_tx.eta * (base_tx.alpha_e * base_tx.alpha_e * base_tx.alpha_e) * env.rho_a / 4.0;

    let mut rng = ChaCha8Rng::seed_from_u64(20260823);
    let mut max_residual: f64 = 0.0;
    let mut max_deviation: f64 = 0.0;
    for _ in 0..1000 {
        let t = rng.random_range(0.05..12.0);
        let z = rng.random_range(0.0..5e-5);
        let theta0 = rng.random_range(-75.0f64..75.0).to_radians();
        let mut tx = base_tx.clone();
        tx.theta0 = theta0;

        let s = solve_s(t, z, &tx, env).expect("solver converges");
        let rhs = displacement_rhs(t, &tx);
        let residual = (c4 * s * s * s * s + z * s - rhs).abs() / rhs;
        max_residual = max_residual.max(residual);

        // Independent oracle: plain bisection of the same monotone balance.
        let f = |s: f64| c4 * s * s * s * s + z * s - rhs;
        let (mut lo, mut hi) = (0.0f64, 20.0f64);
        assert!(f(hi) > 0.0, "oracle bracket too small");
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        max_deviation = max_deviation.max((s - 0.5 * (lo + hi)).abs());
    }
    verdict(
        "5 (trajectory solver)",
        max_residual < 1e-9 && max_deviation <= 1e-9,
        &format!(
            "1000 random (t, Z, θ0) triples: max relative residual {max_residual:.3e} (< 1e-9), \
             max |root − bisection| {max_deviation:.3e} m (≤ 1e-9)"
        ),
    );
}

/// Criterion 6 — overlap areas against Monte Carlo: 1000 random circle
/// pairs, each checked against a 1e7-sample estimate. A correct
/// implementation still lands outside ±3σ for a Binomial(1000, 0.0027)
/// share of pairs, so the batch passes when exceedances stay within that
/// envelope (≤ 9) and no pair strays beyond 5σ.
#[test]
fn criterion_6_area_oracle() {
    const SAMPLES: u64 = 10_000_000;
    let pairs: Vec<(f64, f64, f64)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(424242);
        (0..1000)
            .map(|_| {
                let r_a = rng.random_range(0.05..1.5);
                let r_b = rng.random_range(0.05..1.5);
                let d = rng.random_range(0.0..1.2 * (r_a + r_b));
                (r_a, r_b, d)
            })
            .collect()
    };

    let zs: Vec<f64> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, &(r_a, r_b, d))| {
            let analytic = intersection_area(r_a, r_b, d);
            // Sample the smaller circle's bounding square; the larger
            // circle sits at the origin, the smaller at (d, 0).
            let (r_small, r_large) = if r_a <= r_b { (r_a, r_b) } else { (r_b, r_a) };
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + i as u64);
            let mut hits = 0u64;
            for _ in 0..SAMPLES {
                let x = rng.random_range(-r_small..r_small);
                let y = rng.random_range(-r_small..r_small);
                if x * x + y * y <= r_small * r_small {
                    let dx = x + d;
                    if dx * dx + y * y <= r_large * r_large {
                        hits += 1;
                    }
                }
            }
            let box_area = 4.0 * r_small * r_small;
            let p = hits as f64 / SAMPLES as f64;
            let estimate = p * box_area;
            let sigma = box_area * (p * (1.0 - p) / SAMPLES as f64).sqrt();
            if sigma == 0.0 {
                // No sample landed in the overlap: the analytic area must
                // be (numerically) zero too.
                if analytic.abs() < 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                (analytic - estimate) / sigma
            }
        })
        .collect();

    let exceed_3 = zs.iter().filter(|z| z.abs() > 3.0).count();
    let max_z = zs.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    verdict(
        "6 (area oracle)",
        exceed_3 <= 9 && max_z <= 5.0,
        &format!(
            "1000 circle pairs × 1e7 Monte Carlo samples: {exceed_3} pairs outside 3σ \
             (expected ≈ 2.7, allowed ≤ 9), max |z| = {max_z:.2} (≤ 5)"
        ),
    );
}

/// Criterion 7 — closed-form analytics against the stochastic pipeline on
/// a constant-geometry scenario (cloud fully encompassing the receiver at
/// every step): the moment-consistent probability must match the ensemble
/// frequency within the 3σ binomial half-width; the as-printed form's
/// deviation is reported without being asserted.
#[test]
fn criterion_7_analytics_vs_simulation() {
    const RUNS: usize = 10_000;
    let factor = 0.8;
    let geometry = StepGeometry {
        branch: OverlapBranch::Encompassed,
        factor_partial: factor,
        factor_disc: factor,
    };
    // Six steps of three large classes with mild settling decay.
    let base = [1800.0, 2500.0, 3100.0];
    let lambdas: Vec<Vec<f64>> = (0..6)
        .map(|j| {
            base.iter()
                .map(|&b| b * 0.97f64.powi(j))
                .collect::<Vec<f64>>()
        })
        .collect();

    let moments = exposure_moments(&lambdas, &geometry);
    let gamma = moments.mean() as u64;
    let p_mc = infection_probability(gamma, &moments, ProbabilityForm::MomentConsistent);
    let p_ap = infection_probability(gamma, &moments, ProbabilityForm::AsPrinted);

    let infected: usize = (0..RUNS)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(55_000 + run as u64);
            let mut history: Vec<Vec<f64>> = vec![Vec::new(); base.len()];
            let mut state = 0u8;
            for row in &lambdas {
                for (k, &lambda) in row.iter().enumerate() {
                    let n = droplet_channel::cloud::sample_count(lambda, &mut rng);
                    history[k].push(n);
                }
                let n_r: u64 = history
                    .iter()
                    .map(|h| accumulate_quantize(factor, h))
                    .sum();
                state = detect(n_r, gamma);
            }
            usize::from(state == 1)
        })
        .sum();
    let freq = infected as f64 / RUNS as f64;
    let sigma = (p_mc * (1.0 - p_mc) / RUNS as f64).sqrt();
    let dev_mc = (freq - p_mc).abs();
    let dev_ap = (freq - p_ap).abs();

    verdict(
        "7 (analytics vs simulation)",
        dev_mc <= 3.0 * sigma,
        &format!(
            "moment-consistent P = {p_mc:.4}, ensemble frequency {freq:.4} over 1e4 runs \
             (|Δ| = {dev_mc:.4} vs 3σ = {:.4}); as-printed P = {p_ap:.4}, deviation {dev_ap:.4} \
             (reported, not asserted)",
            3.0 * sigma
        ),
    );
}

/// Criterion 8 — conservation and monotonicity: per-class λ never grows,
/// counts and geometric factors and probabilities stay in range, cloud
/// density never drops below ambient air, and received totals never
/// exceed the 4973 droplets emitted (mean mode).
#[test]
fn criterion_8_conservation_suite() {
    let mut issues: Vec<String> = Vec::new();

    for stochastic in [false, true] {
        let mut cfg = default_scenario(Sex::Average);
        cfg.controls.stochastic = stochastic;
        let ts = run_simulation(&cfg, 0).expect("run");
        let label = if stochastic { "stochastic" } else { "mean" };

        for k in 0..cfg.classes.len() {
            let mut prev = f64::INFINITY;
            for step in &ts.steps {
                let c = &step.classes[k];
                if c.lambda > prev {
                    issues.push(format!("{label}: class {k} λ grew at t={}", step.point.t));
                }
                prev = c.lambda;
                if c.lambda < 0.0 || c.count < 0.0 {
                    issues.push(format!("{label}: negative population at t={}", step.point.t));
                }
            }
        }
        for step in &ts.steps {
            if step.geometry.factor_partial < 0.0
                || step.geometry.factor_disc < 0.0
                || step.geometry.factor_partial > step.geometry.factor_disc + 1e-18
            {
                issues.push(format!("{label}: bad overlap factors at t={}", step.point.t));
            }
            if !step.rho_c.is_nan() && step.rho_c < cfg.environment.rho_a {
                issues.push(format!("{label}: cloud density below air at t={}", step.point.t));
            }
        }
        if !ts.steps[0].rho_c.is_nan() {
            issues.push(format!("{label}: release-step density should be undefined"));
        }

        if !stochastic {
            let emitted = cfg.total_initial_count() as f64;
            for step in &ts.steps {
                if step.reception.n_r as f64 > emitted {
                    issues.push(format!("mean: step received exceeds emission at t={}", step.point.t));
                }
            }
            let remaining: f64 = ts.steps.last().unwrap().classes.iter().map(|c| c.count).sum();
            if ts.summary.total_received + remaining > emitted + 1e-9 {
                issues.push(format!(
                    "mean: delivered {} + remaining {} exceeds emitted {}",
                    ts.summary.total_received, remaining, emitted
                ));
            }
        }
    }

    // Probability range on the default channel.
    let cfg = mean_scenario();
    let times: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    let curve = probability_curve(&cfg, &[1.2, 1.5, 1.8], &times).expect("curve");
    for o in &curve.outcomes {
        for tp in &o.time_probabilities {
            if !(0.0..=1.0).contains(&tp.probability)
                || !(0.0..=1.0).contains(&tp.probability_instant)
            {
                issues.push(format!("probability out of range at x_R={} t={}", o.value, tp.t));
            }
        }
    }

    verdict(
        "8 (conservation suite)",
        issues.is_empty(),
        &format!(
            "λ monotone, populations/factors/probabilities in range, ρ_c ≥ ρ_a, received ≤ 4973 \
             (mean mode); issues: {issues:?}"
        ),
    );
}

/// Criterion 9 — determinism: identical configuration and seed give
/// byte-identical CSV.
#[test]
fn criterion_9_determinism() {
    let cfg = default_scenario(Sex::Average); // stochastic mode
    let a = timeseries_csv(&cfg, &run_simulation(&cfg, 7).expect("run"));
    let b = timeseries_csv(&cfg, &run_simulation(&cfg, 7).expect("run"));
    let identical = a == b;
    let c = timeseries_csv(&cfg, &run_simulation(&cfg, 8).expect("run"));
    verdict(
        "9 (determinism)",
        identical,
        &format!(
            "two stochastic runs, same seed: {} bytes, byte-identical: {identical}; different \
             seed differs: {}",
            a.len(),
            c != a
        ),
    );
}

/// The geometric flow factors the engine records are consistent with the
/// public reception helpers (spot audit backing criteria 1–4).
#[test]
fn flow_factor_audit() {
    let cfg = mean_scenario();
    let ts = run_simulation(&cfg, 0).expect("run");
    for step in &ts.steps[1..] {
        let geometry = step_geometry(&cfg, &step.point);
        assert_eq!(geometry.branch, step.geometry.branch);
        assert_eq!(geometry.factor_partial, step.geometry.factor_partial);
    }
}
