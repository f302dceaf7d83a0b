//! Closed-form infection probability from the exposure history.
//!
//! Instead of sampling, the receiver's cumulative quantized count can be
//! treated as a Gaussian variable whose moments follow from the per-class
//! mean counts λ and the step's geometric flow factor. Two published tail
//! expressions are kept side by side:
//!
//! * `as_printed` — Q(γ/Ω − Ω), the original form, which implicitly treats
//!   Ω as both location and scale;
//! * `moment_consistent` — Q((γ − Ω)/σ), the tail of the Gaussian defined
//!   by the same mean Ω and the variance aggregate.
//!
//! The two disagree in general; keeping both lets comparisons against the
//! stochastic engine quantify the difference instead of hiding it. In the
//! encompassed branch, mean and variance both use the whole-disc flow
//! factor v_c·A_R·Δt/(η·r³), which is what the sampling pipeline actually
//! applies; the area-ratio scaling that sometimes stands in for it is not
//! used.

use crate::error::SimError;
use crate::model::ProbabilityForm;
use crate::receiver::OverlapBranch;

/// Geometric flow factors of one step, as seen by the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepGeometry {
    /// Overlap configuration of the step.
    pub branch: OverlapBranch,
    /// v_c·A_RC·Δt/(η·r³) with the actual intersection area A_RC.
    pub factor_partial: f64,
    /// v_c·A_R·Δt/(η·r³) with the full receiver disc area A_R.
    pub factor_disc: f64,
}

impl StepGeometry {
    /// A step with no reception at all (cloud not at the receiver plane).
    pub fn none() -> Self {
        StepGeometry {
            branch: OverlapBranch::None,
            factor_partial: 0.0,
            factor_disc: 0.0,
        }
    }
}

/// Moment aggregates of the cumulative received count at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureMoments {
    /// Mean aggregate using the intersection-area factor: Σ_k Σ_m
    /// floor(factor·λ + 1/2).
    pub omega1: f64,
    /// Mean aggregate using the whole-disc factor.
    pub omega2: f64,
    /// Variance aggregate: same double sum with the branch factor squared.
    pub variance_partial: f64,
    /// Overlap configuration the aggregates were computed under.
    pub branch: OverlapBranch,
}

impl ExposureMoments {
    /// The mean appropriate to the branch (Ω₁ for partial overlap, Ω₂ for
    /// an encompassed receiver, 0 for no contact).
    pub fn mean(&self) -> f64 {
        match self.branch {
            OverlapBranch::Partial => self.omega1,
            OverlapBranch::Encompassed => self.omega2,
            OverlapBranch::None => 0.0,
        }
    }
}

/// Builds the moment aggregates for the latest step of a mean-count
/// history. `lambda_history` holds one row per step (release step first),
/// each row one λ per droplet class; `geometry` carries the current step's
/// factors. Every term is floored after scaling, exactly as the aggregates
/// are defined.
pub fn exposure_moments(lambda_history: &[Vec<f64>], geometry: &StepGeometry) -> ExposureMoments {
    let floor_sum = |factor: f64| -> f64 {
        lambda_history
            .iter()
            .flat_map(|row| row.iter())
            .map(|&lambda| (factor * lambda + 0.5).floor())
            .sum()
    };
    let variance_factor = match geometry.branch {
        OverlapBranch::Encompassed => geometry.factor_disc,
        _ => geometry.factor_partial,
    };
    ExposureMoments {
        omega1: floor_sum(geometry.factor_partial),
        omega2: floor_sum(geometry.factor_disc),
        variance_partial: floor_sum(variance_factor * variance_factor),
        branch: geometry.branch,
    }
}

/// Upper-tail probability of the standard Gaussian, via the complementary
/// error function.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Gaussian density of the cumulative received count at value `n`.
///
/// Out-of-contact steps have no received mass: density 0 everywhere. A
/// zero-variance step concentrates all mass at the mean, which has no
/// finite density — asking for it is signalled as an error; any other `n`
/// gets density 0.
pub fn received_pdf(n: f64, moments: &ExposureMoments) -> Result<f64, SimError> {
    if moments.branch == OverlapBranch::None {
        return Ok(0.0);
    }
    let mean = moments.mean();
    let var = moments.variance_partial;
    if var == 0.0 {
        if n == mean {
            return Err(SimError::DegenerateDistribution { mean });
        }
        return Ok(0.0);
    }
    let z = (n - mean) / var.sqrt();
    Ok((-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI * var).sqrt())
}

/// Probability that the cumulative received count exceeds the threshold γ.
/// Total function: degenerate aggregates collapse to a 0/1 step at the
/// mean.
pub fn infection_probability(gamma: u64, moments: &ExposureMoments, form: ProbabilityForm) -> f64 {
    if moments.branch == OverlapBranch::None {
        return 0.0;
    }
    let gamma = gamma as f64;
    let mean = moments.mean();
    match form {
        ProbabilityForm::AsPrinted => {
            if mean == 0.0 {
                return if gamma < mean { 1.0 } else { 0.0 };
            }
            q_function(gamma / mean - mean)
        }
        ProbabilityForm::MomentConsistent => {
            let var = moments.variance_partial;
            if var == 0.0 {
                return if gamma < mean { 1.0 } else { 0.0 };
            }
            q_function((gamma - mean) / var.sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::receiver::{accumulate_quantize, detect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geometry(branch: OverlapBranch, factor: f64) -> StepGeometry {
        StepGeometry {
            branch,
            factor_partial: factor,
            factor_disc: factor,
        }
    }

    #[test]
    fn empty_history_has_zero_moments() {
        let m = exposure_moments(
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
            &geometry(OverlapBranch::Partial, 1.0),
        );
        assert_eq!(m.omega1, 0.0);
        assert_eq!(m.omega2, 0.0);
        assert_eq!(m.variance_partial, 0.0);
    }

    #[test]
    fn identity_factor_single_step() {
        let m = exposure_moments(&[vec![10.0]], &geometry(OverlapBranch::Partial, 1.0));
        assert_eq!(m.omega1, 10.0);
        assert_eq!(m.variance_partial, 10.0);
    }

    #[test]
    fn half_factor_single_step() {
        let m = exposure_moments(&[vec![10.0]], &geometry(OverlapBranch::Partial, 0.5));
        assert_eq!(m.omega1, 5.0); // floor(5.5)
        assert_eq!(m.variance_partial, 3.0); // floor(0.25·10 + 0.5)
    }

    #[test]
    fn flooring_happens_per_term() {
        // Two steps × two classes at factor 0.3: each term floor(0.3·λ + ½).
        let m = exposure_moments(
            &[vec![4.0, 7.0], vec![4.0, 7.0]],
            &geometry(OverlapBranch::Partial, 0.3),
        );
        // floor(1.7) + floor(2.6) per step = 1 + 2, twice.
        assert_eq!(m.omega1, 6.0);
    }

    #[test]
    fn encompassed_variance_uses_disc_factor() {
        let geom = StepGeometry {
            branch: OverlapBranch::Encompassed,
            factor_partial: 0.2,
            factor_disc: 0.6,
        };
        let m = exposure_moments(&[vec![100.0]], &geom);
        assert_eq!(m.omega2, 60.0);
        assert_eq!(m.variance_partial, 36.0); // floor(0.36·100 + 0.5)
        assert_eq!(m.mean(), 60.0);
    }

    #[test]
    fn omegas_grow_with_exposure_steps() {
        let geom = geometry(OverlapBranch::Partial, 0.4);
        let mut prev = 0.0;
        let mut history: Vec<Vec<f64>> = Vec::new();
        for _ in 0..20 {
            history.push(vec![30.0, 3.0]);
            let m = exposure_moments(&history, &geom);
            assert!(m.omega1 >= prev);
            prev = m.omega1;
        }
    }

    #[test]
    fn q_at_zero_is_half() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn q_limits() {
        assert!(q_function(40.0) < 1e-300);
        assert!((q_function(-40.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_at_standard_quantile() {
        assert!((q_function(1.6449) - 0.05).abs() < 1e-4);
    }

    /// Simple fixed-step Simpson integration for the Gaussian tail oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn q_matches_numerical_integration() {
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for x in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0] {
            let oracle = simpson(phi, x, x + 40.0, 40_000);
            assert!(
                (q_function(x) - oracle).abs() < 1e-10,
                "x {x}: {} vs {oracle}",
                q_function(x)
            );
        }
    }

    #[test]
    fn pdf_vanishes_without_contact() {
        let m = exposure_moments(&[vec![50.0]], &StepGeometry::none());
        for n in [0.0, 10.0, 1e4] {
            assert_eq!(received_pdf(n, &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn pdf_peak_value() {
        let m = exposure_moments(&[vec![200.0]], &geometry(OverlapBranch::Partial, 1.0));
        let peak = received_pdf(200.0, &m).unwrap();
        assert!(
            (peak - 1.0 / (2.0 * std::f64::consts::PI * 200.0).sqrt()).abs() < 1e-15
        );
    }

    #[test]
    fn pdf_normalizes_to_one() {
        let m = exposure_moments(&[vec![150.0, 90.0]], &geometry(OverlapBranch::Partial, 0.7));
        let mean = m.mean();
        let sd = m.variance_partial.sqrt();
        let total = simpson(
            |n| received_pdf(n, &m).unwrap(),
            mean - 12.0 * sd,
            mean + 12.0 * sd,
            20_000,
        );
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
    }

    #[test]
    fn pdf_degenerate_signals() {
        let m = exposure_moments(&[vec![0.2]], &geometry(OverlapBranch::Partial, 0.1));
        // factor·λ + ½ stays below 1 for mean and variance: all-zero moments.
        assert_eq!(m.variance_partial, 0.0);
        assert_eq!(received_pdf(3.0, &m).unwrap(), 0.0);
        assert!(matches!(
            received_pdf(0.0, &m),
            Err(SimError::DegenerateDistribution { .. })
        ));
    }

    #[test]
    fn probability_vanishes_without_contact() {
        let m = exposure_moments(&[vec![1e4]], &StepGeometry::none());
        for form in [ProbabilityForm::AsPrinted, ProbabilityForm::MomentConsistent] {
            assert_eq!(infection_probability(5, &m, form), 0.0);
        }
    }

    #[test]
    fn threshold_at_mean_gives_half() {
        let m = exposure_moments(&[vec![400.0]], &geometry(OverlapBranch::Partial, 1.0));
        assert_eq!(m.mean(), 400.0);
        let p = infection_probability(400, &m, ProbabilityForm::MomentConsistent);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn printed_form_at_zero_threshold() {
        let m = exposure_moments(&[vec![4.0]], &geometry(OverlapBranch::Partial, 1.0));
        let p = infection_probability(0, &m, ProbabilityForm::AsPrinted);
        assert!((p - q_function(-4.0)).abs() < 1e-15);
        assert!((p - 0.99997).abs() < 1e-5);
    }

    #[test]
    fn degenerate_moments_collapse_to_step() {
        let m = exposure_moments(&[vec![0.0]], &geometry(OverlapBranch::Partial, 1.0));
        for form in [ProbabilityForm::AsPrinted, ProbabilityForm::MomentConsistent] {
            assert_eq!(infection_probability(0, &m, form), 0.0);
            assert_eq!(infection_probability(7, &m, form), 0.0);
        }
        // Zero variance but positive mean: all mass at the mean.
        let m = ExposureMoments {
            omega1: 12.0,
            omega2: 12.0,
            variance_partial: 0.0,
            branch: OverlapBranch::Partial,
        };
        assert_eq!(
            infection_probability(5, &m, ProbabilityForm::MomentConsistent),
            1.0
        );
        assert_eq!(
            infection_probability(12, &m, ProbabilityForm::MomentConsistent),
            0.0
        );
    }

    #[test]
    fn probability_is_monotone_in_threshold() {
        let m = exposure_moments(
            &[vec![300.0, 120.0], vec![280.0, 110.0]],
            &geometry(OverlapBranch::Partial, 0.6),
        );
        for form in [ProbabilityForm::AsPrinted, ProbabilityForm::MomentConsistent] {
            let mut prev = 1.0;
            for gamma in (0..1000).step_by(25) {
                let p = infection_probability(gamma, &m, form);
                assert!((0.0..=1.0).contains(&p));
                assert!(p <= prev + 1e-15, "form {form:?}, γ {gamma}");
                prev = p;
            }
        }
    }

    #[test]
    fn tail_probability_matches_pdf_integral() {
        let m = exposure_moments(&[vec![500.0, 250.0]], &geometry(OverlapBranch::Partial, 0.8));
        let sd = m.variance_partial.sqrt();
        for gamma in [400u64, 550, 600, 650] {
            let p = infection_probability(gamma, &m, ProbabilityForm::MomentConsistent);
            let integral = simpson(
                |n| received_pdf(n, &m).unwrap(),
                gamma as f64,
                m.mean() + 14.0 * sd,
                40_000,
            );
            assert!(
                (p - integral).abs() < 1e-6,
                "γ {gamma}: closed {p} vs integral {integral}"
            );
        }
    }

    #[test]
    fn moment_consistent_matches_stochastic_pipeline() {
        // Constant-geometry synthetic exposure: 3 classes over 6 steps with
        // a fixed whole-disc flow factor. The analytic tail must agree with
        // the empirical exceedance frequency of the actual sampling +
        // quantization + detection pipeline.
        let factor = 0.8;
        let geom = StepGeometry {
            branch: OverlapBranch::Encompassed,
            factor_partial: factor,
            factor_disc: factor,
        };
        let base = [1800.0, 2500.0, 3100.0];
        let lambda_history: Vec<Vec<f64>> = (0..6)
            .map(|j| base.iter().map(|&b| b * 0.97f64.powi(j)).collect())
            .collect();
        let moments = exposure_moments(&lambda_history, &geom);
        let gamma = moments.mean() as u64; // P ≈ 0.5: most sensitive spot
        let p_closed = infection_probability(gamma, &moments, ProbabilityForm::MomentConsistent);

        let runs = 10_000;
        let mut infected = 0u32;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..runs {
            let mut per_class_sums = vec![Vec::new(); base.len()];
            for row in &lambda_history {
                for (k, &lambda) in row.iter().enumerate() {
                    per_class_sums[k].push(crate::cloud::sample_count(lambda, &mut rng));
                }
            }
            let n_r: u64 = per_class_sums
                .iter()
                .map(|counts| accumulate_quantize(factor, counts))
                .sum();
            infected += u32::from(detect(n_r, gamma) == 1);
        }
        let freq = infected as f64 / runs as f64;
        let three_sigma = 3.0 * (p_closed * (1.0 - p_closed) / runs as f64).sqrt();
        assert!(
            (freq - p_closed).abs() <= three_sigma,
            "closed {p_closed} vs empirical {freq} (tolerance {three_sigma})"
        );
    }
}
