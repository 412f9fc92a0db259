use rand::Rng;
use rand_distr::{Distribution, Normal};
use statrs::function::erf::erfc;

use super::SimError;

/// Below this acceptance rate rejection sampling is refused.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability that `N(mean, stddev^2)` lands in `(lo, hi)`.
pub fn acceptance_probability(mean: f64, stddev: f64, (lo, hi): (f64, f64)) -> f64 {
    std_normal_cdf((hi - mean) / stddev) - std_normal_cdf((lo - mean) / stddev)
}

/// `n` Gaussian draws truncated to the open interval `bounds` by rejection.
pub fn sample_demands<R: Rng + ?Sized>(
    mean: f64,
    stddev: f64,
    bounds: (f64, f64),
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>, SimError> {
    let (lo, hi) = bounds;
    if !(lo < mean && mean < hi) {
        return Err(SimError::InvalidScenario("mean outside demand bounds".into()));
    }
    let normal =
        Normal::new(mean, stddev).map_err(|e| SimError::InvalidScenario(format!("demand distribution: {e}")))?;
    let p = acceptance_probability(mean, stddev, bounds);
    if p < MIN_ACCEPTANCE {
        return Err(SimError::Sampling(format!(
            "acceptance probability {p:.3e} below {MIN_ACCEPTANCE:e}"
        )));
    }
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let v: f64 = normal.sample(rng);
        if v > lo && v < hi {
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tiny_stddev_collapses_to_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = sample_demands(7.0, 1e-9, (0.0, 20.0), 50, &mut rng).unwrap();
        assert!(d.iter().all(|v| (v - 7.0).abs() < 1e-6));
    }

    #[test]
    fn default_mean_within_three_standard_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let d = sample_demands(10.0, 3.0, (0.0, 20.0), 100, &mut rng).unwrap();
        let m = d.iter().sum::<f64>() / 100.0;
        assert!((m - 10.0).abs() < 3.0 * 3.0 / 10.0, "{m}");
        assert!(d.iter().all(|&v| v > 0.0 && v < 20.0));
    }

    #[test]
    fn pathological_parameters_refused() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // nearly all mass far outside the interval
        let err = sample_demands(0.001, 1e4, (0.0, 20.0), 10, &mut rng).unwrap_err();
        assert!(matches!(err, SimError::Sampling(_)));
        assert!(sample_demands(25.0, 1.0, (0.0, 20.0), 10, &mut rng).is_err());
    }

    #[test]
    fn acceptance_matches_symmetric_case() {
        let p = acceptance_probability(10.0, 10.0, (0.0, 20.0));
        // P(|Z| < 1); statrs erfc is good to a few 1e-11
        assert!((p - 0.682_689_492_137_085_9).abs() < 1e-9, "{p}");
    }
}
