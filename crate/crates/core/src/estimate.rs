use serde::{Deserialize, Serialize};

/// Conditional estimates built from fewer trials than this are flagged.
pub const LOW_CONFIDENCE_TRIALS: u64 = 30;

const Z95: f64 = 1.959_963_984_540_054;

/// A Monte Carlo estimate with its sampling uncertainty and the seed that
/// produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub trials: u64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    /// Bernoulli estimate from `successes` out of `trials`.
    ///
    /// The standard error is the Wald value `sqrt(p(1-p)/n)`; the interval is
    /// the Wilson score interval, which stays informative when `p` is 0 or 1.
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        assert!(trials > 0, "estimate needs at least one trial");
        assert!(successes <= trials);
        let p = successes as f64 / trials as f64;
        Self::bernoulli(p, trials, seed)
    }

    /// Bernoulli estimate from an already-computed proportion.
    pub fn bernoulli(p: f64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let std_error = (p * (1.0 - p) / n).max(0.0).sqrt();
        let (lo, hi) = wilson(p, n);
        Self {
            value: p,
            trials,
            std_error,
            ci95_low: lo.min(p),
            ci95_high: hi.max(p),
            seed,
        }
    }

    /// Estimate of a real-valued mean with a known standard error (normal CI).
    pub fn from_mean(value: f64, std_error: f64, trials: u64, seed: u64) -> Self {
        Self {
            value,
            trials,
            std_error,
            ci95_low: value - Z95 * std_error,
            ci95_high: value + Z95 * std_error,
            seed,
        }
    }

    /// `true` if the two 95% intervals share no point.
    pub fn ci_disjoint(&self, other: &Self) -> bool {
        self.ci95_high < other.ci95_low || other.ci95_high < self.ci95_low
    }
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * ((p * (1.0 - p) + z2 / (4.0 * n)) / n).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Conditional estimate within an association class.
///
/// `estimate` is `None` when the class received no trials; the conditional is
/// then undefined rather than zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassEstimate {
    pub estimate: Option<MonteCarloEstimate>,
    /// Trials that landed in the class.
    pub class_trials: u64,
    /// Trials of the class that met the criterion.
    pub successes: u64,
}

impl ClassEstimate {
    pub fn from_counts(successes: u64, class_trials: u64, seed: u64) -> Self {
        let estimate =
            (class_trials > 0).then(|| MonteCarloEstimate::from_counts(successes, class_trials, seed));
        Self {
            estimate,
            class_trials,
            successes,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.estimate.is_some()
    }

    pub fn low_confidence(&self) -> bool {
        self.class_trials < LOW_CONFIDENCE_TRIALS
    }

    pub fn value(&self) -> Option<f64> {
        self.estimate.map(|e| e.value)
    }
}
