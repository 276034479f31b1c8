//! Point estimates with Wilson 95% confidence intervals.

/// 97.5% standard-normal quantile, pinned so reports are byte-stable.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0, "interval over zero trials");
    assert!(successes <= trials, "more successes than trials");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A Bernoulli-rate estimate with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let estimate = successes as f64 / trials as f64;
        let (lo, hi) = wilson_interval(successes, trials);
        // At the 0/n and n/n boundaries the score interval's closed end
        // can land one ulp inside the estimate; widen to contain it.
        let (ci_lo, ci_hi) = (lo.min(estimate), hi.max(estimate));
        assert!((0.0..=1.0).contains(&estimate));
        Estimate { successes, trials, estimate, ci_lo, ci_hi }
    }

    /// Binomial standard error at this estimate's trial count.
    pub fn se(&self) -> f64 {
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}
