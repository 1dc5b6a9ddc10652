use serde::Serialize;

/// A Monte Carlo failure-rate estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// `sqrt(p̂(1 − p̂)/trials)`.
    pub stderr: f64,
    pub trials: u64,
    pub fail_count: u64,
}

impl McEstimate {
    pub fn from_counts(fail_count: u64, trials: u64) -> Self {
        let estimate = fail_count as f64 / trials as f64;
        Self {
            estimate,
            stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
            trials,
            fail_count,
        }
    }

    /// Standardized distance from `exact`.
    ///
    /// When the empirical stderr is zero the binomial stderr at `exact` is
    /// used instead; if that is zero too the score is 0 on agreement.
    pub fn z_score(&self, exact: f64) -> f64 {
        let diff = self.estimate - exact;
        if self.stderr > 0.0 {
            return diff / self.stderr;
        }
        let fallback = (exact * (1.0 - exact) / self.trials as f64).sqrt();
        if fallback > 0.0 {
            diff / fallback
        } else if diff == 0.0 {
            0.0
        } else {
            // Both are degenerate and disagree: scale by a single trial.
            diff * self.trials as f64
        }
    }

    pub fn within(&self, exact: f64, sigmas: f64) -> bool {
        self.z_score(exact).abs() <= sigmas
    }
}
