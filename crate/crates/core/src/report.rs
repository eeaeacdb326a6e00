use serde::{Deserialize, Serialize};

/// Outcome of a randomized property suite.
///
/// Every check is reduced to a signed margin: nonnegative means the
/// property holds with room to spare, and a sample fails when one of its
/// margins drops below `-tol`. For an equality the margin is `-|error|`,
/// for `lhs ≤ rhs` it is `rhs − lhs`, and for positivity it is the smallest
/// eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub suite: String,
    pub level: usize,
    pub samples: usize,
    pub failures: usize,
    pub worst_margin: f64,
    pub seed: u64,
    pub tol: f64,
}

impl PropertyReport {
    pub fn new(suite: impl Into<String>, level: usize, seed: u64, tol: f64) -> Self {
        Self {
            suite: suite.into(),
            level,
            samples: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            seed,
            tol,
        }
    }

    /// Records one sample made of one or more margins.
    pub fn record<I: IntoIterator<Item = f64>>(&mut self, margins: I) -> bool {
        let worst = margins.into_iter().fold(f64::INFINITY, |acc, m| {
            if m.is_nan() {
                f64::NEG_INFINITY
            } else {
                acc.min(m)
            }
        });
        self.samples += 1;
        self.worst_margin = self.worst_margin.min(worst);
        let ok = worst >= -self.tol;
        if !ok {
            self.failures += 1;
        }
        ok
    }

    pub fn record_one(&mut self, margin: f64) -> bool {
        self.record([margin])
    }

    /// Margin of an equality check with error `err`.
    pub fn equality_margin(err: f64) -> f64 {
        -err.abs()
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.samples > 0
    }

    /// Folds another report for the same suite into this one.
    pub fn merge(&mut self, other: &PropertyReport) {
        self.samples += other.samples;
        self.failures += other.failures;
        self.worst_margin = self.worst_margin.min(other.worst_margin);
    }
}
