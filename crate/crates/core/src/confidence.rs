//! Binomial proportion estimates with Wilson score intervals.

#[allow(unused_imports)]
use num_traits::Float;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub low: f64,
    pub high: f64,
}

impl Proportion {
    /// Wilson score interval at normal quantile `z`.
    pub fn wilson(successes: usize, trials: usize, z: f64) -> Self {
        if trials == 0 {
            return Self {
                successes,
                trials,
                estimate: f64::NAN,
                std_error: f64::NAN,
                low: 0.0,
                high: 1.0,
            };
        }
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            successes,
            trials,
            estimate: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
            low: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
            high: if successes >= trials { 1.0 } else { (center + half).min(1.0) },
        }
    }

    pub fn wilson95(successes: usize, trials: usize) -> Self {
        Self::wilson(successes, trials, Z95)
    }

    /// Counts `pred` over `items`.
    pub fn count<T>(items: impl IntoIterator<Item = T>, mut pred: impl FnMut(T) -> bool) -> Self {
        let (mut hits, mut total) = (0, 0);
        for item in items {
            total += 1;
            if pred(item) {
                hits += 1;
            }
        }
        Self::wilson95(hits, total)
    }

    pub fn excludes(&self, value: f64) -> bool {
        value < self.low || value > self.high
    }

    /// Both endpoints strictly inside `(0, 1)`.
    pub fn strictly_interior(&self) -> bool {
        self.low > 0.0 && self.high < 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_value() {
        // 8 successes in 10 trials: Wilson 95% ≈ (0.4902, 0.9433).
        let p = Proportion::wilson95(8, 10);
        assert!((p.low - 0.4902).abs() < 1e-4, "{}", p.low);
        assert!((p.high - 0.9433).abs() < 1e-4, "{}", p.high);
    }

    #[test]
    fn extremes_stay_in_unit_interval() {
        let all = Proportion::wilson95(100, 100);
        assert_eq!(all.high, 1.0);
        assert!(all.low < 1.0 && !all.excludes(1.0));
        let none = Proportion::wilson95(0, 100);
        assert_eq!(none.low, 0.0);
        assert!(!none.strictly_interior());
        assert!(Proportion::wilson95(50, 100).strictly_interior());
    }
}
