//! Mergeable sample moments.

use serde::{Deserialize, Serialize};

/// Running `(sum, sum of squares, count)` triple. Merging is associative, so
/// per-realization results can be reduced in any grouping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub sum: f64,
    pub sum_sq: f64,
    pub count: u64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
        self.count += 1;
    }

    pub fn merge(mut self, other: Moments) -> Moments {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.count += other.count;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        let m = self.sum / n;
        ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Mean and standard error of the ratio `mean(num) / mean(den)^2`, with the
/// delta-method error computed from per-realization pairs.
pub fn ratio_to_squared_mean(num: &[f64], den: &[f64]) -> (f64, f64) {
    assert_eq!(num.len(), den.len());
    let n = num.len() as f64;
    let mn = num.iter().sum::<f64>() / n;
    let md = den.iter().sum::<f64>() / n;
    let r = mn / (md * md);
    if num.len() < 2 {
        return (r, f64::NAN);
    }
    let (mut vnn, mut vdd, mut vnd) = (0.0, 0.0, 0.0);
    for (a, b) in num.iter().zip(den) {
        vnn += (a - mn) * (a - mn);
        vdd += (b - md) * (b - md);
        vnd += (a - mn) * (b - md);
    }
    let k = 1.0 / ((n - 1.0) * n);
    let (vnn, vdd, vnd) = (vnn * k, vdd * k, vnd * k);
    let gn = 1.0 / (md * md);
    let gd = -2.0 * mn / (md * md * md);
    let var = gn * gn * vnn + gd * gd * vdd + 2.0 * gn * gd * vnd;
    (r, var.max(0.0).sqrt())
}

/// `(mean - analytic) / stderr`. A zero standard error gives zero when the
/// two values agree to rounding and an infinite score otherwise.
pub fn z_score(mean: f64, stderr: f64, analytic: f64) -> f64 {
    let diff = mean - analytic;
    if stderr > 0.0 {
        return diff / stderr;
    }
    if diff.abs() <= 1e-12 * mean.abs().max(analytic.abs()).max(1e-300) {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let all: Moments = xs.iter().copied().collect();
        let a: Moments = xs[..33].iter().copied().collect();
        let b: Moments = xs[33..].iter().copied().collect();
        let merged = a.merge(b);
        assert_eq!(merged.count, all.count);
        assert!((merged.mean() - all.mean()).abs() < 1e-12);
        assert!((merged.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn known_variance() {
        let m: Moments = [1.0, 2.0, 3.0, 4.0].into_iter().collect();
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        assert!(Moments::default().mean().is_nan());
    }

    #[test]
    fn ratio_of_constants_has_zero_error() {
        let (r, se) = ratio_to_squared_mean(&[8.0; 5], &[2.0; 5]);
        assert_eq!(r, 2.0);
        assert!(se.abs() < 1e-12);
    }

    #[test]
    fn z_score_edge_cases() {
        assert_eq!(z_score(2.0, 0.5, 1.0), 2.0);
        assert_eq!(z_score(1.0, 0.0, 1.0), 0.0);
        assert_eq!(z_score(1.5, 0.0, 1.0), f64::INFINITY);
    }
}
