//! Least-squares fringe fits of the form `B[1 + V cos(2πx/P + φ0)]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub baseline: f64,
    pub visibility: f64,
    /// `φ0` in `[0, 2π)`.
    pub phase: f64,
    pub period: f64,
    pub baseline_stderr: f64,
    pub visibility_stderr: f64,
    pub phase_stderr: f64,
    /// Zero when the period was held fixed.
    pub period_stderr: f64,
    pub residual_rms: f64,
    pub points: usize,
}

impl FringeFit {
    /// `B·V`, the fringe amplitude in data units.
    pub fn amplitude(&self) -> f64 {
        self.baseline * self.visibility
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.baseline * (1.0 + self.visibility * (2.0 * PI * x / self.period + self.phase).cos())
    }
}

fn check(x: &[f64], y: &[f64], period: f64) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("{} x values for {} y values", x.len(), y.len())));
    }
    if x.len() < 5 {
        return Err(Error::Fit(format!("need at least 5 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) || !(period.is_finite() && period > 0.0) {
        return Err(Error::Fit("non-finite input".into()));
    }
    // sampled coverage: the span plus one mean spacing, so a period sampled
    // without its endpoint still counts as a full period
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let coverage = (hi - lo) * x.len() as f64 / (x.len() - 1) as f64;
    if coverage < period * (1.0 - 1e-9) {
        return Err(Error::Fit(format!("x values cover {coverage}, less than one period {period}")));
    }
    Ok(())
}

struct Linear {
    coef: [f64; 3],
    rss: f64,
}

/// `y = c0 + c1 cos(kx) + c2 sin(kx)` by QR least squares.
fn linear(x: &[f64], y: &[f64], k: f64) -> Result<Linear> {
    let a = DMatrix::from_fn(x.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => (k * x[i]).cos(),
        _ => (k * x[i]).sin(),
    });
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax {
        return Err(Error::Fit("degenerate design: x values alias the period".into()));
    }
    let c = svd.solve(&b, 1e-12 * smax).map_err(|e| Error::Fit(e.to_string()))?;
    let rss = (&a * &c - &b).norm_squared();
    Ok(Linear { coef: [c[0], c[1], c[2]], rss })
}

/// Builds the fit from linear coefficients and the covariance of
/// `(c0, c1, c2[, k])`.
fn assemble(l: &Linear, k: f64, cov: &DMatrix<f64>, n: usize) -> FringeFit {
    let [c0, c1, c2] = l.coef;
    let amp = c1.hypot(c2);
    let vis = if c0 != 0.0 { amp / c0 } else { 0.0 };
    // A cos(kx + φ0) = A cosφ0 cos kx − A sinφ0 sin kx
    let phase = (-c2).atan2(c1).rem_euclid(2.0 * PI);
    let var = |g: [f64; 3]| {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += g[i] * g[j] * cov[(i, j)];
            }
        }
        s.max(0.0).sqrt()
    };
    let (g_vis, g_phase) = if amp > 0.0 && c0 != 0.0 {
        (
            [-amp / (c0 * c0), c1 / (amp * c0), c2 / (amp * c0)],
            [0.0, c2 / (amp * amp), -c1 / (amp * amp)],
        )
    } else {
        ([0.0, 1.0 / c0.abs().max(f64::MIN_POSITIVE), 0.0], [0.0; 3])
    };
    let period_stderr = if cov.nrows() > 3 { 2.0 * PI / (k * k) * cov[(3, 3)].max(0.0).sqrt() } else { 0.0 };
    FringeFit {
        baseline: c0,
        visibility: vis,
        phase,
        period: 2.0 * PI / k,
        baseline_stderr: cov[(0, 0)].max(0.0).sqrt(),
        visibility_stderr: var(g_vis),
        phase_stderr: var(g_phase),
        period_stderr,
        residual_rms: (l.rss / n as f64).sqrt(),
        points: n,
    }
}

fn covariance(j: DMatrix<f64>, rss: f64) -> Result<DMatrix<f64>> {
    let (n, p) = j.shape();
    let sigma2 = if n > p { rss / (n - p) as f64 } else { 0.0 };
    let jtj = j.transpose() * j;
    let inv = jtj.try_inverse().ok_or_else(|| Error::Fit("singular normal matrix".into()))?;
    Ok(inv * sigma2)
}

/// Fixed-period fit: linear least squares, parameter errors from the
/// residual variance and propagated to `V` and `φ0` by the delta method.
pub fn fit_fringe(x: &[f64], y: &[f64], period: f64) -> Result<FringeFit> {
    check(x, y, period)?;
    let k = 2.0 * PI / period;
    let l = linear(x, y, k)?;
    let j = DMatrix::from_fn(x.len(), 3, |i, c| match c {
        0 => 1.0,
        1 => (k * x[i]).cos(),
        _ => (k * x[i]).sin(),
    });
    let cov = covariance(j, l.rss)?;
    Ok(assemble(&l, k, &cov, x.len()))
}

/// Fit with the period free, started from `period_hint`: a scan of the
/// residual over `[0.7, 1.3]·hint`, golden-section refinement, and the
/// period error from the full four-parameter Jacobian.
pub fn fit_fringe_free_period(x: &[f64], y: &[f64], period_hint: f64) -> Result<FringeFit> {
    check(x, y, period_hint)?;
    if x.len() < 6 {
        return Err(Error::Fit("a free period needs at least 6 points".into()));
    }
    let k0 = 2.0 * PI / period_hint;
    let rss = |k: f64| linear(x, y, k).map(|l| l.rss).unwrap_or(f64::INFINITY);
    let grid: Vec<f64> = (0..=240).map(|i| k0 * (0.7 + 0.6 * i as f64 / 240.0)).collect();
    let values: Vec<f64> = grid.iter().map(|&k| rss(k)).collect();
    let best = (0..grid.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    if !values[best].is_finite() {
        return Err(Error::Fit("no admissible period near the hint".into()));
    }
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (rss(c), rss(d));
    while (b - a).abs() > 1e-13 * k0 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = rss(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = rss(d);
        }
    }
    let k = (a + b) / 2.0;
    let l = linear(x, y, k)?;
    let [_, c1, c2] = l.coef;
    let j = DMatrix::from_fn(x.len(), 4, |i, col| {
        let (s, co) = (k * x[i]).sin_cos();
        match col {
            0 => 1.0,
            1 => co,
            2 => s,
            _ => x[i] * (-c1 * s + c2 * co),
        }
    });
    let cov = covariance(j, l.rss)?;
    Ok(assemble(&l, k, &cov, x.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, span: f64) -> Vec<f64> {
        (0..n).map(|i| span * i as f64 / n as f64).collect()
    }

    #[test]
    fn recovers_exact_model() {
        let x = grid(12, 2.0 * PI);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * (1.0 + 0.4 * v.cos())).collect();
        let f = fit_fringe(&x, &y, 2.0 * PI).unwrap();
        assert!((f.baseline - 2.0).abs() < 1e-12 && (f.visibility - 0.4).abs() < 1e-12);
        assert!(f.phase.min(2.0 * PI - f.phase) < 1e-12);
        assert!(f.residual_rms < 1e-9);
    }

    #[test]
    fn phase_and_free_period() {
        let p = 0.125;
        let x: Vec<f64> = (0..25).map(|i| 20.0 - p + 2.0 * p * i as f64 / 24.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 4.0 * (1.0 + 0.5 * (2.0 * PI * v / (p * 1.004) + 1.1).cos())).collect();
        let f = fit_fringe_free_period(&x, &y, p).unwrap();
        assert!((f.period / (p * 1.004) - 1.0).abs() < 1e-9, "{f:?}");
        assert!((f.visibility - 0.5).abs() < 1e-9);
        assert!(f.residual_rms < 1e-9);
        let at = f.eval(x[3]);
        assert!((at - y[3]).abs() < 1e-9);
    }

    #[test]
    fn constant_data_has_no_visibility() {
        let x = grid(10, 7.0);
        let y: Vec<f64> = x.iter().enumerate().map(|(i, _)| 3.0 + if i % 2 == 0 { 1e-3 } else { -1e-3 }).collect();
        let f = fit_fringe(&x, &y, 2.0 * PI).unwrap();
        assert!(f.visibility <= 3.0 * f.visibility_stderr + 1e-15, "{f:?}");
    }

    #[test]
    fn scenario_i_shape_gives_expected_visibility() {
        // I10 = I20 = 1, |γγ*| = 0.7 → 2 + 2 − 2·0.7 cos(...)
        let x = grid(16, 2.0 * PI);
        let y: Vec<f64> = x.iter().map(|v| 4.0 - 2.0 * 0.7 * v.cos()).collect();
        let f = fit_fringe(&x, &y, 2.0 * PI).unwrap();
        assert!((f.visibility - 0.35).abs() < 1e-12);
        assert!((f.phase - PI).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let x = grid(4, 7.0);
        assert!(fit_fringe(&x, &[1.0; 4], 2.0 * PI).is_err());
        let x = grid(10, 1.0);
        assert!(matches!(fit_fringe(&x, &[1.0; 10], 2.0 * PI), Err(Error::Fit(_))));
        let mut y = vec![1.0; 10];
        y[2] = f64::NAN;
        assert!(fit_fringe(&grid(10, 7.0), &y, 2.0 * PI).is_err());
        // every point on the same phase
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 2.0 * PI).collect();
        assert!(fit_fringe(&x, &[1.0; 6], 2.0 * PI).is_err());
    }
}
