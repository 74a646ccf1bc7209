use num_complex::Complex64;

use super::trace::{lag_samples, same_dt, FieldTrace};
use crate::error::{Error, Result};

/// Index window `[lo, hi)` into `a` such that for every shift `s` in
/// `shifts`, `i + s` is a valid index into a sequence of length `b_len`.
pub(crate) fn common_window(a_len: usize, b_len: usize, shifts: &[i64]) -> Option<(usize, usize)> {
    let smin = shifts.iter().copied().min().unwrap_or(0);
    let smax = shifts.iter().copied().max().unwrap_or(0);
    let lo = 0i64.max(-smin);
    let hi = (a_len as i64).min(b_len as i64 - smax);
    (hi > lo).then_some((lo as usize, hi as usize))
}

/// Normalized cross coherence `γ̂(τ) = ⟨a*(t) b(t+τ)⟩ / √(Ia·Ib)` on the
/// full-field convention (the carrier contributes `e^{iωτ}`).
///
/// All lags share one averaging window, the largest one valid for every
/// requested lag, so no wraparound or uneven edge weighting enters. The
/// intensities are taken over the same samples, which makes `γ̂(0)` of a
/// trace with itself exactly one.
pub fn estimate_gamma(a: &FieldTrace, b: &FieldTrace, tau_grid: &[f64]) -> Result<Vec<Complex64>> {
    if !same_dt(a.dt, b.dt) {
        return Err(Error::GridMismatch(format!("dt {} vs {}", a.dt, b.dt)));
    }
    let lags = tau_grid.iter().map(|&tau| lag_samples(tau, a.dt)).collect::<Result<Vec<_>>>()?;
    let shifts: Vec<i64> = lags.iter().map(|l| a.offset + l - b.offset).collect();
    let (lo, hi) = common_window(a.len(), b.len(), &shifts).ok_or_else(|| {
        Error::OutOfRange(format!("traces too short for lags up to {:?}", tau_grid.iter().fold(0.0f64, |m, t| m.max(t.abs()))))
    })?;
    let ia: f64 = a.samples[lo..hi].iter().map(|s| s.norm_sqr()).sum();
    Ok(shifts
        .iter()
        .zip(tau_grid)
        .map(|(&s, &tau)| {
            let bs = &b.samples[(lo as i64 + s) as usize..(hi as i64 + s) as usize];
            let mut num = Complex64::new(0.0, 0.0);
            let mut ib = 0.0;
            for (x, y) in a.samples[lo..hi].iter().zip(bs) {
                num += x.conj() * y;
                ib += y.norm_sqr();
            }
            num / (ia * ib).sqrt() * Complex64::from_polar(1.0, a.carrier * tau)
        })
        .collect())
}
