use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::detector::DetectorSpec;
use crate::error::{invalid, Error, Result};
use crate::fields::estimate::common_window;
use crate::fields::trace::lag_samples;
use crate::fields::FieldTrace;
use crate::stats::{z_score, Moments};

/// `I(t) = |V(t)|²` per sample.
pub fn intensity(x: &FieldTrace) -> Vec<f64> {
    x.samples.iter().map(|s| s.norm_sqr()).collect()
}

/// τ-gridded estimate of `⟨Ia(t) Ib(t+τ)⟩`.
///
/// A single realization carries a standard error from the spread of the
/// per-sample products, with `duration / (2·Tc)` effective samples. Once
/// two or more realizations are pooled, the standard error is the spread of
/// the per-realization means instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub tau_grid: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
    /// Samples averaged per realization (the shortest one when pooled).
    pub n_time_samples: usize,
    #[serde(skip)]
    acc: Vec<Moments>,
}

impl CorrelationEstimate {
    fn single(tau_grid: Vec<f64>, mean: Vec<f64>, stderr: Vec<f64>, n_time_samples: usize) -> Self {
        let acc = mean.iter().map(|&m| std::iter::once(m).collect()).collect();
        CorrelationEstimate { tau_grid, mean, stderr, n_realizations: 1, n_time_samples, acc }
    }

    /// Combines two independent estimates on the same τ grid.
    pub fn merge(mut self, other: CorrelationEstimate) -> Result<Self> {
        if self.tau_grid != other.tau_grid {
            return Err(Error::GridMismatch("correlation estimates on different τ grids".into()));
        }
        for (a, b) in self.acc.iter_mut().zip(&other.acc) {
            *a = a.merge(*b);
        }
        self.n_realizations += other.n_realizations;
        self.n_time_samples = self.n_time_samples.min(other.n_time_samples);
        self.mean = self.acc.iter().map(Moments::mean).collect();
        self.stderr = self.acc.iter().map(Moments::stderr).collect();
        Ok(self)
    }

    pub fn pool<I: IntoIterator<Item = CorrelationEstimate>>(estimates: I) -> Result<Self> {
        let mut it = estimates.into_iter();
        let first = it.next().ok_or_else(|| invalid("estimates", "nothing to pool"))?;
        it.try_fold(first, |acc, e| acc.merge(e))
    }

    pub fn z_scores(&self, analytic: &[f64]) -> Vec<f64> {
        self.mean.iter().zip(&self.stderr).zip(analytic).map(|((m, s), a)| z_score(*m, *s, *a)).collect()
    }

    /// Writes `tau mean stderr analytic zscore` columns.
    pub fn write_columns(&self, path: &Path, analytic: &[f64]) -> Result<()> {
        if analytic.len() != self.tau_grid.len() {
            return Err(invalid("analytic", "one analytic value per τ is required"));
        }
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        let mut body = String::new();
        body.push_str("# foil correlation v1\n");
        body.push_str(&format!(
            "# realizations: {} time_samples: {}\n",
            self.n_realizations, self.n_time_samples
        ));
        body.push_str("# columns: tau mean stderr analytic zscore\n");
        for (i, z) in self.z_scores(analytic).iter().enumerate() {
            body.push_str(&format!(
                "{:e} {:e} {:e} {:e} {:e}\n",
                self.tau_grid[i], self.mean[i], self.stderr[i], analytic[i], z
            ));
        }
        f.write_all(body.as_bytes()).map_err(io)?;
        f.flush().map_err(io)
    }
}

/// Time-averaged `⟨Ia(t) Ib(t+τ)⟩` of one realization. All lags share the
/// largest window valid for every lag (no wraparound, edges discarded).
pub fn cross_correlate(
    ia: &[f64],
    ib: &[f64],
    dt: f64,
    tau_grid: &[f64],
    coherence_time: f64,
) -> Result<CorrelationEstimate> {
    if !(coherence_time > 0.0) {
        return Err(invalid("coherence_time", "must be positive"));
    }
    let lags = tau_grid.iter().map(|&t| lag_samples(t, dt)).collect::<Result<Vec<_>>>()?;
    let (lo, hi) = common_window(ia.len(), ib.len(), &lags).ok_or_else(|| {
        Error::OutOfRange(format!("intensity traces of {} samples too short for the τ grid", ia.len().min(ib.len())))
    })?;
    let n = hi - lo;
    let n_eff = (n as f64 * dt / (2.0 * coherence_time)).clamp(1.0, n as f64);
    let (mut mean, mut stderr) = (Vec::with_capacity(lags.len()), Vec::with_capacity(lags.len()));
    for &k in &lags {
        let b = &ib[(lo as i64 + k) as usize..(hi as i64 + k) as usize];
        let m: Moments = ia[lo..hi].iter().zip(b).map(|(x, y)| x * y).collect();
        mean.push(m.mean());
        stderr.push((m.variance() * (n as f64 - 1.0) / n as f64 / n_eff).sqrt());
    }
    Ok(CorrelationEstimate::single(tau_grid.to_vec(), mean, stderr, n))
}

/// Slow-detector coincidence `(1/T_R)∫_0^{T_R} dτ ⟨Ia(t) Ib(t+τ)⟩`, the τ
/// integral taken as the mean over the lags `0..=round(T_R/dt)`.
pub fn slow_detector_rate(ia: &[f64], ib: &[f64], dt: f64, spec: &DetectorSpec) -> Result<f64> {
    spec.validate()?;
    let k = (spec.resolve_time / dt).round() as usize;
    if ib.len() <= k || ia.is_empty() {
        return Err(Error::OutOfRange(format!(
            "trace of {} samples is shorter than the resolving time ({k} samples)",
            ib.len()
        )));
    }
    let n = ia.len().min(ib.len() - k);
    let mut prefix = Vec::with_capacity(ib.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in ib {
        acc += x;
        prefix.push(acc);
    }
    let width = (k + 1) as f64;
    let total: f64 = (0..n).map(|i| ia[i] * (prefix[i + k + 1] - prefix[i]) / width).sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{synth_coherent, CoherenceModel, ThermalSynthesizer};
    use crate::rng;

    #[test]
    fn intensity_examples() {
        let z = FieldTrace::new(vec![num_complex::Complex64::new(0.0, 0.0); 5], 0.1, 0.0, 0.0).unwrap();
        assert!(intensity(&z).iter().all(|&x| x == 0.0));
        let c = synth_coherent(1.0, 0.7, 1.0, 0.1, 3.0).unwrap();
        assert!(intensity(&c).iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn constant_intensities() {
        let a = vec![1.5; 200];
        let e = cross_correlate(&a, &a, 0.1, &[-1.0, 0.0, 2.0], 1.0).unwrap();
        assert!(e.mean.iter().all(|&m| (m - 2.25).abs() < 1e-12));
        assert!(e.stderr.iter().all(|&s| s < 1e-12));
        let d = DetectorSpec::new(2.0, 1.0).unwrap();
        assert!((slow_detector_rate(&a, &a, 0.1, &d).unwrap() - 2.25).abs() < 1e-12);
    }

    #[test]
    fn too_short_is_an_error() {
        let a = vec![1.0; 10];
        assert!(matches!(cross_correlate(&a, &a, 0.1, &[2.0], 1.0), Err(Error::OutOfRange(_))));
        let d = DetectorSpec::new(2.0, 1.0).unwrap();
        assert!(slow_detector_rate(&a, &a, 0.1, &d).is_err());
    }

    #[test]
    fn slow_rate_matches_naive_lag_average() {
        let m = CoherenceModel::gaussian(1.0, 0.0).unwrap();
        let s = ThermalSynthesizer::new(m, 120.0, 0.05).unwrap();
        let a = intensity(&s.generate(&mut rng::stream(1, &[0]), 1.0).unwrap());
        let b = intensity(&s.generate(&mut rng::stream(1, &[1]), 1.0).unwrap());
        let d = DetectorSpec::new(3.0, 1.0).unwrap();
        let fast = slow_detector_rate(&a, &b, 0.05, &d).unwrap();
        let k = 60;
        let n = b.len() - k;
        let naive: f64 =
            (0..=k).map(|l| (0..n).map(|i| a[i] * b[i + l]).sum::<f64>() / n as f64).sum::<f64>() / (k + 1) as f64;
        assert!((fast - naive).abs() < 1e-10 * naive);
    }

    #[test]
    fn independent_thermal_factorizes_and_self_bunches() {
        let m = CoherenceModel::gaussian(1.0, 0.0).unwrap();
        let s = ThermalSynthesizer::new(m, 400.0, 0.05).unwrap();
        let grid = [-2.0, 0.0, 1.0];
        let (mut cross, mut auto) = (Vec::new(), Vec::new());
        for r in 0..60u64 {
            let a = intensity(&s.generate(&mut rng::stream(r, &[0]), 1.0).unwrap());
            let b = intensity(&s.generate(&mut rng::stream(r, &[1]), 2.0).unwrap());
            cross.push(cross_correlate(&a, &b, 0.05, &grid, 1.0).unwrap());
            auto.push(cross_correlate(&a, &a, 0.05, &[0.0], 1.0).unwrap());
        }
        let cross = CorrelationEstimate::pool(cross).unwrap();
        assert_eq!(cross.n_realizations, 60);
        for z in cross.z_scores(&[2.0; 3]) {
            assert!(z.abs() < 3.5, "z = {z}");
        }
        let auto = CorrelationEstimate::pool(auto).unwrap();
        assert!(auto.z_scores(&[2.0])[0].abs() < 3.5);
    }

    #[test]
    fn single_realization_error_is_sensible() {
        let m = CoherenceModel::gaussian(1.0, 0.0).unwrap();
        let s = ThermalSynthesizer::new(m, 2000.0, 0.05).unwrap();
        let a = intensity(&s.generate(&mut rng::stream(5, &[0]), 1.0).unwrap());
        let e = cross_correlate(&a, &a, 0.05, &[0.0, 5.0], 1.0).unwrap();
        // ⟨I²⟩ = 2, ⟨I(t)I(t+5Tc)⟩ = 1 for thermal light
        for (z, s) in e.z_scores(&[2.0, 1.0]).iter().zip(&e.stderr) {
            assert!(z.abs() < 4.0 && *s > 0.0 && *s < 0.2, "z = {z}, se = {s}");
        }
    }

    #[test]
    fn merge_rejects_grid_mismatch_and_export_round_trips() {
        let a = vec![1.0; 100];
        let e1 = cross_correlate(&a, &a, 0.1, &[0.0], 1.0).unwrap();
        let e2 = cross_correlate(&a, &a, 0.1, &[0.1], 1.0).unwrap();
        assert!(e1.clone().merge(e2).is_err());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.dat");
        e1.write_columns(&p, &[1.0]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# foil correlation v1\n"));
        let row: Vec<f64> = text.lines().last().unwrap().split(' ').map(|v| v.parse().unwrap()).collect();
        assert_eq!(row, vec![0.0, 1.0, 0.0, 1.0, 0.0]);
    }
}
