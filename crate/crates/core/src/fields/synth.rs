//! Field synthesis.
//!
//! Thermal light is a circular complex Gaussian process. It is generated by
//! the spectral method: complex white noise is filtered in the Fourier domain
//! by the square root of the power spectrum, i.e. the DFT of `γ(τ)` laid out
//! on a circulant of at least twice the trace length. Taking the first half
//! of the period gives samples whose covariance is exactly `I·γ(lag)` for
//! every lag in the trace (circulant embedding).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::coherence::CoherenceModel;
use super::trace::FieldTrace;
use crate::error::{invalid, Error, Result};
use crate::rng::{self, StreamRng};

/// Reusable thermal-field generator for one `(model, dt, length)` triple.
/// Holds the FFT plans and the spectral filter; generation only draws noise.
pub struct ThermalSynthesizer {
    model: CoherenceModel,
    dt: f64,
    len: usize,
    filter: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ThermalSynthesizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThermalSynthesizer")
            .field("model", &self.model)
            .field("dt", &self.dt)
            .field("len", &self.len)
            .field("fft_len", &self.filter.len())
            .finish()
    }
}

impl ThermalSynthesizer {
    pub fn new(model: CoherenceModel, duration: f64, dt: f64) -> Result<Self> {
        model.validate()?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {dt}")));
        }
        let limit = model.tc / 20.0;
        if dt > limit * (1.0 + 1e-9) {
            return Err(Error::Undersampled { dt, limit });
        }
        let required = 100.0 * model.tc;
        if !(duration >= required * (1.0 - 1e-9)) {
            return Err(Error::InsufficientDuration { duration, required });
        }
        let len = ((duration / dt).round() as usize).max(1);
        let fft_len = (2 * len).next_power_of_two();

        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);

        // Circulant first row: γ envelope at the minimal circular lag.
        // The carrier is carried as metadata, so the baseband envelope is real.
        let mut row: Vec<Complex64> = (0..fft_len)
            .map(|l| {
                let lag = if l <= fft_len / 2 { l as f64 } else { l as f64 - fft_len as f64 };
                Complex64::new(model.envelope(lag * dt), 0.0)
            })
            .collect();
        forward.process(&mut row);
        let filter = row.iter().map(|s| s.re.max(0.0).sqrt()).collect();

        Ok(ThermalSynthesizer { model, dt, len, filter, forward, inverse })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn model(&self) -> &CoherenceModel {
        &self.model
    }

    /// Draws one trace of mean intensity `intensity` from `rng`.
    pub fn generate(&self, rng: &mut StreamRng, intensity: f64) -> Result<FieldTrace> {
        if !(intensity.is_finite() && intensity >= 0.0) {
            return Err(invalid("intensity", format!("must be >= 0, got {intensity}")));
        }
        let n = self.filter.len();
        let mut buf: Vec<Complex64> = (0..n).map(|_| rng::complex_normal(rng)).collect();
        self.forward.process(&mut buf);
        for (b, h) in buf.iter_mut().zip(&self.filter) {
            *b *= *h;
        }
        self.inverse.process(&mut buf);
        let scale = intensity.sqrt() / n as f64;
        buf.truncate(self.len);
        for s in &mut buf {
            *s *= scale;
        }
        Ok(FieldTrace {
            samples: buf,
            dt: self.dt,
            carrier: self.model.omega,
            mean_intensity_nominal: intensity,
            offset: 0,
        })
    }
}

pub fn synth_thermal(model: CoherenceModel, intensity: f64, duration: f64, dt: f64, seed: u64) -> Result<FieldTrace> {
    let synth = ThermalSynthesizer::new(model, duration, dt)?;
    synth.generate(&mut rng::stream(seed, &[]), intensity)
}

/// Constant envelope `√I · e^{i·phase}`; the carrier enters through delays.
pub fn synth_coherent(intensity: f64, phase: f64, duration: f64, dt: f64, carrier: f64) -> Result<FieldTrace> {
    if !(intensity.is_finite() && intensity >= 0.0) {
        return Err(invalid("intensity", format!("must be >= 0, got {intensity}")));
    }
    if !(duration > 0.0 && dt > 0.0) {
        return Err(invalid("duration", "duration and dt must be positive"));
    }
    let len = ((duration / dt).round() as usize).max(1);
    let value = Complex64::from_polar(intensity.sqrt(), phase);
    FieldTrace::new(vec![value; len], dt, carrier, intensity)
}

/// Splits one field on a 50:50 beam splitter into `V0/√2` and `V0·e^{iφ}/√2`.
/// With `apply_random_phase`, `φ` is uniform on `[0, 2π)` and drawn from
/// `seed`; otherwise `φ = 0`.
pub fn split_common_origin(src: &FieldTrace, apply_random_phase: bool, seed: u64) -> Result<(FieldTrace, FieldTrace)> {
    src.validate()?;
    let phi = if apply_random_phase { rng::uniform_phase(&mut rng::stream(seed, &[0x5b1d])) } else { 0.0 };
    Ok(split_with_phase(src, phi))
}

pub(crate) fn split_with_phase(src: &FieldTrace, phi: f64) -> (FieldTrace, FieldTrace) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    (src.scaled(Complex64::new(h, 0.0)), src.scaled(Complex64::from_polar(h, phi)))
}

/// Two thermal traces with equal-time cross coherence `gamma_target`:
/// `V̄ = γ·V + √(1-|γ|²)·V_ind`, with `V_ind` independent of `V`.
pub fn make_partially_coherent_pair(
    model: CoherenceModel,
    gamma_target: Complex64,
    intensity: f64,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<(FieldTrace, FieldTrace)> {
    let synth = ThermalSynthesizer::new(model, duration, dt)?;
    partially_coherent_pair_with(&synth, gamma_target, intensity, &mut rng::stream(seed, &[]))
}

pub(crate) fn partially_coherent_pair_with(
    synth: &ThermalSynthesizer,
    gamma_target: Complex64,
    intensity: f64,
    rng: &mut StreamRng,
) -> Result<(FieldTrace, FieldTrace)> {
    let g2 = gamma_target.norm_sqr();
    if !(g2 <= 1.0 + 1e-12) {
        return Err(invalid("gamma_target", format!("|γ| = {} exceeds 1", g2.sqrt())));
    }
    let v = synth.generate(rng, intensity)?;
    let ind = synth.generate(rng, intensity)?;
    let w = (1.0 - g2).max(0.0).sqrt();
    let samples = v.samples.iter().zip(&ind.samples).map(|(a, b)| gamma_target * a + w * b).collect();
    let vbar = FieldTrace { samples, ..v.clone_meta() };
    Ok((v, vbar))
}
