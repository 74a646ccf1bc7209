//! Pulse profiles and pulse trains `V(t) = Σ_j A_j f(t - jΔt)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trace::FieldTrace;
use crate::error::{invalid, Error, Result};
use crate::rng;

pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Normalized single-pulse amplitude profile, `∫|f|² dt = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseProfile {
    /// `f(t) = (π δt²)^{-1/4} exp(-t²/2δt²)`.
    Gaussian { width: f64 },
    /// Piecewise-linear interpolation of samples starting at `t0`.
    Sampled { t0: f64, dt: f64, samples: Vec<Complex64> },
}

impl PulseProfile {
    pub fn gaussian(width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid("width", format!("pulse width must be positive, got {width}")));
        }
        Ok(PulseProfile::Gaussian { width })
    }

    /// Builds a sampled profile, rejecting it unless it is normalized.
    pub fn sampled(t0: f64, dt: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) || samples.len() < 2 {
            return Err(invalid("samples", "need at least two samples and dt > 0"));
        }
        if samples.iter().any(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite("pulse profile sample".into()));
        }
        let p = PulseProfile::Sampled { t0, dt, samples };
        p.check_normalized()?;
        Ok(p)
    }

    /// Scales arbitrary samples to unit norm.
    pub fn sampled_normalized(t0: f64, dt: f64, samples: Vec<Complex64>) -> Result<Self> {
        let raw = PulseProfile::Sampled { t0, dt, samples };
        let norm = raw.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        let PulseProfile::Sampled { t0, dt, samples } = raw else { unreachable!() };
        let k = 1.0 / norm.sqrt();
        PulseProfile::sampled(t0, dt, samples.into_iter().map(|s| s * k).collect())
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            PulseProfile::Gaussian { width } => {
                let x = t / width;
                let c = (std::f64::consts::PI * width * width).powf(-0.25);
                Complex64::new(c * (-0.5 * x * x).exp(), 0.0)
            }
            PulseProfile::Sampled { t0, dt, samples } => {
                let u = (t - t0) / dt;
                if u < 0.0 || u > (samples.len() - 1) as f64 {
                    return Complex64::new(0.0, 0.0);
                }
                let i = (u.floor() as usize).min(samples.len() - 2);
                let w = u - i as f64;
                samples[i] * (1.0 - w) + samples[i + 1] * w
            }
        }
    }

    /// Interval outside which the profile is negligible (zero for sampled).
    pub fn support(&self) -> (f64, f64) {
        match self {
            PulseProfile::Gaussian { width } => (-9.0 * width, 9.0 * width),
            PulseProfile::Sampled { t0, dt, samples } => (*t0, t0 + dt * (samples.len() - 1) as f64),
        }
    }

    /// `∫|f|² dt`. Exact for the piecewise-linear interpolant; closed form
    /// for the Gaussian.
    pub fn norm_sqr(&self) -> f64 {
        match self {
            PulseProfile::Gaussian { .. } => 1.0,
            PulseProfile::Sampled { dt, samples, .. } => {
                samples
                    .windows(2)
                    .map(|w| (w[0].norm_sqr() + (w[0].conj() * w[1]).re + w[1].norm_sqr()) / 3.0)
                    .sum::<f64>()
                    * dt
            }
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(())
    }

    /// Characteristic width: `δt` for the Gaussian, `√2` times the rms
    /// duration of `|f|²` otherwise (the two agree on Gaussians).
    pub fn width(&self) -> f64 {
        match self {
            PulseProfile::Gaussian { width } => *width,
            PulseProfile::Sampled { t0, dt, samples } => {
                let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
                for (i, s) in samples.iter().enumerate() {
                    let t = t0 + dt * i as f64;
                    let p = s.norm_sqr();
                    m0 += p;
                    m1 += p * t;
                    m2 += p * t * t;
                }
                let mean = m1 / m0;
                (2.0 * (m2 / m0 - mean * mean)).max(0.0).sqrt()
            }
        }
    }

    /// Samples the profile on a grid of spacing `dt` covering its support.
    pub fn resample(&self, dt: f64) -> Result<PulseProfile> {
        let (lo, hi) = self.support();
        let n = ((hi - lo) / dt).ceil() as usize + 1;
        let samples = (0..n).map(|i| self.eval(lo + dt * i as f64)).collect();
        PulseProfile::sampled_normalized(lo, dt, samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeStats {
    Thermal,
    Coherent,
    User,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    pub amplitudes: Vec<Complex64>,
    pub separation: f64,
    pub profile: PulseProfile,
}

impl PulseTrain {
    pub fn new(amplitudes: Vec<Complex64>, separation: f64, profile: PulseProfile) -> Result<Self> {
        let t = PulseTrain { amplitudes, separation, profile };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.is_empty() {
            return Err(invalid("amplitudes", "pulse train is empty"));
        }
        if self.amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::NonFinite("pulse amplitude".into()));
        }
        if !(self.separation.is_finite() && self.separation > 0.0) {
            return Err(invalid("separation", "must be positive"));
        }
        let w = self.profile.width();
        if w > self.separation / 10.0 * (1.0 + 1e-12) {
            return Err(invalid(
                "width",
                format!("pulse width {w} must not exceed separation/10 = {}", self.separation / 10.0),
            ));
        }
        self.profile.check_normalized()
    }

    pub fn rep_rate(&self) -> f64 {
        1.0 / self.separation
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Samples the full waveform on a grid of spacing `dt`, padded by
    /// `pad_slots` empty pulse slots on both sides. Pulse `j` is centred at
    /// time `jΔt`; the carrier is zero (carrier phases live in `A_j`).
    pub fn render(&self, dt: f64, pad_slots: usize) -> Result<FieldTrace> {
        let per_slot = self.separation / dt;
        if (per_slot - per_slot.round()).abs() > 1e-9 * per_slot {
            return Err(invalid("dt", "pulse separation must be a whole number of samples"));
        }
        let per_slot = per_slot.round() as i64;
        let pad = pad_slots as i64 * per_slot;
        let len = (self.amplitudes.len() as i64 - 1) * per_slot + 2 * pad + 1;
        let offset = -pad;
        let mut samples = vec![Complex64::new(0.0, 0.0); len as usize];
        let (lo, hi) = self.profile.support();
        let (klo, khi) = ((lo / dt).floor() as i64, (hi / dt).ceil() as i64);
        let shape: Vec<Complex64> = (klo..=khi).map(|k| self.profile.eval(k as f64 * dt)).collect();
        for (j, a) in self.amplitudes.iter().enumerate() {
            let centre = j as i64 * per_slot - offset;
            for (m, f) in shape.iter().enumerate() {
                let idx = centre + klo + m as i64;
                if (0..len).contains(&idx) {
                    samples[idx as usize] += a * f;
                }
            }
        }
        let energy = self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.amplitudes.len() as f64;
        Ok(FieldTrace { samples, dt, carrier: 0.0, mean_intensity_nominal: energy / self.separation, offset })
    }
}

/// Draws a pulse train. `user` must be supplied (and only used) for
/// [`AmplitudeStats::User`].
pub fn synth_pulse_train(
    profile: PulseProfile,
    separation: f64,
    n_pulses: usize,
    stats: AmplitudeStats,
    mean_energy: f64,
    user: Option<&[Complex64]>,
    seed: u64,
) -> Result<PulseTrain> {
    if n_pulses == 0 {
        return Err(invalid("n_pulses", "need at least one pulse"));
    }
    if !(mean_energy.is_finite() && mean_energy >= 0.0) {
        return Err(invalid("mean_energy", "must be >= 0"));
    }
    profile.check_normalized()?;
    let amplitudes = match stats {
        AmplitudeStats::Thermal => {
            let mut r = rng::stream(seed, &[0x70_75_6c_73]);
            let s = mean_energy.sqrt();
            (0..n_pulses).map(|_| rng::complex_normal(&mut r) * s).collect()
        }
        AmplitudeStats::Coherent => vec![Complex64::new(mean_energy.sqrt(), 0.0); n_pulses],
        AmplitudeStats::User => {
            let a = user.ok_or_else(|| invalid("amplitudes", "user statistics need an amplitude array"))?;
            if a.len() != n_pulses {
                return Err(invalid("n_pulses", format!("{} amplitudes supplied for {n_pulses} pulses", a.len())));
            }
            a.to_vec()
        }
    };
    PulseTrain::new(amplitudes, separation, profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gauss_norm_numeric(width: f64) -> f64 {
        let p = PulseProfile::gaussian(width).unwrap();
        let dt = width / 40.0;
        (-4000..=4000).map(|k| p.eval(k as f64 * dt).norm_sqr()).sum::<f64>() * dt
    }

    #[test]
    fn gaussian_is_normalized() {
        for w in [0.1, 1.0, 3.7] {
            assert!((gauss_norm_numeric(w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_validation() {
        let raw = vec![Complex64::new(2.0, 0.0); 11];
        assert!(matches!(PulseProfile::sampled(0.0, 0.1, raw.clone()), Err(Error::NotNormalized { .. })));
        let p = PulseProfile::sampled_normalized(0.0, 0.1, raw).unwrap();
        assert!((p.norm_sqr() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn resampling_keeps_normalization(width in 0.2f64..5.0, frac in 0.02f64..0.3) {
            let p = PulseProfile::gaussian(width).unwrap().resample(width * frac).unwrap();
            prop_assert!((p.norm_sqr() - 1.0).abs() < NORMALIZATION_TOL);
            // a second resampling of the sampled profile stays normalized too
            let q = p.resample(width * frac * 0.7).unwrap();
            prop_assert!((q.norm_sqr() - 1.0).abs() < NORMALIZATION_TOL);
        }
    }

    #[test]
    fn resampled_gaussian_keeps_width() {
        let p = PulseProfile::gaussian(1.3).unwrap().resample(0.05).unwrap();
        assert!((p.width() - 1.3).abs() < 1e-3);
    }

    #[test]
    fn train_regime_and_rate() {
        let p = PulseProfile::gaussian(1.0).unwrap();
        assert!(PulseTrain::new(vec![Complex64::new(1.0, 0.0)], 5.0, p.clone()).is_err());
        let t = PulseTrain::new(vec![Complex64::new(1.0, 0.0)], 20.0, p).unwrap();
        assert!((t.rep_rate() * t.separation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synth_examples() {
        let p = PulseProfile::gaussian(1.0).unwrap();
        let c = synth_pulse_train(p.clone(), 20.0, 100, AmplitudeStats::Coherent, 1.0, None, 0).unwrap();
        let m4 = c.amplitudes.iter().map(|a| a.norm_sqr().powi(2)).sum::<f64>() / 100.0;
        assert_eq!(m4, 1.0);

        let n = 200_000;
        let t = synth_pulse_train(p.clone(), 20.0, n, AmplitudeStats::Thermal, 2.0, None, 1).unwrap();
        let e: Vec<f64> = t.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let m2 = e.iter().sum::<f64>() / n as f64;
        let m4 = e.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // |A|² is exponential: Var(|A|⁴)/a⁴ = 24 - 4 = 20, so se(m4/m2²) ≈ √20/√n plus m2 terms
        assert!((m4 / (m2 * m2) - 2.0).abs() < 6.0 * (20.0f64 / n as f64).sqrt(), "{}", m4 / (m2 * m2));

        let one = synth_pulse_train(p.clone(), 20.0, 1, AmplitudeStats::User, 0.0, Some(&[Complex64::new(1.0, 0.0)]), 0)
            .unwrap();
        assert_eq!(one.amplitudes, vec![Complex64::new(1.0, 0.0)]);
        assert!(synth_pulse_train(p.clone(), 20.0, 2, AmplitudeStats::User, 0.0, Some(&[Complex64::new(1.0, 0.0)]), 0)
            .is_err());
        assert!(synth_pulse_train(p, 20.0, 0, AmplitudeStats::Coherent, 1.0, None, 0).is_err());
    }

    #[test]
    fn rendered_train_energy() {
        let p = PulseProfile::gaussian(1.0).unwrap();
        let amps = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(-1.0, 1.0)];
        let t = PulseTrain::new(amps.clone(), 20.0, p).unwrap();
        let w = t.render(0.1, 2).unwrap();
        assert_eq!(w.offset, -400);
        let per_slot = 200usize;
        for (j, a) in amps.iter().enumerate() {
            let start = (j + 2) * per_slot - per_slot / 2;
            let e: f64 = w.samples[start..start + per_slot].iter().map(|s| s.norm_sqr()).sum::<f64>() * w.dt;
            assert!((e - a.norm_sqr()).abs() < 1e-9, "slot {j}: {e}");
        }
    }
}
