//! Exact Gaussian-moment coincidence rates for linear optical networks.
//!
//! Each detector field is a sum of taps `c · V_s(t + T)` over thermal
//! (circular Gaussian) and coherent sources. For a fixed draw of the
//! random phases the detector fields are Gaussian with deterministic means,
//! and
//!
//! ```text
//! ⟨|X|²|Y|²⟩ = ⟨|X|²⟩⟨|Y|²⟩ + |⟨Gx* Gy⟩|² + 2 Re(mx* my ⟨Gx Gy*⟩)
//! ```
//!
//! with `G` the fluctuating and `m` the mean parts. Random phases are then
//! averaged by an equally spaced quadrature that is exact for the low
//! harmonics a fourth-order moment can contain. No delay regime is assumed,
//! so this is the reference against which the closed forms are checked.

use num_complex::Complex64;

use crate::detection::DetectorSpec;
use crate::error::{Error, Result};
use crate::fields::CoherenceModel;
use crate::interferometer::{ScenarioKind, ScenarioSetup, SourceKind};

/// Quadrature points per random phase; exact up to harmonic 7.
const PHASE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NetSource {
    Thermal { model: CoherenceModel, intensity: f64 },
    /// Constant envelope; a delay `T` contributes `e^{iωT}`.
    Coherent { amplitude: Complex64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub source: usize,
    pub coeff: Complex64,
    pub delay: f64,
    /// Multiplies the tap by `e^{iφ_k}` for the random phase `k`.
    pub phase: Option<usize>,
}

type TapFn = Box<dyn Fn(f64) -> Tap>;

impl Tap {
    pub fn new(source: usize, coeff: Complex64, delay: f64) -> Self {
        Tap { source, coeff, delay, phase: None }
    }

    pub fn with_phase(mut self, slot: usize) -> Self {
        self.phase = Some(slot);
        self
    }

    fn shifted(mut self, tau: f64) -> Self {
        self.delay += tau;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Network {
    pub sources: Vec<NetSource>,
    pub random_phases: usize,
}

impl Network {
    fn coeff(&self, tap: &Tap, phases: &[f64]) -> Complex64 {
        match tap.phase {
            Some(k) => tap.coeff * Complex64::from_polar(1.0, phases[k]),
            None => tap.coeff,
        }
    }

    fn mean(&self, x: &[Tap], phases: &[f64]) -> Complex64 {
        x.iter()
            .map(|t| match self.sources[t.source] {
                NetSource::Coherent { amplitude, omega } => {
                    self.coeff(t, phases) * amplitude * Complex64::from_polar(1.0, omega * t.delay)
                }
                NetSource::Thermal { .. } => Complex64::new(0.0, 0.0),
            })
            .sum()
    }

    /// `⟨Gx* Gy⟩` of the fluctuating parts.
    fn covariance(&self, x: &[Tap], y: &[Tap], phases: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in x {
            let NetSource::Thermal { model, intensity } = self.sources[a.source] else { continue };
            let ca = self.coeff(a, phases).conj();
            for b in y.iter().filter(|b| b.source == a.source) {
                acc += ca * self.coeff(b, phases) * intensity * model.gamma(b.delay - a.delay);
            }
        }
        acc
    }

    fn phase_grid(&self) -> Vec<Vec<f64>> {
        let n = PHASE_POINTS.pow(self.random_phases as u32);
        (0..n)
            .map(|mut k| {
                (0..self.random_phases)
                    .map(|_| {
                        let p = k % PHASE_POINTS;
                        k /= PHASE_POINTS;
                        2.0 * std::f64::consts::PI * p as f64 / PHASE_POINTS as f64
                    })
                    .collect()
            })
            .collect()
    }

    fn validate(&self, taps: &[&[Tap]]) -> Result<()> {
        for t in taps.iter().flat_map(|x| x.iter()) {
            if t.source >= self.sources.len() {
                return Err(Error::OutOfRange(format!("tap refers to missing source {}", t.source)));
            }
            if t.phase.is_some_and(|k| k >= self.random_phases) {
                return Err(Error::OutOfRange("tap refers to a missing random phase".into()));
            }
        }
        Ok(())
    }

    pub fn mean_intensity(&self, x: &[Tap]) -> Result<f64> {
        self.validate(&[x])?;
        let grid = self.phase_grid();
        let total: f64 =
            grid.iter().map(|p| self.mean(x, p).norm_sqr() + self.covariance(x, x, p).re).sum();
        Ok(total / grid.len() as f64)
    }

    /// `⟨|X(t)|² |Y(t)|²⟩`, averaged over the random phases. Shift `y` by
    /// `τ` beforehand for the time-resolved coincidence.
    pub fn coincidence(&self, x: &[Tap], y: &[Tap]) -> Result<f64> {
        self.validate(&[x, y])?;
        let grid = self.phase_grid();
        let total: f64 = grid
            .iter()
            .map(|p| {
                let (mx, my) = (self.mean(x, p), self.mean(y, p));
                let ix = mx.norm_sqr() + self.covariance(x, x, p).re;
                let iy = my.norm_sqr() + self.covariance(y, y, p).re;
                let cxy = self.covariance(x, y, p);
                ix * iy + cxy.norm_sqr() + 2.0 * (mx.conj() * my * cxy.conj()).re
            })
            .sum();
        Ok(total / grid.len() as f64)
    }
}

/// A scenario expressed as a network: the two detector tap lists and the
/// factor referring coincidences back to the input intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioNetwork {
    pub network: Network,
    pub x: Vec<Tap>,
    pub y: Vec<Tap>,
    pub scale: f64,
}

impl ScenarioNetwork {
    pub fn from_setup(setup: &ScenarioSetup) -> Result<Self> {
        let [s1, s2] = setup.sources;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let real = |x: f64| Complex64::new(x, 0.0);
        if setup.kind == ScenarioKind::Pulsed {
            return Err(Error::Incompatible("pulsed scenarios have their own oracle".into()));
        }
        if setup.kind == ScenarioKind::Astronomy {
            let astro = setup.astro.ok_or_else(|| Error::Incompatible("astronomy needs local oscillators".into()))?;
            let g = astro.gamma;
            let w = (1.0 - g.norm_sqr()).max(0.0).sqrt();
            let lo = |i: f64, phase: f64| NetSource::Coherent {
                amplitude: Complex64::from_polar(i.sqrt(), phase),
                omega: s1.model.omega,
            };
            let network = Network {
                sources: vec![
                    NetSource::Thermal { model: s1.model, intensity: s1.intensity },
                    NetSource::Thermal { model: s1.model, intensity: s1.intensity },
                    lo(astro.lo_intensity[0], s2.phase),
                    lo(astro.lo_intensity[1], s2.phase + astro.delta_phi_alpha),
                ],
                random_phases: 0,
            };
            let x = vec![Tap::new(0, real(1.0), 0.0), Tap::new(2, real(1.0), 0.0)];
            let y = vec![Tap::new(0, g, 0.0), Tap::new(1, real(w), 0.0), Tap::new(3, real(1.0), 0.0)];
            return Ok(ScenarioNetwork { network, x, y, scale: 1.0 });
        }

        let d = setup.delays;
        let mut network = Network::default();
        // taps for V10 and V20 at a given delay
        let (v10, v20): (TapFn, TapFn) =
            if s1.kind == SourceKind::CommonOriginSplit {
                network.sources.push(NetSource::Thermal { model: s1.model, intensity: s1.intensity + s2.intensity });
                let random = s1.random_phase || s2.random_phase;
                network.random_phases = random as usize;
                (
                    Box::new(move |t| Tap::new(0, real(h), t)),
                    Box::new(move |t| {
                        let tap = Tap::new(0, real(h), t);
                        if random {
                            tap.with_phase(0)
                        } else {
                            tap
                        }
                    }),
                )
            } else {
                let mut slot = 0;
                let mut mk = |s: crate::interferometer::SourceSpec, idx: usize| -> Box<dyn Fn(f64) -> Tap> {
                    network.sources.push(match s.kind {
                        SourceKind::Coherent => NetSource::Coherent {
                            amplitude: Complex64::from_polar(s.intensity.sqrt(), s.phase),
                            omega: s.model.omega,
                        },
                        _ => NetSource::Thermal { model: s.model, intensity: s.intensity },
                    });
                    let phase = s.random_phase.then(|| {
                        slot += 1;
                        slot - 1
                    });
                    Box::new(move |t| Tap { source: idx, coeff: real(1.0), delay: t, phase })
                };
                let a = mk(s1, 0);
                let b = mk(s2, 1);
                network.random_phases = slot;
                (a, b)
            };
        let x = vec![scaled(v10(d.t1), h), scaled(v20(d.t2), h)];
        let y = vec![scaled(v10(d.t1p), h), scaled(v20(d.t2p), -h)];
        Ok(ScenarioNetwork { network, x, y, scale: 4.0 })
    }

    /// Coincidence at detector lag τ, on the input-intensity scale.
    pub fn coincidence(&self, tau: f64) -> Result<f64> {
        let y: Vec<Tap> = self.y.iter().map(|t| t.shifted(tau)).collect();
        Ok(self.scale * self.network.coincidence(&self.x, &y)?)
    }

    /// Mean over the lags `0, dt, …, round(T_R/dt)·dt`, matching the
    /// discrete slow-detector estimator.
    pub fn slow_coincidence(&self, spec: &DetectorSpec, dt: f64) -> Result<f64> {
        let k = (spec.resolve_time / dt).round() as usize;
        let mut acc = 0.0;
        for j in 0..=k {
            acc += self.coincidence(j as f64 * dt)?;
        }
        Ok(acc / (k + 1) as f64)
    }

    /// Mean intensities at the two detectors.
    pub fn singles(&self) -> Result<(f64, f64)> {
        Ok((self.network.mean_intensity(&self.x)?, self.network.mean_intensity(&self.y)?))
    }
}

fn scaled(mut t: Tap, k: f64) -> Tap {
    t.coeff *= k;
    t
}
