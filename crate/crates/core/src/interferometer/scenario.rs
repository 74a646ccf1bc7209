//! Detector-input fields for each interferometer scenario.
//!
//! ```text
//! V(t)  = [V10(t+T1)  + V20(t+T2) ] / √2
//! V'(t) = [V10(t+T1') - V20(t+T2')] / √2
//! ```
//!
//! The astronomy scheme instead adds a local oscillator to each of two
//! partially coherent stellar fields: `V + α1`, `V̄ + α2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::delays::DelayConfig;
use super::ops::{align, beam_split, delay};
use crate::error::{invalid, Error, Result};
use crate::fields::synth::{partially_coherent_pair_with, split_with_phase};
use crate::fields::{synth_coherent, CoherenceModel, FieldTrace, ThermalSynthesizer};
use crate::rng;

/// `≫` means at least this many coherence times.
pub const FAR_FACTOR: f64 = 10.0;
/// `∼` means within this many coherence times.
pub const NEAR_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    UncorrelatedSources,
    Astronomy,
    ScenarioI,
    ScenarioIi,
    ScenarioIii,
    ScenarioIv,
    HomMz,
    Pulsed,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        ScenarioKind::UncorrelatedSources,
        ScenarioKind::Astronomy,
        ScenarioKind::ScenarioI,
        ScenarioKind::ScenarioIi,
        ScenarioKind::ScenarioIii,
        ScenarioKind::ScenarioIv,
        ScenarioKind::HomMz,
        ScenarioKind::Pulsed,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::UncorrelatedSources => "uncorrelated_sources",
            ScenarioKind::Astronomy => "astronomy",
            ScenarioKind::ScenarioI => "scenario_i",
            ScenarioKind::ScenarioIi => "scenario_ii",
            ScenarioKind::ScenarioIii => "scenario_iii",
            ScenarioKind::ScenarioIv => "scenario_iv",
            ScenarioKind::HomMz => "hom_mz",
            ScenarioKind::Pulsed => "pulsed",
        }
    }

    pub fn regime(&self) -> &'static str {
        match self {
            ScenarioKind::UncorrelatedSources => "independent sources, any delays",
            ScenarioKind::Astronomy => "stellar field pair plus split local oscillator, no arm delays",
            ScenarioKind::ScenarioI => "|T1-T2| ≲ 2Tc, |T1'-T2'| ≲ 2Tc, {T1,T2} vs {T1',T2'} ≥ 10Tc",
            ScenarioKind::ScenarioIi => "|T1-T1'| ≲ 2Tc, |T2-T2'| ≲ 2Tc, {T1,T1'} vs {T2,T2'} ≥ 10Tc",
            ScenarioKind::ScenarioIii => "|T1-T2'| ≲ 2Tc, |T2-T1'| ≲ 2Tc, {T1,T2'} vs {T2,T1'} ≥ 10Tc",
            ScenarioKind::ScenarioIv => "slow detectors, T_R ≥ 10Tc",
            ScenarioKind::HomMz => "T1 = T1', T2 = T2' (one effective beam splitter)",
            ScenarioKind::Pulsed => "pulse trains, δt ≤ Δt/10, T_R < Δt",
        }
    }

    pub fn uses_slow_detector(&self) -> bool {
        matches!(self, ScenarioKind::ScenarioIv)
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid("scenario", format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegimeCheck {
    pub violations: Vec<String>,
}

impl RegimeCheck {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }
}

fn near(check: &mut RegimeCheck, a: (&str, f64), b: (&str, f64), tc: f64) {
    if (a.1 - b.1).abs() > NEAR_FACTOR * tc {
        check.violations.push(format!("|{}-{}| = {} exceeds {NEAR_FACTOR}·Tc", a.0, b.0, (a.1 - b.1).abs()));
    }
}

fn far(check: &mut RegimeCheck, a: [f64; 2], b: [f64; 2], what: &str, tc: f64) {
    let gap = a.iter().flat_map(|x| b.iter().map(move |y| (x - y).abs())).fold(f64::INFINITY, f64::min);
    if gap < FAR_FACTOR * tc {
        check.violations.push(format!("{what} separation {gap} is below {FAR_FACTOR}·Tc"));
    }
}

/// Evaluates the scenario's delay regime. `tc` is the longest coherence
/// time among the sources; separation requirements only apply when the two
/// inputs share an origin, since independent inputs have no cross coherence
/// to suppress.
pub fn regime_check(
    kind: ScenarioKind,
    d: &DelayConfig,
    tc: f64,
    common_origin: bool,
    resolve_time: Option<f64>,
) -> RegimeCheck {
    let mut c = RegimeCheck::default();
    match kind {
        ScenarioKind::UncorrelatedSources | ScenarioKind::Pulsed => {}
        ScenarioKind::Astronomy => {
            if d.as_array().iter().any(|t| *t != 0.0) {
                c.violations.push("astronomy ignores arm delays; they should be zero".into());
            }
        }
        ScenarioKind::ScenarioI => {
            near(&mut c, ("T1", d.t1), ("T2", d.t2), tc);
            near(&mut c, ("T1'", d.t1p), ("T2'", d.t2p), tc);
            far(&mut c, [d.t1, d.t2], [d.t1p, d.t2p], "unprimed/primed", tc);
        }
        ScenarioKind::ScenarioIi => {
            near(&mut c, ("T1", d.t1), ("T1'", d.t1p), tc);
            near(&mut c, ("T2", d.t2), ("T2'", d.t2p), tc);
            if common_origin {
                far(&mut c, [d.t1, d.t1p], [d.t2, d.t2p], "arm 1/arm 2", tc);
            }
        }
        ScenarioKind::ScenarioIii => {
            near(&mut c, ("T1", d.t1), ("T2'", d.t2p), tc);
            near(&mut c, ("T2", d.t2), ("T1'", d.t1p), tc);
            far(&mut c, [d.t1, d.t2p], [d.t2, d.t1p], "crossed pair", tc);
        }
        ScenarioKind::ScenarioIv => match resolve_time {
            Some(tr) if tr >= FAR_FACTOR * tc => {}
            Some(tr) => c.violations.push(format!("T_R = {tr} is below {FAR_FACTOR}·Tc")),
            None => c.violations.push("slow-detector scenario needs a resolving time".into()),
        },
        ScenarioKind::HomMz => {
            if d.t1 != d.t1p || d.t2 != d.t2p {
                c.violations.push("hom_mz needs T1 = T1' and T2 = T2'".into());
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Thermal,
    Coherent,
    CommonOriginSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub intensity: f64,
    /// Phase of a coherent amplitude.
    pub phase: f64,
    /// Multiply by a fresh uniform `e^{iφ}` in every realization.
    pub random_phase: bool,
    /// Coherence of a thermal field; for a coherent field only the carrier is used.
    pub model: CoherenceModel,
}

impl SourceSpec {
    pub fn thermal(intensity: f64, model: CoherenceModel) -> Self {
        SourceSpec { kind: SourceKind::Thermal, intensity, phase: 0.0, random_phase: false, model }
    }

    pub fn coherent(intensity: f64, phase: f64, model: CoherenceModel) -> Self {
        SourceSpec { kind: SourceKind::Coherent, intensity, phase, random_phase: false, model }
    }

    pub fn common_origin(intensity: f64, random_phase: bool, model: CoherenceModel) -> Self {
        SourceSpec { kind: SourceKind::CommonOriginSplit, intensity, phase: 0.0, random_phase, model }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(invalid("intensity", format!("must be >= 0, got {}", self.intensity)));
        }
        self.model.validate()
    }

    /// Normalized self coherence at `lag`; a coherent field is a pure carrier.
    pub fn coherence(&self, lag: f64) -> Complex64 {
        match self.kind {
            SourceKind::Coherent => Complex64::from_polar(1.0, self.model.omega * lag),
            _ => self.model.gamma(lag),
        }
    }

    /// Normalized intensity autocorrelation excess `λ` at `lag`.
    pub fn lambda(&self, lag: f64) -> f64 {
        match self.kind {
            SourceKind::Coherent => 0.0,
            _ => self.model.envelope(lag).powi(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AstroSetup {
    /// Equal-time mutual coherence of the stellar field at the two stations.
    pub gamma: Complex64,
    pub lo_intensity: [f64; 2],
    pub delta_phi_alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSetup {
    pub kind: ScenarioKind,
    pub sources: [SourceSpec; 2],
    pub delays: DelayConfig,
    pub astro: Option<AstroSetup>,
    /// Length of the aligned detector traces.
    pub duration: f64,
    pub dt: f64,
}

impl ScenarioSetup {
    pub fn common_origin(&self) -> bool {
        self.sources.iter().any(|s| s.kind == SourceKind::CommonOriginSplit)
    }

    pub fn max_tc(&self) -> f64 {
        self.sources
            .iter()
            .filter(|s| s.kind != SourceKind::Coherent)
            .map(|s| s.model.tc)
            .fold(0.0, f64::max)
    }
}

/// Fields arriving at the two detectors in one realization.
#[derive(Debug, Clone)]
pub struct DetectorFields {
    pub v: FieldTrace,
    pub v_prime: FieldTrace,
    /// Factor that refers `⟨I I'⟩` back to the input intensities (undoing the
    /// two 1/√2 beam-splitter amplitudes); 1 when no splitter mixes the inputs.
    pub coincidence_scale: f64,
    /// Random phase drawn for the second input, if any.
    pub phase: Option<f64>,
}

enum Plan {
    CommonOrigin { synth: ThermalSynthesizer, random_phase: bool },
    Independent { synths: [Option<ThermalSynthesizer>; 2] },
    Astronomy { synth: ThermalSynthesizer, astro: AstroSetup },
}

/// Prepared scenario: synthesizers and FFT plans are built once and shared
/// by every realization.
pub struct ScenarioAssembler {
    setup: ScenarioSetup,
    plan: Plan,
    source_duration: f64,
    regime: RegimeCheck,
}

impl std::fmt::Debug for ScenarioAssembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScenarioAssembler").field("setup", &self.setup).field("regime", &self.regime).finish()
    }
}

impl ScenarioAssembler {
    pub fn new(setup: ScenarioSetup, resolve_time: Option<f64>) -> Result<Self> {
        for s in &setup.sources {
            s.validate()?;
        }
        if !(setup.dt > 0.0 && setup.duration > 0.0) {
            return Err(invalid("duration", "duration and dt must be positive"));
        }
        let [s1, s2] = setup.sources;
        let kind = setup.kind;
        if kind == ScenarioKind::Pulsed {
            return Err(Error::Incompatible("pulsed scenarios are assembled from pulse trains".into()));
        }
        let co = [s1.kind, s2.kind].map(|k| k == SourceKind::CommonOriginSplit);
        if co[0] != co[1] {
            return Err(Error::Incompatible("common_origin_split must be set on both sources".into()));
        }
        if co[0] && kind == ScenarioKind::UncorrelatedSources {
            return Err(Error::Incompatible("uncorrelated_sources needs independent sources".into()));
        }

        let delays = setup.delays.as_array();
        let shifts = delays.map(|t| (t / setup.dt).round() as i64);
        let span = match kind {
            ScenarioKind::Astronomy => 0,
            _ => shifts.iter().max().unwrap() - shifts.iter().min().unwrap(),
        };
        let n = (setup.duration / setup.dt).round() as i64;
        let source_duration = (n + span) as f64 * setup.dt;

        let plan = if kind == ScenarioKind::Astronomy {
            let astro = setup
                .astro
                .ok_or_else(|| Error::Incompatible("astronomy needs local-oscillator settings".into()))?;
            if s1.kind != SourceKind::Thermal || s2.kind != SourceKind::Coherent {
                return Err(Error::Incompatible(
                    "astronomy needs a thermal stellar source and a coherent local oscillator".into(),
                ));
            }
            Plan::Astronomy { synth: ThermalSynthesizer::new(s1.model, source_duration, setup.dt)?, astro }
        } else if co[0] {
            if (s1.intensity - s2.intensity).abs() > 1e-12 * s1.intensity.max(s2.intensity) {
                return Err(Error::Incompatible("a 50:50 split gives equal intensities to both arms".into()));
            }
            Plan::CommonOrigin {
                synth: ThermalSynthesizer::new(s1.model, source_duration, setup.dt)?,
                random_phase: s1.random_phase || s2.random_phase,
            }
        } else {
            let mk = |s: &SourceSpec| -> Result<Option<ThermalSynthesizer>> {
                match s.kind {
                    SourceKind::Thermal => Ok(Some(ThermalSynthesizer::new(s.model, source_duration, setup.dt)?)),
                    _ => Ok(None),
                }
            };
            Plan::Independent { synths: [mk(&s1)?, mk(&s2)?] }
        };

        let regime = regime_check(kind, &setup.delays, setup.max_tc(), co[0], resolve_time);
        if !regime.satisfied() {
            log::warn!("{kind}: regime not satisfied: {}", regime.violations.join("; "));
        }
        Ok(ScenarioAssembler { setup, plan, source_duration, regime })
    }

    pub fn setup(&self) -> &ScenarioSetup {
        &self.setup
    }

    pub fn regime(&self) -> &RegimeCheck {
        &self.regime
    }

    pub fn assemble(&self, seed: u64) -> Result<DetectorFields> {
        let s = &self.setup;
        let dt = s.dt;
        let mut phase = None;
        let (v10, v20) = match &self.plan {
            Plan::Astronomy { synth, astro } => return self.assemble_astronomy(synth, astro, seed),
            Plan::CommonOrigin { synth, random_phase } => {
                let total = s.sources[0].intensity + s.sources[1].intensity;
                let v0 = synth.generate(&mut rng::stream(seed, &[0]), total)?;
                let phi = if *random_phase { rng::uniform_phase(&mut rng::stream(seed, &[0x5b1d])) } else { 0.0 };
                phase = random_phase.then_some(phi);
                split_with_phase(&v0, phi)
            }
            Plan::Independent { synths } => {
                let mut out = Vec::with_capacity(2);
                for (i, (src, synth)) in s.sources.iter().zip(synths).enumerate() {
                    let mut trace = match synth {
                        Some(sy) => sy.generate(&mut rng::stream(seed, &[i as u64]), src.intensity)?,
                        None => synth_coherent(src.intensity, src.phase, self.source_duration, dt, src.model.omega)?,
                    };
                    if src.random_phase {
                        let phi = rng::uniform_phase(&mut rng::stream(seed, &[0x5b1d, i as u64]));
                        if i == 1 {
                            phase = Some(phi);
                        }
                        trace = trace.scaled(Complex64::from_polar(1.0, phi));
                    }
                    out.push(trace);
                }
                let v20 = out.pop().unwrap();
                (out.pop().unwrap(), v20)
            }
        };
        let d = &s.delays;
        let one_splitter = s.kind == ScenarioKind::HomMz && self.regime.satisfied();
        let (v, v_prime) = if one_splitter {
            let arms = align(&[&delay(&v10, d.t1)?, &delay(&v20, d.t2)?])?;
            beam_split(&arms[0], &arms[1])?
        } else {
            let arms = align(&[&delay(&v10, d.t1)?, &delay(&v20, d.t2)?, &delay(&v10, d.t1p)?, &delay(&v20, d.t2p)?])?;
            let (v, _) = beam_split(&arms[0], &arms[1])?;
            let (_, vp) = beam_split(&arms[2], &arms[3])?;
            (v, vp)
        };
        Ok(DetectorFields { v, v_prime, coincidence_scale: 4.0, phase })
    }

    fn assemble_astronomy(&self, synth: &ThermalSynthesizer, astro: &AstroSetup, seed: u64) -> Result<DetectorFields> {
        let s = &self.setup;
        let lo = &s.sources[1];
        let (star, star_bar) =
            partially_coherent_pair_with(synth, astro.gamma, s.sources[0].intensity, &mut rng::stream(seed, &[0]))?;
        let a1 = synth_coherent(astro.lo_intensity[0], lo.phase, self.source_duration, s.dt, star.carrier)?;
        let a2 = synth_coherent(
            astro.lo_intensity[1],
            lo.phase + astro.delta_phi_alpha,
            self.source_duration,
            s.dt,
            star.carrier,
        )?;
        Ok(DetectorFields { v: star.superpose(&a1)?, v_prime: star_bar.superpose(&a2)?, coincidence_scale: 1.0, phase: None })
    }
}

/// One-shot convenience around [`ScenarioAssembler`].
pub fn assemble_scenario(setup: ScenarioSetup, resolve_time: Option<f64>, seed: u64) -> Result<DetectorFields> {
    ScenarioAssembler::new(setup, resolve_time)?.assemble(seed)
}
