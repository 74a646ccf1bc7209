//! Experiment configuration: TOML on disk, fully resolved in memory.
//!
//! Every field may be omitted; the resolved config records which defaults
//! were applied so the summary file shows exactly what ran.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detection::DetectorSpec;
use crate::error::{Error, Result};
use crate::fields::{AmplitudeStats, CoherenceModel, CoherenceShape};
use crate::interferometer::{DelayConfig, ScenarioKind, SourceKind, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Detector lag τ.
    Tau,
    T1,
    T2,
    T1p,
    T2p,
    /// Sets `T2 = T1 + v` and `T2' = T1' + v`.
    DeltaT,
    /// Local-oscillator phase difference `Δφα`.
    PhaseAlpha,
    /// `|γ|` between the two stellar stations.
    GammaMagnitude,
    /// Adds `v` to both `T2` and `T2'`, moving the second train's pulses
    /// against the first within their slots.
    PulseOffset,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 9] = [
        SweepVariable::Tau,
        SweepVariable::T1,
        SweepVariable::T2,
        SweepVariable::T1p,
        SweepVariable::T2p,
        SweepVariable::DeltaT,
        SweepVariable::PhaseAlpha,
        SweepVariable::GammaMagnitude,
        SweepVariable::PulseOffset,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Tau => "tau",
            SweepVariable::T1 => "t1",
            SweepVariable::T2 => "t2",
            SweepVariable::T1p => "t1p",
            SweepVariable::T2p => "t2p",
            SweepVariable::DeltaT => "delta_t",
            SweepVariable::PhaseAlpha => "phase_alpha",
            SweepVariable::GammaMagnitude => "gamma_magnitude",
            SweepVariable::PulseOffset => "pulse_offset",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        SweepVariable::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn is_delay(&self) -> bool {
        matches!(self, SweepVariable::T1 | SweepVariable::T2 | SweepVariable::T1p | SweepVariable::T2p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Whether `stop` itself is a sweep point.
    pub endpoint: bool,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let div = if self.endpoint { self.steps - 1 } else { self.steps } as f64;
        (0..self.steps).map(|i| self.start + (self.stop - self.start) * i as f64 / div).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub realizations: usize,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AstroSpec {
    pub gamma_magnitude: f64,
    pub gamma_phase: f64,
    pub lo_intensity: [f64; 2],
    pub delta_phi_alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulsedMethod {
    Amplitude,
    Waveform,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulsedSpec {
    pub separation: f64,
    pub width: f64,
    pub pulses: usize,
    pub stats: [AmplitudeStats; 2],
    pub energy: [f64; 2],
    /// Random relative phase between the trains, drawn per train pair.
    pub random_phase: bool,
    pub method: PulsedMethod,
    /// Sampling step of the waveform method.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSpec {
    /// Residual phase `Δφ` added to the fringe argument.
    pub delta_phi: f64,
    /// Include the cross-intensity correlations of a common-origin thermal
    /// field in the crossed-delay scenario.
    pub cross_intensity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSpec {
    pub enabled: bool,
    pub period: f64,
    pub free_period: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub stem: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub sources: [SourceSpec; 2],
    pub delays: DelayConfig,
    pub tau: f64,
    pub sweep: SweepSpec,
    pub ensemble: EnsembleSpec,
    pub detector: DetectorSpec,
    pub astronomy: Option<AstroSpec>,
    pub pulsed: Option<PulsedSpec>,
    pub oracle: OracleSpec,
    pub fit: FitSpec,
    pub output: OutputSpec,
    /// `field = value` for every setting filled in by default.
    pub applied_defaults: Vec<String>,
}

// ---- raw file layout ----

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    coherence: Option<RawCoherence>,
    source1: Option<RawSource>,
    source2: Option<RawSource>,
    delays: Option<RawDelays>,
    sweep: Option<RawSweep>,
    ensemble: Option<RawEnsemble>,
    detector: Option<RawDetector>,
    astronomy: Option<RawAstro>,
    pulsed: Option<RawPulsed>,
    oracle: Option<RawOracle>,
    fit: Option<RawFit>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoherence {
    shape: Option<CoherenceShape>,
    tc: Option<f64>,
    omega: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    kind: Option<SourceKind>,
    intensity: Option<f64>,
    phase: Option<f64>,
    random_phase: Option<bool>,
    shape: Option<CoherenceShape>,
    tc: Option<f64>,
    omega: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelays {
    t1: Option<f64>,
    t2: Option<f64>,
    t1p: Option<f64>,
    t2p: Option<f64>,
    tau: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: Option<OneOrMany>,
    start: Option<f64>,
    stop: Option<f64>,
    steps: Option<i64>,
    endpoint: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    realizations: Option<i64>,
    duration: Option<f64>,
    dt: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    resolve_time: Option<f64>,
    charge: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAstro {
    gamma_magnitude: Option<f64>,
    gamma_phase: Option<f64>,
    lo_intensity: Option<[f64; 2]>,
    delta_phi_alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulsed {
    separation: Option<f64>,
    width: Option<f64>,
    pulses: Option<i64>,
    stats: Option<[AmplitudeStats; 2]>,
    energy: Option<[f64; 2]>,
    random_phase: Option<bool>,
    method: Option<PulsedMethod>,
    dt: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    delta_phi: Option<f64>,
    cross_intensity: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFit {
    enabled: Option<bool>,
    period: Option<f64>,
    free_period: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    stem: Option<String>,
}

// ---- resolution ----

fn bad(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::ConfigInvalid { field: field.into(), reason: reason.into() }
}

struct Defaults(Vec<String>);

impl Defaults {
    fn take<T: Debug>(&mut self, value: Option<T>, field: &str, default: impl FnOnce() -> T) -> T {
        value.unwrap_or_else(|| {
            let d = default();
            self.0.push(format!("{field} = {d:?}"));
            d
        })
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(bad(field, format!("must be >= 0, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, format!("must be finite, got {v}")))
    }
}

/// Byte offset to 1-based line and column.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment").to_string();
    parse_config(&text, path, &stem)
}

/// Parses TOML text; `path` only labels errors and `stem` names outputs.
pub fn parse_config(text: &str, path: &Path, stem: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let message = match e.span() {
            Some(span) => {
                let (l, c) = line_col(text, span.start);
                format!("line {l}, column {c}: {}", e.message())
            }
            None => e.message().to_string(),
        };
        Error::ConfigParse { path: path.to_path_buf(), message }
    })?;
    resolve(raw, stem)
}

fn default_sources(kind: ScenarioKind) -> (SourceKind, bool) {
    match kind {
        ScenarioKind::ScenarioI | ScenarioKind::ScenarioIv => (SourceKind::CommonOriginSplit, true),
        ScenarioKind::ScenarioIi | ScenarioKind::ScenarioIii => (SourceKind::CommonOriginSplit, false),
        _ => (SourceKind::Thermal, false),
    }
}

fn default_delays(kind: ScenarioKind) -> [f64; 4] {
    match kind {
        ScenarioKind::ScenarioI => [0.0, 0.0, 20.0, 20.0],
        ScenarioKind::ScenarioIi => [0.0, 20.0, 0.0, 20.0],
        ScenarioKind::ScenarioIii => [0.0, 20.0, 20.0, 0.0],
        _ => [0.0; 4],
    }
}

fn default_sweep(kind: ScenarioKind, omega: f64) -> (SweepVariable, f64, f64, usize, bool) {
    let period = if omega != 0.0 { 2.0 * PI / omega.abs() } else { 1.0 };
    match kind {
        ScenarioKind::Astronomy => (SweepVariable::PhaseAlpha, 0.0, 2.0 * PI, 12, false),
        ScenarioKind::ScenarioI => (SweepVariable::T2p, 20.0 - period, 20.0 + period, 17, true),
        ScenarioKind::ScenarioIii => (SweepVariable::T2p, -period, period, 17, true),
        ScenarioKind::ScenarioIv => (SweepVariable::DeltaT, 0.0, 5.0, 11, true),
        ScenarioKind::Pulsed => (SweepVariable::PulseOffset, 0.0, 4.0, 9, true),
        _ => (SweepVariable::Tau, -3.0, 3.0, 13, true),
    }
}

fn resolve(raw: RawConfig, stem: &str) -> Result<ExperimentConfig> {
    let mut d = Defaults(Vec::new());
    let scenario: ScenarioKind = raw.scenario.parse().map_err(|_| {
        let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        bad("scenario", format!("unknown scenario `{}`; expected one of {}", raw.scenario, names.join(", ")))
    })?;

    let coh = raw.coherence.unwrap_or_default();
    let shape = d.take(coh.shape, "coherence.shape", CoherenceShape::default);
    let tc = positive("coherence.tc", d.take(coh.tc, "coherence.tc", || 1.0))?;
    let omega = finite("coherence.omega", d.take(coh.omega, "coherence.omega", || 50.0 / tc))?;

    let (default_kind, default_random) = default_sources(scenario);
    let mut sources = Vec::with_capacity(2);
    for (i, rs) in [raw.source1, raw.source2].into_iter().enumerate() {
        let p = format!("source{}", i + 1);
        let rs = rs.unwrap_or_default();
        let kind = d.take(rs.kind, &format!("{p}.kind"), || match (scenario, i) {
            (ScenarioKind::Astronomy, 1) => SourceKind::Coherent,
            _ => default_kind,
        });
        let model = CoherenceModel {
            shape: rs.shape.unwrap_or(shape),
            tc: positive(&format!("{p}.tc"), rs.tc.unwrap_or(tc))?,
            omega: finite(&format!("{p}.omega"), rs.omega.unwrap_or(omega))?,
        };
        sources.push(SourceSpec {
            kind,
            intensity: non_negative(&format!("{p}.intensity"), d.take(rs.intensity, &format!("{p}.intensity"), || 1.0))?,
            phase: finite(&format!("{p}.phase"), rs.phase.unwrap_or(0.0))?,
            random_phase: d.take(rs.random_phase, &format!("{p}.random_phase"), || default_random),
            model,
        });
    }
    let sources = [sources[0], sources[1]];
    if scenario != ScenarioKind::Pulsed {
        let co = sources.map(|s| s.kind == SourceKind::CommonOriginSplit);
        if co[0] != co[1] {
            return Err(bad("source2.kind", "common_origin_split must be used for both sources or neither"));
        }
    }

    let rd = raw.delays.unwrap_or_default();
    let dd = default_delays(scenario);
    let delays = DelayConfig::new(
        finite("delays.t1", d.take(rd.t1, "delays.t1", || dd[0]))?,
        finite("delays.t2", d.take(rd.t2, "delays.t2", || dd[1]))?,
        finite("delays.t1p", d.take(rd.t1p, "delays.t1p", || dd[2]))?,
        finite("delays.t2p", d.take(rd.t2p, "delays.t2p", || dd[3]))?,
    );
    let tau = finite("delays.tau", d.take(rd.tau, "delays.tau", || 0.0))?;
    if scenario == ScenarioKind::Astronomy && tau != 0.0 {
        return Err(bad("delays.tau", "the astronomy scheme is defined at equal times"));
    }

    let rs = raw.sweep.unwrap_or_default();
    let (dv, dstart, dstop, dsteps, dend) = default_sweep(scenario, omega);
    let variable = match rs.variable {
        None => d.take(None, "sweep.variable", || dv),
        Some(OneOrMany::One(s)) => {
            SweepVariable::parse(&s).ok_or_else(|| bad("sweep.variable", format!("unknown sweep variable `{s}`")))?
        }
        Some(OneOrMany::Many(v)) if v.len() == 1 => SweepVariable::parse(&v[0])
            .ok_or_else(|| bad("sweep.variable", format!("unknown sweep variable `{}`", v[0])))?,
        Some(OneOrMany::Many(v)) => {
            return Err(bad(
                "sweep.variable",
                format!("exactly one swept variable is allowed, got {}: {}", v.len(), v.join(", ")),
            ))
        }
    };
    let same_default = variable == dv;
    let start = finite("sweep.start", d.take(rs.start, "sweep.start", || if same_default { dstart } else { 0.0 }))?;
    let stop = finite("sweep.stop", d.take(rs.stop, "sweep.stop", || if same_default { dstop } else { 1.0 }))?;
    let steps = d.take(rs.steps, "sweep.steps", || if same_default { dsteps as i64 } else { 11 });
    if steps < 2 {
        return Err(bad("sweep.steps", format!("need at least 2 steps, got {steps}")));
    }
    let endpoint = d.take(rs.endpoint, "sweep.endpoint", || if same_default { dend } else { true });
    let compatible = match variable {
        SweepVariable::PhaseAlpha | SweepVariable::GammaMagnitude => scenario == ScenarioKind::Astronomy,
        SweepVariable::PulseOffset => scenario == ScenarioKind::Pulsed,
        SweepVariable::Tau => !matches!(scenario, ScenarioKind::Pulsed | ScenarioKind::ScenarioIv),
        _ => scenario != ScenarioKind::Astronomy,
    };
    if !compatible {
        return Err(bad("sweep.variable", format!("`{}` cannot be swept in {scenario}", variable.name())));
    }
    let sweep = SweepSpec { variable, start, stop, steps: steps as usize, endpoint };

    let re = raw.ensemble.unwrap_or_default();
    let realizations = d.take(re.realizations, "ensemble.realizations", || 200);
    if realizations < 1 {
        return Err(bad("ensemble.realizations", format!("need at least 1, got {realizations}")));
    }
    let ensemble = EnsembleSpec {
        realizations: realizations as usize,
        duration: positive("ensemble.duration", d.take(re.duration, "ensemble.duration", || 500.0 * tc))?,
        dt: positive("ensemble.dt", d.take(re.dt, "ensemble.dt", || tc / 20.0))?,
        seed: d.take(re.seed, "ensemble.seed", || 1),
    };

    let rdet = raw.detector.unwrap_or_default();
    let detector = DetectorSpec::new(
        positive(
            "detector.resolve_time",
            d.take(rdet.resolve_time, "detector.resolve_time", || match scenario {
                ScenarioKind::ScenarioIv => 40.0 * tc,
                ScenarioKind::Pulsed => 2.0,
                _ => ensemble.dt,
            }),
        )?,
        positive("detector.charge", d.take(rdet.charge, "detector.charge", || 1.0))?,
    )?;

    let astronomy = if scenario == ScenarioKind::Astronomy {
        let ra = raw.astronomy.unwrap_or_default();
        let g = d.take(ra.gamma_magnitude, "astronomy.gamma_magnitude", || 1.0);
        if !(0.0..=1.0).contains(&g) {
            return Err(bad("astronomy.gamma_magnitude", format!("must lie in [0, 1], got {g}")));
        }
        let lo = d.take(ra.lo_intensity, "astronomy.lo_intensity", || [sources[0].intensity; 2]);
        for v in lo {
            non_negative("astronomy.lo_intensity", v)?;
        }
        Some(AstroSpec {
            gamma_magnitude: g,
            gamma_phase: finite("astronomy.gamma_phase", d.take(ra.gamma_phase, "astronomy.gamma_phase", || 0.0))?,
            lo_intensity: lo,
            delta_phi_alpha: finite(
                "astronomy.delta_phi_alpha",
                d.take(ra.delta_phi_alpha, "astronomy.delta_phi_alpha", || 0.0),
            )?,
        })
    } else if raw.astronomy.is_some() {
        return Err(bad("astronomy", format!("only used by the astronomy scenario, not {scenario}")));
    } else {
        None
    };

    let pulsed = if scenario == ScenarioKind::Pulsed {
        let rp = raw.pulsed.unwrap_or_default();
        let separation = positive("pulsed.separation", d.take(rp.separation, "pulsed.separation", || 40.0))?;
        let width = positive("pulsed.width", d.take(rp.width, "pulsed.width", || 1.0))?;
        if width > separation / 10.0 {
            return Err(bad("pulsed.width", format!("must not exceed separation/10 = {}", separation / 10.0)));
        }
        if detector.resolve_time >= separation {
            return Err(bad("detector.resolve_time", "must be below the pulse separation"));
        }
        let pulses = d.take(rp.pulses, "pulsed.pulses", || 2000);
        if pulses < 1 {
            return Err(bad("pulsed.pulses", "need at least one pulse"));
        }
        let stats = d.take(rp.stats, "pulsed.stats", || [AmplitudeStats::Thermal; 2]);
        if stats.contains(&AmplitudeStats::User) {
            return Err(bad("pulsed.stats", "user amplitudes are not available from a config file"));
        }
        let energy = d.take(rp.energy, "pulsed.energy", || [1.0, 1.0]);
        for e in energy {
            non_negative("pulsed.energy", e)?;
        }
        let random_phase = d.take(rp.random_phase, "pulsed.random_phase", || true);
        let method = d.take(rp.method, "pulsed.method", || PulsedMethod::Amplitude);
        if method == PulsedMethod::Waveform && !random_phase {
            return Err(bad("pulsed.random_phase", "the waveform method always averages the relative train phase"));
        }
        Some(PulsedSpec {
            separation,
            width,
            pulses: pulses as usize,
            stats,
            energy,
            random_phase,
            method,
            dt: positive("pulsed.dt", d.take(rp.dt, "pulsed.dt", || width / 5.0))?,
        })
    } else if raw.pulsed.is_some() {
        return Err(bad("pulsed", format!("only used by the pulsed scenario, not {scenario}")));
    } else {
        None
    };

    let ro = raw.oracle.unwrap_or_default();
    let oracle = OracleSpec {
        delta_phi: finite("oracle.delta_phi", d.take(ro.delta_phi, "oracle.delta_phi", || 0.0))?,
        cross_intensity: d.take(ro.cross_intensity, "oracle.cross_intensity", || true),
    };

    let rf = raw.fit.unwrap_or_default();
    let fringe_sweep = variable == SweepVariable::PhaseAlpha
        || (variable.is_delay()
            && matches!(scenario, ScenarioKind::ScenarioI | ScenarioKind::ScenarioIi | ScenarioKind::ScenarioIii));
    let fit = FitSpec {
        enabled: d.take(rf.enabled, "fit.enabled", || fringe_sweep),
        period: positive(
            "fit.period",
            d.take(rf.period, "fit.period", || {
                if variable == SweepVariable::PhaseAlpha || omega == 0.0 {
                    2.0 * PI
                } else {
                    2.0 * PI / omega.abs()
                }
            }),
        )?,
        free_period: d.take(rf.free_period, "fit.free_period", || false),
    };

    let ro = raw.output.unwrap_or_default();
    let output = OutputSpec {
        directory: d.take(ro.directory, "output.directory", || PathBuf::from("output")),
        stem: d.take(ro.stem, "output.stem", || stem.to_string()),
    };
    if output.stem.is_empty() || output.stem.contains(['/', '\\']) {
        return Err(bad("output.stem", "must be a plain file name"));
    }

    let cfg = ExperimentConfig {
        scenario,
        sources,
        delays,
        tau,
        sweep,
        ensemble,
        detector,
        astronomy,
        pulsed,
        oracle,
        fit,
        output,
        applied_defaults: d.0,
    };
    Ok(cfg)
}

impl ExperimentConfig {
    /// Longest coherence time among the fluctuating sources.
    pub fn coherence_time(&self) -> f64 {
        self.sources
            .iter()
            .filter(|s| s.kind != SourceKind::Coherent)
            .map(|s| s.model.tc)
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    }
}
