//! Runs a configured sweep: one Monte-Carlo ensemble and one closed-form
//! prediction per sweep point.

use num_complex::Complex64;
use serde::Serialize;

use super::config::{ExperimentConfig, PulsedMethod, SweepVariable};
use super::fit::{fit_fringe, fit_fringe_free_period, FringeFit};
use crate::detection::{
    cross_correlate, intensity, mean_photocurrent, overlap_beta, pulsed_coincidence_amplitude,
    pulsed_coincidence_waveform, slow_detector_rate, PulseOffsets,
};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fields::{synth_pulse_train, AmplitudeStats, PulseProfile};
use crate::interferometer::{AstroSetup, DelayConfig, ScenarioAssembler, ScenarioKind, ScenarioSetup, SourceKind};
use crate::oracle::{
    predict_astronomy, predict_pulsed, predict_scenario_i, predict_scenario_ii, predict_scenario_iii,
    predict_scenario_iv, predict_uncorrelated, AmplitudeMoments, AstroConfig, ScenarioNetwork,
};
use crate::rng;
use crate::stats::{z_score, Moments};

/// Pass threshold on the largest `|z|` of a sweep.
pub const MAX_Z: f64 = 4.0;
/// Per-point threshold used for the reported fraction.
pub const POINT_Z: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean: f64,
    pub stderr: f64,
    pub analytic: f64,
    pub z: f64,
}

/// Mean single-detector intensities (stationary) or photocurrents (pulsed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SinglesRow {
    pub value: f64,
    pub mean: [f64; 2],
    pub stderr: [f64; 2],
    pub analytic: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub points: usize,
    /// Largest `|z|`; infinite if any point has no finite z-score.
    pub max_abs_z: f64,
    pub fraction_within_3: f64,
    pub pass: bool,
}

impl Summary {
    pub fn from_rows(rows: &[SweepRow]) -> Summary {
        let max_abs_z =
            rows.iter().map(|r| if r.z.is_finite() { r.z.abs() } else { f64::INFINITY }).fold(0.0, f64::max);
        let within = rows.iter().filter(|r| r.z.abs() <= POINT_Z).count();
        let fraction_within_3 = if rows.is_empty() { 1.0 } else { within as f64 / rows.len() as f64 };
        Summary { points: rows.len(), max_abs_z, fraction_within_3, pass: max_abs_z <= MAX_Z }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub scenario: ScenarioKind,
    pub variable: SweepVariable,
    pub seed: u64,
    pub realizations: usize,
    pub rows: Vec<SweepRow>,
    pub singles: Vec<SinglesRow>,
    /// Fringe fit of the Monte-Carlo means, when enabled.
    pub fit: Option<FringeFit>,
    /// The same fit applied to the analytic curve, for comparison.
    pub analytic_fit: Option<FringeFit>,
    pub regime_warnings: Vec<String>,
    pub summary: Summary,
}

impl ComparisonReport {
    pub fn empty(cfg: &ExperimentConfig) -> ComparisonReport {
        ComparisonReport {
            scenario: cfg.scenario,
            variable: cfg.sweep.variable,
            seed: cfg.ensemble.seed,
            realizations: cfg.ensemble.realizations,
            rows: Vec::new(),
            singles: Vec::new(),
            fit: None,
            analytic_fit: None,
            regime_warnings: Vec::new(),
            summary: Summary::from_rows(&[]),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean).collect()
    }
}

/// Delays, lag and astronomy settings at one sweep value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSettings {
    pub delays: DelayConfig,
    pub tau: f64,
    pub gamma_magnitude: f64,
    pub delta_phi_alpha: f64,
}

pub fn point_settings(cfg: &ExperimentConfig, v: f64) -> PointSettings {
    let mut d = cfg.delays;
    let mut tau = cfg.tau;
    let (mut g, mut dphi) = cfg.astronomy.as_ref().map_or((0.0, 0.0), |a| (a.gamma_magnitude, a.delta_phi_alpha));
    match cfg.sweep.variable {
        SweepVariable::Tau => tau = v,
        SweepVariable::T1 => d.t1 = v,
        SweepVariable::T2 => d.t2 = v,
        SweepVariable::T1p => d.t1p = v,
        SweepVariable::T2p => d.t2p = v,
        SweepVariable::DeltaT => {
            d.t2 = d.t1 + v;
            d.t2p = d.t1p + v;
        }
        SweepVariable::PhaseAlpha => dphi = v,
        SweepVariable::GammaMagnitude => g = v,
        SweepVariable::PulseOffset => {
            d.t2 += v;
            d.t2p += v;
        }
    }
    PointSettings { delays: d, tau, gamma_magnitude: g, delta_phi_alpha: dphi }
}

/// The stationary scenario setup at one sweep point.
pub fn scenario_setup(cfg: &ExperimentConfig, p: &PointSettings) -> ScenarioSetup {
    let astro = cfg.astronomy.as_ref().map(|a| AstroSetup {
        gamma: Complex64::from_polar(p.gamma_magnitude, a.gamma_phase),
        lo_intensity: a.lo_intensity,
        delta_phi_alpha: p.delta_phi_alpha,
    });
    ScenarioSetup {
        kind: cfg.scenario,
        sources: cfg.sources,
        delays: p.delays,
        astro,
        duration: cfg.ensemble.duration,
        dt: cfg.ensemble.dt,
    }
}

/// Closed-form coincidence for a stationary scenario, on the input
/// intensity scale.
pub fn stationary_analytic(cfg: &ExperimentConfig, setup: &ScenarioSetup, tau: f64) -> Result<f64> {
    let [s1, s2] = setup.sources;
    let (i1, i2) = (s1.intensity, s2.intensity);
    let d = setup.delays;
    let dphi = cfg.oracle.delta_phi;
    let zero = Complex64::new(0.0, 0.0);
    // a common-origin pair only carries cross coherence through the shared field
    let cross = |lag: f64| if s1.kind == SourceKind::CommonOriginSplit { s1.coherence(lag) } else { zero };
    let random_common = setup.common_origin() && (s1.random_phase || s2.random_phase);
    let p = match setup.kind {
        ScenarioKind::UncorrelatedSources => {
            let (l1, l2) = (tau - d.delta1_uncorrelated(), tau - d.delta2_uncorrelated());
            predict_uncorrelated(i1, i2, s1.lambda(l1), s2.lambda(l2), s1.coherence(l1), s2.coherence(l2))
        }
        ScenarioKind::Astronomy => {
            let a = setup.astro.ok_or_else(|| Error::Incompatible("astronomy needs local oscillators".into()))?;
            let ac = AstroConfig::thermal(i1, a.lo_intensity[0], a.lo_intensity[1], a.delta_phi_alpha, a.gamma);
            predict_astronomy(&ac, false)?
        }
        ScenarioKind::ScenarioI => predict_scenario_i(i1, i2, cross(d.delta()), cross(d.delta_prime()), dphi),
        ScenarioKind::ScenarioIi | ScenarioKind::HomMz => {
            let (l1, l2) = (d.delta1() + tau, d.delta2() + tau);
            predict_scenario_ii(i1, i2, s1.lambda(l1), s2.lambda(l2), s1.coherence(l1), s2.coherence(l2), dphi)
        }
        ScenarioKind::ScenarioIii => {
            let (g12, g21) = (cross(d.delta_bar1p() + tau), cross(tau - d.delta_bar2p()));
            let lambdas = if cfg.oracle.cross_intensity { (g12.norm_sqr(), g21.norm_sqr()) } else { (0.0, 0.0) };
            // the surviving fringe carries the common random phase twice
            let fringe = if random_common { zero } else { g12 };
            predict_scenario_iii(i1, i2, fringe, g21, dphi, lambdas)
        }
        ScenarioKind::ScenarioIv => predict_scenario_iv(i1, i2, cross(d.delta()), cross(d.delta_prime())),
        ScenarioKind::Pulsed => return Err(Error::Incompatible("pulsed scenarios have their own oracle".into())),
    };
    Ok(p.value())
}

struct PointResult {
    row: SweepRow,
    singles: SinglesRow,
    warnings: Vec<String>,
}

fn row(value: f64, acc: &Moments, single_stderr: Option<f64>, analytic: f64) -> SweepRow {
    let mean = acc.mean();
    let stderr = if acc.count >= 2 { acc.stderr() } else { single_stderr.unwrap_or(f64::NAN) };
    SweepRow { value, mean, stderr, analytic, z: z_score(mean, stderr, analytic) }
}

fn singles_row(value: f64, acc: &[Moments; 2], analytic: [f64; 2]) -> SinglesRow {
    SinglesRow {
        value,
        mean: [acc[0].mean(), acc[1].mean()],
        stderr: [acc[0].stderr(), acc[1].stderr()],
        analytic,
    }
}

fn run_stationary(cfg: &ExperimentConfig, index: usize, v: f64, exec: Execution) -> Result<PointResult> {
    let p = point_settings(cfg, v);
    let setup = scenario_setup(cfg, &p);
    let slow = cfg.scenario.uses_slow_detector();
    let analytic = stationary_analytic(cfg, &setup, p.tau)?;
    let (s_a, s_b) = ScenarioNetwork::from_setup(&setup)?.singles()?;
    let asm = ScenarioAssembler::new(setup, slow.then_some(cfg.detector.resolve_time))?;
    let tc = cfg.coherence_time();
    let dt = cfg.ensemble.dt;
    let per = exec.try_map_indexed(cfg.ensemble.realizations, |r| -> Result<(f64, Option<f64>, f64, f64)> {
        let f = asm.assemble(rng::derive_seed(cfg.ensemble.seed, &[index as u64, r as u64]))?;
        let (ia, ib) = (intensity(&f.v), intensity(&f.v_prime));
        let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
        let (value, se) = if slow {
            (f.coincidence_scale * slow_detector_rate(&ia, &ib, dt, &cfg.detector)?, None)
        } else {
            let e = cross_correlate(&ia, &ib, dt, &[p.tau], tc)?;
            (f.coincidence_scale * e.mean[0], Some(f.coincidence_scale * e.stderr[0]))
        };
        Ok((value, se, mean(&ia), mean(&ib)))
    })?;
    let acc: Moments = per.iter().map(|x| x.0).collect();
    let singles = [per.iter().map(|x| x.2).collect(), per.iter().map(|x| x.3).collect()];
    Ok(PointResult {
        row: row(v, &acc, per[0].1, analytic),
        singles: singles_row(v, &singles, [s_a, s_b]),
        warnings: asm.regime().violations.clone(),
    })
}

/// Fourth-order amplitude moments for independent trains of the configured
/// statistics at the given slot offsets.
pub fn pulsed_moments(
    stats: &[AmplitudeStats; 2],
    energy: [f64; 2],
    offsets: PulseOffsets,
    random_phase: bool,
) -> AmplitudeMoments {
    let [ta, tb] = [0, 1].map(|k| stats[k] == AmplitudeStats::Thermal);
    let [a, b] = energy;
    let same_a = offsets.n1 == offsets.n1p;
    let same_b = offsets.n2 == offsets.n2p;
    let bunch = |thermal: bool, same: bool| if thermal && same { 2.0 } else { 1.0 };
    // ⟨A*_{N1} A_{N1'}⟩ and ⟨B_{N2} B*_{N2'}⟩
    let pair = |thermal: bool, same: bool, e: f64| if thermal && !same { 0.0 } else { e };
    let m1212 = if random_phase || ta || tb { 0.0 } else { a * b };
    AmplitudeMoments {
        m11p: bunch(ta, same_a) * a * a,
        m22p: bunch(tb, same_b) * b * b,
        m12p: a * b,
        m1p2: a * b,
        m1221: Complex64::new(pair(ta, same_a, a) * pair(tb, same_b, b), 0.0),
        m1212: Complex64::new(m1212, 0.0),
    }
}

fn run_pulsed(cfg: &ExperimentConfig, index: usize, v: f64, exec: Execution) -> Result<PointResult> {
    let ps = cfg.pulsed.as_ref().ok_or_else(|| Error::Incompatible("pulsed scenario without pulse settings".into()))?;
    let p = point_settings(cfg, v);
    let profile = PulseProfile::gaussian(ps.width)?;
    let (offsets, d) = PulseOffsets::from_delays(&p.delays, ps.separation);
    let beta = overlap_beta(&profile, &profile, d[1] - d[0])?;
    let beta_p = overlap_beta(&profile, &profile, d[3] - d[2])?;
    let analytic = predict_pulsed(&pulsed_moments(&ps.stats, ps.energy, offsets, ps.random_phase), beta, beta_p).value();
    let per = exec.try_map_indexed(cfg.ensemble.realizations, |r| -> Result<(f64, f64, f64)> {
        let seed = rng::derive_seed(cfg.ensemble.seed, &[index as u64, r as u64]);
        let train = |k: usize| {
            let s = rng::derive_seed(seed, &[k as u64]);
            synth_pulse_train(profile.clone(), ps.separation, ps.pulses, ps.stats[k], ps.energy[k], None, s)
        };
        let a = train(0)?;
        let mut b = train(1)?;
        if ps.random_phase && ps.method == PulsedMethod::Amplitude {
            let phi = rng::uniform_phase(&mut rng::stream(seed, &[0x5b1d]));
            let rot = Complex64::from_polar(1.0, phi);
            b.amplitudes.iter_mut().for_each(|x| *x *= rot);
        }
        let rate = match ps.method {
            PulsedMethod::Amplitude => {
                pulsed_coincidence_amplitude(&a.amplitudes, &b.amplitudes, offsets, beta, beta_p, &cfg.detector)?.rate
            }
            PulsedMethod::Waveform => pulsed_coincidence_waveform(&a, &b, &p.delays, &cfg.detector, ps.dt)?.rate,
        };
        Ok((rate, mean_photocurrent(&a, &cfg.detector)?, mean_photocurrent(&b, &cfg.detector)?))
    })?;
    let acc: Moments = per.iter().map(|x| x.0).collect();
    let singles = [per.iter().map(|x| x.1).collect(), per.iter().map(|x| x.2).collect()];
    let current = |e: f64| cfg.detector.charge * e / ps.separation;
    Ok(PointResult {
        row: row(v, &acc, None, analytic),
        singles: singles_row(v, &singles, [current(ps.energy[0]), current(ps.energy[1])]),
        warnings: Vec::new(),
    })
}

/// Fringe fits of the Monte-Carlo and analytic curves per the config.
pub fn fit_report(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<(FringeFit, FringeFit)> {
    let x: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let fit = |y: &[f64]| {
        if cfg.fit.free_period {
            fit_fringe_free_period(&x, y, cfg.fit.period)
        } else {
            fit_fringe(&x, y, cfg.fit.period)
        }
    };
    let mc = fit(&rows.iter().map(|r| r.mean).collect::<Vec<_>>())?;
    let an = fit(&rows.iter().map(|r| r.analytic).collect::<Vec<_>>())?;
    Ok((mc, an))
}

/// Runs every sweep point in order; realizations within a point go through
/// `exec`. Seeds depend only on `(master seed, point, realization)`, so the
/// report is identical for every execution mode and thread count.
pub fn run_sweep(cfg: &ExperimentConfig, exec: Execution) -> Result<ComparisonReport> {
    let mut report = ComparisonReport::empty(cfg);
    for (index, v) in cfg.sweep.values().into_iter().enumerate() {
        let point = match cfg.scenario {
            ScenarioKind::Pulsed => run_pulsed(cfg, index, v, exec),
            _ => run_stationary(cfg, index, v, exec),
        }
        .map_err(|e| Error::SweepPoint { index, value: v, source: Box::new(e) })?;
        for w in point.warnings {
            if !report.regime_warnings.contains(&w) {
                report.regime_warnings.push(w);
            }
        }
        report.rows.push(point.row);
        report.singles.push(point.singles);
    }
    if cfg.fit.enabled {
        let (mc, an) = fit_report(cfg, &report.rows)?;
        report.fit = Some(mc);
        report.analytic_fit = Some(an);
    }
    report.summary = Summary::from_rows(&report.rows);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;
    use std::path::Path;

    fn cfg(text: &str) -> ExperimentConfig {
        parse_config(text, Path::new("t.toml"), "t").unwrap()
    }

    #[test]
    fn analytic_matches_exact_network() {
        for (text, values) in [
            ("scenario = \"uncorrelated_sources\"", vec![-1.0, 0.0, 0.4]),
            ("scenario = \"hom_mz\"\n[source2]\nkind = \"coherent\"\nrandom_phase = true", vec![0.0, 0.6]),
            ("scenario = \"scenario_i\"", vec![19.9, 20.0, 20.07]),
            ("scenario = \"scenario_ii\"\n[sweep]\nvariable = \"tau\"", vec![-0.5, 0.0, 0.3]),
            ("scenario = \"scenario_iii\"", vec![-0.1, 0.0, 0.05]),
            ("scenario = \"scenario_iii\"\n[source1]\nrandom_phase = true\n[source2]\nrandom_phase = true", vec![0.0, 0.05]),
            ("scenario = \"astronomy\"\n[astronomy]\ngamma_magnitude = 0.5\ngamma_phase = 0.3", vec![0.0, 1.0, 4.0]),
        ] {
            let c = cfg(text);
            for v in values {
                let p = point_settings(&c, v);
                let setup = scenario_setup(&c, &p);
                let exact = ScenarioNetwork::from_setup(&setup).unwrap().coincidence(p.tau).unwrap();
                let closed = stationary_analytic(&c, &setup, p.tau).unwrap();
                assert!((exact - closed).abs() < 1e-12, "{text} at {v}: {exact} vs {closed}");
            }
        }
    }

    #[test]
    fn pulsed_moments_reduce_to_oracle_forms() {
        let o = PulseOffsets::new(0, 0, 0, 0);
        let t = pulsed_moments(&[AmplitudeStats::Thermal; 2], [1.5, 0.5], o, true);
        assert_eq!(t, AmplitudeMoments::thermal(1.5, 0.5, true, true));
        let shifted = PulseOffsets::new(0, 0, 1, 0);
        assert_eq!(
            pulsed_moments(&[AmplitudeStats::Thermal; 2], [1.0, 1.0], shifted, true),
            AmplitudeMoments::thermal(1.0, 1.0, false, true)
        );
        let c = pulsed_moments(&[AmplitudeStats::Coherent; 2], [1.0, 4.0], o, false);
        assert_eq!(c, AmplitudeMoments::coherent(Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), false));
    }

    #[test]
    fn small_sweep_is_deterministic_across_execution_modes() {
        let c = cfg("scenario = \"hom_mz\"\n[ensemble]\nrealizations = 6\nduration = 120.0\n[sweep]\nsteps = 3");
        let a = run_sweep(&c, Execution::Sequential).unwrap();
        let b = run_sweep(&c, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 3);
        assert_eq!(a.summary, Summary::from_rows(&a.rows));
        for r in &a.rows {
            assert!((r.analytic - 4.0).abs() < 1e-12);
            assert!(r.stderr > 0.0);
        }
    }

    #[test]
    fn single_realization_uses_within_trace_error() {
        let c = cfg("scenario = \"hom_mz\"\n[ensemble]\nrealizations = 1\nduration = 200.0\n[sweep]\nsteps = 2");
        let r = run_sweep(&c, Execution::Sequential).unwrap();
        assert!(r.rows.iter().all(|x| x.stderr.is_finite() && x.stderr > 0.0));
    }

    #[test]
    fn errors_name_the_sweep_point() {
        // a lag longer than the trace
        let c = cfg("scenario = \"hom_mz\"\n[ensemble]\nrealizations = 2\nduration = 100.0\n[sweep]\nstart = 0.0\nstop = 400.0\nsteps = 2");
        match run_sweep(&c, Execution::Sequential) {
            Err(Error::SweepPoint { index, value, .. }) => assert_eq!((index, value), (1, 400.0)),
            other => panic!("{other:?}"),
        }
    }
}
