//! Coincidences between the outputs of an unbalanced interferometer fed with
//! two pulse trains, computed two ways: directly from the pulse amplitudes
//! and mode-overlap factors, and by brute force from sampled waveforms.

use num_complex::Complex64;
use serde::Serialize;

use super::detector::DetectorSpec;
use crate::error::{invalid, Error, Result};
use crate::fields::trace::{lag_samples, same_dt};
use crate::fields::{FieldTrace, PulseProfile, PulseTrain};
use crate::interferometer::{align, delay, DelayConfig};

/// `Q · Rp · ⟨|A_j|²⟩_j`.
pub fn mean_photocurrent(train: &PulseTrain, spec: &DetectorSpec) -> Result<f64> {
    train.validate()?;
    spec.validate()?;
    let e = train.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() / train.len() as f64;
    Ok(spec.charge * train.rep_rate() * e)
}

/// Whole-slot parts `N` of the four delays `T = N·Δt + d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PulseOffsets {
    pub n1: i64,
    pub n2: i64,
    pub n1p: i64,
    pub n2p: i64,
}

impl PulseOffsets {
    pub fn new(n1: i64, n2: i64, n1p: i64, n2p: i64) -> Self {
        PulseOffsets { n1, n2, n1p, n2p }
    }

    /// Splits each delay into the nearest whole slot and a residual
    /// `|d| ≤ Δt/2`; returns the offsets and `[d1, d2, d1', d2']`.
    pub fn from_delays(delays: &DelayConfig, separation: f64) -> (PulseOffsets, [f64; 4]) {
        let n = delays.as_array().map(|t| (t / separation).round() as i64);
        let d = [delays.t1, delays.t2, delays.t1p, delays.t2p];
        let res = [0, 1, 2, 3].map(|i| d[i] - n[i] as f64 * separation);
        (PulseOffsets::new(n[0], n[1], n[2], n[3]), res)
    }

    fn as_array(&self) -> [i64; 4] {
        [self.n1, self.n2, self.n1p, self.n2p]
    }

    /// Output slots `j` for which all four input pulses exist.
    fn valid_slots(&self, len_a: usize, len_b: usize) -> Option<(i64, i64)> {
        let lens = [len_a, len_b, len_a, len_b];
        let n = self.as_array();
        let lo = n.iter().map(|x| -x).max().unwrap();
        let hi = (0..4).map(|i| lens[i] as i64 - n[i]).min().unwrap();
        (hi > lo).then_some((lo, hi))
    }
}

/// Coincidence rate in units of `Rp·Q²` with its six contributions.
///
/// `rate = r11p + r22p + r12p + r1p2 − r1221 − r1212`, where the two
/// interference contributions already include their complex conjugates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulsedCoincidence {
    pub rate: f64,
    pub r11p: f64,
    pub r22p: f64,
    pub r12p: f64,
    pub r1p2: f64,
    pub r1221: f64,
    pub r1212: f64,
    /// Number of pulse slots averaged.
    pub pulses: usize,
    pub charge: f64,
}

impl PulsedCoincidence {
    fn from_components(c: [f64; 6], pulses: usize, charge: f64) -> Self {
        let [r11p, r22p, r12p, r1p2, r1221, r1212] = c;
        PulsedCoincidence { rate: r11p + r22p + r12p + r1p2 - r1221 - r1212, r11p, r22p, r12p, r1p2, r1221, r1212, pulses, charge }
    }

    pub fn component_sum(&self) -> f64 {
        self.r11p + self.r22p + self.r12p + self.r1p2 - self.r1221 - self.r1212
    }

    pub fn baseline(&self) -> f64 {
        self.r11p + self.r22p + self.r12p + self.r1p2
    }

    /// Counts per unit time for repetition rate `rep_rate`.
    pub fn absolute_rate(&self, rep_rate: f64) -> f64 {
        self.rate * rep_rate * self.charge * self.charge
    }
}

fn check_amplitudes(x: &[Complex64], name: &'static str) -> Result<()> {
    if x.is_empty() {
        return Err(invalid(name, "no amplitudes"));
    }
    if x.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
        return Err(Error::NonFinite(format!("{name} amplitude")));
    }
    Ok(())
}

/// Amplitude-level coincidence rate: the six slot averages over every `j`
/// for which the four shifted indices are in range, weighted by the mode
/// overlaps `β = β(Δd)` and `β' = β(Δd')`.
pub fn pulsed_coincidence_amplitude(
    a: &[Complex64],
    b: &[Complex64],
    offsets: PulseOffsets,
    beta: Complex64,
    beta_prime: Complex64,
    spec: &DetectorSpec,
) -> Result<PulsedCoincidence> {
    check_amplitudes(a, "A")?;
    check_amplitudes(b, "B")?;
    spec.validate()?;
    for (name, x) in [("beta", beta), ("beta_prime", beta_prime)] {
        if !(x.norm() <= 1.0 + 1e-9) {
            return Err(invalid(name, format!("|β| = {} exceeds 1", x.norm())));
        }
    }
    let (lo, hi) = offsets
        .valid_slots(a.len(), b.len())
        .ok_or_else(|| Error::OutOfRange(format!("pulse offsets {offsets:?} leave no overlapping slots")))?;
    let at = |x: &[Complex64], j: i64, n: i64| x[(j + n) as usize];
    let mut s = [0.0; 4];
    let (mut m1221, mut m1212) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for j in lo..hi {
        let (a1, b2, a1p, b2p) = (at(a, j, offsets.n1), at(b, j, offsets.n2), at(a, j, offsets.n1p), at(b, j, offsets.n2p));
        s[0] += a1.norm_sqr() * a1p.norm_sqr();
        s[1] += b2.norm_sqr() * b2p.norm_sqr();
        s[2] += a1.norm_sqr() * b2p.norm_sqr();
        s[3] += a1p.norm_sqr() * b2.norm_sqr();
        let x = a1.conj() * b2;
        m1221 += x * b2p.conj() * a1p;
        m1212 += x * a1p.conj() * b2p;
    }
    let n = (hi - lo) as f64;
    let r1221 = 2.0 * (beta * beta_prime.conj() * m1221).re / n;
    let r1212 = 2.0 * (beta * beta_prime * m1212).re / n;
    Ok(PulsedCoincidence::from_components(
        [s[0] / n, s[1] / n, s[2] / n, s[3] / n, r1221, r1212],
        (hi - lo) as usize,
        spec.charge,
    ))
}

/// `β(s) = ∫ f*(t) g(t+s) dt`, by quadrature on a grid fine enough for both
/// profiles. The sum is divided by the discrete norms of the sampled `f`
/// and shifted `g`, so `|β| ≤ 1` holds exactly, not just to quadrature error.
pub fn overlap_beta(f: &PulseProfile, g: &PulseProfile, offset: f64) -> Result<Complex64> {
    f.check_normalized()?;
    g.check_normalized()?;
    if !offset.is_finite() {
        return Err(Error::NonFinite(format!("overlap offset {offset}")));
    }
    let step = |p: &PulseProfile| match p {
        PulseProfile::Gaussian { width } => width / 64.0,
        PulseProfile::Sampled { dt, .. } => dt / 4.0,
    };
    let h = step(f).min(step(g));
    let (flo, fhi) = f.support();
    let (glo, ghi) = g.support();
    let (lo, hi) = (flo.min(glo - offset), fhi.max(ghi - offset));
    let n = ((hi - lo) / h).ceil() as usize + 1;
    let (mut num, mut nf, mut ng) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for k in 0..n {
        let t = lo + h * k as f64;
        let (x, y) = (f.eval(t), g.eval(t + offset));
        num += x.conj() * y;
        nf += x.norm_sqr();
        ng += y.norm_sqr();
    }
    if nf == 0.0 || ng == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(num / (nf * ng).sqrt())
}

/// `(1/T)∫dt ∫dτ i(t) i'(t+τ)` over the slots `[lo, hi)`, with the
/// coincidence window `|τ| < Δt/2` and `T = (hi − lo)·Δt`; in units of
/// `Rp·Q²` this is the per-slot average of the window integral over `Q²`.
fn window_coincidence(i: &[f64], ip: &[f64], per_slot: usize, first: usize, slots: usize, dt: f64, q: f64) -> f64 {
    let half = (per_slot / 2) as i64;
    let mut prefix = Vec::with_capacity(ip.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for x in ip {
        acc += x;
        prefix.push(acc);
    }
    let len = ip.len() as i64;
    let window = |n: i64| {
        let lo = (n - half + 1).clamp(0, len) as usize;
        let hi = (n + half).clamp(0, len) as usize;
        prefix[hi] - prefix[lo]
    };
    let start = first as i64 - half;
    let total: f64 = (0..(slots * per_slot) as i64)
        .map(|m| {
            let n = start + m;
            if n < 0 || n >= len {
                0.0
            } else {
                i[n as usize] * window(n)
            }
        })
        .sum();
    total * dt * dt / (slots as f64 * q * q)
}

/// Brute-force coincidence from sampled waveforms: both trains are rendered,
/// pushed through the four delays and two beam splitters, converted to
/// photocurrents by the detector response, and correlated within the window
/// `|τ| < Δt/2`. Delay residuals `d` must sit on the sampling grid.
///
/// The relative phase between the two trains is treated as random, as in the
/// amplitude-level expression: the rate is averaged exactly over
/// `B → e^{ikπ/2}B`, `k = 0..4`, which removes the unpaired cross terms that
/// a finite train would otherwise leave behind. The baseline components come
/// from the single-arm intensities.
pub fn pulsed_coincidence_waveform(
    train_a: &PulseTrain,
    train_b: &PulseTrain,
    delays: &DelayConfig,
    spec: &DetectorSpec,
    dt: f64,
) -> Result<PulsedCoincidence> {
    train_a.validate()?;
    train_b.validate()?;
    spec.validate()?;
    let sep = train_a.separation;
    if !same_dt(sep, train_b.separation) {
        return Err(Error::Incompatible(format!("pulse separations {} and {} differ", sep, train_b.separation)));
    }
    if spec.resolve_time >= sep {
        return Err(invalid("resolve_time", format!("T_R = {} must be below the pulse separation {sep}", spec.resolve_time)));
    }
    let (offsets, residual) = PulseOffsets::from_delays(delays, sep);
    for d in residual {
        lag_samples(d, dt)?;
    }
    let (lo, hi) = offsets
        .valid_slots(train_a.len(), train_b.len())
        .ok_or_else(|| Error::OutOfRange(format!("pulse offsets {offsets:?} leave no overlapping slots")))?;

    let pad = offsets.as_array().iter().map(|n| n.unsigned_abs() as usize).max().unwrap() + 2;
    let wa = train_a.render(dt, pad)?;
    let wb = train_b.render(dt, pad)?;
    let per_slot = (sep / dt).round() as usize;

    // photocurrents of both outputs and of the four single arms, plus the
    // aligned-window start used to locate the output slots
    let run = |b: &FieldTrace| -> Result<(i64, [Vec<f64>; 6])> {
        let arms = align(&[&delay(&wa, delays.t1)?, &delay(b, delays.t2)?, &delay(&wa, delays.t1p)?, &delay(b, delays.t2p)?])?;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (mut v, mut vp) = (Vec::with_capacity(arms[0].len()), Vec::with_capacity(arms[0].len()));
        for n in 0..arms[0].len() {
            v.push(((arms[0].samples[n] + arms[1].samples[n]) * h).norm_sqr());
            vp.push(((arms[2].samples[n] - arms[3].samples[n]) * h).norm_sqr());
        }
        let cur = |x: &[f64]| spec.photocurrent(x, dt);
        let arm = |k: usize| cur(&arms[k].samples.iter().map(|s| s.norm_sqr()).collect::<Vec<f64>>());
        Ok((arms[0].offset, [cur(&v), cur(&vp), arm(0), arm(1), arm(2), arm(3)]))
    };

    let (offset, [i, ip, a1, b2, a1p, b2p]) = run(&wb)?;
    // array index of the centre of output slot `lo`
    let centre = lo * per_slot as i64 - offset;
    if centre < (per_slot / 2) as i64 {
        return Err(Error::OutOfRange("rendered trains do not cover the coincidence slots".into()));
    }
    let slots = (hi - lo) as usize;
    let q = spec.charge;
    let c = |x: &[f64], y: &[f64]| window_coincidence(x, y, per_slot, centre as usize, slots, dt, q);

    let base = [c(&a1, &a1p), c(&b2, &b2p), c(&a1, &b2p), c(&a1p, &b2)];
    let baseline: f64 = base.iter().sum();
    // R(θ) for B → e^{iθ}B: the R1212 term goes as e^{±2iθ}, the unpaired
    // terms as e^{±iθ}, so four equally spaced phases average both away
    let mut r = [4.0 * c(&i, &ip), 0.0, 0.0, 0.0];
    for (k, slot) in r.iter_mut().enumerate().skip(1) {
        let rotated = wb.scaled(Complex64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_2));
        let (_, [ik, ipk, ..]) = run(&rotated)?;
        *slot = 4.0 * c(&ik, &ipk);
    }
    let averaged = r.iter().sum::<f64>() / 4.0;
    let r1221 = baseline - averaged;
    let r1212 = -(r[0] - r[1] + r[2] - r[3]) / 4.0;
    let out = PulsedCoincidence::from_components([base[0], base[1], base[2], base[3], r1221, r1212], slots, q);
    Ok(out)
}

/// Both estimators on the same trains: the amplitude path with `β, β'`
/// from [`overlap_beta`] at `Δd = d2 − d1`, `Δd' = d2' − d1'`, and the
/// waveform path.
pub fn pulsed_oracle_pair(
    train_a: &PulseTrain,
    train_b: &PulseTrain,
    delays: &DelayConfig,
    spec: &DetectorSpec,
    dt: f64,
) -> Result<(PulsedCoincidence, PulsedCoincidence)> {
    let (offsets, d) = PulseOffsets::from_delays(delays, train_a.separation);
    let beta = overlap_beta(&train_a.profile, &train_b.profile, d[1] - d[0])?;
    let beta_p = overlap_beta(&train_a.profile, &train_b.profile, d[3] - d[2])?;
    let amp = pulsed_coincidence_amplitude(&train_a.amplitudes, &train_b.amplitudes, offsets, beta, beta_p, spec)?;
    let wave = pulsed_coincidence_waveform(train_a, train_b, delays, spec, dt)?;
    Ok((amp, wave))
}
