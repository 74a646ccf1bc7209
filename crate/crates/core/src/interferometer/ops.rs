use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::trace::same_dt;
use crate::fields::FieldTrace;

/// `y(t) = x(t + T)`: the envelope moves by the nearest whole number of
/// samples and picks up the exact carrier phase `e^{iωT}`.
pub fn delay(x: &FieldTrace, t: f64) -> Result<FieldTrace> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("delay {t}")));
    }
    let k = (t / x.dt).round();
    if k.abs() >= x.len() as f64 {
        return Err(Error::OutOfRange(format!(
            "delay {t} ({k} samples) exceeds trace length {}",
            x.len()
        )));
    }
    let phase = Complex64::from_polar(1.0, x.carrier * t);
    let mut y = x.scaled(phase);
    y.offset = x.offset - k as i64;
    Ok(y)
}

fn check_pair(a: &FieldTrace, b: &FieldTrace) -> Result<()> {
    if !same_dt(a.dt, b.dt) {
        return Err(Error::GridMismatch(format!("dt {} vs {}", a.dt, b.dt)));
    }
    if a.offset != b.offset || a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "windows [{}, {}) vs [{}, {})",
            a.offset,
            a.end_index(),
            b.offset,
            b.end_index()
        )));
    }
    if a.carrier != b.carrier {
        return Err(Error::GridMismatch(format!("carrier {} vs {}", a.carrier, b.carrier)));
    }
    Ok(())
}

/// Lossless 50:50 beam splitter: `((a+b)/√2, (a-b)/√2)`.
pub fn beam_split(a: &FieldTrace, b: &FieldTrace) -> Result<(FieldTrace, FieldTrace)> {
    check_pair(a, b)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (plus, minus) = a.samples.iter().zip(&b.samples).map(|(x, y)| ((x + y) * h, (x - y) * h)).unzip();
    let nominal = 0.5 * (a.mean_intensity_nominal + b.mean_intensity_nominal);
    let meta = FieldTrace { mean_intensity_nominal: nominal, ..a.clone_meta() };
    Ok((FieldTrace { samples: plus, ..meta.clone() }, FieldTrace { samples: minus, ..meta }))
}

/// Crops traces to the time window they all cover.
pub fn align(traces: &[&FieldTrace]) -> Result<Vec<FieldTrace>> {
    let first = traces.first().ok_or_else(|| Error::GridMismatch("nothing to align".into()))?;
    if let Some(t) = traces.iter().find(|t| !same_dt(t.dt, first.dt)) {
        return Err(Error::GridMismatch(format!("dt {} vs {}", t.dt, first.dt)));
    }
    let lo = traces.iter().map(|t| t.offset).max().unwrap();
    let hi = traces.iter().map(|t| t.end_index()).min().unwrap();
    if hi <= lo {
        return Err(Error::OutOfRange("traces share no common time window".into()));
    }
    traces.iter().map(|t| t.crop(lo, hi)).collect()
}
