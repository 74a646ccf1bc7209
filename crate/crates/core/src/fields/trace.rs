use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Sampled complex baseband envelope of one optical field.
///
/// Sample `n` sits at time `(offset + n) · dt`. Delays move `offset`, so
/// traces that went through different delays can be re-aligned on their
/// common time window without resampling.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrace {
    pub samples: Vec<Complex64>,
    pub dt: f64,
    /// Angular carrier frequency; a delay `T` multiplies the envelope by `e^{iωT}`.
    pub carrier: f64,
    pub mean_intensity_nominal: f64,
    pub offset: i64,
}

impl FieldTrace {
    pub fn new(samples: Vec<Complex64>, dt: f64, carrier: f64, mean_intensity_nominal: f64) -> Result<Self> {
        let t = FieldTrace { samples, dt, carrier, mean_intensity_nominal, offset: 0 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.samples.is_empty() {
            return Err(invalid("samples", "trace is empty"));
        }
        if !(self.mean_intensity_nominal >= 0.0) {
            return Err(invalid("mean_intensity_nominal", "must be >= 0"));
        }
        if let Some(i) = self.samples.iter().position(|s| !(s.re.is_finite() && s.im.is_finite())) {
            return Err(Error::NonFinite(format!("sample {i} of trace")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn start_time(&self) -> f64 {
        self.offset as f64 * self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        (self.offset + n as i64) as f64 * self.dt
    }

    /// One-past-the-end sample index on the absolute grid.
    pub fn end_index(&self) -> i64 {
        self.offset + self.samples.len() as i64
    }

    pub fn mean_intensity(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    pub fn same_grid(&self, other: &FieldTrace) -> bool {
        same_dt(self.dt, other.dt) && self.offset == other.offset && self.len() == other.len()
    }

    /// Copy of the samples whose absolute indices fall in `[lo, hi)`.
    pub fn crop(&self, lo: i64, hi: i64) -> Result<FieldTrace> {
        if lo < self.offset || hi > self.end_index() || lo >= hi {
            return Err(Error::OutOfRange(format!(
                "crop [{lo}, {hi}) outside trace [{}, {})",
                self.offset,
                self.end_index()
            )));
        }
        let a = (lo - self.offset) as usize;
        let b = (hi - self.offset) as usize;
        Ok(FieldTrace { samples: self.samples[a..b].to_vec(), offset: lo, ..self.clone_meta() })
    }

    pub(crate) fn clone_meta(&self) -> FieldTrace {
        FieldTrace {
            samples: Vec::new(),
            dt: self.dt,
            carrier: self.carrier,
            mean_intensity_nominal: self.mean_intensity_nominal,
            offset: self.offset,
        }
    }

    /// Sample-wise sum of two fields on the same grid (no beam splitter).
    pub fn superpose(&self, other: &FieldTrace) -> Result<FieldTrace> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("superposed traces must share dt, offset and length".into()));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(FieldTrace {
            samples,
            mean_intensity_nominal: self.mean_intensity_nominal + other.mean_intensity_nominal,
            ..self.clone_meta()
        })
    }

    pub fn scaled(&self, factor: Complex64) -> FieldTrace {
        FieldTrace {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            mean_intensity_nominal: self.mean_intensity_nominal * factor.norm_sqr(),
            ..self.clone_meta()
        }
    }

    /// Writes `t re im` columns behind a `#` header.
    pub fn write_columns(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(out, "# foil trace v1").map_err(io)?;
        writeln!(
            out,
            "# dt: {:e} carrier: {:e} nominal_intensity: {:e}",
            self.dt, self.carrier, self.mean_intensity_nominal
        )
        .map_err(io)?;
        writeln!(out, "# columns: t re im").map_err(io)?;
        for (n, s) in self.samples.iter().enumerate() {
            writeln!(out, "{:e} {:e} {:e}", self.time(n), s.re, s.im).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

pub(crate) fn same_dt(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Converts a lag to a whole number of samples, rejecting lags off the grid.
pub fn lag_samples(lag: f64, dt: f64) -> Result<i64> {
    let k = (lag / dt).round();
    if !lag.is_finite() || (lag / dt - k).abs() > 1e-6 {
        return Err(Error::OffGrid { lag, dt });
    }
    Ok(k as i64)
}
