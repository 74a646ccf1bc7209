use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    /// `k(t) = Q/T_R` on `[0, T_R)`.
    #[default]
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub resolve_time: f64,
    #[serde(default)]
    pub response: Response,
    /// Total charge `Q = ∫k(t)dt` released per unit pulse energy.
    pub charge: f64,
}

impl DetectorSpec {
    pub fn new(resolve_time: f64, charge: f64) -> Result<Self> {
        let d = DetectorSpec { resolve_time, response: Response::Rectangular, charge };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolve_time.is_finite() && self.resolve_time > 0.0) {
            return Err(invalid("resolve_time", format!("must be positive, got {}", self.resolve_time)));
        }
        if !(self.charge.is_finite() && self.charge > 0.0) {
            return Err(invalid("charge", format!("must be positive, got {}", self.charge)));
        }
        Ok(())
    }

    /// Photocurrent `i = k * I` sampled on the intensity grid.
    pub fn photocurrent(&self, intensity: &[f64], dt: f64) -> Vec<f64> {
        let w = ((self.resolve_time / dt).round() as usize).max(1);
        let scale = self.charge / (w as f64);
        let mut prefix = Vec::with_capacity(intensity.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for x in intensity {
            acc += x;
            prefix.push(acc);
        }
        (0..intensity.len()).map(|n| (prefix[n + 1] - prefix[(n + 1).saturating_sub(w)]) * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(DetectorSpec::new(0.0, 1.0).is_err());
        assert!(DetectorSpec::new(1.0, -1.0).is_err());
        assert!(DetectorSpec::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn photocurrent_preserves_charge() {
        let d = DetectorSpec::new(1.0, 2.5).unwrap();
        let mut i = vec![0.0; 100];
        i[20] = 3.0;
        i[21] = 1.0;
        let c = d.photocurrent(&i, 0.1);
        let total: f64 = c.iter().sum();
        assert!((total - 2.5 * 4.0).abs() < 1e-12);
        assert_eq!(c[19], 0.0);
        assert!(c[29] == 1.0 && c[30] == 0.25 && c[31] == 0.0);
    }
}
