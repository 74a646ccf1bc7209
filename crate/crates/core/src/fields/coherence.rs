use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceShape {
    /// `exp(-τ²/2Tc²)`
    #[default]
    Gaussian,
    /// `exp(-|τ|/Tc)`
    Lorentzian,
}

/// Second-order coherence `γ(τ) = envelope(τ) · e^{iωτ}` of a stationary field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceModel {
    #[serde(default)]
    pub shape: CoherenceShape,
    pub tc: f64,
    #[serde(default)]
    pub omega: f64,
}

impl CoherenceModel {
    pub fn new(shape: CoherenceShape, tc: f64, omega: f64) -> Result<Self> {
        let m = CoherenceModel { shape, tc, omega };
        m.validate()?;
        Ok(m)
    }

    pub fn gaussian(tc: f64, omega: f64) -> Result<Self> {
        Self::new(CoherenceShape::Gaussian, tc, omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tc.is_finite() && self.tc > 0.0) {
            return Err(invalid("tc", format!("coherence time must be positive, got {}", self.tc)));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(invalid("omega", format!("carrier must be finite and >= 0, got {}", self.omega)));
        }
        Ok(())
    }

    /// Real, even envelope `|γ(τ)|`.
    pub fn envelope(&self, tau: f64) -> f64 {
        let x = tau / self.tc;
        match self.shape {
            CoherenceShape::Gaussian => (-0.5 * x * x).exp(),
            CoherenceShape::Lorentzian => (-x.abs()).exp(),
        }
    }

    pub fn gamma(&self, tau: f64) -> Complex64 {
        Complex64::from_polar(self.envelope(tau), self.omega * tau)
    }

    /// Lag beyond which the envelope is below `1e-17`.
    pub fn support(&self) -> f64 {
        match self.shape {
            CoherenceShape::Gaussian => 9.0 * self.tc,
            CoherenceShape::Lorentzian => 40.0 * self.tc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_at_tc() {
        let m = CoherenceModel::gaussian(2.0, 0.0).unwrap();
        assert!((m.envelope(2.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(m.gamma(0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CoherenceModel::gaussian(-1.0, 0.0).is_err());
        assert!(CoherenceModel::gaussian(1.0, -3.0).is_err());
        assert!(CoherenceModel::gaussian(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn decays_far_beyond_tc() {
        for shape in [CoherenceShape::Gaussian, CoherenceShape::Lorentzian] {
            let m = CoherenceModel::new(shape, 1.0, 3.0).unwrap();
            assert!(m.gamma(m.support()).norm() < 1e-17);
        }
    }

    proptest! {
        #[test]
        fn magnitude_bounded(tau in -50.0f64..50.0, tc in 0.01f64..10.0, omega in 0.0f64..100.0, lor in any::<bool>()) {
            let shape = if lor { CoherenceShape::Lorentzian } else { CoherenceShape::Gaussian };
            let m = CoherenceModel::new(shape, tc, omega).unwrap();
            prop_assert!(m.gamma(tau).norm() <= 1.0 + 1e-15);
            prop_assert!((m.gamma(-tau) - m.gamma(tau).conj()).norm() < 1e-12);
        }
    }
}
