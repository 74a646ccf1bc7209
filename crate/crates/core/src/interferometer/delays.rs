use serde::{Deserialize, Serialize};

/// The four arm delays. Every difference used by the scenario formulas is
/// derived on demand, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DelayConfig {
    pub t1: f64,
    pub t2: f64,
    pub t1p: f64,
    pub t2p: f64,
}

impl DelayConfig {
    pub fn new(t1: f64, t2: f64, t1p: f64, t2p: f64) -> Self {
        DelayConfig { t1, t2, t1p, t2p }
    }

    /// ΔT = T2 - T1
    pub fn delta(&self) -> f64 {
        self.t2 - self.t1
    }

    /// ΔT' = T2' - T1'
    pub fn delta_prime(&self) -> f64 {
        self.t2p - self.t1p
    }

    /// ΔT1 = T1' - T1 (same-field delay, unprimed to primed)
    pub fn delta1(&self) -> f64 {
        self.t1p - self.t1
    }

    /// ΔT2 = T2' - T2
    pub fn delta2(&self) -> f64 {
        self.t2p - self.t2
    }

    /// T1 - T1', the sign used for independent sources.
    pub fn delta1_uncorrelated(&self) -> f64 {
        self.t1 - self.t1p
    }

    /// T2 - T2'
    pub fn delta2_uncorrelated(&self) -> f64 {
        self.t2 - self.t2p
    }

    /// ΔT̄1' = T2' - T1
    pub fn delta_bar1p(&self) -> f64 {
        self.t2p - self.t1
    }

    /// ΔT̄2' = T2 - T1'
    pub fn delta_bar2p(&self) -> f64 {
        self.t2 - self.t1p
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.t1, self.t2, self.t1p, self.t2p]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_differences() {
        let d = DelayConfig::new(1.0, 2.5, 4.0, 7.0);
        assert_eq!(d.delta(), 1.5);
        assert_eq!(d.delta_prime(), 3.0);
        assert_eq!(d.delta1(), 3.0);
        assert_eq!(d.delta2(), 4.5);
        assert_eq!(d.delta1_uncorrelated(), -3.0);
        assert_eq!(d.delta2_uncorrelated(), -4.5);
        assert_eq!(d.delta_bar1p(), 6.0);
        assert_eq!(d.delta_bar2p(), -1.5);
        // scenario fringe arguments are consistent with each other
        assert_eq!(d.delta() - d.delta_prime(), d.delta1() - d.delta2());
    }
}
