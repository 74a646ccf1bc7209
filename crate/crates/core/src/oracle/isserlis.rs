//! Gaussian moment factorization.

use num_complex::Complex64;

/// Second moments needed to factor `⟨a* b c* d⟩` for jointly Gaussian,
/// zero-mean fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairMoments {
    /// `⟨a* b⟩`
    pub ab: Complex64,
    /// `⟨c* d⟩`
    pub cd: Complex64,
    /// `⟨a* d⟩`
    pub ad: Complex64,
    /// `⟨c* b⟩`
    pub cb: Complex64,
    /// `⟨a* c*⟩`; zero for phase-random fields.
    pub ac_anomalous: Complex64,
    /// `⟨b d⟩`; zero for phase-random fields.
    pub bd_anomalous: Complex64,
}

/// `⟨a* b c* d⟩ = ⟨a*b⟩⟨c*d⟩ + ⟨a*d⟩⟨c*b⟩ + ⟨a*c*⟩⟨bd⟩`.
pub fn isserlis_fourth_moment(p: &PairMoments) -> Complex64 {
    p.ab * p.cd + p.ad * p.cb + p.ac_anomalous * p.bd_anomalous
}

/// The interference average `⟨V1* V2 V2'* V1'⟩` from normalized coherences:
/// `g12 = ⟨V1*V2⟩/√(I1I2)`, `g21p = ⟨V2'*V1'⟩/√(I1I2)`,
/// `g11 = ⟨V1*V1'⟩/I1`, `g22 = ⟨V2'*V2⟩/I2` (the conjugate-pair ordering
/// of the factorization).
pub fn interference_moment(g11: Complex64, g22: Complex64, g12: Complex64, g21p: Complex64, i1: f64, i2: f64) -> Complex64 {
    let s = (i1 * i2).sqrt();
    isserlis_fourth_moment(&PairMoments {
        ab: g12 * s,
        cd: g21p * s,
        ad: g11 * i1,
        cb: g22 * i2,
        ..Default::default()
    })
}

/// `⟨|X|²|Y|²⟩` for circular Gaussian `X`, `Y` with `⟨X*Y⟩ = γ√(IxIy)`.
pub fn intensity_correlation(ix: f64, iy: f64, gamma: Complex64) -> f64 {
    ix * iy * (1.0 + gamma.norm_sqr())
}
