//! Closed-form coincidence rates for each scenario.
//!
//! Every prediction is reported as `baseline + fringe_amplitude ·
//! cos(fringe_phase)`. Coherence arguments are complex and carry the
//! carrier, so `arg γ(τ) = ωτ` for a real envelope; the fringe phase is
//! read off the product of coherences rather than rebuilt from `ω`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioPrediction {
    pub baseline: f64,
    pub fringe_amplitude: f64,
    pub fringe_phase: f64,
    pub visibility: f64,
}

impl ScenarioPrediction {
    fn new(baseline: f64, amplitude: f64, phase: f64) -> Self {
        let visibility = if baseline > 0.0 { amplitude / baseline } else { 0.0 };
        ScenarioPrediction {
            baseline,
            fringe_amplitude: amplitude,
            fringe_phase: phase.rem_euclid(2.0 * PI),
            visibility,
        }
    }

    /// `baseline − 2·I10·I20·Re(p·e^{iΔφ})` in fringe form.
    fn dip(baseline: f64, weight: f64, p: Complex64, delta_phi: f64) -> Self {
        let p = p * Complex64::from_polar(1.0, delta_phi);
        ScenarioPrediction::new(baseline, weight * p.norm(), p.arg() + PI)
    }

    pub fn value(&self) -> f64 {
        self.baseline + self.fringe_amplitude * self.fringe_phase.cos()
    }
}

/// Two independent fields:
/// `I10²(1+λ1) + I20²(1+λ2) + 2I10I20[1 − |γ11γ22| cos(φ11 − φ22)]`, with
/// `γ11` at `τ − ΔT1` and `γ22` at `τ − ΔT2` (`ΔTj = Tj − Tj'`).
pub fn predict_uncorrelated(
    i10: f64,
    i20: f64,
    lambda1: f64,
    lambda2: f64,
    g11: Complex64,
    g22: Complex64,
) -> ScenarioPrediction {
    let base = i10 * i10 * (1.0 + lambda1) + i20 * i20 * (1.0 + lambda2) + 2.0 * i10 * i20;
    ScenarioPrediction::dip(base, 2.0 * i10 * i20, g11 * g22.conj(), 0.0)
}

/// Stellar field pair mixed with a split local oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AstroConfig {
    /// Stellar intensity, the same at both stations.
    pub intensity: f64,
    pub alpha1_sq: f64,
    pub alpha2_sq: f64,
    /// `φα2 − φα1`.
    pub delta_phi_alpha: f64,
    /// `γ(τ)` between the two stations.
    pub gamma: Complex64,
    /// `λ̄(τ)`; `|γ(τ)|²` for thermal light.
    pub lambda_bar: f64,
}

impl AstroConfig {
    pub fn thermal(intensity: f64, alpha1_sq: f64, alpha2_sq: f64, delta_phi_alpha: f64, gamma: Complex64) -> Self {
        AstroConfig { intensity, alpha1_sq, alpha2_sq, delta_phi_alpha, gamma, lambda_bar: gamma.norm_sqr() }
    }

    /// `ξ = 2|α1α2|√(IĪ) / (I|α2|² + Ī|α1|²)`.
    pub fn xi(&self) -> f64 {
        let i = self.intensity;
        let den = i * self.alpha2_sq + i * self.alpha1_sq;
        if den == 0.0 {
            return 0.0;
        }
        2.0 * (self.alpha1_sq * self.alpha2_sq).sqrt() * i / den
    }
}

/// `IĪ(1+λ̄) + |α1α2|² + (I|α2|² + Ī|α1|²)[1 + ξ|γ| cos(φγ − Δφα)]`.
///
/// The cross term is `⟨V*V̄⟩α1α2* + c.c.`, whose phase is `φγ − Δφα` for
/// `Δφα = φα2 − φα1`. With `matched`, the oscillators must equal the
/// stellar intensity and the result is `I²(4+|γ|²)[1 + 𝒱cos(φγ − Δφα)]`,
/// `𝒱 = 2|γ|/(4+|γ|²)`.
pub fn predict_astronomy(cfg: &AstroConfig, matched: bool) -> Result<ScenarioPrediction> {
    let i = cfg.intensity;
    let phase = cfg.gamma.arg() - cfg.delta_phi_alpha;
    if matched {
        let tol = 1e-9 * i.max(1.0);
        if (cfg.alpha1_sq - i).abs() > tol || (cfg.alpha2_sq - i).abs() > tol {
            return Err(invalid("alpha", "matched case needs |α1|² = |α2|² = I"));
        }
        let g2 = cfg.gamma.norm_sqr();
        let base = i * i * (4.0 + g2);
        let vis = 2.0 * cfg.gamma.norm() / (4.0 + g2);
        return Ok(ScenarioPrediction::new(base, base * vis, phase));
    }
    let mix = i * cfg.alpha2_sq + i * cfg.alpha1_sq;
    let base = i * i * (1.0 + cfg.lambda_bar) + cfg.alpha1_sq * cfg.alpha2_sq + mix;
    Ok(ScenarioPrediction::new(base, mix * cfg.xi() * cfg.gamma.norm(), phase))
}

/// Delay pairs far apart within each detector:
/// `I10² + I20² + 2I10I20[1 − Re(γ12(ΔT)γ12*(ΔT')e^{iΔφ})]`, independent of τ.
pub fn predict_scenario_i(i10: f64, i20: f64, g12_dt: Complex64, g12_dtp: Complex64, delta_phi: f64) -> ScenarioPrediction {
    let base = i10 * i10 + i20 * i20 + 2.0 * i10 * i20;
    ScenarioPrediction::dip(base, 2.0 * i10 * i20, g12_dt * g12_dtp.conj(), delta_phi)
}

/// Each field delayed similarly into both detectors:
/// `I10²(1+λ1) + I20²(1+λ2) + 2I10I20[1 − Re(γ11γ22* e^{iΔφ})]`, with `γ11`
/// at `ΔT1 + τ`, `γ22` at `ΔT2 + τ` (`ΔTj = Tj' − Tj`).
pub fn predict_scenario_ii(
    i10: f64,
    i20: f64,
    lambda1: f64,
    lambda2: f64,
    g11: Complex64,
    g22: Complex64,
    delta_phi: f64,
) -> ScenarioPrediction {
    let base = i10 * i10 * (1.0 + lambda1) + i20 * i20 * (1.0 + lambda2) + 2.0 * i10 * i20;
    ScenarioPrediction::dip(base, 2.0 * i10 * i20, g11 * g22.conj(), delta_phi)
}

/// Crossed delays (Franson-like):
/// `I10² + I20² + 2I10I20[1 − Re(γ12(ΔT̄1'+τ)γ21*(τ−ΔT̄2') e^{iΔφ})]`.
///
/// `cross_lambda` adds the cross-intensity correlations
/// `I10I20(λ12 + λ21)` between the two nearly coincident field pairs. They
/// vanish for independent inputs but not for a common-origin thermal field,
/// where `λ12 = |γ12(ΔT̄1'+τ)|²` and `λ21 = |γ21(τ−ΔT̄2')|²`; pass `(0, 0)`
/// for the bare expression.
pub fn predict_scenario_iii(
    i10: f64,
    i20: f64,
    g12: Complex64,
    g21: Complex64,
    delta_phi: f64,
    cross_lambda: (f64, f64),
) -> ScenarioPrediction {
    let base = i10 * i10 + i20 * i20 + 2.0 * i10 * i20 + i10 * i20 * (cross_lambda.0 + cross_lambda.1);
    ScenarioPrediction::dip(base, 2.0 * i10 * i20, g12 * g21.conj(), delta_phi)
}

/// Slow detectors: `I10² + I20² + 2I10I20 − I10I20[γ12(ΔT)γ12*(ΔT') + c.c.]`.
pub fn predict_scenario_iv(i10: f64, i20: f64, g12_dt: Complex64, g12_dtp: Complex64) -> ScenarioPrediction {
    predict_scenario_i(i10, i20, g12_dt, g12_dtp, 0.0)
}

/// Slot-averaged fourth-order amplitude moments of two pulse trains at the
/// offsets `N1, N2, N1', N2'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeMoments {
    /// `⟨|A_{j+N1}|²|A_{j+N1'}|²⟩`
    pub m11p: f64,
    /// `⟨|B_{j+N2}|²|B_{j+N2'}|²⟩`
    pub m22p: f64,
    /// `⟨|A_{j+N1}|²|B_{j+N2'}|²⟩`
    pub m12p: f64,
    /// `⟨|A_{j+N1'}|²|B_{j+N2}|²⟩`
    pub m1p2: f64,
    /// `⟨A*_{j+N1} B_{j+N2} B*_{j+N2'} A_{j+N1'}⟩`
    pub m1221: Complex64,
    /// `⟨A*_{j+N1} B_{j+N2} A*_{j+N1'} B_{j+N2'}⟩`
    pub m1212: Complex64,
}

impl AmplitudeMoments {
    /// Independent thermal trains of mean pulse energies `a`, `b` with a
    /// random relative phase.
    pub fn thermal(a: f64, b: f64, same_a_slot: bool, same_b_slot: bool) -> Self {
        let bunch = |same: bool| if same { 2.0 } else { 1.0 };
        let paired = if same_a_slot && same_b_slot { a * b } else { 0.0 };
        AmplitudeMoments {
            m11p: bunch(same_a_slot) * a * a,
            m22p: bunch(same_b_slot) * b * b,
            m12p: a * b,
            m1p2: a * b,
            m1221: Complex64::new(paired, 0.0),
            m1212: Complex64::new(0.0, 0.0),
        }
    }

    /// Constant amplitudes `alpha`, `beta` in every slot; `random_phase`
    /// averages the relative phase of the two trains.
    pub fn coherent(alpha: Complex64, beta: Complex64, random_phase: bool) -> Self {
        let (a, b) = (alpha.norm_sqr(), beta.norm_sqr());
        let m1212 = if random_phase { Complex64::new(0.0, 0.0) } else { (alpha.conj() * beta).powi(2) };
        AmplitudeMoments { m11p: a * a, m22p: b * b, m12p: a * b, m1p2: a * b, m1221: Complex64::new(a * b, 0.0), m1212 }
    }
}

/// Pulsed coincidence rate in units of `Rp·Q²`: the four intensity moments
/// minus `[ββ'*·m1221 + c.c.]` and `[ββ'·m1212 + c.c.]`.
pub fn predict_pulsed(m: &AmplitudeMoments, beta: Complex64, beta_prime: Complex64) -> ScenarioPrediction {
    let base = m.m11p + m.m22p + m.m12p + m.m1p2;
    let x = beta * beta_prime.conj() * m.m1221 + beta * beta_prime * m.m1212;
    ScenarioPrediction::new(base, 2.0 * x.norm(), x.arg() + PI)
}
