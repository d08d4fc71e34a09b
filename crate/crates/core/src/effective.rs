//! Jacobi–Anger / rotating-wave reduction of the driven pair onto an
//! effective three-level system: resonance conditions, Bessel-weighted
//! couplings, dressed states, the effective Hamiltonians and the `|22⟩`
//! leakage ladder of the two-qubit gate.
//!
//! Phase conventions (derived from the stationary Jacobi–Anger terms of the
//! pair Hamiltonian and checked against the full model in tests):
//! with tone phases `p₁(t)`, `p₂(t)` the couplings to the auxiliary state are
//! `⟨a|H|0⟩ = g₁ e^{iΔt} e^{-i(p₁+p₂)}` and `⟨a|H|1⟩ = −g₂ e^{iΔt} e^{ip₁}`,
//! so `φ = 2p₁ + p₂ + π` and `φ₂ = p₁ + π`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{angular, bessel_jn, find_root_bracketed, CMatrix, C64};

/// Tone base frequencies meeting the two resonance conditions, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceAssignment {
    pub tone1: f64,
    pub tone2: f64,
    pub detuning: f64,
}

impl ResonanceAssignment {
    /// `|Δ| ≤ 0.1·min(ω_ε)`: the separation the rotating-wave reduction relies on.
    pub fn is_well_separated(&self) -> bool {
        self.detuning.abs() <= 0.1 * self.tone1.min(self.tone2)
    }
}

/// Solves `Δ_pair + α_other − (ω_ε1 + ω_ε2) = Δ` and
/// `−(Δ_pair − α_mod − ω_ε1) = Δ`.
pub fn solve_resonance(
    pair_difference: f64,
    alpha_mod: f64,
    alpha_other: f64,
    detuning: f64,
) -> Result<ResonanceAssignment> {
    let inputs = [pair_difference, alpha_mod, alpha_other, detuning];
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("resonance inputs must be finite".into()));
    }
    let tone1 = pair_difference - alpha_mod + detuning;
    let tone2 = alpha_mod + alpha_other - 2.0 * detuning;
    if tone1 <= 0.0 || tone2 <= 0.0 {
        return Err(Error::InfeasibleResonance(format!(
            "tone frequencies ({tone1}, {tone2}) MHz must be positive"
        )));
    }
    Ok(ResonanceAssignment { tone1, tone2, detuning })
}

/// Effective couplings of the single-qubit role in MHz:
/// `g₁ = √2 g_c J₁(β₁)J₁(β₂)` (two-tone channel to `|0⟩_L`) and
/// `g₂ = √2 g_c J₁(β₁)J₀(β₂)` (single-tone channel to `|1⟩_L`).
pub fn effective_couplings(coupling: f64, beta1: f64, beta2: f64) -> Result<(f64, f64)> {
    if beta1 < 0.0 || beta2 < 0.0 {
        return Err(Error::InvalidInput("modulation amplitudes must be >= 0".into()));
    }
    let base = std::f64::consts::SQRT_2 * coupling * bessel_jn(1, beta1)?;
    Ok((base * bessel_jn(1, beta2)?, base * bessel_jn(0, beta2)?))
}

/// Effective couplings of the two-qubit role, ordered as (`|02⟩₂₃` channel,
/// `|20⟩₂₃` channel): `g₃ = √2 g J₁(β₃)J₀(β₄)`, `g₄ = √2 g J₁(β₃)J₁(β₄)`.
pub fn effective_couplings_pair(coupling: f64, beta3: f64, beta4: f64) -> Result<(f64, f64)> {
    let (two_tone, single_tone) = effective_couplings(coupling, beta3, beta4)?;
    Ok((single_tone, two_tone))
}

/// Upper end of the β₂ bracket (first zero of J₀).
const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Modulation amplitude β₂ giving mixing angle `θ`, i.e.
/// `J₀(β₂)/J₁(β₂) = tan(θ/2)`. The ratio is independent of β₁.
pub fn solve_beta_for_theta(theta: f64, _beta1: f64) -> Result<f64> {
    use std::f64::consts::PI;
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::DesignInfeasible(format!("mixing angle {theta} outside (0, π]")));
    }
    if (theta - PI).abs() < 1e-12 {
        return Ok(0.0);
    }
    let target = (0.5 * theta).tan();
    let f = |b: f64| {
        let j0 = bessel_jn(0, b).unwrap_or(f64::NAN);
        let j1 = bessel_jn(1, b).unwrap_or(f64::NAN);
        j0 - target * j1
    };
    find_root_bracketed(f, 1e-9, J0_FIRST_ZERO, 1e-15).map_err(|_| {
        Error::DesignInfeasible(format!("no β₂ in (0, 2.4) reaches θ = {theta}"))
    })
}

/// Mixing angle `θ = 2 atan(g₂/g₁)`, `π` when the first channel is closed.
pub fn mixing_angle(g1: f64, g2: f64) -> f64 {
    if g1 == 0.0 {
        std::f64::consts::PI
    } else {
        2.0 * (g2 / g1).atan()
    }
}

/// Which physical subspace the three-level model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// `{|0⟩_L, |1⟩_L, |a⟩_L}` of one logical qubit.
    SingleQubit,
    /// `{|02⟩₂₃, |20⟩₂₃, |11⟩₂₃}` of the control-phase gate.
    ControlPhase,
}

/// Effective three-level model. Frequencies in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveThreeLevel {
    pub role: Role,
    /// Coupling of the first logical state to the auxiliary state.
    pub g1: f64,
    /// Coupling of the second logical state to the auxiliary state.
    pub g2: f64,
    pub theta: f64,
    pub phi: f64,
    pub detuning: f64,
    /// Constant chirp rate `dφ₂/dt / 2π`, MHz.
    pub chirp: f64,
    /// Coupling phase at t = 0.
    pub phase0: f64,
    /// Drift difference δ_d = δ₁ − δ₂, MHz.
    pub drift_difference: f64,
    /// Relative coupling deviation ε_g.
    pub coupling_error: f64,
}

impl EffectiveThreeLevel {
    pub fn new(role: Role, g1: f64, g2: f64, phi: f64, detuning: f64, chirp: f64) -> Self {
        Self {
            role,
            g1,
            g2,
            theta: mixing_angle(g1, g2),
            phi,
            detuning,
            chirp,
            phase0: 0.0,
            drift_difference: 0.0,
            coupling_error: 0.0,
        }
    }

    /// `g = √(g₁² + g₂²)`.
    pub fn coupling(&self) -> f64 {
        self.g1.hypot(self.g2)
    }

    /// Coupling phase `φ₂(t) = φ₂₀ + 2πηt`.
    pub fn coupling_phase(&self, t: f64) -> f64 {
        self.phase0 + angular(self.chirp) * t
    }

    pub fn frame(&self) -> DressedFrame {
        match self.role {
            Role::SingleQubit => dressed_frame(self.theta, self.phi),
            Role::ControlPhase => DressedFrame::pair(self.theta, self.phi),
        }
    }

    /// Generalised Rabi rate `√(g² + (Δ+η)²/4)` in rad/ns.
    pub fn precession_rate(&self) -> f64 {
        let g = angular(self.coupling() * (1.0 + self.coupling_error));
        let d = angular(self.detuning + self.chirp);
        (g * g + 0.25 * d * d).sqrt()
    }

    /// `ξ(t)` and `χ` of the dressed-state evolution.
    pub fn dressed_angles(&self, t: f64) -> (f64, f64) {
        let g = angular(self.coupling() * (1.0 + self.coupling_error));
        let d = angular(self.detuning + self.chirp);
        (self.precession_rate() * t, (2.0 * g).atan2(d))
    }
}

/// Unitary whose columns are `|ψ₊⟩, |ψ₋⟩, |a⟩` expressed in the logical
/// basis `{first, second, auxiliary}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedFrame {
    pub theta: f64,
    pub phi: f64,
    pub to_logical: CMatrix,
}

impl DressedFrame {
    /// Two-qubit convention: `|ψ₊⟩ = cos(ϑ/2)|02⟩ + sin(ϑ/2)e^{−iφ}|20⟩`.
    pub fn pair(theta: f64, phi: f64) -> Self {
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let e = C64::from_polar(1.0, -phi);
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = C64::new(c, 0.0);
        m[(1, 0)] = s * e;
        m[(0, 1)] = C64::new(s, 0.0);
        m[(1, 1)] = -c * e;
        m[(2, 2)] = C64::new(1.0, 0.0);
        Self { theta, phi, to_logical: m }
    }

    pub fn bright(&self) -> [C64; 2] {
        [self.to_logical[(0, 0)], self.to_logical[(1, 0)]]
    }

    pub fn dark(&self) -> [C64; 2] {
        [self.to_logical[(0, 1)], self.to_logical[(1, 1)]]
    }

    /// Re-expresses a logical-basis operator in the dressed basis.
    pub fn to_dressed(&self, logical: &CMatrix) -> CMatrix {
        self.to_logical.adjoint() * logical * &self.to_logical
    }
}

/// Single-qubit convention: `|ψ₊⟩ = cos(θ/2)e^{iφ}|0⟩_L + sin(θ/2)|1⟩_L`,
/// `|ψ₋⟩ = sin(θ/2)e^{iφ}|0⟩_L − cos(θ/2)|1⟩_L`.
pub fn dressed_frame(theta: f64, phi: f64) -> DressedFrame {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let e = C64::from_polar(1.0, phi);
    let mut m = CMatrix::zeros(3, 3);
    m[(0, 0)] = c * e;
    m[(1, 0)] = C64::new(s, 0.0);
    m[(0, 1)] = s * e;
    m[(1, 1)] = C64::new(-c, 0.0);
    m[(2, 2)] = C64::new(1.0, 0.0);
    DressedFrame { theta, phi, to_logical: m }
}

/// Effective Hamiltonian on `{|ψ₊⟩, |ψ₋⟩, |a⟩}` in rad/ns:
/// `−Δ/2 (|ψ₊⟩⟨ψ₊| − |a⟩⟨a|) + g(1+ε_g)(e^{−iφ₂(t)}|ψ₊⟩⟨a| + h.c.)`
/// plus the drift-difference term `δ_d(|second⟩⟨second| − |first⟩⟨first|)`
/// rotated into the dressed basis.
pub fn effective_hamiltonian_1q(model: &EffectiveThreeLevel, t: f64) -> CMatrix {
    let mut h = CMatrix::zeros(3, 3);
    let half = 0.5 * angular(model.detuning);
    h[(0, 0)] = C64::new(-half, 0.0);
    h[(2, 2)] = C64::new(half, 0.0);
    let g = angular(model.coupling() * (1.0 + model.coupling_error));
    let c = C64::from_polar(g, -model.coupling_phase(t));
    h[(0, 2)] = c;
    h[(2, 0)] = c.conj();
    if model.drift_difference != 0.0 {
        h += drift_error_term(model);
    }
    h
}

/// Drift-difference error in the dressed basis. Level shifts are
/// `first → −δ_d`, `auxiliary → 0`, `second → +δ_d`.
pub fn drift_error_term(model: &EffectiveThreeLevel) -> CMatrix {
    let d = angular(model.drift_difference);
    let mut logical = CMatrix::zeros(3, 3);
    logical[(0, 0)] = C64::new(-d, 0.0);
    logical[(1, 1)] = C64::new(d, 0.0);
    model.frame().to_dressed(&logical)
}

/// Rotating-frame generator of the `|22⟩₂₃` leakage ladder on
/// `{|13⟩, |22⟩, |31⟩}` (rad/ns): couplings `√3 g₃` (`|13⟩↔|22⟩`, carrying
/// the chirped phase) and `√3 g₄` (`|31⟩↔|22⟩`), ladder splitting
/// `(Δ′ + α_mod − α_other)`.
pub fn leakage_hamiltonian_2q(
    model: &EffectiveThreeLevel,
    alpha_mod: f64,
    alpha_other: f64,
    t: f64,
) -> Result<CMatrix> {
    if model.role != Role::ControlPhase {
        return Err(Error::Unsupported("leakage ladder needs a control-phase model".into()));
    }
    if model.g2 != 0.0 {
        return Err(Error::Unsupported(
            "leakage ladder is only modelled with the two-tone channel closed (β₄ = 0)".into(),
        ));
    }
    let split = 0.5 * angular(ladder_detuning(model, alpha_mod, alpha_other));
    let mut h = CMatrix::zeros(3, 3);
    h[(0, 0)] = C64::new(-split, 0.0);
    h[(1, 1)] = C64::new(split, 0.0);
    let g = 3f64.sqrt() * angular(model.g1 * (1.0 + model.coupling_error));
    let c = C64::from_polar(g, -model.coupling_phase(t));
    h[(0, 1)] = c;
    h[(1, 0)] = c.conj();
    Ok(h)
}

/// `Δ′ + α_mod − α_other` in MHz (without chirp).
pub fn ladder_detuning(model: &EffectiveThreeLevel, alpha_mod: f64, alpha_other: f64) -> f64 {
    model.detuning + alpha_mod - alpha_other
}

/// `√(3g′² + ((Δ′ + α_mod − α_other + η)/2)²)` in rad/ns.
pub fn leakage_precession_rate(model: &EffectiveThreeLevel, alpha_mod: f64, alpha_other: f64) -> f64 {
    let g = angular(model.g1 * (1.0 + model.coupling_error));
    let d = angular(ladder_detuning(model, alpha_mod, alpha_other) + model.chirp);
    (3.0 * g * g + 0.25 * d * d).sqrt()
}
