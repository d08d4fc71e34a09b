//! Gate synthesis: the time-optimal (TOC) solver, single-qubit schedules,
//! the two-segment conventional baseline and the control-phase design with
//! simultaneous leakage cyclicity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::device::{DriveTone, DrivenPair};
use crate::effective::{
    effective_couplings, effective_couplings_pair, mixing_angle, solve_beta_for_theta, solve_resonance,
    EffectiveThreeLevel, ResonanceAssignment, Role,
};
use crate::error::{Error, Result};
use crate::numerics::{angular, basis_vector, bessel_jn, find_root_bracketed, CMatrix, CVector, C64};

/// Location of the maximum of J₁.
pub const J1_PEAK: f64 = 1.841_183_781_340_659;

/// Target of a single-qubit holonomic gate `U(γ, θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleQubitGateSpec {
    pub gamma: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SingleQubitGateSpec {
    pub fn new(gamma: f64, theta: f64, phi: f64) -> Result<Self> {
        let spec = Self { gamma, theta, phi };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rx(angle: f64) -> Self {
        Self { gamma: angle, theta: 0.5 * PI, phi: PI }
    }

    pub fn ry(angle: f64) -> Self {
        Self { gamma: angle, theta: 0.5 * PI, phi: 0.5 * PI }
    }

    pub fn rz(angle: f64) -> Self {
        Self { gamma: angle, theta: PI, phi: PI }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 2.0 * PI) {
            return Err(Error::InvalidInput(format!("γ = {} outside (0, 2π)", self.gamma)));
        }
        if !(0.0..=PI).contains(&self.theta) {
            return Err(Error::InvalidInput(format!("θ = {} outside [0, π]", self.theta)));
        }
        if !(0.0..2.0 * PI).contains(&self.phi) {
            return Err(Error::InvalidInput(format!("φ = {} outside [0, 2π)", self.phi)));
        }
        Ok(())
    }
}

/// `cos(γ/2) + i sin(γ/2) [[cos θ, sin θ e^{iφ}], [sin θ e^{−iφ}, −cos θ]]`.
pub fn ideal_unitary_1q(spec: &SingleQubitGateSpec) -> CMatrix {
    let (c, s) = ((0.5 * spec.gamma).cos(), (0.5 * spec.gamma).sin());
    let i = C64::new(0.0, 1.0);
    let (ct, st) = (spec.theta.cos(), spec.theta.sin());
    CMatrix::from_row_slice(
        2,
        2,
        &[
            c + i * s * ct,
            i * s * st * C64::from_polar(1.0, spec.phi),
            i * s * st * C64::from_polar(1.0, -spec.phi),
            c - i * s * ct,
        ],
    )
}

/// `diag(1, 1, 1, e^{iγ})` on `{|00⟩, |01⟩, |10⟩, |11⟩}_L`.
pub fn ideal_unitary_2q(gamma: f64) -> CMatrix {
    let mut u = CMatrix::identity(4, 4);
    u[(3, 3)] = C64::from_polar(1.0, gamma);
    u
}

/// Square-pulse time-optimal solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TocSolution {
    /// Chirp rate η in MHz.
    pub eta: f64,
    /// Gate time in ns.
    pub tau: f64,
    /// Accumulated precession angle ξ(τ), radians.
    pub xi_total: f64,
}

/// Full-loop time `τ₀ = π/(2πg)` in ns.
pub fn loop_time(g: f64) -> f64 {
    PI / angular(g)
}

/// Solves `η τ = 2(π − γ)` and `τ √(g² + (Δ + η)²/4) = π` (angular units).
///
/// Eliminating η leaves `(G² + D²/4)τ² + (Dc/2)τ + c²/4 − π² = 0` with
/// `c = 2(π − γ)`. For γ in (0, 2π) the constant term is negative so there is
/// exactly one positive root.
pub fn solve_toc(gamma: f64, detuning: f64, g: f64) -> Result<TocSolution> {
    if !(gamma > 0.0 && gamma < 2.0 * PI) {
        return Err(Error::DesignInfeasible(format!("γ = {gamma} outside (0, 2π)")));
    }
    if !(g > 0.0 && g.is_finite() && detuning.is_finite()) {
        return Err(Error::DesignInfeasible(format!("need g > 0 and finite Δ, got g = {g}, Δ = {detuning}")));
    }
    let (gg, d) = (angular(g), angular(detuning));
    let c = 2.0 * (PI - gamma);
    let a = gg * gg + 0.25 * d * d;
    let b = 0.5 * d * c;
    let k = 0.25 * c * c - PI * PI;
    let disc = b * b - 4.0 * a * k;
    if disc < 0.0 {
        return Err(Error::DesignInfeasible("TOC quadratic has no real root".into()));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let tau = if b >= 0.0 { k / q } else { q / a };
    if !(tau > 0.0) {
        return Err(Error::DesignInfeasible(format!("no positive gate time (τ = {tau})")));
    }
    let eta = c / tau;
    let xi_total = tau * (gg * gg + 0.25 * (d + eta).powi(2)).sqrt();
    Ok(TocSolution { eta: eta / angular(1.0), tau, xi_total })
}

/// `τ₀ √(1 − (1 + Δ/η)²(1 − γ/π)²)`. At η = 0 (γ = π) the product tends to
/// `Δτ/2π` (angular), and the implicit relation resolves to `τ₀/√(1 + (Δτ₀/2π)²)`.
pub fn closed_form_time(gamma: f64, detuning: f64, eta: f64, g: f64) -> f64 {
    let tau0 = loop_time(g);
    if eta == 0.0 {
        let x = angular(detuning) * tau0 / (2.0 * PI);
        return tau0 / (1.0 + x * x).sqrt();
    }
    let x = (1.0 + detuning / eta) * (1.0 - gamma / PI);
    tau0 * (1.0 - x * x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Toc,
    Conventional,
}

/// Piece of a schedule with constant tone parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub tones: [DriveTone; 2],
    /// Effective coupling phase φ₂ at t = 0 for this segment's linear law.
    pub coupling_phase: f64,
}

/// A concrete drive program for one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub scheme: Scheme,
    /// Gate time in ns.
    pub duration: f64,
    /// Design detuning Δ in MHz.
    pub detuning: f64,
    /// Chirp η in MHz.
    pub chirp: f64,
    pub betas: [f64; 2],
    pub resonance: ResonanceAssignment,
    /// Effective model the schedule was designed against (coupling phase
    /// of the first segment).
    pub model: EffectiveThreeLevel,
    pub segments: Vec<Segment>,
}

impl PulseSchedule {
    /// Interior segment boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.start).collect()
    }

    /// Effective model valid on segment `k`.
    pub fn segment_model(&self, k: usize) -> EffectiveThreeLevel {
        EffectiveThreeLevel { phase0: self.segments[k].coupling_phase, ..self.model }
    }

    /// Device with the tones of segment `k` applied.
    pub fn segment_pair(&self, pair: &DrivenPair, k: usize) -> DrivenPair {
        pair.with_tones(self.segments[k].tones)
    }

    pub fn coupling(&self) -> f64 {
        self.model.coupling()
    }

    /// Zero-length schedule with the tones off.
    pub fn idle(role: Role) -> Self {
        Self {
            scheme: Scheme::Toc,
            duration: 0.0,
            detuning: 0.0,
            chirp: 0.0,
            betas: [0.0; 2],
            resonance: ResonanceAssignment { tone1: 0.0, tone2: 0.0, detuning: 0.0 },
            model: EffectiveThreeLevel::new(role, 0.0, 0.0, 0.0, 0.0, 0.0),
            segments: vec![Segment { start: 0.0, end: 0.0, tones: [DriveTone::off(); 2], coupling_phase: 0.0 }],
        }
    }
}

/// Tone pair realising coupling phase `φ₂(t) = φ₂₀ + 2πηt` and fixed relative
/// phase φ: tone 1 carries offset +η and phase `φ₂₀ − π`, tone 2 carries
/// offset −2η and phase `φ + π − 2(φ₂₀ − π)`, which keeps `φ = 2p₁ + p₂ + π`.
fn chirped_tones(
    resonance: &ResonanceAssignment,
    betas: [f64; 2],
    chirp: f64,
    phase0: f64,
    phi: f64,
) -> [DriveTone; 2] {
    let p1 = phase0 - PI;
    [
        DriveTone::new(betas[0], resonance.tone1, chirp, p1),
        DriveTone::new(betas[1], resonance.tone2, -2.0 * chirp, phi + PI - 2.0 * p1),
    ]
}

/// Default β₁: largest effective coupling (J₁ peak) unless the
/// rotating-wave bound `g ≤ min(ω_ε)/10` forces a smaller amplitude.
pub fn default_beta1(coupling: f64, beta2: f64, min_tone: f64) -> Result<f64> {
    let weight = std::f64::consts::SQRT_2 * coupling * bessel_jn(0, beta2)?.hypot(bessel_jn(1, beta2)?);
    let bound = 0.1 * min_tone;
    let peak = weight * bessel_jn(1, J1_PEAK)?;
    if peak <= bound {
        return Ok(J1_PEAK);
    }
    find_root_bracketed(|b| weight * bessel_jn(1, b).unwrap_or(f64::NAN) - bound, 0.0, J1_PEAK, 1e-14)
}

fn resonance_for(pair: &DrivenPair, detuning: f64) -> Result<ResonanceAssignment> {
    solve_resonance(
        pair.frequency_difference(),
        pair.modulated_transmon().anharmonicity,
        pair.other_transmon().anharmonicity,
        detuning,
    )
}

/// Time-optimal schedule for `spec` on a single-qubit pair.
pub fn design_single_qubit_gate(
    spec: &SingleQubitGateSpec,
    pair: &DrivenPair,
    detuning: f64,
    beta1: f64,
) -> Result<PulseSchedule> {
    spec.validate()?;
    pair.validate()?;
    if !(beta1 > 0.0 && beta1 < 2.4) {
        return Err(Error::DesignInfeasible(format!("β₁ = {beta1} outside (0, 2.4)")));
    }
    let beta2 = solve_beta_for_theta(spec.theta, beta1)?;
    let (g1, g2) = effective_couplings(pair.coupling, beta1, beta2)?;
    let toc = solve_toc(spec.gamma, detuning, g1.hypot(g2))?;
    let resonance = resonance_for(pair, detuning)?;
    let betas = [beta1, beta2];
    let model = EffectiveThreeLevel {
        theta: mixing_angle(g1, g2),
        ..EffectiveThreeLevel::new(Role::SingleQubit, g1, g2, spec.phi, detuning, toc.eta)
    };
    let tones = chirped_tones(&resonance, betas, toc.eta, 0.0, spec.phi);
    Ok(PulseSchedule {
        scheme: Scheme::Toc,
        duration: toc.tau,
        detuning,
        chirp: toc.eta,
        betas,
        resonance,
        model,
        segments: vec![Segment { start: 0.0, end: toc.tau, tones, coupling_phase: 0.0 }],
    })
}

/// Resonant single-loop baseline: two halves of a full loop with the coupling
/// phase jumped by `π − γ` in between, at the composite coupling `g`.
pub fn design_conventional_gate(spec: &SingleQubitGateSpec, pair: &DrivenPair, g: f64) -> Result<PulseSchedule> {
    spec.validate()?;
    pair.validate()?;
    let beta2 = solve_beta_for_theta(spec.theta, 1.0)?;
    let weight = std::f64::consts::SQRT_2 * pair.coupling * bessel_jn(0, beta2)?.hypot(bessel_jn(1, beta2)?);
    let peak = weight * bessel_jn(1, J1_PEAK)?;
    if !(g > 0.0 && g <= peak) {
        return Err(Error::DesignInfeasible(format!("coupling {g} MHz not reachable (max {peak:.4} MHz)")));
    }
    let beta1 = find_root_bracketed(|b| weight * bessel_jn(1, b).unwrap_or(f64::NAN) - g, 0.0, J1_PEAK, 1e-15)?;
    let (g1, g2) = effective_couplings(pair.coupling, beta1, beta2)?;
    let resonance = resonance_for(pair, 0.0)?;
    let betas = [beta1, beta2];
    let tau0 = loop_time(g1.hypot(g2));
    let jump = PI - spec.gamma;
    let segments = vec![
        Segment { start: 0.0, end: 0.5 * tau0, tones: chirped_tones(&resonance, betas, 0.0, 0.0, spec.phi), coupling_phase: 0.0 },
        Segment {
            start: 0.5 * tau0,
            end: tau0,
            tones: chirped_tones(&resonance, betas, 0.0, jump, spec.phi),
            coupling_phase: jump,
        },
    ];
    Ok(PulseSchedule {
        scheme: Scheme::Conventional,
        duration: tau0,
        detuning: 0.0,
        chirp: 0.0,
        betas,
        resonance,
        model: EffectiveThreeLevel::new(Role::SingleQubit, g1, g2, spec.phi, 0.0, 0.0),
        segments,
    })
}

/// Control-phase design on the T₂–T₃ pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpGateDesign {
    pub gamma: f64,
    pub beta3: f64,
    /// Δ′ in MHz.
    pub detuning: f64,
    /// η₂ in MHz.
    pub eta: f64,
    /// τ₂ in ns.
    pub tau: f64,
    /// g′ in MHz.
    pub g_eff: f64,
    /// τ′₀ in ns.
    pub tau0: f64,
    /// Closed-form `τ′₀ √(1 − (1 + Δ′/η₂)²(1 − γ₂/π)²)`.
    pub tau_closed_form: f64,
    /// Residuals of (η₂τ₂ − 2(π−γ₂), ξ′(τ₂) − π, ξ₃(τ₂) − 2π), radians.
    pub residuals: [f64; 3],
}

fn cp_residuals(gamma: f64, g: f64, delta: f64, eta: f64, tau: f64, alpha_gap: f64) -> [f64; 3] {
    let (gg, a) = (angular(g), angular(delta + eta));
    let ladder = angular(delta + alpha_gap + eta);
    [
        angular(eta) * tau - 2.0 * (PI - gamma),
        tau * (gg * gg + 0.25 * a * a).sqrt() - PI,
        tau * (3.0 * gg * gg + 0.25 * ladder * ladder).sqrt() - 2.0 * PI,
    ]
}

/// Solves the three control-phase conditions for (τ₂, η₂, Δ′) with β₄ = 0.
///
/// With `a = Δ′ + η₂` the two precession conditions give
/// `τ² = 1/(4g′² + a²)` and `(a + Δα)²/4 − g′² − a² = 0` (cycles), where
/// `Δα = α_mod − α_other`. That quadratic is root-bracketed on the branch
/// `a ≥ Δα/3`; η₂ then follows from the phase condition.
pub fn design_cp_gate(gamma: f64, pair: &DrivenPair, beta3: f64) -> Result<CpGateDesign> {
    pair.validate()?;
    if !(gamma > 0.0 && gamma < 2.0 * PI) {
        return Err(Error::DesignInfeasible(format!("γ₂ = {gamma} outside (0, 2π)")));
    }
    let (g, _) = effective_couplings_pair(pair.coupling, beta3, 0.0)?;
    if !(g > 0.0) {
        return Err(Error::DesignInfeasible(format!("β₃ = {beta3} gives no coupling")));
    }
    let alpha_gap = pair.modulated_transmon().anharmonicity - pair.other_transmon().anharmonicity;
    if alpha_gap * alpha_gap <= 3.0 * g * g {
        return Err(Error::DesignInfeasible(format!(
            "anharmonicity gap {alpha_gap} MHz too small for g′ = {g:.4} MHz (need Δα² > 3g′²)"
        )));
    }
    let f = |a: f64| 0.25 * (a + alpha_gap).powi(2) - g * g - a * a;
    let lo = alpha_gap / 3.0;
    let mut hi = alpha_gap + 4.0 * g;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let a = find_root_bracketed(f, lo, hi, 1e-13)?;
    let tau_us = 1.0 / (4.0 * g * g + a * a).sqrt();
    let eta = (PI - gamma) / PI / tau_us;
    let delta = a - eta;
    let tau = tau_us * 1e3;
    if !(delta > 0.0 && delta <= alpha_gap && eta >= 0.0 && eta < 4.0 * g) {
        return Err(Error::DesignInfeasible(format!(
            "solution outside search box: Δ′ = {delta:.4} MHz (want (0, {alpha_gap}]), η₂ = {eta:.4} MHz (want [0, {:.4}))",
            4.0 * g
        )));
    }
    Ok(CpGateDesign {
        gamma,
        beta3,
        detuning: delta,
        eta,
        tau,
        g_eff: g,
        tau0: loop_time(g),
        tau_closed_form: closed_form_time(gamma, delta, eta, g),
        residuals: cp_residuals(gamma, g, delta, eta, tau, alpha_gap),
    })
}

/// Drive program realising a control-phase design on its pair.
pub fn cp_schedule(design: &CpGateDesign, pair: &DrivenPair) -> Result<PulseSchedule> {
    let resonance = resonance_for(pair, design.detuning)?;
    let betas = [design.beta3, 0.0];
    let tones = chirped_tones(&resonance, betas, design.eta, 0.0, 0.0);
    Ok(PulseSchedule {
        scheme: Scheme::Toc,
        duration: design.tau,
        detuning: design.detuning,
        chirp: design.eta,
        betas,
        resonance,
        model: EffectiveThreeLevel::new(Role::ControlPhase, design.g_eff, 0.0, 0.0, design.detuning, design.eta),
        segments: vec![Segment { start: 0.0, end: design.tau, tones, coupling_phase: 0.0 }],
    })
}

/// Diagonal-in-projectors rotating frame `R(t) = Σ_k e^{−i r_k t} P_k + (1 − Σ P_k)`
/// mapping interaction-picture states into the frame a gate is designed in.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignFrame {
    /// Orthonormal vectors with their rates in rad/ns.
    pub components: Vec<(CVector, f64)>,
}

impl DesignFrame {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn operator(&self, dim: usize, t: f64) -> CMatrix {
        let mut r = CMatrix::identity(dim, dim);
        for (v, rate) in &self.components {
            let f = C64::from_polar(1.0, -rate * t) - C64::new(1.0, 0.0);
            r += v * v.adjoint() * f;
        }
        r
    }

    /// `R(t) ρ R(t)†`.
    pub fn apply(&self, rho: &CMatrix, t: f64) -> CMatrix {
        if self.components.is_empty() {
            return rho.clone();
        }
        let r = self.operator(rho.nrows(), t);
        &r * rho * r.adjoint()
    }
}

/// Bright state `cos(θ/2)e^{iφ}|first⟩ + sin(θ/2)|second⟩` (single-qubit
/// role) in the pair basis; `first`/`second` are the two-tone and
/// single-tone logical states.
pub fn bright_state(pair: &DrivenPair, model: &EffectiveThreeLevel) -> CVector {
    let (first, second) = logical_indices(pair);
    let mut v = CVector::zeros(pair.dim());
    let (c, s) = ((0.5 * model.theta).cos(), (0.5 * model.theta).sin());
    match model.role {
        Role::SingleQubit => {
            v[first] = C64::from_polar(c, model.phi);
            v[second] = C64::new(s, 0.0);
        }
        Role::ControlPhase => {
            v[second] = C64::new(c, 0.0);
            v[first] = C64::from_polar(s, -model.phi);
        }
    }
    v
}

/// Pair indices of the logical states reached from `|11⟩` by the two-tone
/// (modulated transmon at 0) and single-tone (modulated transmon at 2)
/// processes.
pub fn logical_indices(pair: &DrivenPair) -> (usize, usize) {
    match pair.modulated {
        crate::device::Side::Left => (pair.index(0, 2), pair.index(2, 0)),
        crate::device::Side::Right => (pair.index(2, 0), pair.index(0, 2)),
    }
}

/// Frame of the three-level design: `|a⟩` rotates at +Δ/2 and the bright
/// state at −Δ/2. For control-phase schedules the `|22⟩`/`|13⟩` ladder frame
/// at ±(Δ′ + α_mod − α_other + η₂)/2 is added.
pub fn design_frame(pair: &DrivenPair, schedule: &PulseSchedule) -> DesignFrame {
    let half = 0.5 * angular(schedule.detuning);
    let mut components = Vec::new();
    if half != 0.0 {
        components.push((basis_vector(pair.dim(), pair.index(1, 1)), half));
        components.push((bright_state(pair, &schedule.model), -half));
    }
    if schedule.model.role == Role::ControlPhase && pair.left.levels > 3 && pair.right.levels > 3 {
        let gap = pair.modulated_transmon().anharmonicity - pair.other_transmon().anharmonicity;
        let ladder = 0.5 * angular(schedule.detuning + gap + schedule.chirp);
        let lower = match pair.modulated {
            crate::device::Side::Left => pair.index(3, 1),
            crate::device::Side::Right => pair.index(1, 3),
        };
        components.push((basis_vector(pair.dim(), pair.index(2, 2)), ladder));
        components.push((basis_vector(pair.dim(), lower), -ladder));
    }
    DesignFrame { components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::presets;
    use crate::numerics::frobenius;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn toc_examples() {
        let g = 7.0;
        let tau0 = loop_time(g);
        let s = solve_toc(FRAC_PI_2, 0.0, g).unwrap();
        assert!((s.tau / tau0 - 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!((s.eta - 2.0 * g / 3f64.sqrt()).abs() < 1e-10);

        let s = solve_toc(PI, 0.0, g).unwrap();
        assert_eq!(s.eta, 0.0);
        assert!((s.tau - tau0).abs() < 1e-12 * tau0);
        // detuned full loop: the precession rate includes Δ, so τ < τ₀
        let s = solve_toc(PI, 4.0, g).unwrap();
        assert_eq!(s.eta, 0.0);
        let want = PI / (angular(g).powi(2) + 0.25 * angular(4.0).powi(2)).sqrt();
        assert!((s.tau - want).abs() < 1e-12 * want && s.tau < tau0);
        assert!((closed_form_time(PI, 4.0, 0.0, g) / s.tau - 1.0).abs() < 1e-12);

        let g = std::f64::consts::SQRT_2 * 12.0 * bessel_jn(1, 1.98).unwrap();
        let s = solve_toc(FRAC_PI_2, 18.0, g).unwrap();
        // scalar oracle: bisection on the precession condition with η = c/τ
        let c = PI;
        let h = |tau: f64| tau * (angular(g).powi(2) + 0.25 * (angular(18.0) + c / tau).powi(2)).sqrt() - PI;
        let (mut lo, mut hi) = (1.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                hi = mid
            } else {
                lo = mid
            }
        }
        assert!((s.tau - lo).abs() < 1e-9);
        assert!((s.tau - 22.2).abs() < 0.1, "τ = {}", s.tau);
    }

    #[test]
    fn toc_invariants() {
        for &(gamma, d, g) in &[(0.3, 0.0, 5.0), (1.2, 7.0, 9.0), (2.9, -3.0, 12.0), (4.0, 2.0, 6.0)] {
            let s = solve_toc(gamma, d, g).unwrap();
            assert!((angular(s.eta) * s.tau - 2.0 * (PI - gamma)).abs() < 1e-10);
            assert!((s.xi_total - PI).abs() < 1e-10);
            let cf = closed_form_time(gamma, d, s.eta, g);
            assert!((cf / s.tau - 1.0).abs() < 1e-9, "{gamma} {d}: {cf} vs {}", s.tau);
            assert!(s.tau <= loop_time(g) * (1.0 + 1e-12));
        }
        assert!(solve_toc(0.0, 0.0, 1.0).is_err());
        assert!(solve_toc(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ideal_1q_examples() {
        let id = ideal_unitary_1q(&SingleQubitGateSpec { gamma: 0.0, theta: 0.4, phi: 1.0 });
        assert!(frobenius(&(id - CMatrix::identity(2, 2))) < 1e-15);

        let u = ideal_unitary_1q(&SingleQubitGateSpec::rx(FRAC_PI_2));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = CMatrix::from_row_slice(2, 2, &[C64::new(r, 0.0), C64::new(0.0, -r), C64::new(0.0, -r), C64::new(r, 0.0)]);
        assert!(frobenius(&(u - want)) < 1e-15);

        let u = ideal_unitary_1q(&SingleQubitGateSpec::rz(PI));
        assert!((u[(0, 0)] - C64::new(0.0, -1.0)).norm() < 1e-15 && (u[(1, 1)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn ideal_2q_examples() {
        assert_eq!(ideal_unitary_2q(0.0), CMatrix::identity(4, 4));
        assert!((ideal_unitary_2q(FRAC_PI_2)[(3, 3)] - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((ideal_unitary_2q(PI)[(3, 3)] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn single_qubit_designs() {
        let pair = presets::single_qubit_pair(3);
        let rx = design_single_qubit_gate(&SingleQubitGateSpec::rx(FRAC_PI_2), &pair, 0.0, 1.58).unwrap();
        assert!((rx.betas[1] - 1.43).abs() < 0.01);
        assert!((rx.duration / loop_time(rx.coupling()) - 0.8660254037844386).abs() < 1e-12);
        assert_eq!((rx.resonance.tone1, rx.resonance.tone2), (180.0, 620.0));

        let rz = design_single_qubit_gate(&SingleQubitGateSpec::rz(FRAC_PI_2), &pair, 18.0, 1.98).unwrap();
        assert_eq!(rz.betas[1], 0.0);
        assert_eq!(rz.model.g1, 0.0);

        let x = design_single_qubit_gate(&SingleQubitGateSpec::rx(PI), &pair, 0.0, 1.58).unwrap();
        assert_eq!(x.chirp, 0.0);
        assert!((x.duration - loop_time(x.coupling())).abs() < 1e-12);
    }

    #[test]
    fn chirp_realisation_keeps_relative_phase() {
        let pair = presets::single_qubit_pair(3);
        let s = design_single_qubit_gate(&SingleQubitGateSpec::ry(1.0), &pair, 5.0, 1.6).unwrap();
        let [t1, t2] = s.segments[0].tones;
        for &t in &[0.0, 3.3, s.duration] {
            let p1 = angular(t1.offset) * t + t1.phase;
            let p2 = angular(t2.offset) * t + t2.phase;
            let phi = crate::numerics::wrap_phase(2.0 * p1 + p2 + PI);
            assert!((phi - crate::numerics::wrap_phase(s.model.phi)).abs() < 1e-9);
            assert!((crate::numerics::wrap_phase(p1 + PI - angular(s.chirp) * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn conventional_design() {
        let pair = presets::single_qubit_pair(3);
        for &gamma in &[0.5, FRAC_PI_2, PI] {
            let s = design_conventional_gate(&SingleQubitGateSpec::rx(gamma), &pair, 7.0).unwrap();
            assert!((s.coupling() - 7.0).abs() < 1e-10);
            assert!((s.duration - loop_time(7.0)).abs() < 1e-9);
            assert_eq!(s.segments.len(), 2);
            assert!((s.segments[1].coupling_phase - (PI - gamma)).abs() < 1e-15);
        }
        assert!(design_conventional_gate(&SingleQubitGateSpec::rx(1.0), &pair, 100.0).is_err());
    }

    #[test]
    fn default_beta_policy() {
        assert_eq!(default_beta1(12.0, 0.0, 180.0).unwrap(), J1_PEAK);
        let b = default_beta1(12.0, 0.0, 50.0).unwrap();
        let g = std::f64::consts::SQRT_2 * 12.0 * bessel_jn(1, b).unwrap();
        assert!((g - 5.0).abs() < 1e-10 && b < J1_PEAK);
    }

    #[test]
    fn cp_design_example() {
        let pair = presets::cp_pair(5);
        let d = design_cp_gate(FRAC_PI_2, &pair, 1.54).unwrap();
        assert!((d.detuning - 11.8).abs() < 0.3, "Δ′ = {}", d.detuning);
        for r in d.residuals {
            assert!(r.abs() < 1e-9, "{:?}", d.residuals);
        }
        assert!((d.tau - 31.2).abs() < 0.3, "τ₂ = {}", d.tau);
        assert!((d.eta / d.g_eff - 2.006).abs() < 0.01);
        assert!((d.tau_closed_form / d.tau - 1.0).abs() < 1e-9);
        // direct check of the quadratic against the second root family
        let a = d.detuning + d.eta;
        let gap = 30.0;
        let closed = (gap + 2.0 * (gap * gap - 3.0 * d.g_eff * d.g_eff).sqrt()) / 3.0;
        assert!((a - closed).abs() < 1e-10);
    }

    #[test]
    fn cp_design_limits() {
        let pair = presets::cp_pair(5);
        let d = design_cp_gate(PI, &pair, 1.54).unwrap();
        assert_eq!(d.eta, 0.0);
        assert!(d.residuals.iter().all(|r| r.abs() < 1e-9));
        assert!((d.tau_closed_form / d.tau - 1.0).abs() < 1e-9);
        assert!(d.tau < d.tau0);
        let mut narrow = pair.clone();
        narrow.right.anharmonicity = 305.0;
        assert!(matches!(design_cp_gate(FRAC_PI_2, &narrow, 1.54), Err(Error::DesignInfeasible(_))));
    }

    #[test]
    fn frame_operator() {
        let v = basis_vector(3, 1);
        let frame = DesignFrame { components: vec![(v, 2.0)] };
        let r = frame.operator(3, 0.5);
        assert!((r[(1, 1)] - C64::from_polar(1.0, -1.0)).norm() < 1e-15);
        assert_eq!(r[(0, 0)], C64::new(1.0, 0.0));
    }
}
