//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use holosim_core::design::{design_single_qubit_gate, PulseSchedule, SingleQubitGateSpec};
use holosim_core::device::{presets, DrivenPair};
use holosim_core::dynamics::{propagator, EffectiveHamiltonian};
use holosim_core::effective::effective_hamiltonian_1q;
use holosim_core::numerics::{wrap_phase, CMatrix, CVector, C64};

pub fn fig3_rx(pair: &DrivenPair) -> PulseSchedule {
    design_single_qubit_gate(&SingleQubitGateSpec::rx(FRAC_PI_2), pair, 0.0, 1.58).unwrap()
}

pub fn fig3_rz(pair: &DrivenPair) -> PulseSchedule {
    design_single_qubit_gate(&SingleQubitGateSpec::rz(FRAC_PI_2), pair, 18.0, 1.98).unwrap()
}

/// Bright-state solution of the chirped three-level problem written out in
/// the dressed basis `{ψ₊, ψ₋, a}`.
pub fn bright_solution(schedule: &PulseSchedule, t: f64) -> CVector {
    let m = schedule.model;
    let (xi, chi) = m.dressed_angles(t);
    let half = 0.5 * m.coupling_phase(t);
    let i = C64::i();
    CVector::from_vec(vec![
        (C64::new(xi.cos(), 0.0) + i * xi.sin() * chi.cos()) * C64::from_polar(1.0, -half),
        C64::default(),
        -i * xi.sin() * chi.sin() * C64::from_polar(1.0, half),
    ])
}

pub fn connection(schedule: &PulseSchedule, t: f64) -> CMatrix {
    let h = 1e-4;
    let basis = |t: f64| {
        let mut b = CMatrix::zeros(3, 2);
        b.set_column(0, &bright_solution(schedule, t));
        b[(1, 1)] = C64::new(1.0, 0.0);
        b
    };
    let (b, bp, bm) = (basis(t), basis(t + h), basis(t - h));
    let deriv = (bp - bm) / C64::new(2.0 * h, 0.0);
    let a = b.adjoint() * deriv * C64::i();
    let k = -(b.adjoint() * effective_hamiltonian_1q(&schedule.model, t) * &b);
    a + k
}

/// `(|⟨ψ₊|U|ψ₊⟩|, arg⟨ψ₊|U|ψ₊⟩ − (π − φ₂(τ)/2), |⟨ψ₋|U|ψ₋⟩|)` of an
/// effective-model TOC design.
pub fn cyclic_phase(spec: SingleQubitGateSpec, detuning: f64) -> (f64, f64, f64) {
    let pair = presets::single_qubit_pair(3);
    let s = design_single_qubit_gate(&spec, &pair, detuning, 1.6).unwrap();
    let u = propagator(&EffectiveHamiltonian::new(&s, 0.0, 0.0), s.duration, 1e-3).unwrap();
    let expected = PI - 0.5 * s.model.coupling_phase(s.duration);
    (u[(0, 0)].norm(), wrap_phase(u[(0, 0)].arg() - expected), u[(1, 1)].norm())
}

