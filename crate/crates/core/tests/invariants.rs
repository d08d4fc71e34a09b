use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use holosim_core::design::{
    cp_schedule, design_cp_gate, design_frame, design_single_qubit_gate, logical_indices, solve_toc,
    PulseSchedule, SingleQubitGateSpec,
};
use holosim_core::device::{number, presets, DrivenPair};
use holosim_core::dynamics::{evolve_state, propagator, EffectiveHamiltonian, ScheduledPair, WithStatic};
use holosim_core::metrics::{
    average_fidelity_1q, calibrate_effective, effective_full_overlap, single_qubit_channel, sq_trajectory,
    RunOptions,
};
use holosim_core::numerics::{angular, basis_vector, CMatrix, CVector, SparseOp, C64};
use proptest::prelude::*;

mod common;
use common::{bright_solution, connection, cyclic_phase, fig3_rx, fig3_rz};

#[test]
fn holonomy_decomposition_is_constant() {
    let pair = presets::single_qubit_pair(3);
    let designs = [
        fig3_rx(&pair),
        fig3_rz(&pair),
        design_single_qubit_gate(&SingleQubitGateSpec::new(0.3 * PI, 1.0, 0.4).unwrap(), &pair, 3.0, 1.5).unwrap(),
    ];
    for s in &designs {
        let reference = connection(s, 0.05 * s.duration);
        for k in 1..=40 {
            let t = s.duration * k as f64 / 41.0;
            let drift = (connection(s, t) - &reference).iter().fold(0.0f64, |m, z| m.max(z.norm()));
            assert!(drift < 1e-6, "K + A drifts by {drift:e} at t = {t}");
        }
        // the closed-form bright solution is the propagated one
        let h = EffectiveHamiltonian::new(s, 0.0, 0.0);
        let psi = evolve_state(&h, &basis_vector(3, 0), s.duration, 1e-3).unwrap();
        let want = bright_solution(s, s.duration);
        assert!((psi - want).norm() < 1e-6);
    }
}

#[test]
fn cyclicity_and_phase_for_default_gates() {
    for (spec, det) in [(SingleQubitGateSpec::rx(FRAC_PI_2), 0.0), (SingleQubitGateSpec::rz(FRAC_PI_2), 18.0)] {
        let (modulus, phase, dark) = cyclic_phase(spec, det);
        assert!((modulus - 1.0).abs() < 1e-8, "|⟨ψ₊|U|ψ₊⟩| = {modulus}");
        assert!(phase.abs() < 1e-6, "phase off by {phase}");
        assert!((dark - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cyclicity_and_phase_hold_across_designs(
        gamma in 0.1 * PI..PI,
        theta in 0.2f64..3.0,
        phi in 0.0f64..6.0,
        ratio in prop::sample::select(vec![0.0, 0.5, 1.0]),
    ) {
        let spec = SingleQubitGateSpec::new(gamma, theta, phi).unwrap();
        let (modulus, phase, dark) = cyclic_phase(spec, 5.0 * ratio);
        prop_assert!((modulus - 1.0).abs() < 1e-8);
        prop_assert!(phase.abs() < 1e-6);
        prop_assert!((dark - 1.0).abs() < 1e-10);
    }

    #[test]
    fn toc_time_never_exceeds_full_loop(gamma in 0.05..PI, ratio in 0.0f64..2.0) {
        let g = 7.0;
        let s = solve_toc(gamma, ratio * g, g).unwrap();
        prop_assert!(s.tau <= PI / angular(g) * (1.0 + 1e-12));
        prop_assert!((s.xi_total - PI).abs() < 1e-9);
    }
}

/// Design-frame logical block of a closed full-model propagator.
fn logical_gate(pair: &DrivenPair, s: &PulseSchedule, u: &CMatrix) -> CMatrix {
    let r = design_frame(pair, s).operator(pair.dim(), s.duration);
    let ru = r * u;
    let (a, b) = (pair.index(0, 2), pair.index(2, 0));
    CMatrix::from_row_slice(2, 2, &[ru[(a, a)], ru[(a, b)], ru[(b, a)], ru[(b, b)]])
}

#[test]
fn common_mode_drift_leaves_gate_unchanged() {
    let pair = presets::single_qubit_pair(3).without_decoherence();
    for s in [fig3_rx(&pair), fig3_rz(&pair)] {
        let clean = ScheduledPair::new(&pair, &s);
        let u0 = logical_gate(&pair, &s, &propagator(&clean, s.duration, 1e-3).unwrap());

        // δ(n̂₁ + n̂₂) with δ = 2 MHz, added on top of the interaction picture
        let delta = angular(2.0);
        let n = number(3);
        let mut extra = SparseOp::new(pair.dim());
        for l in 0..3 {
            for r in 0..3 {
                extra.push(pair.index(l, r), pair.index(l, r), (n[(l, l)] + n[(r, r)]) * delta);
            }
        }
        let drifted = WithStatic { inner: ScheduledPair::new(&pair, &s), extra };
        let u1 = logical_gate(&pair, &s, &propagator(&drifted, s.duration, 1e-3).unwrap());
        let phase = C64::from_polar(1.0, 2.0 * delta * s.duration);
        let diff = (u1 * phase - &u0).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-6, "common-mode drift changes the gate by {diff:e}");

        // equal drifts on both transmons cancel in the interaction picture
        let mut both = pair.clone();
        both.left.drift = 3.0;
        both.right.drift = 3.0;
        let u2 = logical_gate(&both, &s, &propagator(&ScheduledPair::new(&both, &s), s.duration, 1e-3).unwrap());
        assert!((u2 - &u0).iter().fold(0.0f64, |m, z| m.max(z.norm())) < 1e-12);
    }
}

#[test]
fn effective_model_tracks_full_model() {
    let pair = presets::single_qubit_pair(3);
    for s in [fig3_rx(&pair), fig3_rz(&pair)] {
        let overlap = effective_full_overlap(&pair, &s, 1e-3).unwrap();
        assert!(overlap >= 0.995, "overlap {overlap}");
    }
}

#[test]
fn calibration_within_one_percent() {
    let pair = presets::single_qubit_pair(3);
    let s = design_single_qubit_gate(&SingleQubitGateSpec::rx(PI), &pair, 0.0, 1.58).unwrap();
    let c = calibrate_effective(&pair, &s, 1e-3).unwrap();
    assert!(c.relative_error.abs() < 0.01, "{c:?}");
    assert!(c.phase_error.abs() < 0.1, "{c:?}");
    // a chirped schedule is rejected
    assert!(calibrate_effective(&pair, &fig3_rx(&pair), 1e-3).is_err());
}

#[test]
fn leakage_ladder_returns_at_gate_end() {
    let pair = presets::cp_pair(4).without_decoherence();
    let design = design_cp_gate(FRAC_PI_2, &pair, 1.54).unwrap();
    let s = cp_schedule(&design, &pair).unwrap();
    let h = ScheduledPair::new(&pair, &s);
    let psi = evolve_state(&h, &basis_vector(pair.dim(), pair.index(2, 2)), s.duration, 1e-3).unwrap();
    let back = psi[pair.index(2, 2)].norm_sqr();
    assert!(back >= 0.99, "|22⟩ return population {back}");
}

#[test]
fn halving_dt_is_converged() {
    let pair = presets::single_qubit_pair(3);
    let h = FRAC_1_SQRT_2;
    for (s, a) in [(fig3_rx(&pair), [1.0, 0.0]), (fig3_rz(&pair), [h, h])] {
        let a = CVector::from_vec(vec![C64::new(a[0], 0.0), C64::new(a[1], 0.0)]);
        let target = holosim_core::design::ideal_unitary_1q(&if s.detuning == 0.0 {
            SingleQubitGateSpec::rx(FRAC_PI_2)
        } else {
            SingleQubitGateSpec::rz(FRAC_PI_2)
        });
        let f = |dt: f64| {
            let opts = RunOptions { dt, ..RunOptions::default() };
            sq_trajectory(&pair, &s, &a, &target, &opts, usize::MAX).unwrap().final_fidelity().unwrap()
        };
        let (coarse, fine) = (f(1e-3), f(5e-4));
        assert!((coarse - fine).abs() < 1e-5, "dt halving moves F by {:e}", coarse - fine);
    }
}

#[test]
fn input_grid_refinement_is_stable() {
    let pair = presets::single_qubit_pair(3);
    let s = fig3_rx(&pair);
    let channel = single_qubit_channel(&pair, &s, &RunOptions::default()).unwrap();
    let u = holosim_core::design::ideal_unitary_1q(&SingleQubitGateSpec::rx(FRAC_PI_2));
    let (a, b) = (average_fidelity_1q(&channel, &u, 1001), average_fidelity_1q(&channel, &u, 2001));
    assert!((a - b).abs() < 1e-4);
}

#[test]
fn logical_indices_follow_the_modulated_side() {
    let pair = presets::single_qubit_pair(3);
    assert_eq!(logical_indices(&pair), (pair.index(0, 2), pair.index(2, 0)));
    let cp = presets::cp_pair(4);
    assert_eq!(logical_indices(&cp), (cp.index(2, 0), cp.index(0, 2)));
}
