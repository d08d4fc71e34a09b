//! Figures of merit: state and averaged gate fidelities built from logical
//! channels, the trace-overlap robustness fidelity and its scans, and the
//! infidelity budget.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::design::{bright_state, design_frame, logical_indices, DesignFrame, PulseSchedule};
use crate::device::{collapse_operators, transmon_collapse_operators, DrivenPair, Side, TransmonSpec};
use crate::dynamics::{
    evolve_lindblad, evolve_state, evolve_unitary, lindblad_map, lindblad_trajectories, propagator, EffectiveHamiltonian, Embedded,
    EvolutionResult, Observer, ScheduledPair,
};
use crate::error::{Error, Result};
use crate::numerics::{angular, basis_vector, ket_bra, tensor_product, wrap_phase, CMatrix, CVector, TimeGrid, C64};

/// `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(rho: &CMatrix, psi: &CVector) -> Result<f64> {
    if rho.nrows() != psi.len() || rho.ncols() != psi.len() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: psi.len() });
    }
    let f = (psi.adjoint() * rho * psi)[(0, 0)];
    let scale = rho.trace().norm().max(1.0);
    if f.im.abs() > 1e-10 * scale {
        return Err(Error::StateInvariant { what: format!("complex fidelity {f}"), t: f64::NAN });
    }
    Ok(f.re)
}

/// `Re Tr(U₀† U) / Tr(U₀† U₀)`. Sensitive to global phase by construction.
pub fn robustness_fidelity(ideal: &CMatrix, perturbed: &CMatrix) -> f64 {
    let num = (ideal.adjoint() * perturbed).trace().re;
    let den = (ideal.adjoint() * ideal).trace().re;
    num / den
}

/// Simulation switches shared by the full-model runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    /// Maximum RK4 step in ns.
    pub dt: f64,
    pub decoherence: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { dt: 1e-3, decoherence: true }
    }
}

/// A quantum channel restricted to a logical subspace of dimension `n`:
/// `blocks[k·n + l]` holds the logical block of `Λ(|k⟩⟨l|)` in the design frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalChannel {
    pub n: usize,
    pub blocks: Vec<CMatrix>,
}

impl LogicalChannel {
    pub fn identity(n: usize) -> Self {
        let blocks = (0..n * n).map(|kl| ket_bra(n, kl / n, kl % n)).collect();
        Self { n, blocks }
    }

    /// Logical block of `Λ(|a⟩⟨a|)`.
    pub fn output(&self, a: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for k in 0..self.n {
            for l in 0..self.n {
                let w = a[k] * a[l].conj();
                if w != C64::default() {
                    out += &self.blocks[k * self.n + l] * w;
                }
            }
        }
        out
    }

    /// `⟨Ua|Λ(|a⟩⟨a|)|Ua⟩`.
    pub fn fidelity(&self, a: &CVector, target: &CMatrix) -> f64 {
        let b = target * a;
        let mut f = C64::default();
        for k in 0..self.n {
            for l in 0..self.n {
                let w = a[k] * a[l].conj();
                if w == C64::default() {
                    continue;
                }
                f += w * (b.adjoint() * &self.blocks[k * self.n + l] * &b)[(0, 0)];
            }
        }
        f.re
    }
}

/// `θ_j = 2πj/(N−1)`, j = 0..N.
pub fn angle_grid(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|j| 2.0 * PI * j as f64 / (n - 1) as f64).collect()
}

/// Rank-1 (Fibonacci) lattice of `n` points on `[0, 2π)²` with generator
/// `round(n/φ)`.
pub fn fibonacci_lattice(n: usize) -> Vec<(f64, f64)> {
    let golden = 0.5 * (1.0 + 5f64.sqrt());
    let z = ((n as f64 / golden).round() as usize).max(1);
    (0..n)
        .map(|j| {
            let x = j as f64 / n as f64;
            let y = ((j * z) % n) as f64 / n as f64;
            (2.0 * PI * x, 2.0 * PI * y)
        })
        .collect()
}

fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)))
}

/// Average of `⟨ψ_f|Λ(ψ)|ψ_f⟩` over `cos θ|0⟩ + sin θ|1⟩` on an `n`-point grid.
pub fn average_fidelity_1q(channel: &LogicalChannel, target: &CMatrix, n: usize) -> f64 {
    let grid = angle_grid(n);
    let sum: f64 = grid.iter().map(|&t| channel.fidelity(&real_vector(&[t.cos(), t.sin()]), target)).sum();
    sum / grid.len() as f64
}

/// Average over product inputs `(cos ϑ₁, sin ϑ₁) ⊗ (cos ϑ₂, sin ϑ₂)` on a
/// Fibonacci lattice of `n` points.
pub fn average_fidelity_2q(channel: &LogicalChannel, target: &CMatrix, n: usize) -> f64 {
    let pts = fibonacci_lattice(n);
    let sum: f64 = pts
        .iter()
        .map(|&(a, b)| {
            let (c1, s1, c2, s2) = (a.cos(), a.sin(), b.cos(), b.sin());
            channel.fidelity(&real_vector(&[c1 * c2, c1 * s2, s1 * c2, s1 * s2]), target)
        })
        .sum();
    sum / pts.len() as f64
}

fn device_for(pair: &DrivenPair, opts: &RunOptions) -> DrivenPair {
    if opts.decoherence {
        pair.clone()
    } else {
        pair.without_decoherence()
    }
}

/// Logical block `⟨i|R Λ R†|j⟩` over `indices`.
fn logical_block(m: &CMatrix, frame: &CMatrix, indices: &[usize]) -> CMatrix {
    let rotated = frame * m * frame.adjoint();
    CMatrix::from_fn(indices.len(), indices.len(), |i, j| rotated[(indices[i], indices[j])])
}

/// Pair-basis inputs `|i_k⟩⟨i_l|` for `k ≤ l`, in row-major upper-triangle order.
fn upper_inputs(dim: usize, indices: &[usize]) -> (Vec<(usize, usize)>, Vec<CMatrix>) {
    let mut keys = Vec::new();
    let mut ops = Vec::new();
    for k in 0..indices.len() {
        for l in k..indices.len() {
            keys.push((k, l));
            ops.push(ket_bra(dim, indices[k], indices[l]));
        }
    }
    (keys, ops)
}

/// Design-frame logical blocks `blocks[k·n + l]` of the pair channel on
/// `indices`. Closed runs use the propagator, open runs the Lindblad map of
/// the upper triangle completed by adjoints.
fn pair_blocks(pair: &DrivenPair, schedule: &PulseSchedule, opts: &RunOptions, indices: &[usize]) -> Result<Vec<CMatrix>> {
    let device = device_for(pair, opts);
    let n = indices.len();
    let h = ScheduledPair::new(&device, schedule);
    let r = design_frame(pair, schedule).operator(pair.dim(), schedule.duration);
    let mut blocks = vec![CMatrix::zeros(n, n); n * n];
    if !opts.decoherence {
        let m = r * propagator(&h, schedule.duration, opts.dt)?;
        let cols: Vec<CVector> = indices
            .iter()
            .map(|&i| CVector::from_iterator(n, indices.iter().map(|&j| m[(j, i)])))
            .collect();
        for k in 0..n {
            for l in 0..n {
                blocks[k * n + l] = &cols[k] * cols[l].adjoint();
            }
        }
        return Ok(blocks);
    }
    let (keys, inputs) = upper_inputs(pair.dim(), indices);
    let outputs = lindblad_map(&h, &collapse_operators(&device), &inputs, schedule.duration, opts.dt)?;
    for ((k, l), out) in keys.into_iter().zip(outputs) {
        let b = logical_block(&out, &r, indices);
        blocks[l * n + k] = b.adjoint();
        blocks[k * n + l] = b;
    }
    Ok(blocks)
}

/// Full-model logical channel of a single-qubit schedule on `{|0⟩_L, |1⟩_L}`.
pub fn single_qubit_channel(pair: &DrivenPair, schedule: &PulseSchedule, opts: &RunOptions) -> Result<LogicalChannel> {
    let indices = [pair.index(0, 2), pair.index(2, 0)];
    Ok(LogicalChannel { n: 2, blocks: pair_blocks(pair, schedule, opts, &indices)? })
}

/// Exact channel element of an idle transmon (no Hamiltonian in the
/// interaction picture) restricted to levels {0, 2}: amplitude damping at
/// `κ₁` and number-operator dephasing at `κ_φ`, from `|j⟩⟨j′|` to `⟨m|·|m′⟩`.
pub fn idle_element(spec: &TransmonSpec, t: f64, input: (usize, usize), output: (usize, usize)) -> f64 {
    let g = angular(spec.decay);
    let gp = angular(spec.dephasing);
    let decay = (-g * t).exp();
    match (input, output) {
        ((0, 0), (0, 0)) => 1.0,
        ((2, 2), (2, 2)) => decay * decay,
        ((2, 2), (0, 0)) => (1.0 - decay).powi(2),
        ((0, 2), (0, 2)) | ((2, 0), (2, 0)) => (-(g + 2.0 * gp) * t).exp(),
        _ => 0.0,
    }
}

/// Register levels of logical state `k = 2q₁ + q₂`: (T₁, T₂, T₃, T₄).
pub fn register_levels(k: usize) -> [usize; 4] {
    let (q1, q2) = (k / 2, k % 2);
    [2 * q1, 2 - 2 * q1, 2 * q2, 2 - 2 * q2]
}

/// Pair indices of the four logical states on the T₂–T₃ pair.
pub fn cp_pair_indices(pair: &DrivenPair) -> [usize; 4] {
    let mut out = [0; 4];
    for (k, o) in out.iter_mut().enumerate() {
        let l = register_levels(k);
        *o = pair.index(l[1], l[2]);
    }
    out
}

/// Combines pair-level blocks with the idle spectator channels into the
/// two-logical-qubit channel. `pair_out(k, l)` is the design-frame logical
/// block of `Λ_pair(|p_k⟩⟨p_l|)`.
fn with_spectators<F>(spectators: &[TransmonSpec; 2], t: f64, pair_out: F) -> LogicalChannel
where
    F: Fn(usize, usize) -> CMatrix,
{
    let mut blocks = Vec::with_capacity(16);
    for k in 0..4 {
        for l in 0..4 {
            let p = pair_out(k, l);
            let (lk, ll) = (register_levels(k), register_levels(l));
            let b = CMatrix::from_fn(4, 4, |m, n| {
                let (lm, ln) = (register_levels(m), register_levels(n));
                let s1 = idle_element(&spectators[0], t, (lk[0], ll[0]), (lm[0], ln[0]));
                let s4 = idle_element(&spectators[1], t, (lk[3], ll[3]), (lm[3], ln[3]));
                p[(m, n)] * (s1 * s4)
            });
            blocks.push(b);
        }
    }
    LogicalChannel { n: 4, blocks }
}

fn spectators_for(spectators: &[TransmonSpec; 2], opts: &RunOptions) -> [TransmonSpec; 2] {
    if opts.decoherence {
        *spectators
    } else {
        [spectators[0].without_decoherence(), spectators[1].without_decoherence()]
    }
}

/// Full-model channel of a control-phase schedule on the two logical qubits,
/// with T₁ and T₄ as idle spectators.
pub fn cp_channel(
    pair: &DrivenPair,
    spectators: &[TransmonSpec; 2],
    schedule: &PulseSchedule,
    opts: &RunOptions,
) -> Result<LogicalChannel> {
    let idle = spectators_for(spectators, opts);
    let pair_blocks = pair_blocks(pair, schedule, opts, &cp_pair_indices(pair))?;
    Ok(with_spectators(&idle, schedule.duration, |k, l| pair_blocks[k * 4 + l].clone()))
}

/// Time-resolved control-phase run from logical input `a`: logical
/// populations (`00`..`11`), the pair auxiliary `|11⟩₂₃` (`a`), `leak`, and
/// the fidelity against `target·a` in the design frame.
pub fn cp_trajectory(
    pair: &DrivenPair,
    spectators: &[TransmonSpec; 2],
    schedule: &PulseSchedule,
    a: &CVector,
    target: &CMatrix,
    opts: &RunOptions,
    stride: usize,
) -> Result<EvolutionResult> {
    let device = device_for(pair, opts);
    let idle = spectators_for(spectators, opts);
    let indices = cp_pair_indices(pair);
    let support: Vec<usize> = (0..4).filter(|&k| a[k] != C64::default()).collect();
    let sub: Vec<usize> = support.iter().map(|&k| indices[k]).collect();
    let (keys, inputs) = upper_inputs(pair.dim(), &sub);
    let h = ScheduledPair::new(&device, schedule);
    let grid = TimeGrid::covering(0.0, schedule.duration, opts.dt, stride)?;
    let (times, runs) = lindblad_trajectories(&h, &collapse_operators(&device), &inputs, &grid)?;
    let frame = design_frame(pair, schedule);
    let aux = pair.index(1, 1);
    let b = target * a;
    let labels = ["00", "01", "10", "11", "a"];
    let mut populations: Vec<(String, Vec<f64>)> =
        labels.iter().chain(["leak"].iter()).map(|l| (l.to_string(), Vec::new())).collect();
    let mut fidelity = Vec::new();
    let mut last = CMatrix::zeros(4, 4);
    for (s, &t) in times.iter().enumerate() {
        let r = frame.operator(pair.dim(), t);
        let mut full = vec![CMatrix::zeros(pair.dim(), pair.dim()); 16];
        for ((i, j), run) in keys.iter().zip(&runs) {
            let (k, l) = (support[*i], support[*j]);
            full[l * 4 + k] = run[s].adjoint();
            full[k * 4 + l] = run[s].clone();
        }
        let channel = with_spectators(&idle, t, |k, l| logical_block(&full[k * 4 + l], &r, &indices));
        let out = channel.output(a);
        // the auxiliary population is traced over spectators, so only
        // diagonal spectator terms (k, l sharing T₁/T₄ levels) contribute
        let mut p_aux = 0.0;
        for &k in &support {
            for &l in &support {
                let (lk, ll) = (register_levels(k), register_levels(l));
                if lk[0] == ll[0] && lk[3] == ll[3] {
                    p_aux += (a[k] * a[l].conj() * full[k * 4 + l][(aux, aux)]).re;
                }
            }
        }
        let mut total = 0.0;
        for m in 0..4 {
            let p = out[(m, m)].re;
            total += p;
            populations[m].1.push(p);
        }
        populations[4].1.push(p_aux);
        populations[5].1.push((1.0 - total - p_aux).max(0.0));
        fidelity.push((b.adjoint() * &out * &b)[(0, 0)].re);
        last = out;
    }
    Ok(EvolutionResult { times, populations, fidelity, xi: Vec::new(), chi: None, final_state: last })
}

/// Register index of logical state `k` in `T₁ ⊗ T₂ ⊗ T₃ ⊗ T₄` with the
/// given truncations.
fn register_index(dims: &[usize; 4], k: usize) -> usize {
    let l = register_levels(k);
    ((l[0] * dims[1] + l[1]) * dims[2] + l[2]) * dims[3] + l[3]
}

/// State fidelity of a control-phase schedule from logical input `a` with all
/// four transmons propagated under the Lindblad equation. The spectators
/// carry no Hamiltonian; they only relax and dephase.
pub fn cp_register_fidelity(
    pair: &DrivenPair,
    spectators: &[TransmonSpec; 2],
    schedule: &PulseSchedule,
    a: &CVector,
    target: &CMatrix,
    opts: &RunOptions,
) -> Result<f64> {
    let device = device_for(pair, opts);
    let idle = spectators_for(spectators, opts);
    let dims = [idle[0].levels, device.left.levels, device.right.levels, idle[1].levels];
    let n: usize = dims.iter().product();
    let h = Embedded { inner: ScheduledPair::new(&device, schedule), before: dims[0], after: dims[3] };
    let mut collapse = transmon_collapse_operators(&idle[0], &dims, 0);
    collapse.extend(transmon_collapse_operators(&device.left, &dims, 1));
    collapse.extend(transmon_collapse_operators(&device.right, &dims, 2));
    collapse.extend(transmon_collapse_operators(&idle[1], &dims, 3));
    let mut psi = CVector::zeros(n);
    let b = target * a;
    let mut want = CVector::zeros(n);
    for k in 0..4 {
        psi[register_index(&dims, k)] = a[k];
        want[register_index(&dims, k)] = b[k];
    }
    let out = lindblad_map(&h, &collapse, &[&psi * psi.adjoint()], schedule.duration, opts.dt)?;
    let r_pair = design_frame(pair, schedule).operator(pair.dim(), schedule.duration);
    let r = tensor_product(
        &tensor_product(&CMatrix::identity(dims[0], dims[0]), &r_pair),
        &CMatrix::identity(dims[3], dims[3]),
    );
    state_fidelity(&(&r * &out[0] * r.adjoint()), &want)
}

/// Embeds a logical single-qubit vector into the pair basis.
pub fn logical_to_pair(pair: &DrivenPair, v: &CVector) -> CVector {
    let mut out = CVector::zeros(pair.dim());
    out[pair.index(0, 2)] = v[0];
    out[pair.index(2, 0)] = v[1];
    out
}

/// Time-resolved single-qubit Lindblad run from logical input `a`, with
/// populations `0`, `1`, `a`, `leak` and the fidelity to `target·a` in the
/// design frame. Density-matrix invariants are checked at every sample.
pub fn sq_trajectory(
    pair: &DrivenPair,
    schedule: &PulseSchedule,
    a: &CVector,
    target: &CMatrix,
    opts: &RunOptions,
    stride: usize,
) -> Result<EvolutionResult> {
    let device = device_for(pair, opts);
    let h = ScheduledPair::new(&device, schedule);
    let psi = logical_to_pair(pair, a);
    let obs = Observer {
        labels: vec![
            ("0".into(), pair.index(0, 2)),
            ("1".into(), pair.index(2, 0)),
            ("a".into(), pair.index(1, 1)),
        ],
        target: Some(logical_to_pair(pair, &(target * a))),
        frame: design_frame(pair, schedule),
        model: Some(schedule.model),
        check_invariants: true,
    };
    let grid = TimeGrid::covering(0.0, schedule.duration, opts.dt, stride)?;
    evolve_lindblad(&h, &collapse_operators(&device), &(&psi * psi.adjoint()), &grid, &obs)
}

/// Averaged single-qubit gate fidelity from the full model.
pub fn gate_fidelity_1q(
    pair: &DrivenPair,
    schedule: &PulseSchedule,
    target: &CMatrix,
    opts: &RunOptions,
    inputs: usize,
) -> Result<f64> {
    let channel = if schedule.duration == 0.0 {
        LogicalChannel::identity(2)
    } else {
        single_qubit_channel(pair, schedule, opts)?
    };
    Ok(average_fidelity_1q(&channel, target, inputs))
}

/// Averaged two-qubit gate fidelity from the full pair model with spectators.
pub fn gate_fidelity_2q(
    pair: &DrivenPair,
    spectators: &[TransmonSpec; 2],
    schedule: &PulseSchedule,
    target: &CMatrix,
    opts: &RunOptions,
    inputs: usize,
) -> Result<f64> {
    let channel = if schedule.duration == 0.0 {
        LogicalChannel::identity(4)
    } else {
        cp_channel(pair, spectators, schedule, opts)?
    };
    Ok(average_fidelity_2q(&channel, target, inputs))
}

/// Effective-model gate on the logical pair `{first, second}` (2×2), in the
/// design frame, with error injection.
pub fn effective_logical_unitary(
    schedule: &PulseSchedule,
    drift_difference: f64,
    coupling_error: f64,
    dt: f64,
) -> Result<CMatrix> {
    let h = EffectiveHamiltonian::new(schedule, drift_difference, coupling_error);
    let u = propagator(&h, schedule.duration, dt)?;
    let m = &schedule.model.frame().to_logical;
    Ok((m * u * m.adjoint()).view((0, 0), (2, 2)).into_owned())
}

/// Pair-basis state of the effective model after `t`, started from pair
/// basis state `start` (a logical or auxiliary state), without frame rotation.
fn effective_state(pair: &DrivenPair, schedule: &PulseSchedule, start: usize, t: f64, dt: f64) -> Result<CVector> {
    let (first, second) = logical_indices(pair);
    let aux = pair.index(1, 1);
    let slots = [first, second, aux];
    let m = &schedule.model.frame().to_logical;
    let slot = slots
        .iter()
        .position(|&i| i == start)
        .ok_or_else(|| Error::InvalidInput(format!("pair state {start} is outside the effective subspace")))?;
    let psi0 = m.adjoint().column(slot).into_owned();
    let h = EffectiveHamiltonian::new(schedule, 0.0, 0.0);
    let dressed = evolve_state(&h, &psi0, t, dt)?;
    let logical = m * dressed;
    let mut out = CVector::zeros(pair.dim());
    for (k, &i) in slots.iter().enumerate() {
        out[i] = logical[k];
    }
    Ok(out)
}

/// `|⟨ψ_eff(τ)|R(τ)ψ_full(τ)⟩|²` for a closed run from `|0⟩_L`: the full
/// interaction-picture model against the effective three-level model.
pub fn effective_full_overlap(pair: &DrivenPair, schedule: &PulseSchedule, dt: f64) -> Result<f64> {
    let device = pair.without_decoherence();
    let start = pair.index(0, 2);
    let h = ScheduledPair::new(&device, schedule);
    let full = evolve_state(&h, &basis_vector(pair.dim(), start), schedule.duration, dt)?;
    let r = design_frame(pair, schedule).operator(pair.dim(), schedule.duration);
    let eff = effective_state(pair, schedule, start, schedule.duration, dt)?;
    Ok((eff.adjoint() * r * full)[(0, 0)].norm_sqr())
}

/// Effective-model calibration against the full model on a resonant,
/// unchirped schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    /// Composite coupling g of the effective model, MHz.
    pub g_effective: f64,
    /// Rabi rate fitted to the full-model auxiliary population, MHz.
    pub g_full: f64,
    pub relative_error: f64,
    /// `arg⟨a|U(τ/2)|0⟩_L` in both models, radians.
    pub phase_effective: f64,
    pub phase_full: f64,
    /// Wrapped difference of the two phases.
    pub phase_error: f64,
}

/// Fits `P(t) ≈ A sin²(Ωt)` by scanning Ω and refining by golden section;
/// `A` is solved linearly at each Ω.
fn fit_rabi(times: &[f64], pops: &[f64], guess: f64) -> f64 {
    let cost = |w: f64| {
        let s: Vec<f64> = times.iter().map(|t| (w * t).sin().powi(2)).collect();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        let a = if ss > 0.0 { s.iter().zip(pops).map(|(x, p)| x * p).sum::<f64>() / ss } else { 0.0 };
        s.iter().zip(pops).map(|(x, p)| (a * x - p).powi(2)).sum::<f64>()
    };
    let (lo, hi, n) = (0.7 * guess, 1.3 * guess, 600);
    let step = (hi - lo) / n as f64;
    let best = (0..=n).map(|k| lo + step * k as f64).fold((f64::INFINITY, guess), |acc, w| {
        let c = cost(w);
        if c < acc.0 {
            (c, w)
        } else {
            acc
        }
    });
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (x1, x2) = (b - r * (b - a), a + r * (b - a));
        if cost(x1) < cost(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    0.5 * (a + b)
}

/// Compares the effective Rabi rate and coupling phase with the full model.
/// The schedule must be resonant (Δ = 0) and unchirped, e.g. a γ = π design.
pub fn calibrate_effective(pair: &DrivenPair, schedule: &PulseSchedule, dt: f64) -> Result<Calibration> {
    if schedule.detuning != 0.0 || schedule.chirp != 0.0 {
        return Err(Error::InvalidInput("calibration needs a resonant, unchirped schedule".into()));
    }
    let device = pair.without_decoherence();
    let h = ScheduledPair::new(&device, schedule);
    let aux = pair.index(1, 1);
    let bright = bright_state(pair, &schedule.model);
    let stride = ((0.05 / dt).round() as usize).max(1);
    let grid = TimeGrid::covering(0.0, schedule.duration, dt, stride)?;
    let obs = Observer { labels: vec![("a".into(), aux)], ..Observer::default() };
    let run = evolve_unitary(&h, &bright, &grid, &obs)?;
    let pops = run.population("a").unwrap_or_default();
    let g_effective = schedule.model.coupling();
    let g_full = fit_rabi(&run.times, pops, angular(g_effective)) / angular(1.0);

    let start = pair.index(0, 2);
    let half = 0.5 * schedule.duration;
    let full = evolve_state(&h, &basis_vector(pair.dim(), start), half, dt)?;
    let eff = effective_state(pair, schedule, start, half, dt)?;
    let (phase_full, phase_effective) = (full[aux].arg(), eff[aux].arg());
    Ok(Calibration {
        g_effective,
        g_full,
        relative_error: (g_full - g_effective) / g_effective,
        phase_effective,
        phase_full,
        phase_error: wrap_phase(phase_full - phase_effective),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorAxis {
    /// δ_d = δ·g.
    Drift,
    /// g → g(1 + ε).
    Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RobustnessRow {
    pub error: f64,
    pub f_toc: f64,
    pub f_conv: f64,
    pub delta: f64,
}

fn perturbed(schedule: &PulseSchedule, axis: ErrorAxis, x: f64, dt: f64) -> Result<CMatrix> {
    match axis {
        ErrorAxis::Drift => effective_logical_unitary(schedule, x * schedule.coupling(), 0.0, dt),
        ErrorAxis::Coupling => effective_logical_unitary(schedule, 0.0, x, dt),
    }
}

/// Robustness fidelities of a TOC and a conventional schedule across an
/// error grid, each against its own unperturbed effective gate.
pub fn robustness_scan(
    toc: &PulseSchedule,
    conventional: &PulseSchedule,
    axis: ErrorAxis,
    values: &[f64],
    dt: f64,
) -> Result<Vec<RobustnessRow>> {
    let ideal_toc = effective_logical_unitary(toc, 0.0, 0.0, dt)?;
    let ideal_conv = effective_logical_unitary(conventional, 0.0, 0.0, dt)?;
    values
        .par_iter()
        .map(|&x| {
            let f_toc = robustness_fidelity(&ideal_toc, &perturbed(toc, axis, x, dt)?);
            let f_conv = robustness_fidelity(&ideal_conv, &perturbed(conventional, axis, x, dt)?);
            Ok(RobustnessRow { error: x, f_toc, f_conv, delta: f_toc - f_conv })
        })
        .collect()
}

/// Closed full-model gate on the logical pair in the design frame. It is 2×2
/// but not exactly unitary: whatever leaks out of the pair is missing.
pub fn full_logical_gate(pair: &DrivenPair, schedule: &PulseSchedule, dt: f64) -> Result<CMatrix> {
    let device = pair.without_decoherence();
    let u = propagator(&ScheduledPair::new(&device, schedule), schedule.duration, dt)?;
    let ru = design_frame(pair, schedule).operator(pair.dim(), schedule.duration) * u;
    let (a, b) = logical_indices(pair);
    Ok(CMatrix::from_row_slice(2, 2, &[ru[(a, a)], ru[(a, b)], ru[(b, a)], ru[(b, b)]]))
}

fn perturbed_pair(pair: &DrivenPair, schedule: &PulseSchedule, axis: ErrorAxis, x: f64) -> DrivenPair {
    let mut p = pair.without_decoherence();
    match axis {
        ErrorAxis::Drift => {
            let shift = x * schedule.coupling();
            match p.modulated {
                Side::Left => p.left.drift += shift,
                Side::Right => p.right.drift += shift,
            }
        }
        ErrorAxis::Coupling => p.coupling *= 1.0 + x,
    }
    p
}

/// [`robustness_scan`] on the closed full pair model: the drift lands on the
/// modulated transmon and ε scales the bare exchange coupling. Because the
/// reference gate leaks slightly, a perturbation that leaks less can score
/// above 1.
pub fn robustness_scan_full(
    pair: &DrivenPair,
    toc: &PulseSchedule,
    conventional: &PulseSchedule,
    axis: ErrorAxis,
    values: &[f64],
    dt: f64,
) -> Result<Vec<RobustnessRow>> {
    let ideal_toc = full_logical_gate(pair, toc, dt)?;
    let ideal_conv = full_logical_gate(pair, conventional, dt)?;
    values
        .par_iter()
        .map(|&x| {
            let f_toc = robustness_fidelity(&ideal_toc, &full_logical_gate(&perturbed_pair(pair, toc, axis, x), toc, dt)?);
            let f_conv = robustness_fidelity(
                &ideal_conv,
                &full_logical_gate(&perturbed_pair(pair, conventional, axis, x), conventional, dt)?,
            );
            Ok(RobustnessRow { error: x, f_toc, f_conv, delta: f_toc - f_conv })
        })
        .collect()
}

/// `n` evenly spaced values on `[min, max]`.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Split of a gate infidelity into decoherence and coherent (high-order
/// rotating-term) parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfidelityBudget {
    pub decoherence: f64,
    pub high_order: f64,
    pub residual: f64,
}

impl InfidelityBudget {
    /// Small negative components (down to −1e−4) are estimation noise and
    /// reported as zero.
    pub fn clamped(self) -> Self {
        let clamp = |x: f64| if (-1e-4..0.0).contains(&x) { 0.0 } else { x };
        Self { decoherence: clamp(self.decoherence), high_order: clamp(self.high_order), residual: clamp(self.residual) }
    }
}

/// `closed`: fidelity without collapse operators, `open`: with them.
pub fn infidelity_budget(closed: f64, open: f64) -> InfidelityBudget {
    let decoherence = closed - open;
    let high_order = 1.0 - closed;
    InfidelityBudget { decoherence, high_order, residual: (1.0 - open) - decoherence - high_order }
}

/// Serializable complex matrix as rows of `[re, im]`.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GateReport {
    pub gate: String,
    pub schedule: PulseSchedule,
    pub ideal_unitary: Vec<Vec<[f64; 2]>>,
    pub state_fidelities: Vec<(String, f64)>,
    pub gate_fidelity: Option<f64>,
    pub budget: Option<InfidelityBudget>,
    pub wall_clock_s: f64,
}

/// Applies a design frame at `t` to a state and returns `⟨ψ|RρR†|ψ⟩`.
pub fn framed_fidelity(rho: &CMatrix, psi: &CVector, frame: &DesignFrame, t: f64) -> Result<f64> {
    state_fidelity(&frame.apply(rho, t), psi)
}
