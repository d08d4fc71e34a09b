//! Fixed-step RK4 propagation: state vectors, propagators and density
//! matrices under piecewise time-dependent Hamiltonians.

use rayon::prelude::*;
use serde::Serialize;

use crate::design::{DesignFrame, PulseSchedule};
use crate::device::{DriveTone, DrivenPair, ExchangeChannel};
use crate::effective::{effective_hamiltonian_1q, EffectiveThreeLevel};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_min_eigenvalue, max_abs, CMatrix, CVector, OdeState, SparseOp, TimeGrid, C64};

const NORM_TOLERANCE: f64 = 1e-6;
const UNITARITY_TOLERANCE: f64 = 1e-8;
const TRACE_TOLERANCE: f64 = 1e-8;
const HERMITICITY_TOLERANCE: f64 = 1e-10;
const POSITIVITY_TOLERANCE: f64 = 1e-8;

/// Time-dependent Hamiltonian in rad/ns, piecewise smooth between
/// breakpoints. Segment `k` covers `[b_{k-1}, b_k]`.
pub trait Hamiltonian: Sync {
    fn dim(&self) -> usize;

    /// Interior times at which the parameters jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Overwrites `out` with `H(t)` on segment `segment`.
    fn write(&self, t: f64, segment: usize, out: &mut SparseOp);
}

/// Constant Hamiltonian.
#[derive(Debug, Clone)]
pub struct StaticHamiltonian(pub SparseOp);

impl StaticHamiltonian {
    pub fn new(h: &CMatrix) -> Self {
        Self(SparseOp::from_dense(h))
    }
}

impl Hamiltonian for StaticHamiltonian {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn write(&self, _t: f64, _segment: usize, out: &mut SparseOp) {
        out.clear();
        for &(i, j, v) in self.0.entries() {
            out.push(i, j, v);
        }
    }
}

/// Dense Hamiltonian from a closure `(t, segment) -> H`.
pub struct FnHamiltonian<F> {
    dim: usize,
    breakpoints: Vec<f64>,
    f: F,
}

impl<F> FnHamiltonian<F>
where
    F: Fn(f64, usize) -> CMatrix + Sync,
{
    pub fn new(dim: usize, breakpoints: Vec<f64>, f: F) -> Self {
        Self { dim, breakpoints, f }
    }
}

impl<F> Hamiltonian for FnHamiltonian<F>
where
    F: Fn(f64, usize) -> CMatrix + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }

    fn write(&self, t: f64, segment: usize, out: &mut SparseOp) {
        out.clear();
        let h = (self.f)(t, segment);
        for j in 0..self.dim {
            for i in 0..self.dim {
                let v = h[(i, j)];
                if v != C64::default() {
                    out.push(i, j, v);
                }
            }
        }
    }
}

/// Full interaction-picture Hamiltonian of a driven pair following a
/// schedule's segments.
#[derive(Debug, Clone)]
pub struct ScheduledPair {
    dim: usize,
    bounds: Vec<f64>,
    channels: Vec<ExchangeChannel>,
    tones: Vec<[DriveTone; 2]>,
}

impl ScheduledPair {
    pub fn new(pair: &DrivenPair, schedule: &PulseSchedule) -> Self {
        Self {
            dim: pair.dim(),
            bounds: schedule.breakpoints(),
            channels: if pair.coupling == 0.0 { Vec::new() } else { pair.exchange_channels() },
            tones: schedule.segments.iter().map(|s| s.tones).collect(),
        }
    }

    /// Single-segment source driven by the pair's own tones.
    pub fn constant(pair: &DrivenPair) -> Self {
        Self {
            dim: pair.dim(),
            bounds: Vec::new(),
            channels: if pair.coupling == 0.0 { Vec::new() } else { pair.exchange_channels() },
            tones: vec![pair.tones],
        }
    }
}

impl Hamiltonian for ScheduledPair {
    fn dim(&self) -> usize {
        self.dim
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.bounds.clone()
    }

    fn write(&self, t: f64, segment: usize, out: &mut SparseOp) {
        out.clear();
        let [a, b] = &self.tones[segment.min(self.tones.len() - 1)];
        let drive = a.modulation(t) + b.modulation(t);
        for ch in &self.channels {
            out.push_hermitian_pair(ch.row, ch.col, C64::from_polar(ch.amplitude, ch.carrier * t + drive));
        }
    }
}

/// Embeds a Hamiltonian acting on one factor of `before ⊗ inner ⊗ after`.
pub struct Embedded<H> {
    pub inner: H,
    pub before: usize,
    pub after: usize,
}

impl<H: Hamiltonian> Hamiltonian for Embedded<H> {
    fn dim(&self) -> usize {
        self.before * self.inner.dim() * self.after
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn write(&self, t: f64, segment: usize, out: &mut SparseOp) {
        self.inner.write(t, segment, out);
        let entries = out.entries().to_vec();
        out.clear();
        let d = self.inner.dim();
        for b in 0..self.before {
            for a in 0..self.after {
                let map = |k: usize| (b * d + k) * self.after + a;
                for &(i, j, v) in &entries {
                    out.push(map(i), map(j), v);
                }
            }
        }
    }
}

/// Adds a constant term to another Hamiltonian.
pub struct WithStatic<H> {
    pub inner: H,
    pub extra: SparseOp,
}

impl<H: Hamiltonian> Hamiltonian for WithStatic<H> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn write(&self, t: f64, segment: usize, out: &mut SparseOp) {
        self.inner.write(t, segment, out);
        for &(i, j, v) in self.extra.entries() {
            out.push(i, j, v);
        }
    }
}

/// Effective three-level dynamics of a schedule on `{|ψ₊⟩, |ψ₋⟩, |a⟩}`,
/// with optional error injection.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    bounds: Vec<f64>,
    models: Vec<EffectiveThreeLevel>,
}

impl EffectiveHamiltonian {
    pub fn new(schedule: &PulseSchedule, drift_difference: f64, coupling_error: f64) -> Self {
        let models = (0..schedule.segments.len())
            .map(|k| EffectiveThreeLevel { drift_difference, coupling_error, ..schedule.segment_model(k) })
            .collect();
        Self { bounds: schedule.breakpoints(), models }
    }

    pub fn model(&self, segment: usize) -> &EffectiveThreeLevel {
        &self.models[segment.min(self.models.len() - 1)]
    }
}

impl Hamiltonian for EffectiveHamiltonian {
    fn dim(&self) -> usize {
        3
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.bounds.clone()
    }

    fn write(&self, t: f64, segment: usize, out: &mut SparseOp) {
        out.clear();
        let h = effective_hamiltonian_1q(self.model(segment), t);
        for j in 0..3 {
            for i in 0..3 {
                if h[(i, j)] != C64::default() {
                    out.push(i, j, h[(i, j)]);
                }
            }
        }
    }
}

/// What to record while propagating.
#[derive(Debug, Clone, Default)]
pub struct Observer {
    /// Labelled basis states whose populations are recorded; everything else
    /// is reported as `leak`.
    pub labels: Vec<(String, usize)>,
    /// Fixed final target for the fidelity series.
    pub target: Option<CVector>,
    /// Frame applied before comparing with the target.
    pub frame: DesignFrame,
    /// Effective model whose ξ(t), χ are logged.
    pub model: Option<EffectiveThreeLevel>,
    pub check_invariants: bool,
}

impl Observer {
    pub fn checked() -> Self {
        Self { check_invariants: true, ..Self::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Per-label population series, followed by `leak`.
    pub populations: Vec<(String, Vec<f64>)>,
    pub fidelity: Vec<f64>,
    /// ξ(t) when an effective model was attached.
    pub xi: Vec<f64>,
    pub chi: Option<f64>,
    #[serde(skip)]
    pub final_state: CMatrix,
}

impl EvolutionResult {
    fn new(obs: &Observer) -> Self {
        let mut populations: Vec<(String, Vec<f64>)> =
            obs.labels.iter().map(|(l, _)| (l.clone(), Vec::new())).collect();
        if !obs.labels.is_empty() {
            populations.push(("leak".to_string(), Vec::new()));
        }
        Self {
            times: Vec::new(),
            populations,
            fidelity: Vec::new(),
            xi: Vec::new(),
            chi: obs.model.map(|m| m.dressed_angles(0.0).1),
            final_state: CMatrix::zeros(0, 0),
        }
    }

    fn record(&mut self, obs: &Observer, t: f64, diag: impl Fn(usize) -> f64, fidelity: Option<f64>) {
        self.times.push(t);
        let mut total = 0.0;
        for (k, (_, idx)) in obs.labels.iter().enumerate() {
            let p = diag(*idx);
            total += p;
            self.populations[k].1.push(p);
        }
        if !obs.labels.is_empty() {
            let n = self.populations.len();
            self.populations[n - 1].1.push((1.0 - total).max(0.0));
        }
        if let Some(f) = fidelity {
            self.fidelity.push(f);
        }
        if let Some(m) = &obs.model {
            self.xi.push(m.dressed_angles(t).0);
        }
    }

    pub fn final_fidelity(&self) -> Option<f64> {
        self.fidelity.last().copied()
    }

    pub fn population(&self, label: &str) -> Option<&[f64]> {
        self.populations.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }
}

fn segments(h: &dyn Hamiltonian, t0: f64, t1: f64) -> Vec<(f64, f64, usize)> {
    let mut edges = vec![t0];
    let mut first = 0;
    for (k, b) in h.breakpoints().into_iter().enumerate() {
        if b <= t0 {
            first = k + 1;
        } else if b < t1 {
            edges.push(b);
        }
    }
    edges.push(t1);
    edges.windows(2).enumerate().map(|(k, w)| (w[0], w[1], first + k)).collect()
}

/// Integrates `y` over the grid, calling `on_sample` at t_start and every
/// sampled step. `rhs(t, segment, y, out)` must overwrite `out`.
fn integrate<R, S>(h: &dyn Hamiltonian, grid: &TimeGrid, y: &mut [C64], mut rhs: R, mut on_sample: S) -> Result<()>
where
    R: FnMut(f64, usize, &[C64], &mut [C64]),
    S: FnMut(f64, &[C64]) -> Result<()>,
{
    on_sample(grid.t_start, y)?;
    let mut ode = OdeState::new(y.len());
    for (a, b, seg) in segments(h, grid.t_start, grid.t_end) {
        if b <= a {
            continue;
        }
        let sub = TimeGrid::covering(a, b, grid.step, grid.stride)?;
        let mut f = |t: f64, y: &[C64], out: &mut [C64]| rhs(t, seg, y, out);
        for k in 0..sub.n_steps() {
            let t = sub.time(k);
            ode.step(&mut f, t, sub.time(k + 1) - t, y)?;
            if sub.is_sample(k + 1) {
                on_sample(sub.time(k + 1), y)?;
            }
        }
    }
    Ok(())
}

fn check_dim(h: &dyn Hamiltonian, got: usize) -> Result<()> {
    if h.dim() != got {
        return Err(Error::DimensionMismatch { expected: h.dim(), got });
    }
    Ok(())
}

/// Schrödinger evolution of a pure state over `grid` (step = maximum dt).
pub fn evolve_unitary(h: &dyn Hamiltonian, psi0: &CVector, grid: &TimeGrid, obs: &Observer) -> Result<EvolutionResult> {
    let n = psi0.len();
    check_dim(h, n)?;
    let norm0 = psi0.norm_squared();
    if (norm0 - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!("initial state norm² = {norm0}")));
    }
    let mut y: Vec<C64> = psi0.iter().copied().collect();
    let mut hbuf = SparseOp::new(n);
    let mut result = EvolutionResult::new(obs);
    let minus_i = C64::new(0.0, -1.0);
    integrate(
        h,
        grid,
        &mut y,
        |t, seg, y, out| {
            h.write(t, seg, &mut hbuf);
            out.fill(C64::default());
            hbuf.apply_vec(y, minus_i, out);
        },
        |t, y| {
            let norm: f64 = y.iter().map(|c| c.norm_sqr()).sum();
            if (norm - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::StepSize { what: "state norm", drift: norm - 1.0, t });
            }
            let fidelity = obs.target.as_ref().map(|target| {
                let psi = CVector::from_column_slice(y);
                let r = obs.frame.operator(n, t);
                (target.adjoint() * r * psi)[(0, 0)].norm_sqr()
            });
            result.record(obs, t, |i| y[i].norm_sqr(), fidelity);
            Ok(())
        },
    )?;
    let psi = CVector::from_column_slice(&y);
    result.final_state = &psi * psi.adjoint();
    Ok(result)
}

/// Final state of a Schrödinger evolution from `t = 0` to `t_end`.
pub fn evolve_state(h: &dyn Hamiltonian, psi0: &CVector, t_end: f64, dt: f64) -> Result<CVector> {
    let n = psi0.len();
    check_dim(h, n)?;
    let grid = TimeGrid::covering(0.0, t_end, dt, usize::MAX)?;
    let mut y: Vec<C64> = psi0.iter().copied().collect();
    let mut hbuf = SparseOp::new(n);
    let minus_i = C64::new(0.0, -1.0);
    integrate(
        h,
        &grid,
        &mut y,
        |t, seg, y, out| {
            h.write(t, seg, &mut hbuf);
            out.fill(C64::default());
            hbuf.apply_vec(y, minus_i, out);
        },
        |_, _| Ok(()),
    )?;
    Ok(CVector::from_column_slice(&y))
}

/// Propagator `U(τ, 0)` of a closed system.
pub fn propagator(h: &dyn Hamiltonian, tau: f64, dt: f64) -> Result<CMatrix> {
    let n = h.dim();
    if tau == 0.0 {
        return Ok(CMatrix::identity(n, n));
    }
    let grid = TimeGrid::covering(0.0, tau, dt, usize::MAX)?;
    let mut u = CMatrix::identity(n, n);
    let mut hbuf = SparseOp::new(n);
    let minus_i = C64::new(0.0, -1.0);
    integrate(
        h,
        &grid,
        u.as_mut_slice(),
        |t, seg, y, out| {
            h.write(t, seg, &mut hbuf);
            out.fill(C64::default());
            hbuf.left_mul_into(y, minus_i, out);
        },
        |_, _| Ok(()),
    )?;
    let drift = max_abs(&(u.adjoint() * &u - CMatrix::identity(n, n)));
    if drift > UNITARITY_TOLERANCE {
        return Err(Error::StepSize { what: "propagator unitarity", drift, t: tau });
    }
    Ok(u)
}

/// Dissipative part of a Lindblad generator in sparse form.
#[derive(Debug, Clone)]
struct Dissipator {
    ops: Vec<(SparseOp, SparseOp)>,
    damping: SparseOp,
}

impl Dissipator {
    fn new(collapse: &[CMatrix], n: usize) -> Result<Self> {
        let mut total = CMatrix::zeros(n, n);
        let mut ops = Vec::new();
        for l in collapse {
            if l.nrows() != n || l.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: l.nrows() });
            }
            let s = SparseOp::from_dense(l);
            if s.is_zero() {
                continue;
            }
            total += l.adjoint() * l;
            let adj = s.adjoint();
            ops.push((s, adj));
        }
        Ok(Self { ops, damping: SparseOp::from_dense(&total) })
    }
}

fn lindblad_rhs<'a>(
    h: &'a dyn Hamiltonian,
    diss: &'a Dissipator,
) -> impl FnMut(f64, usize, &[C64], &mut [C64]) + 'a {
    let n = h.dim();
    let mut hbuf = SparseOp::new(n);
    let mut tmp = vec![C64::default(); n * n];
    let (mi, pi, mhalf) = (C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(-0.5, 0.0));
    let one = C64::new(1.0, 0.0);
    move |t, seg, rho, out| {
        h.write(t, seg, &mut hbuf);
        out.fill(C64::default());
        hbuf.left_mul_into(rho, mi, out);
        hbuf.right_mul_into(rho, pi, out);
        if diss.ops.is_empty() {
            return;
        }
        diss.damping.left_mul_into(rho, mhalf, out);
        diss.damping.right_mul_into(rho, mhalf, out);
        for (l, ladj) in &diss.ops {
            tmp.fill(C64::default());
            l.left_mul_into(rho, one, &mut tmp);
            ladj.right_mul_into(&tmp, one, out);
        }
    }
}

fn check_density(rho: &CMatrix, t: f64) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
        return Err(Error::StateInvariant { what: format!("trace = {tr}"), t });
    }
    let herm = max_abs(&(rho - rho.adjoint()));
    if herm > HERMITICITY_TOLERANCE {
        return Err(Error::StateInvariant { what: format!("‖ρ − ρ†‖ = {herm:e}"), t });
    }
    let min = hermitian_min_eigenvalue(rho);
    if min < -POSITIVITY_TOLERANCE {
        return Err(Error::StateInvariant { what: format!("min eigenvalue = {min:e}"), t });
    }
    Ok(())
}

/// Lindblad evolution `dρ/dt = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ})` over `grid`.
pub fn evolve_lindblad(
    h: &dyn Hamiltonian,
    collapse: &[CMatrix],
    rho0: &CMatrix,
    grid: &TimeGrid,
    obs: &Observer,
) -> Result<EvolutionResult> {
    let n = rho0.nrows();
    check_dim(h, n)?;
    if obs.check_invariants {
        check_density(rho0, grid.t_start)?;
    }
    let diss = Dissipator::new(collapse, n)?;
    let mut rho = rho0.clone();
    let mut result = EvolutionResult::new(obs);
    integrate(h, grid, rho.as_mut_slice(), lindblad_rhs(h, &diss), |t, y| {
        let m = CMatrix::from_column_slice(n, n, y);
        if obs.check_invariants {
            check_density(&m, t)?;
        }
        let fidelity = obs.target.as_ref().map(|target| {
            let r = obs.frame.operator(n, t);
            let v = r.adjoint() * target;
            (v.adjoint() * &m * &v)[(0, 0)].re
        });
        result.record(obs, t, |i| m[(i, i)].re, fidelity);
        Ok(())
    })?;
    result.final_state = rho;
    Ok(result)
}

/// Applies the Lindblad map over `[0, t_end]` to each input operator (not
/// necessarily density matrices), in parallel. Output order matches input.
pub fn lindblad_map(
    h: &dyn Hamiltonian,
    collapse: &[CMatrix],
    inputs: &[CMatrix],
    t_end: f64,
    dt: f64,
) -> Result<Vec<CMatrix>> {
    if t_end == 0.0 {
        return Ok(inputs.to_vec());
    }
    let grid = TimeGrid::covering(0.0, t_end, dt, usize::MAX)?;
    let (_, mut runs) = lindblad_trajectories(h, collapse, inputs, &grid)?;
    Ok(runs.iter_mut().map(|r| r.pop().expect("final sample")).collect())
}

/// Like [`lindblad_map`] but keeps every sampled operator. Returns the
/// sample times and, per input, the operator at each sample.
pub fn lindblad_trajectories(
    h: &dyn Hamiltonian,
    collapse: &[CMatrix],
    inputs: &[CMatrix],
    grid: &TimeGrid,
) -> Result<(Vec<f64>, Vec<Vec<CMatrix>>)> {
    let n = h.dim();
    let diss = Dissipator::new(collapse, n)?;
    let runs: Vec<(Vec<f64>, Vec<CMatrix>)> = inputs
        .par_iter()
        .map(|x| {
            if x.nrows() != n || x.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.nrows() });
            }
            let mut y = x.clone();
            let (mut times, mut samples) = (Vec::new(), Vec::new());
            integrate(h, grid, y.as_mut_slice(), lindblad_rhs(h, &diss), |t, y| {
                times.push(t);
                samples.push(CMatrix::from_column_slice(n, n, y));
                Ok(())
            })?;
            Ok((times, samples))
        })
        .collect::<Result<_>>()?;
    let times = runs.first().map(|r| r.0.clone()).unwrap_or_default();
    Ok((times, runs.into_iter().map(|r| r.1).collect()))
}
