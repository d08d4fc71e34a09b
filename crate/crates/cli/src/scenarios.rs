//! The named scenarios. Each one builds its tables, report and plots in
//! memory; writing is left to [`crate::output`].

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use holosim_core::design::{
    cp_schedule, design_conventional_gate, design_cp_gate, design_single_qubit_gate, ideal_unitary_1q,
    ideal_unitary_2q, loop_time, solve_toc, CpGateDesign, PulseSchedule, SingleQubitGateSpec,
};
use holosim_core::device::{DrivenPair, TransmonSpec};
use holosim_core::metrics::{
    angle_grid, calibrate_effective, cp_channel, cp_register_fidelity, cp_trajectory, effective_full_overlap,
    fibonacci_lattice, infidelity_budget, linspace, matrix_rows, robustness_scan, robustness_scan_full, single_qubit_channel, sq_trajectory,
    ErrorAxis, GateReport, LogicalChannel, RunOptions,
};
use holosim_core::numerics::{CMatrix, CVector, C64};
use holosim_core::Result;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{RotationConfig, ScenarioConfig};
use crate::output::{Cell, ScenarioOutput, Table};
use crate::plot::Plot;

pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Single-core wall clock of a default run, in seconds.
    pub runtime_s: f64,
}

/// All scenarios, in alphabetical order.
pub const SCENARIOS: [ScenarioInfo; 10] = [
    ScenarioInfo {
        name: "calibrate-effective",
        description: "effective vs full model: fitted R_x(π) coupling and phase, gate-end overlaps",
        runtime_s: 1.0,
    },
    ScenarioInfo {
        name: "cp-dynamics",
        description: "control-phase populations and fidelity vs time from (|01⟩+|11⟩)/√2",
        runtime_s: 3.0,
    },
    ScenarioInfo {
        name: "cp-gate-fidelity",
        description: "control-phase fidelity over the product-input lattice and its average",
        runtime_s: 9.0,
    },
    ScenarioInfo {
        name: "gate-time-curve",
        description: "time-optimal and conventional gate times τ/τ₀ vs rotation angle",
        runtime_s: 0.1,
    },
    ScenarioInfo {
        name: "infidelity-budget",
        description: "decoherence and high-order split of the R_x and R_z infidelities",
        runtime_s: 19.0,
    },
    ScenarioInfo {
        name: "robustness-coupling",
        description: "F_toc − F_conv vs coupling error ε for R_x and R_z",
        runtime_s: 7.0,
    },
    ScenarioInfo {
        name: "robustness-drift",
        description: "F_toc − F_conv vs frequency drift δ (δ_d = δ·g) for R_x and R_z",
        runtime_s: 28.0,
    },
    ScenarioInfo {
        name: "sq-dynamics-x",
        description: "R_x(π/2) populations and fidelity vs time from |0⟩_L",
        runtime_s: 5.0,
    },
    ScenarioInfo {
        name: "sq-dynamics-z",
        description: "R_z(π/2) populations and fidelity vs time from (|0⟩_L+|1⟩_L)/√2",
        runtime_s: 2.0,
    },
    ScenarioInfo {
        name: "sq-gate-fidelity",
        description: "R_x and R_z fidelity vs input angle θ₁ and the averaged gate fidelities",
        runtime_s: 19.0,
    },
];

pub fn find(name: &str) -> Option<&'static ScenarioInfo> {
    SCENARIOS.iter().find(|s| s.name == name)
}

pub fn run_scenario(name: &str, cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    match name {
        "calibrate-effective" => calibrate(cfg),
        "cp-dynamics" => cp_dynamics(cfg),
        "cp-gate-fidelity" => cp_gate_fidelity(cfg),
        "gate-time-curve" => gate_time_curve(cfg),
        "infidelity-budget" => budget(cfg),
        "robustness-coupling" => robustness(cfg, ErrorAxis::Coupling),
        "robustness-drift" => robustness(cfg, ErrorAxis::Drift),
        "sq-dynamics-x" => sq_dynamics(cfg, Axis::X),
        "sq-dynamics-z" => sq_dynamics(cfg, Axis::Z),
        "sq-gate-fidelity" => sq_gate_fidelity(cfg),
        other => Err(holosim_core::Error::InvalidInput(format!("unknown scenario `{other}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Z,
}

impl Axis {
    fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Z => "z",
        }
    }

    fn gate(self) -> &'static str {
        match self {
            Axis::X => "R_x",
            Axis::Z => "R_z",
        }
    }

    fn rotation(self, cfg: &ScenarioConfig) -> RotationConfig {
        match self {
            Axis::X => cfg.gate.x,
            Axis::Z => cfg.gate.z,
        }
    }

    fn spec(self, cfg: &ScenarioConfig) -> SingleQubitGateSpec {
        let angle = self.rotation(cfg).angle;
        match self {
            Axis::X => SingleQubitGateSpec::rx(angle),
            Axis::Z => SingleQubitGateSpec::rz(angle),
        }
    }

    /// Prepared input: |0⟩_L for R_x, the equal superposition for R_z.
    fn input(self) -> CVector {
        match self {
            Axis::X => real(&[1.0, 0.0]),
            Axis::Z => real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
        }
    }
}

fn real(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}

fn options(cfg: &ScenarioConfig) -> RunOptions {
    RunOptions { dt: cfg.simulation.dt_ns(), decoherence: cfg.simulation.decoherence }
}

fn closed(cfg: &ScenarioConfig) -> RunOptions {
    RunOptions { decoherence: false, ..options(cfg) }
}

struct SingleQubit {
    axis: Axis,
    pair: DrivenPair,
    spec: SingleQubitGateSpec,
    schedule: PulseSchedule,
    target: CMatrix,
}

fn single_qubit(cfg: &ScenarioConfig, axis: Axis, levels: usize) -> Result<SingleQubit> {
    let pair = cfg.device.single_qubit_pair(levels);
    let r = axis.rotation(cfg);
    let spec = axis.spec(cfg);
    let schedule = design_single_qubit_gate(&spec, &pair, r.detuning, r.beta1)?;
    Ok(SingleQubit { axis, pair, spec, schedule, target: ideal_unitary_1q(&spec) })
}

impl SingleQubit {
    fn report(&self, state: Vec<(String, f64)>, gate: Option<f64>, seconds: f64) -> GateReport {
        GateReport {
            gate: format!("{}({:.6})", self.axis.gate(), self.spec.gamma),
            schedule: self.schedule.clone(),
            ideal_unitary: matrix_rows(&self.target),
            state_fidelities: state,
            gate_fidelity: gate,
            budget: None,
            wall_clock_s: seconds,
        }
    }
}

struct ControlPhase {
    pair: DrivenPair,
    spectators: [TransmonSpec; 2],
    design: CpGateDesign,
    schedule: PulseSchedule,
    target: CMatrix,
}

fn control_phase(cfg: &ScenarioConfig) -> Result<ControlPhase> {
    let s = &cfg.simulation;
    let pair = cfg.device.cp_pair(s.cp_levels);
    let design = design_cp_gate(cfg.gate.cp.gamma, &pair, cfg.gate.cp.beta3)?;
    let schedule = cp_schedule(&design, &pair)?;
    Ok(ControlPhase {
        spectators: cfg.device.spectators(s.spectator_levels),
        target: ideal_unitary_2q(design.gamma),
        pair,
        design,
        schedule,
    })
}

impl ControlPhase {
    fn report(&self, state: Vec<(String, f64)>, gate: Option<f64>, seconds: f64) -> GateReport {
        GateReport {
            gate: format!("CP({:.6})", self.design.gamma),
            schedule: self.schedule.clone(),
            ideal_unitary: matrix_rows(&self.target),
            state_fidelities: state,
            gate_fidelity: gate,
            budget: None,
            wall_clock_s: seconds,
        }
    }
}

/// (|01⟩ + |11⟩)/√2 in the logical order 00, 01, 10, 11.
fn cp_input() -> CVector {
    real(&[0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2])
}

fn product_input(a: f64, b: f64) -> CVector {
    let (c1, s1, c2, s2) = (a.cos(), a.sin(), b.cos(), b.sin());
    real(&[c1 * c2, c1 * s2, s1 * c2, s1 * s2])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn gate_time_curve(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let x = single_qubit(cfg, Axis::X, 3)?;
    let g = x.schedule.coupling();
    let tau0 = loop_time(g);
    let ratio = cfg.scan.detuning_ratio;
    let n = cfg.scan.angle_points;
    let angles: Vec<f64> = (1..=n).map(|k| PI * k as f64 / n as f64).collect();
    let rows: Vec<(f64, f64, f64)> = angles
        .par_iter()
        .map(|&gamma| {
            let toc = solve_toc(gamma, ratio * g, g)?;
            let conv = design_conventional_gate(&SingleQubitGateSpec::rx(gamma), &x.pair, g)?;
            Ok((gamma, toc.tau / tau0, conv.duration / tau0))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new("gate_time_curve", &["angle_rad", "tau_toc_over_tau0", "tau_conv_over_tau0"]);
    for &(a, t, c) in &rows {
        table.push(vec![a.into(), t.into(), c.into()]);
    }
    let col = |k: usize| rows.iter().map(|r| [r.0, r.1, r.2][k]).collect::<Vec<_>>();
    let plot = Plot::new("gate_time_curve", "Gate time vs rotation angle", "angle (rad)", "τ/τ₀")
        .series("time-optimal", &col(0), &col(1))
        .series("conventional", &col(0), &col(2));
    Ok(ScenarioOutput {
        tables: vec![table],
        report: json!({ "coupling_mhz": g, "tau0_ns": tau0, "detuning_ratio": ratio, "points": n }),
        plots: vec![plot],
    })
}

fn robustness(cfg: &ScenarioConfig, axis: ErrorAxis) -> Result<ScenarioOutput> {
    let values = linspace(cfg.scan.min, cfg.scan.max, cfg.scan.points);
    let dt = cfg.simulation.dt_ns();
    let scan = |a: Axis| -> Result<(SingleQubit, PulseSchedule, Vec<_>)> {
        let toc = single_qubit(cfg, a, if cfg.scan.full_model { cfg.simulation.sq_levels } else { 3 })?;
        let conv = design_conventional_gate(&a.spec(cfg), &toc.pair, toc.schedule.coupling())?;
        let rows = if cfg.scan.full_model {
            robustness_scan_full(&toc.pair, &toc.schedule, &conv, axis, &values, dt)?
        } else {
            robustness_scan(&toc.schedule, &conv, axis, &values, dt)?
        };
        Ok((toc, conv, rows))
    };
    let (x, z) = rayon::join(|| scan(Axis::X), || scan(Axis::Z));
    let (x, z) = (x?, z?);
    let (stem, variable) = match axis {
        ErrorAxis::Drift => ("robustness_drift", "delta"),
        ErrorAxis::Coupling => ("robustness_coupling", "epsilon"),
    };
    let mut table = Table::new(stem, &[variable, "f_toc_x", "f_conv_x", "dF_x", "f_toc_z", "f_conv_z", "dF_z"]);
    for (rx, rz) in x.2.iter().zip(&z.2) {
        table.push(vec![rx.error.into(), rx.f_toc.into(), rx.f_conv.into(), rx.delta.into(), rz.f_toc.into(), rz.f_conv.into(), rz.delta.into()]);
    }
    let summary = |(toc, conv, rows): &(SingleQubit, PulseSchedule, Vec<holosim_core::metrics::RobustnessRow>)| {
        json!({
            "gate": toc.axis.gate(),
            "tau_toc_ns": toc.schedule.duration,
            "tau_conv_ns": conv.duration,
            "mean_dF": mean(&rows.iter().map(|r| r.delta).collect::<Vec<_>>()),
            "min_dF": rows.iter().map(|r| r.delta).fold(f64::INFINITY, f64::min),
            "max_dF": rows.iter().map(|r| r.delta).fold(f64::NEG_INFINITY, f64::max),
        })
    };
    let report = json!({ "axis": axis, "model": if cfg.scan.full_model { "full" } else { "effective" }, "x": summary(&x), "z": summary(&z) });
    let plot = Plot::new(stem, "Fidelity difference F_toc − F_conv", variable, "ΔF")
        .series("R_x", &values, &table.column("dF_x").unwrap_or_default())
        .series("R_z", &values, &table.column("dF_z").unwrap_or_default());
    Ok(ScenarioOutput { tables: vec![table], report, plots: vec![plot] })
}

fn sq_dynamics(cfg: &ScenarioConfig, axis: Axis) -> Result<ScenarioOutput> {
    let start = Instant::now();
    let g = single_qubit(cfg, axis, cfg.simulation.sq_levels)?;
    let a = axis.input();
    let res = sq_trajectory(&g.pair, &g.schedule, &a, &g.target, &options(cfg), cfg.simulation.stride())?;
    let stem = format!("sq_dynamics_{}", axis.label());
    let mut table = Table::new(&stem, &["t_ns", "p0", "p1", "pa", "leak", "fidelity"]);
    let pop = |l: &str| res.population(l).unwrap_or_default().to_vec();
    let (p0, p1, pa, leak) = (pop("0"), pop("1"), pop("a"), pop("leak"));
    for k in 0..res.times.len() {
        table.push(vec![res.times[k].into(), p0[k].into(), p1[k].into(), pa[k].into(), leak[k].into(), res.fidelity[k].into()]);
    }
    let fidelity = res.final_fidelity().unwrap_or(f64::NAN);
    let report = g.report(vec![("input".into(), fidelity)], None, start.elapsed().as_secs_f64());
    let plot = Plot::new(&stem, &format!("{} dynamics", axis.gate()), "t (ns)", "population / fidelity")
        .series("|0⟩_L", &res.times, &p0)
        .series("|1⟩_L", &res.times, &p1)
        .series("|a⟩", &res.times, &pa)
        .series("fidelity", &res.times, &res.fidelity);
    Ok(ScenarioOutput { tables: vec![table], report: json!(report), plots: vec![plot] })
}

fn sq_gate_fidelity(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let grid = angle_grid(cfg.simulation.inputs_1q);
    let run = |axis: Axis| -> Result<(GateReport, Vec<f64>)> {
        let start = Instant::now();
        let g = single_qubit(cfg, axis, cfg.simulation.sq_levels)?;
        let channel = single_qubit_channel(&g.pair, &g.schedule, &options(cfg))?;
        let f: Vec<f64> = grid.iter().map(|&t| channel.fidelity(&real(&[t.cos(), t.sin()]), &g.target)).collect();
        let state = channel.fidelity(&axis.input(), &g.target);
        Ok((g.report(vec![("input".into(), state)], Some(mean(&f)), start.elapsed().as_secs_f64()), f))
    };
    let (x, z) = rayon::join(|| run(Axis::X), || run(Axis::Z));
    let ((rx, fx), (rz, fz)) = (x?, z?);
    let mut table = Table::new("sq_gate_fidelity", &["theta_rad", "fidelity_x", "fidelity_z"]);
    for k in 0..grid.len() {
        table.push(vec![grid[k].into(), fx[k].into(), fz[k].into()]);
    }
    let plot = Plot::new("sq_gate_fidelity", "Fidelity vs input angle", "θ₁ (rad)", "fidelity")
        .series("R_x", &grid, &fx)
        .series("R_z", &grid, &fz);
    Ok(ScenarioOutput { tables: vec![table], report: json!([rx, rz]), plots: vec![plot] })
}

fn cp_dynamics(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let start = Instant::now();
    let cp = control_phase(cfg)?;
    let a = cp_input();
    let opts = options(cfg);
    let res = cp_trajectory(&cp.pair, &cp.spectators, &cp.schedule, &a, &cp.target, &opts, cfg.simulation.stride())?;
    let labels = ["00", "01", "10", "11", "a", "leak"];
    let pops: Vec<Vec<f64>> = labels.iter().map(|l| res.population(l).unwrap_or_default().to_vec()).collect();
    let mut table = Table::new("cp_dynamics", &["t_ns", "p00", "p01", "p10", "p11", "pa", "leak", "fidelity"]);
    for k in 0..res.times.len() {
        let mut row: Vec<Cell> = vec![res.times[k].into()];
        row.extend(pops.iter().map(|p| Cell::Num(p[k])));
        row.push(res.fidelity[k].into());
        table.push(row);
    }
    let mut state = vec![("input".to_string(), res.final_fidelity().unwrap_or(f64::NAN))];
    if cfg.simulation.register_check {
        let f = cp_register_fidelity(&cp.pair, &cp.spectators, &cp.schedule, &a, &cp.target, &opts)?;
        state.push(("input_four_transmon".into(), f));
    }
    let report = cp.report(state, None, start.elapsed().as_secs_f64());
    let mut plot = Plot::new("cp_dynamics", "Control-phase dynamics", "t (ns)", "population / fidelity");
    for (label, p) in labels.iter().zip(&pops).skip(1).take(4) {
        plot = plot.series(&format!("|{label}⟩"), &res.times, p);
    }
    plot = plot.series("fidelity", &res.times, &res.fidelity);
    Ok(ScenarioOutput { tables: vec![table], report: json!({ "gate": report, "design": cp.design }), plots: vec![plot] })
}

fn cp_gate_fidelity(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let start = Instant::now();
    let cp = control_phase(cfg)?;
    let channel = cp_channel(&cp.pair, &cp.spectators, &cp.schedule, &options(cfg))?;
    let lattice = fibonacci_lattice(cfg.simulation.inputs_2q);
    let f: Vec<f64> = lattice.par_iter().map(|&(a, b)| channel.fidelity(&product_input(a, b), &cp.target)).collect();
    let mut table = Table::new("cp_gate_fidelity", &["theta1_rad", "theta2_rad", "fidelity"]);
    for (&(a, b), &v) in lattice.iter().zip(&f) {
        table.push(vec![a.into(), b.into(), v.into()]);
    }
    let state = channel.fidelity(&cp_input(), &cp.target);
    let report = cp.report(vec![("input".into(), state)], Some(mean(&f)), start.elapsed().as_secs_f64());
    Ok(ScenarioOutput { tables: vec![table], report: json!({ "gate": report, "design": cp.design }), plots: Vec::new() })
}

fn budget(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let grid = angle_grid(cfg.simulation.inputs_1q);
    let jobs = [(Axis::X, true), (Axis::X, false), (Axis::Z, true), (Axis::Z, false)];
    let channels: Vec<(LogicalChannel, f64)> = jobs
        .par_iter()
        .map(|&(axis, open)| {
            let start = Instant::now();
            let g = single_qubit(cfg, axis, cfg.simulation.sq_levels)?;
            let opts = if open { options(cfg) } else { closed(cfg) };
            Ok((single_qubit_channel(&g.pair, &g.schedule, &opts)?, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(
        "infidelity_budget",
        &["gate", "level", "f_open", "f_closed", "decoherence", "high_order", "residual"],
    );
    let mut reports = Vec::new();
    for (k, axis) in [Axis::X, Axis::Z].into_iter().enumerate() {
        let g = single_qubit(cfg, axis, cfg.simulation.sq_levels)?;
        let (open, closed) = (&channels[2 * k].0, &channels[2 * k + 1].0);
        let avg = |c: &LogicalChannel| mean(&grid.iter().map(|&t| c.fidelity(&real(&[t.cos(), t.sin()]), &g.target)).collect::<Vec<_>>());
        let (go, gc) = (avg(open), avg(closed));
        let (so, sc) = (open.fidelity(&axis.input(), &g.target), closed.fidelity(&axis.input(), &g.target));
        let gate_budget = infidelity_budget(gc, go).clamped();
        let state_budget = infidelity_budget(sc, so).clamped();
        for (level, fo, fc, b) in [("gate", go, gc, gate_budget), ("state", so, sc, state_budget)] {
            table.push(vec![
                axis.gate().into(),
                level.into(),
                fo.into(),
                fc.into(),
                b.decoherence.into(),
                b.high_order.into(),
                b.residual.into(),
            ]);
        }
        let seconds = channels[2 * k].1 + channels[2 * k + 1].1;
        let mut report = g.report(vec![("input".into(), so), ("input_closed".into(), sc)], Some(go), seconds);
        report.budget = Some(gate_budget);
        reports.push(json!({ "gate": report, "state_budget": state_budget }));
    }
    Ok(ScenarioOutput { tables: vec![table], report: json!(reports), plots: Vec::new() })
}

fn calibrate(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let dt = cfg.simulation.dt_ns();
    let levels = cfg.simulation.sq_levels;
    let pair = cfg.device.single_qubit_pair(levels);
    let full_loop = design_single_qubit_gate(&SingleQubitGateSpec::rx(PI), &pair, 0.0, cfg.gate.x.beta1)?;
    let (c, overlaps) = rayon::join(
        || calibrate_effective(&pair, &full_loop, dt),
        || {
            [Axis::X, Axis::Z]
                .par_iter()
                .map(|&a| {
                    let g = single_qubit(cfg, a, levels)?;
                    Ok((a.gate(), effective_full_overlap(&g.pair, &g.schedule, dt)?))
                })
                .collect::<Result<Vec<_>>>()
        },
    );
    let (c, overlaps) = (c?, overlaps?);
    let mut cal = Table::new(
        "calibration",
        &["g_effective_mhz", "g_full_mhz", "relative_error", "phase_effective_rad", "phase_full_rad", "phase_error_rad"],
    );
    cal.push(vec![
        c.g_effective.into(),
        c.g_full.into(),
        c.relative_error.into(),
        c.phase_effective.into(),
        c.phase_full.into(),
        c.phase_error.into(),
    ]);
    let mut ov = Table::new("effective_overlap", &["gate", "overlap"]);
    for (gate, o) in &overlaps {
        ov.push(vec![(*gate).into(), (*o).into()]);
    }
    let report = json!({
        "calibration": c,
        "overlaps": overlaps.iter().map(|(g, o)| json!({ "gate": g, "overlap": o })).collect::<Vec<Value>>(),
    });
    Ok(ScenarioOutput { tables: vec![cal, ov], report, plots: Vec::new() })
}
