//! Scenario configuration: a TOML file whose every key has a default, so an
//! empty file (or no file) yields the reference parameter set.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use holosim_core::device::{presets, DriveTone, DrivenPair, Side, TransmonSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Optional scenario name; must agree with the command line when both are given.
    pub scenario: Option<String>,
    pub device: DeviceConfig,
    pub gate: GateConfig,
    pub simulation: SimulationConfig,
    pub scan: ScanConfig,
    pub output: OutputConfig,
}

/// One transmon. Frequencies and rates in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonConfig {
    pub frequency: f64,
    pub anharmonicity: f64,
    pub drift: f64,
    pub decay: f64,
    pub dephasing: f64,
}

impl TransmonConfig {
    fn preset(frequency: f64, anharmonicity: f64) -> Self {
        Self { frequency, anharmonicity, drift: 0.0, decay: presets::RATE, dephasing: presets::RATE }
    }

    pub fn spec(&self, levels: usize) -> TransmonSpec {
        TransmonSpec {
            frequency: self.frequency,
            anharmonicity: self.anharmonicity,
            levels,
            drift: self.drift,
            decay: self.decay,
            dephasing: self.dephasing,
        }
    }
}

/// Four-transmon chain T1–T2–T3–T4. T1–T2 carry the single-qubit gates, T2–T3
/// the control phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub t1: TransmonConfig,
    pub t2: TransmonConfig,
    pub t3: TransmonConfig,
    pub t4: TransmonConfig,
    pub g12: f64,
    pub g23: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            t1: TransmonConfig::preset(5500.0, 320.0),
            t2: TransmonConfig::preset(5000.0, 300.0),
            t3: TransmonConfig::preset(5560.0, 330.0),
            t4: TransmonConfig::preset(5060.0, 310.0),
            g12: 12.0,
            g23: 10.0,
        }
    }
}

impl DeviceConfig {
    /// T1–T2 pair with T1 modulated.
    pub fn single_qubit_pair(&self, levels: usize) -> DrivenPair {
        DrivenPair {
            left: self.t1.spec(levels),
            right: self.t2.spec(levels),
            coupling: self.g12,
            modulated: Side::Left,
            tones: [DriveTone::off(); 2],
        }
    }

    /// T2–T3 pair with T3 modulated.
    pub fn cp_pair(&self, levels: usize) -> DrivenPair {
        DrivenPair {
            left: self.t2.spec(levels),
            right: self.t3.spec(levels),
            coupling: self.g23,
            modulated: Side::Right,
            tones: [DriveTone::off(); 2],
        }
    }

    pub fn spectators(&self, levels: usize) -> [TransmonSpec; 2] {
        [self.t1.spec(levels), self.t4.spec(levels)]
    }
}

/// Single-qubit gate: rotation angle, design detuning Δ (MHz) and first
/// modulation amplitude β₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationConfig {
    pub angle: f64,
    pub detuning: f64,
    pub beta1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpConfig {
    pub gamma: f64,
    pub beta3: f64,
}

impl Default for CpConfig {
    fn default() -> Self {
        Self { gamma: FRAC_PI_2, beta3: 1.54 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub x: RotationConfig,
    pub z: RotationConfig,
    pub cp: CpConfig,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            x: RotationConfig { angle: FRAC_PI_2, detuning: 0.0, beta1: 1.58 },
            z: RotationConfig { angle: FRAC_PI_2, detuning: 18.0, beta1: 1.98 },
            cp: CpConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    /// RK4 step in ps.
    pub dt_ps: f64,
    /// Time-series sampling interval in ps for the dynamics tables.
    pub sample_ps: f64,
    pub sq_levels: usize,
    pub cp_levels: usize,
    pub spectator_levels: usize,
    pub decoherence: bool,
    /// Also run the full four-transmon register in cp-dynamics.
    pub register_check: bool,
    pub inputs_1q: usize,
    pub inputs_2q: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            dt_ps: 1.0,
            sample_ps: 50.0,
            sq_levels: 5,
            cp_levels: 4,
            spectator_levels: 3,
            decoherence: true,
            register_check: false,
            inputs_1q: 1001,
            inputs_2q: 10001,
        }
    }
}

impl SimulationConfig {
    pub fn dt_ns(&self) -> f64 {
        self.dt_ps * 1e-3
    }

    /// Steps between recorded samples.
    pub fn stride(&self) -> usize {
        ((self.sample_ps / self.dt_ps).round() as usize).max(1)
    }
}

/// Robustness scans use `[min, max]` with `points` values; the gate-time curve
/// uses `angle_points` angles `kπ/N` and the ratio Δ/g.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub angle_points: usize,
    pub detuning_ratio: f64,
    /// Run the robustness scans on the closed full pair model instead of the
    /// two-level effective model.
    pub full_model: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { min: -0.1, max: 0.1, points: 41, angle_points: 180, detuning_ratio: 0.0, full_model: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Falls back to `$HOLOSIM_OUT`, then `holosim-out`.
    pub dir: Option<String>,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, formats: vec![Format::Csv, Format::Json] }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            device: DeviceConfig::default(),
            gate: GateConfig::default(),
            simulation: SimulationConfig::default(),
            scan: ScanConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Resolved config with a `user`/`default` tag per leaf key.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub config: ScenarioConfig,
    pub provenance: BTreeMap<String, String>,
}

impl Resolved {
    pub fn defaults() -> Self {
        Self::from_toml("", "<defaults>").expect("defaults are valid")
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Parses `text` and lays it over the defaults key by key, so a partial
    /// table keeps the defaults of the keys it leaves out.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, CliError> {
        let user: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        let defaults = toml::Table::try_from(ScenarioConfig::default()).expect("defaults serialize");
        let mut unknown = Vec::new();
        check_keys(&user, &defaults, "", &mut unknown);
        if !unknown.is_empty() {
            return Err(CliError::Config(format!("{origin}:\n  {}", unknown.join("\n  "))));
        }
        let mut merged = defaults;
        overlay(&mut merged, &user);
        let config: ScenarioConfig =
            toml::Value::Table(merged).try_into().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        let problems = config.validate();
        if !problems.is_empty() {
            return Err(CliError::Config(format!("{origin}:\n  {}", problems.join("\n  "))));
        }
        let mut user_paths = Vec::new();
        collect_toml_paths(&toml::Value::Table(user), "", &mut user_paths);
        let mut provenance = BTreeMap::new();
        let tree = serde_json::to_value(&config).expect("config serializes");
        let mut leaves = Vec::new();
        collect_json_paths(&tree, "", &mut leaves);
        for leaf in leaves {
            let tag = if user_paths.iter().any(|p| p == &leaf) { "user" } else { "default" };
            provenance.insert(leaf, tag.to_string());
        }
        Ok(Self { config, provenance })
    }

    /// Marks a key as set from the command line.
    pub fn set_by_flag(&mut self, path: &str) {
        self.provenance.insert(path.to_string(), "flag".to_string());
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Keys that may appear without a default value.
const OPTIONAL_KEYS: [&str; 2] = ["scenario", "output.dir"];

fn check_keys(user: &toml::Table, defaults: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in user {
        let path = join(prefix, k);
        match (defaults.get(k), v) {
            (Some(toml::Value::Table(d)), toml::Value::Table(u)) => check_keys(u, d, &path, out),
            (Some(toml::Value::Table(_)), _) => out.push(format!("{path}: expected a table")),
            (Some(_), toml::Value::Table(_)) => out.push(format!("{path}: expected a value, found a table")),
            (Some(_), _) => {}
            (None, _) if OPTIONAL_KEYS.contains(&path.as_str()) => {}
            (None, _) => {
                let known: Vec<&str> = defaults.keys().map(String::as_str).collect();
                out.push(format!("{path}: unknown key (expected one of {})", known.join(", ")));
            }
        }
    }
}

fn overlay(base: &mut toml::Table, user: &toml::Table) {
    for (k, v) in user {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => overlay(b, u),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn collect_toml_paths(v: &toml::Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(t) => t.iter().for_each(|(k, v)| collect_toml_paths(v, &join(prefix, k), out)),
        _ => out.push(prefix.to_string()),
    }
}

fn collect_json_paths(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| collect_json_paths(v, &join(prefix, k), out)),
        _ => out.push(prefix.to_string()),
    }
}

impl ScenarioConfig {
    /// Semantic checks. Each message starts with the offending key path.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut need = |ok: bool, path: &str, what: &str, value: String| {
            if !ok {
                errs.push(format!("{path}: {what} (got {value})"));
            }
        };
        let d = &self.device;
        for (name, t) in [("t1", &d.t1), ("t2", &d.t2), ("t3", &d.t3), ("t4", &d.t4)] {
            let p = |k: &str| format!("device.{name}.{k}");
            need(t.frequency.is_finite() && t.frequency > 0.0, &p("frequency"), "must be positive", t.frequency.to_string());
            need(
                t.anharmonicity.is_finite() && t.anharmonicity > 0.0,
                &p("anharmonicity"),
                "must be positive",
                t.anharmonicity.to_string(),
            );
            need(t.drift.is_finite(), &p("drift"), "must be finite", t.drift.to_string());
            need(t.decay.is_finite() && t.decay >= 0.0, &p("decay"), "must be non-negative", t.decay.to_string());
            need(
                t.dephasing.is_finite() && t.dephasing >= 0.0,
                &p("dephasing"),
                "must be non-negative",
                t.dephasing.to_string(),
            );
        }
        need(d.g12.is_finite() && d.g12 > 0.0, "device.g12", "must be positive", d.g12.to_string());
        need(d.g23.is_finite() && d.g23 > 0.0, "device.g23", "must be positive", d.g23.to_string());
        if d.t1.frequency == d.t2.frequency {
            need(false, "device.t1.frequency", "must differ from device.t2.frequency", d.t1.frequency.to_string());
        }
        if d.t2.frequency == d.t3.frequency {
            need(false, "device.t3.frequency", "must differ from device.t2.frequency", d.t3.frequency.to_string());
        }

        for (name, r) in [("x", &self.gate.x), ("z", &self.gate.z)] {
            let p = |k: &str| format!("gate.{name}.{k}");
            need(r.angle > 0.0 && r.angle < 2.0 * PI, &p("angle"), "must lie in (0, 2π)", r.angle.to_string());
            need(r.detuning.is_finite(), &p("detuning"), "must be finite", r.detuning.to_string());
            need(r.beta1 > 0.0 && r.beta1 < 2.4, &p("beta1"), "must lie in (0, 2.4)", r.beta1.to_string());
        }
        let cp = &self.gate.cp;
        need(cp.gamma > 0.0 && cp.gamma < PI, "gate.cp.gamma", "must lie in (0, π)", cp.gamma.to_string());
        need(cp.beta3 > 0.0 && cp.beta3 < 2.4, "gate.cp.beta3", "must lie in (0, 2.4)", cp.beta3.to_string());

        let s = &self.simulation;
        need(s.dt_ps > 0.0 && s.dt_ps <= 20.0, "simulation.dt_ps", "must lie in (0, 20]", s.dt_ps.to_string());
        need(s.sample_ps.is_finite() && s.sample_ps > 0.0, "simulation.sample_ps", "must be positive", s.sample_ps.to_string());
        need((3..=8).contains(&s.sq_levels), "simulation.sq_levels", "must lie in 3..=8", s.sq_levels.to_string());
        need((3..=8).contains(&s.cp_levels), "simulation.cp_levels", "must lie in 3..=8", s.cp_levels.to_string());
        need(
            (2..=5).contains(&s.spectator_levels),
            "simulation.spectator_levels",
            "must lie in 2..=5",
            s.spectator_levels.to_string(),
        );
        need(s.inputs_1q >= 2, "simulation.inputs_1q", "must be at least 2", s.inputs_1q.to_string());
        need(s.inputs_2q >= 1, "simulation.inputs_2q", "must be at least 1", s.inputs_2q.to_string());

        let c = &self.scan;
        need(c.min.is_finite(), "scan.min", "must be finite", c.min.to_string());
        need(c.max.is_finite() && c.max > c.min, "scan.max", "must be finite and above scan.min", c.max.to_string());
        need(c.min > -1.0, "scan.min", "must exceed −1 (coupling scale 1 + ε)", c.min.to_string());
        need(c.points >= 1, "scan.points", "must be at least 1", c.points.to_string());
        need(c.angle_points >= 1, "scan.angle_points", "must be at least 1", c.angle_points.to_string());
        need(
            c.detuning_ratio.is_finite() && c.detuning_ratio >= 0.0,
            "scan.detuning_ratio",
            "must be non-negative",
            c.detuning_ratio.to_string(),
        );
        need(!self.output.formats.is_empty(), "output.formats", "must list at least one format", "[]".into());
        errs
    }

    /// Identity of a run: everything but the output block.
    pub fn run_identity(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.remove("output");
            m.remove("scenario");
        }
        v
    }
}
