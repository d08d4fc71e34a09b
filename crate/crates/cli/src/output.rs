//! Artifact writers: CSV tables with a comment header, JSON reports, SVG plots
//! and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Format, Resolved};
use crate::plot::Plot;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// One output table, written as `<stem>.csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub stem: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(stem: &str, columns: &[&str]) -> Self {
        Self { stem: stem.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Num(x) => Some(*x),
                Cell::Text(_) => None,
            })
            .collect()
    }
}

/// Everything a scenario produces before it touches the filesystem.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub tables: Vec<Table>,
    pub report: Value,
    pub plots: Vec<Plot>,
}

/// `%.12g`: 12 significant digits, trailing zeros trimmed, exponent form
/// outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn render_csv(table: &Table, header: &[String]) -> String {
    let mut out = String::new();
    for line in header {
        writeln!(out, "# {line}").unwrap();
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(|c| match c {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }))
        .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the tool version, scenario and resolved physics/simulation config.
pub fn run_hash(scenario: &str, resolved: &Resolved) -> String {
    let identity = serde_json::json!({
        "tool": env!("CARGO_PKG_VERSION"),
        "scenario": scenario,
        "config": resolved.config.run_identity(),
    });
    sha256_hex(identity.to_string().as_bytes())
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub versions: Value,
    pub scenario: String,
    pub run_hash: String,
    /// Digest over the CSV files (name and content, in name order). Reports
    /// and plots carry timings, so they are listed but not part of it.
    pub determinism_hash: String,
    pub outputs: Vec<OutputFile>,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub resolved: Resolved,
}

/// Writes the artifacts for `formats` into `dir` and returns the manifest,
/// which is also written as `manifest.json`.
pub fn write_all(
    dir: &Path,
    scenario: &str,
    resolved: &Resolved,
    output: &ScenarioOutput,
    formats: &[Format],
    wall_clock_s: f64,
) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let hash = run_hash(scenario, resolved);
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    if formats.contains(&Format::Csv) {
        let header = vec![
            format!("holosim {} scenario={scenario}", env!("CARGO_PKG_VERSION")),
            format!("run_hash={hash}"),
        ];
        for t in &output.tables {
            files.push((format!("{}.csv", t.stem), render_csv(t, &header).into_bytes()));
        }
    }
    if formats.contains(&Format::Json) {
        let report = serde_json::json!({ "scenario": scenario, "run_hash": hash, "report": output.report });
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        files.push(("report.json".into(), text.into_bytes()));
    }
    if formats.contains(&Format::Svg) {
        for p in &output.plots {
            files.push((format!("{}.svg", p.stem), p.render().into_bytes()));
        }
    }

    let mut outputs = Vec::new();
    let mut digest = Sha256::new();
    let mut csv: Vec<&(String, Vec<u8>)> = files.iter().filter(|(n, _)| n.ends_with(".csv")).collect();
    csv.sort_by(|a, b| a.0.cmp(&b.0));
    for (name, bytes) in csv {
        digest.update(name.as_bytes());
        digest.update([0u8]);
        digest.update(bytes);
    }
    for (name, bytes) in &files {
        write_file(&dir.join(name), bytes)?;
        outputs.push(OutputFile { file: name.clone(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    }
    let manifest = Manifest {
        tool: "holosim",
        versions: serde_json::json!({
            "holosim": env!("CARGO_PKG_VERSION"),
            "holosim-core": holosim_core::VERSION,
        }),
        scenario: scenario.to_string(),
        run_hash: hash,
        determinism_hash: hex::encode(digest.finalize()),
        outputs,
        threads: rayon::current_num_threads(),
        wall_clock_s,
        resolved: resolved.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write_file(&dir.join("manifest.json"), text.as_bytes())?;
    Ok(manifest)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(3f64.sqrt() / 2.0), "0.866025403784");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(62.77489123456789), "62.7748912346");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(-2.345678901234567e13), "-2.34567890123e13");
        assert_eq!(format_number(0.00012), "0.00012");
        assert_eq!(format_number(999999999999.9), "1e12");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec![1.0.into(), "x".into()]);
        t.push(vec![0.25.into(), "y,z".into()]);
        let s = render_csv(&t, &["hello".into()]);
        assert_eq!(s, "# hello\na,b\n1,x\n0.25,\"y,z\"\n");
        assert_eq!(t.column("a"), Some(vec![1.0, 0.25]));
        assert_eq!(t.column("b"), None);
    }
}
