//! Deterministic number formatting, tables and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `%.12g`-style rendering: fixed notation for exponents in `[-4, 12)`,
/// scientific otherwise, trailing zeros removed, no negative zero.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// One object per row with the same rounding as the CSV.
    pub fn to_json(&self) -> String {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (name, &v) in self.columns.iter().zip(row) {
                    obj.insert(name.clone(), json_number(v));
                }
                Value::Object(obj)
            })
            .collect();
        let mut text = serde_json::to_string_pretty(&records).expect("records serialize");
        text.push('\n');
        text
    }
}

fn json_number(v: f64) -> Value {
    format_number(v)
        .parse::<f64>()
        .ok()
        .and_then(serde_json::Number::from_f64)
        .map_or(Value::Null, Value::Number)
}

/// Writes through a sibling temporary file and renames it into place, so a
/// reader sees either the old file or the complete new one.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents)?;
            f.sync_all()
        })
        .and_then(|_| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Collects the files of one command and writes them plus `manifest.json`.
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes `stem.csv` and/or `stem.json` as the config asks.
    pub fn write_table(&mut self, stem: &str, table: &Table, config: &RunConfig) -> Result<(), CliError> {
        if config.output.formats.csv() {
            self.write(&format!("{stem}.csv"), &table.to_csv())?;
        }
        if config.output.formats.json() {
            self.write(&format!("{stem}.json"), &table.to_json())?;
        }
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn finish(mut self, manifest: &Manifest) -> Result<Vec<String>, CliError> {
        let mut m = manifest.clone();
        m.files = self.files.clone();
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        text.push('\n');
        write_atomic(&self.dir.join("manifest.json"), text.as_bytes())?;
        self.files.push("manifest.json".into());
        Ok(self.files)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub d: f64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub captured_norm: Option<f64>,
    /// Horizon and sampling step behind any reported maximum of `P_r`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_right_horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_right_step: Option<f64>,
    pub warnings: Vec<String>,
    pub failures: Vec<PointFailure>,
    pub duration_seconds: f64,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: config.clone(),
            files: Vec::new(),
            captured_norm: None,
            p_right_horizon: None,
            p_right_step: None,
            warnings: Vec::new(),
            failures: Vec::new(),
            duration_seconds: 0.0,
        }
    }
}
