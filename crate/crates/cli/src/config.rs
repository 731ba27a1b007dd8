//! Run configuration: a TOML file with one table per section, plus
//! `section.key=value` overrides from the command line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dwell_core::dynamics::{EvolutionSettings, PropagationMethod};
use dwell_core::hamiltonian::{BasisSpec, DEFAULT_N_MAX};
use dwell_core::model::{GaussianPacketSpec, PhysicalParams, WellShape};

use crate::error::CliError;

/// Asymmetries of the reference gap table, used as the default scan list.
pub const DEFAULT_D_VALUES: [f64; 13] =
    [0.0, 0.01, -0.01, 0.02, -0.02, 0.033, -0.033, 0.04, -0.04, 0.05, -0.05, 0.066, -0.066];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalSection {
    pub m: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        let p = PhysicalParams::default();
        Self { m: p.m, omega: p.omega, hbar: p.hbar }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellSection {
    pub x_s: f64,
    pub d: f64,
}

impl Default for WellSection {
    fn default() -> Self {
        let w = WellShape::default();
        Self { x_s: w.x_s, d: w.d }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisSection {
    pub n_max: usize,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self { n_max: DEFAULT_N_MAX }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketSection {
    pub x0: f64,
    pub p0: f64,
    pub mu: f64,
    pub alpha: f64,
}

impl Default for PacketSection {
    fn default() -> Self {
        let g = GaussianPacketSpec::default();
        Self { x0: g.x0, p0: g.p0, mu: g.mu, alpha: g.alpha }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub t_max: f64,
    pub dt_out: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `"A"` (coefficient ODE) or `"B"` (eigen-expansion).
    pub method: String,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let e = EvolutionSettings::default();
        Self { t_max: e.t_max, dt_out: e.dt_out, rel_tol: e.rel_tol, abs_tol: e.abs_tol, method: e.method.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub d_values: Vec<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self { d_values: DEFAULT_D_VALUES.to_vec() }
    }
}

/// Spatial grid for `wavefunction.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { x_min: -6.0, x_max: 6.0, n_points: 241 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formats {
    Csv,
    Json,
    Both,
}

impl Formats {
    pub fn csv(self) -> bool {
        matches!(self, Formats::Csv | Formats::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Formats::Json | Formats::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Formats,
    /// Also write `wavefunction.csv` from `evolve`.
    pub wavefunction: bool,
    /// Keep every n-th output time in `wavefunction.csv`.
    pub wavefunction_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: Formats::Csv, wavefunction: false, wavefunction_stride: 4 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub physical: PhysicalSection,
    pub well: WellSection,
    pub basis: BasisSection,
    pub packet: PacketSection,
    pub evolution: EvolutionSection,
    pub scan: ScanSection,
    pub grid: GridSection,
    pub output: OutputSection,
}

fn field_error(field: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {err}"))
}

impl RunConfig {
    /// Reads `path` (if any), then applies each `section.key=value` override in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let config: RunConfig = toml::Value::Table(table).try_into().map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn params(&self) -> Result<PhysicalParams, CliError> {
        let s = &self.physical;
        PhysicalParams::new(s.m, s.omega, s.hbar).map_err(|e| field_error("physical", e))
    }

    pub fn well_with(&self, d: f64) -> Result<WellShape, CliError> {
        let well = WellShape::new(self.well.x_s, d);
        well.validate(&self.params()?).map_err(|e| field_error("well", e))?;
        Ok(well)
    }

    pub fn well(&self) -> Result<WellShape, CliError> {
        self.well_with(self.well.d)
    }

    pub fn packet(&self) -> Result<GaussianPacketSpec, CliError> {
        let s = &self.packet;
        GaussianPacketSpec::new(s.x0, s.p0, s.mu, s.alpha).map_err(|e| field_error("packet", e))
    }

    pub fn evolution(&self) -> Result<EvolutionSettings, CliError> {
        let s = &self.evolution;
        let method: PropagationMethod = s.method.parse().map_err(|e| field_error("evolution.method", e))?;
        let settings =
            EvolutionSettings { t_max: s.t_max, dt_out: s.dt_out, rel_tol: s.rel_tol, abs_tol: s.abs_tol, method };
        settings.validate().map_err(|e| field_error("evolution", e))?;
        Ok(settings)
    }

    pub fn grid_points(&self) -> Vec<f64> {
        let g = &self.grid;
        let step = (g.x_max - g.x_min) / (g.n_points - 1) as f64;
        (0..g.n_points).map(|k| g.x_min + k as f64 * step).collect()
    }

    /// Checks every section against the rules of the library types it feeds.
    pub fn validate(&self) -> Result<(), CliError> {
        let params = self.params()?;
        if !(self.well.x_s.is_finite() && self.well.x_s > 0.0) {
            return Err(field_error("well.x_s", format!("must be finite and > 0, got {}", self.well.x_s)));
        }
        self.well()?;
        BasisSpec::new(self.basis.n_max, &params).map_err(|e| field_error("basis", e))?;
        self.packet()?;
        self.evolution()?;
        if self.scan.d_values.is_empty() {
            return Err(field_error("scan.d_values", "list must not be empty"));
        }
        let g = &self.grid;
        if !(g.x_min.is_finite() && g.x_max.is_finite() && g.x_max > g.x_min) {
            return Err(field_error("grid", format!("need finite x_min < x_max, got [{}, {}]", g.x_min, g.x_max)));
        }
        if g.n_points < 2 {
            return Err(field_error("grid.n_points", format!("must be at least 2, got {}", g.n_points)));
        }
        if self.output.wavefunction_stride == 0 {
            return Err(field_error("output.wavefunction_stride", "must be at least 1"));
        }
        Ok(())
    }
}

/// Parses `section.key=value` and writes it into `table`.
///
/// The value is read as a TOML literal when it parses as one (numbers,
/// booleans, arrays) and as a bare string otherwise, so `evolution.method=A`
/// and `output.directory=runs/a` need no quoting.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), CliError> {
    let (key, raw) =
        item.split_once('=').ok_or_else(|| CliError::Config(format!("override `{item}` is not of the form key=value")))?;
    let (section, field) = key
        .trim()
        .split_once('.')
        .ok_or_else(|| CliError::Config(format!("override key `{key}` must be `section.key`")))?;
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(field.to_string(), value);
            Ok(())
        }
        _ => Err(CliError::Config(format!("`{section}` is not a section"))),
    }
}
