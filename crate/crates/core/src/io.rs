//! File formats: state JSON, Wigner and time-series CSV, run configs.
//!
//! Text output carries full double precision, so a state written and read
//! back is elementwise identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolutionConfig, TimeSeries};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::DensityMatrix;
use crate::wigner::{GridPolicy, WignerField};

pub const STATE_FORMAT: &str = "dense-row-major";
pub const FIELD_HEADER: &str = "x,p,w";
pub const TIMESERIES_HEADER: &str = "t,mean_n,re_a,im_a,purity,negativity";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_cut: usize,
    pub format: String,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let (re, im) = rho.to_row_major();
        StateFile {
            n_cut: rho.dim(),
            format: STATE_FORMAT.to_string(),
            re,
            im,
        }
    }

    /// The stored matrix, checked for shape only. Call
    /// [`DensityMatrix::check`] for the physical invariants.
    pub fn to_state(&self) -> Result<DensityMatrix> {
        if self.format != STATE_FORMAT {
            return Err(Error::InvalidState(format!(
                "unsupported format \"{}\", expected \"{STATE_FORMAT}\"",
                self.format
            )));
        }
        let len = self.n_cut * self.n_cut;
        if self.re.len() != len || self.im.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: self.re.len().max(self.im.len()),
            });
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&r, &i)| C64::new(r, i))
            .collect();
        let mat = Array2::from_shape_vec((self.n_cut, self.n_cut), data)
            .expect("length checked above");
        DensityMatrix::from_matrix(mat)
    }
}

/// Parse a JSON document, rejecting unknown keys where the type does.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_json(path, &StateFile::from_state(rho))
}

/// Read a state file and check trace, Hermiticity and positivity.
pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let file: StateFile = read_json(path)?;
    let rho = file.to_state()?;
    rho.check()?;
    Ok(rho)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_csv(field: &WignerField) -> String {
    let mut out = String::with_capacity(64 * field.values.len());
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (x, p, w) in field.samples() {
        let _ = writeln!(out, "{},{},{}", num(x), num(p), num(w));
    }
    out
}

pub fn write_field(path: &Path, field: &WignerField) -> Result<()> {
    write_text(path, &field_csv(field))
}

/// Negativity cells are left empty when it was not tracked.
pub fn timeseries_csv(series: &TimeSeries) -> String {
    let mut out = String::new();
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let neg = series
            .negativity
            .as_ref()
            .map(|v| num(v[i]))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(series.times[i]),
            num(series.mean_n[i]),
            num(series.mean_a[i].re),
            num(series.mean_a[i].im),
            num(series.purity[i]),
            neg
        );
    }
    out
}

pub fn write_timeseries(path: &Path, series: &TimeSeries) -> Result<()> {
    write_text(path, &timeseries_csv(series))
}

/// Input of the `evolve` and `steady` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub grid: GridPolicy,
    /// Directory receiving output files, relative to the config file.
    pub outputs: PathBuf,
    /// Reserved; every computation is deterministic.
    #[serde(default)]
    pub seed: u64,
    /// Optional initial state file, relative to the config file. Defaults
    /// to the vacuum.
    #[serde(default)]
    pub initial_state: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.outputs = base.join(&cfg.outputs);
        if let Some(s) = cfg.initial_state.take() {
            cfg.initial_state = Some(base.join(s));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.evolution.validate()?;
        if let GridPolicy::Explicit(g) = &self.grid {
            g.validate()?;
        }
        Ok(())
    }

    pub fn initial(&self) -> Result<DensityMatrix> {
        match &self.initial_state {
            Some(path) => {
                let rho = read_state(path)?;
                if rho.dim() != self.model.n_cut {
                    return Err(Error::DimensionMismatch {
                        expected: self.model.n_cut,
                        found: rho.dim(),
                    });
                }
                Ok(rho)
            }
            None => DensityMatrix::vacuum(self.model.n_cut),
        }
    }
}
