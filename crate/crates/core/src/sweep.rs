//! Cartesian parameter sweeps and cutoff-convergence scans.
//!
//! A sweep writes three files next to `output`:
//!
//! * `<stem>.json`: the spec echoed back, written before any point runs;
//! * `<stem>.csv`: axis columns then metric columns, one row per point in
//!   lexicographic axis order (first axis slowest);
//! * `<stem>.timing.csv`: wall time per point, kept out of the main table
//!   so that table is byte-identical whatever the worker count.
//!
//! Rows are appended to the CSV as points finish and the file is rewritten
//! in order at the end, so an interrupted sweep can be resumed: points whose
//! rows are already present are not recomputed.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    observables, solve_steady_direct_with, solve_steady_evolved, EvolutionConfig,
    SteadyStateResult, DEFAULT_SS_TOL,
};
use crate::error::{Error, Result};
use crate::liouvillian::DEFAULT_MAX_CUTOFF;
use crate::par::*;
use crate::params::{ModelParams, SWEEPABLE};
use crate::state::DensityMatrix;
use crate::wigner::{negativity_report, negativity_with_refinement, GridPolicy};

pub const DEFAULT_BUDGET: usize = 5000;
pub const MAX_AXES: usize = 3;

pub const METRIC_COLUMNS: &[&str] = &[
    "negativity",
    "refinement_delta",
    "mean_n",
    "re_a",
    "im_a",
    "purity",
    "tail_mass",
    "residual",
    "min_eigenvalue",
    "converged",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    Direct,
    Evolve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub grid: GridPolicy,
    /// Path of the result CSV.
    pub output: PathBuf,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Used by the `evolve` solver; its `ss_tol` also applies to `direct`.
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default = "default_max_cutoff")]
    pub max_cutoff: usize,
}

fn default_budget() -> usize {
    DEFAULT_BUDGET
}

fn default_max_cutoff() -> usize {
    DEFAULT_MAX_CUTOFF
}

impl SweepSpec {
    pub fn new(base: ModelParams, axes: Vec<Axis>, output: impl Into<PathBuf>) -> Self {
        SweepSpec {
            base,
            axes,
            solver: Solver::Direct,
            grid: GridPolicy::Auto,
            output: output.into(),
            budget: DEFAULT_BUDGET,
            evolution: EvolutionConfig::default(),
            max_cutoff: DEFAULT_MAX_CUTOFF,
        }
    }

    pub fn points(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        self.evolution.validate()?;
        if self.axes.is_empty() || self.axes.len() > MAX_AXES {
            return Err(Error::InvalidParameter {
                name: "axes",
                reason: format!("need 1 to {MAX_AXES} axes, got {}", self.axes.len()),
            });
        }
        for (i, a) in self.axes.iter().enumerate() {
            if !SWEEPABLE.contains(&a.param.as_str()) {
                return Err(Error::InvalidParameter {
                    name: "axes",
                    reason: format!(
                        "unknown parameter `{}`, expected one of {SWEEPABLE:?}",
                        a.param
                    ),
                });
            }
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(Error::InvalidParameter {
                    name: "axes",
                    reason: format!("parameter `{}` appears twice", a.param),
                });
            }
            if a.values.is_empty() || a.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "axes",
                    reason: format!("axis `{}` needs finite values", a.param),
                });
            }
        }
        if let GridPolicy::Explicit(g) = &self.grid {
            g.validate()?;
        }
        let points = self.points();
        if points > self.budget {
            return Err(Error::BudgetExceeded {
                points,
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Parameters of point `index` (lexicographic, first axis slowest).
    pub fn point(&self, index: usize) -> Result<(Vec<f64>, ModelParams)> {
        let mut params = self.base.clone();
        let mut values = vec![0.0; self.axes.len()];
        let mut rest = index;
        for (k, a) in self.axes.iter().enumerate().rev() {
            let v = a.values[rest % a.values.len()];
            rest /= a.values.len();
            params.set(&a.param, v)?;
            values[k] = v;
        }
        Ok((values, params))
    }

    /// `<stem>.meta.json`, echoing the spec and the code tag.
    pub fn sidecar_path(&self) -> PathBuf {
        self.output.with_extension("meta.json")
    }

    pub fn timing_path(&self) -> PathBuf {
        self.output.with_extension("timing.csv")
    }
}

/// Metrics of one solved point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMetrics {
    pub negativity: f64,
    pub refinement_delta: f64,
    pub mean_n: f64,
    pub re_a: f64,
    pub im_a: f64,
    pub purity: f64,
    pub tail_mass: f64,
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<f64>,
    /// Metrics, or the error code that stopped this point.
    pub outcome: std::result::Result<PointMetrics, String>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axes: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Points computed in this run (the rest were reused from disk).
    pub computed: usize,
}

fn solve_point(spec: &SweepSpec, params: &ModelParams) -> Result<PointMetrics> {
    params.validate()?;
    let ss: SteadyStateResult = match spec.solver {
        Solver::Direct => solve_steady_direct_with(params, spec.max_cutoff, spec.evolution.ss_tol)?,
        Solver::Evolve => {
            let rho0 = DensityMatrix::vacuum(params.n_cut)?;
            solve_steady_evolved(&rho0, params, &spec.evolution)?
        }
    };
    metrics_of(&ss, &spec.grid)
}

fn metrics_of(ss: &SteadyStateResult, grid: &GridPolicy) -> Result<PointMetrics> {
    let report = match grid {
        GridPolicy::Auto => negativity_report(&ss.rho, true)?,
        GridPolicy::Explicit(g) => negativity_with_refinement(&ss.rho, g)?,
    };
    let obs = observables(&ss.rho);
    Ok(PointMetrics {
        negativity: report.value,
        refinement_delta: report.refinement_delta,
        mean_n: obs.mean_n,
        re_a: obs.mean_a.re,
        im_a: obs.mean_a.im,
        purity: obs.purity,
        tail_mass: ss.tail_mass,
        residual: ss.residual,
        min_eigenvalue: ss.min_eigenvalue,
        converged: ss.converged,
    })
}

fn axis_cell(v: f64) -> String {
    // shortest representation that reads back exactly
    format!("{v}")
}

fn metric_cell(v: f64) -> String {
    format!("{v:.16e}")
}

fn row_key(values: &[f64]) -> String {
    values.iter().map(|&v| axis_cell(v)).collect::<Vec<_>>().join(",")
}

fn format_row(row: &SweepRow) -> String {
    let mut cells: Vec<String> = row.values.iter().map(|&v| axis_cell(v)).collect();
    match &row.outcome {
        Ok(m) => {
            for v in [
                m.negativity,
                m.refinement_delta,
                m.mean_n,
                m.re_a,
                m.im_a,
                m.purity,
                m.tail_mass,
                m.residual,
                m.min_eigenvalue,
            ] {
                cells.push(metric_cell(v));
            }
            cells.push(m.converged.to_string());
            cells.push(String::new());
        }
        Err(code) => {
            cells.extend(std::iter::repeat_n(String::new(), METRIC_COLUMNS.len() - 1));
            cells.push(code.clone());
        }
    }
    cells.join(",")
}

fn parse_row(line: &str, n_axes: usize) -> Option<SweepRow> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != n_axes + METRIC_COLUMNS.len() {
        return None;
    }
    let values = cells[..n_axes]
        .iter()
        .map(|c| c.parse::<f64>().ok())
        .collect::<Option<Vec<_>>>()?;
    let m = &cells[n_axes..];
    let error = m[METRIC_COLUMNS.len() - 1];
    if !error.is_empty() {
        return Some(SweepRow {
            values,
            outcome: Err(error.to_string()),
        });
    }
    let f = |i: usize| m[i].parse::<f64>().ok();
    let metrics = PointMetrics {
        negativity: f(0)?,
        refinement_delta: f(1)?,
        mean_n: f(2)?,
        re_a: f(3)?,
        im_a: f(4)?,
        purity: f(5)?,
        tail_mass: f(6)?,
        residual: f(7)?,
        min_eigenvalue: f(8)?,
        converged: m[9].parse().ok()?,
    };
    Some(SweepRow {
        values,
        outcome: Ok(metrics),
    })
}

pub fn header(axes: &[String]) -> String {
    axes.iter()
        .map(String::as_str)
        .chain(METRIC_COLUMNS.iter().copied())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Serialize)]
struct Sidecar {
    code: String,
    spec: SweepSpec,
}

/// Rows already on disk for this exact spec, keyed by axis values.
fn existing_rows(spec: &SweepSpec, head: &str) -> HashMap<String, String> {
    let mut rows = HashMap::new();
    // compare serialized forms: angles pass through a degree conversion
    let current = serde_json::to_value(spec).ok();
    let same_spec = fs::read_to_string(spec.sidecar_path())
        .ok()
        .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok())
        .is_some_and(|v| v.get("spec") == current.as_ref());
    if !same_spec {
        return rows;
    }
    let Ok(text) = fs::read_to_string(&spec.output) else {
        return rows;
    };
    let mut lines = text.lines();
    if lines.next() != Some(head) {
        return rows;
    }
    let n_axes = spec.axes.len();
    for line in lines {
        if let Some(row) = parse_row(line, n_axes) {
            rows.insert(row_key(&row.values), line.to_string());
        }
    }
    rows
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Solve every grid point on a pool of `workers` threads and write the
/// result files. Individual point failures are recorded in the `error`
/// column; only spec and file errors abort the sweep.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let axes: Vec<String> = spec.axes.iter().map(|a| a.param.clone()).collect();
    let head = header(&axes);
    if let Some(dir) = spec.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let done = existing_rows(spec, &head);
    let sidecar = Sidecar {
        code: crate::CODE_TAG.to_string(),
        spec: spec.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("spec serializes");
    write_atomic(&spec.sidecar_path(), &(json + "\n"))?;

    let points = (0..spec.points())
        .map(|i| spec.point(i))
        .collect::<Result<Vec<_>>>()?;
    let todo: Vec<usize> = (0..points.len())
        .filter(|&i| !done.contains_key(&row_key(&points[i].0)))
        .collect();

    // progress log: previously finished rows first, new rows as they land
    let mut log = File::create(&spec.output).map_err(|e| Error::io(&spec.output, e))?;
    let mut seed = format!("{head}\n");
    for line in done.values() {
        seed.push_str(line);
        seed.push('\n');
    }
    log.write_all(seed.as_bytes())
        .map_err(|e| Error::io(&spec.output, e))?;
    let log = Mutex::new(log);

    let computed: Vec<(usize, String, f64)> = with_workers(workers, || {
        todo.into_par_iter()
            .map(|i| {
                let (values, params) = &points[i];
                let start = Instant::now();
                let outcome = solve_point(spec, params).map_err(|e| e.code().to_string());
                let line = format_row(&SweepRow {
                    values: values.clone(),
                    outcome,
                });
                let elapsed = start.elapsed().as_secs_f64();
                if let Ok(mut f) = log.lock() {
                    // best effort; the ordered rewrite below is authoritative
                    let _ = writeln!(f, "{line}");
                }
                (i, line, elapsed)
            })
            .collect()
    });
    drop(log);

    let mut lines: Vec<Option<String>> = points
        .iter()
        .map(|(v, _)| done.get(&row_key(v)).cloned())
        .collect();
    let mut timing = vec![None; points.len()];
    for (i, line, elapsed) in &computed {
        lines[*i] = Some(line.clone());
        timing[*i] = Some(*elapsed);
    }
    let mut csv = format!("{head}\n");
    let mut rows = Vec::with_capacity(points.len());
    for (line, (values, _)) in lines.iter().zip(&points) {
        let line = line.as_deref().expect("every point has a row");
        csv.push_str(line);
        csv.push('\n');
        rows.push(parse_row(line, axes.len()).unwrap_or(SweepRow {
            values: values.clone(),
            outcome: Err("unreadable-row".into()),
        }));
    }
    write_atomic(&spec.output, &csv)?;

    let mut times = format!("{},wall_time_s\n", axes.join(","));
    for ((values, _), t) in points.iter().zip(&timing) {
        if let Some(t) = t {
            times.push_str(&format!("{},{t:.6}\n", row_key(values)));
        }
    }
    write_atomic(&spec.timing_path(), &times)?;

    Ok(SweepResult {
        axes,
        rows,
        computed: computed.len(),
    })
}

/// Relative change in negativity accepted between successive cutoffs.
pub const CONVERGENCE_REL_TOL: f64 = 0.01;
/// Absolute floor for that comparison, for states with no negativity.
pub const CONVERGENCE_ABS_FLOOR: f64 = 1e-6;
pub const CONVERGENCE_TAIL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_cut: usize,
    pub negativity: f64,
    pub mean_n: f64,
    pub tail_mass: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Smallest cutoff whose negativity agrees with the next cutoff and
    /// whose tail mass (and the next one's) is negligible.
    pub converged_at: Option<usize>,
}

impl ConvergenceTable {
    pub fn relative_change(&self, from: usize, to: usize) -> Option<f64> {
        let find = |c| self.rows.iter().find(|r| r.n_cut == c && r.error.is_none());
        let (a, b) = (find(from)?, find(to)?);
        Some((b.negativity - a.negativity).abs() / a.negativity.abs().max(CONVERGENCE_ABS_FLOOR))
    }
}

fn agrees(a: &ConvergenceRow, b: &ConvergenceRow) -> bool {
    a.error.is_none()
        && b.error.is_none()
        && a.tail_mass < CONVERGENCE_TAIL_TOL
        && b.tail_mass < CONVERGENCE_TAIL_TOL
        && (a.negativity - b.negativity).abs()
            < (CONVERGENCE_REL_TOL * a.negativity.abs()).max(CONVERGENCE_ABS_FLOOR)
}

/// Steady-state negativity, `<n>` and tail mass at each cutoff. A cutoff
/// that fails to solve is reported in its row rather than aborting.
pub fn convergence_scan(params: &ModelParams, cutoffs: &[usize]) -> Result<ConvergenceTable> {
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "cutoffs",
            reason: format!("must be strictly increasing, got {cutoffs:?}"),
        });
    }
    let rows: Vec<ConvergenceRow> = cutoffs
        .into_par_iter()
        .map(|&n_cut| {
            let p = ModelParams {
                n_cut,
                ..params.clone()
            };
            let solved = solve_steady_direct_with(&p, DEFAULT_MAX_CUTOFF, DEFAULT_SS_TOL)
                .and_then(|ss| {
                    let neg = negativity_report(&ss.rho, true)?.value;
                    Ok((ss, neg))
                });
            match solved {
                Ok((ss, negativity)) => ConvergenceRow {
                    n_cut,
                    negativity,
                    mean_n: observables(&ss.rho).mean_n,
                    tail_mass: ss.tail_mass,
                    error: None,
                },
                Err(e) => ConvergenceRow {
                    n_cut,
                    negativity: f64::NAN,
                    mean_n: f64::NAN,
                    tail_mass: f64::NAN,
                    error: Some(e.code().to_string()),
                },
            }
        })
        .collect();
    let converged_at = rows
        .windows(2)
        .find(|w| agrees(&w[0], &w[1]))
        .map(|w| w[0].n_cut);
    Ok(ConvergenceTable { rows, converged_at })
}
