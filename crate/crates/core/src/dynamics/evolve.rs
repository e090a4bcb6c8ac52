//! Fixed-step fourth-order Runge-Kutta integration of the master equation.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::observables::observables;
use crate::error::{Error, Result};
use crate::master::Generator;
use crate::params::ModelParams;
use crate::state::DensityMatrix;
use crate::wigner::negativity_of_state;

/// Elements larger than this mean the step has gone unstable.
pub const DIVERGENCE_BOUND: f64 = 1e3;
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Step in units of `1/gamma`.
    pub dt: f64,
    pub t_max: f64,
    /// Record a sample every this many steps.
    pub record_every: usize,
    /// Stop once `||drho/dt||_F` falls below this.
    pub ss_tol: f64,
    /// Largest population tolerated in the top 10% of Fock levels.
    pub tail_tol: f64,
    pub stop_at_steady: bool,
    pub store_snapshots: bool,
    /// Evaluate the Wigner negativity at each sample (auto grid).
    pub track_negativity: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: 1e-3,
            t_max: 50.0,
            record_every: 100,
            ss_tol: 1e-8,
            tail_tol: 1e-4,
            stop_at_steady: true,
            store_snapshots: false,
            track_negativity: false,
        }
    }
}

impl EvolutionConfig {
    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_max >= self.dt && self.t_max.is_finite()) {
            return bad("t_max", format!("must be at least dt, got {}", self.t_max));
        }
        if !(self.ss_tol > 0.0) {
            return bad("ss_tol", format!("must be positive, got {}", self.ss_tol));
        }
        if !(self.tail_tol > 0.0) {
            return bad("tail_tol", format!("must be positive, got {}", self.tail_tol));
        }
        if self.record_every == 0 {
            return bad("record_every", "must be at least 1".into());
        }
        Ok(())
    }
}

/// Samples along a trajectory. All sequences have the same length.
#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub mean_n: Vec<f64>,
    pub mean_a: Vec<C64>,
    pub purity: Vec<f64>,
    pub negativity: Option<Vec<f64>>,
    /// `|Tr rho - 1|`.
    pub trace_error: Vec<f64>,
    pub hermiticity: Vec<f64>,
    /// Step-halving local error estimate of the step that produced the sample.
    pub step_error: Vec<f64>,
    pub snapshots: Vec<DensityMatrix>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: TimeSeries,
    pub state: DensityMatrix,
    /// Whether the run stopped on the steady-state criterion.
    pub steady: bool,
    pub t_end: f64,
    /// `||drho/dt||_F` at the final state.
    pub rate: f64,
}

struct Rk4 {
    gen: Generator,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4 {
    fn new(gen: Generator) -> Self {
        let n = gen.dim() * gen.dim();
        let z = vec![C64::new(0.0, 0.0); n];
        Rk4 {
            gen,
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// `out = y(t + h)` given `k1 = f(y)`.
    fn step(&mut self, y: &[C64], k1: &[C64], h: f64, out: &mut [C64]) {
        let Rk4 {
            gen,
            k2,
            k3,
            k4,
            tmp,
        } = self;
        axpy(tmp, y, 0.5 * h, k1);
        gen.apply_into(tmp, k2);
        axpy(tmp, y, 0.5 * h, k2);
        gen.apply_into(tmp, k3);
        axpy(tmp, y, h, k3);
        gen.apply_into(tmp, k4);
        let w = h / 6.0;
        for i in 0..y.len() {
            out[i] = y[i] + w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

fn axpy(out: &mut [C64], y: &[C64], h: f64, k: &[C64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a + h * b;
    }
}

fn frobenius(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn to_state(buf: &[C64], d: usize) -> DensityMatrix {
    DensityMatrix::from_matrix(Array2::from_shape_vec((d, d), buf.to_vec()).expect("d*d buffer"))
        .expect("square")
}

/// Integrate from `rho0` until `t_max`, or until the steady-state
/// criterion is met when `stop_at_steady` is set.
pub fn evolve(
    rho0: &DensityMatrix,
    params: &ModelParams,
    config: &EvolutionConfig,
) -> Result<Evolution> {
    config.validate()?;
    let gen = Generator::new(params)?;
    let d = gen.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    let mut y: Vec<C64> = rho0.matrix().iter().copied().collect();
    let mut next = vec![C64::new(0.0, 0.0); d * d];
    let mut half = next.clone();
    let mut k1 = next.clone();
    let mut k1_half = next.clone();
    let mut rk = Rk4::new(gen);

    let mut series = TimeSeries {
        negativity: config.track_negativity.then(Vec::new),
        ..Default::default()
    };
    let record = |series: &mut TimeSeries, rho: DensityMatrix, t: f64, err: f64| -> Result<()> {
        let obs = observables(&rho);
        let tr = rho.trace();
        let trace_error = ((tr.re - 1.0).powi(2) + tr.im * tr.im).sqrt();
        if trace_error > TRACE_DRIFT_TOL {
            return Err(Error::TraceDrift { trace: tr.re, time: t });
        }
        if obs.tail_mass > config.tail_tol {
            return Err(Error::CutoffTooSmall {
                tail_mass: obs.tail_mass,
                tail_tol: config.tail_tol,
                time: t,
            });
        }
        series.times.push(t);
        series.mean_n.push(obs.mean_n);
        series.mean_a.push(obs.mean_a);
        series.purity.push(obs.purity);
        series.trace_error.push(trace_error);
        series.hermiticity.push(rho.hermiticity_residue());
        series.step_error.push(err);
        if let Some(neg) = series.negativity.as_mut() {
            neg.push(negativity_of_state(&rho, true)?);
        }
        if config.store_snapshots {
            series.snapshots.push(rho);
        }
        Ok(())
    };

    record(&mut series, rho0.clone(), 0.0, 0.0)?;
    let n_steps = (config.t_max / config.dt).round().max(1.0) as usize;
    let mut step = 0usize;
    let mut recorded_last = true;
    let (steady, rate) = loop {
        rk.gen.apply_into(&y, &mut k1);
        let rate = frobenius(&k1);
        if step == n_steps || (config.stop_at_steady && rate < config.ss_tol) {
            break (rate < config.ss_tol, rate);
        }
        let t = (step + 1) as f64 * config.dt;
        let sample = (step + 1).is_multiple_of(config.record_every) || step + 1 == n_steps;
        let mut err = 0.0;
        if sample {
            // one full step against two half steps; keep the finer result
            rk.step(&y, &k1, config.dt, &mut next);
            rk.step(&y, &k1, 0.5 * config.dt, &mut half);
            rk.gen.apply_into(&half, &mut k1_half);
            rk.step(&half, &k1_half, 0.5 * config.dt, &mut y);
            err = next
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
        } else {
            rk.step(&y, &k1, config.dt, &mut next);
            std::mem::swap(&mut y, &mut next);
        }
        step += 1;
        if y.iter().any(|z| z.norm().is_nan() || z.norm() > DIVERGENCE_BOUND) {
            return Err(Error::Divergence { dt: config.dt, time: t });
        }
        recorded_last = sample;
        if sample {
            record(&mut series, to_state(&y, d), t, err)?;
        }
    };
    let t_end = step as f64 * config.dt;
    if !recorded_last {
        record(&mut series, to_state(&y, d), t_end, 0.0)?;
    }
    Ok(Evolution {
        series,
        state: to_state(&y, d),
        steady,
        t_end,
        rate,
    })
}

/// Run [`evolve`] to a steady state and package it like the direct solve.
pub fn solve_steady_evolved(
    rho0: &DensityMatrix,
    params: &ModelParams,
    config: &EvolutionConfig,
) -> Result<super::SteadyStateResult> {
    let ev = evolve(rho0, params, config)?;
    let mut rho = ev.state;
    let hermitization = rho.hermitize();
    let residual = crate::liouvillian::build_liouvillian(params)
        .and_then(|l| l.residual(&rho))
        .unwrap_or(ev.rate);
    Ok(super::SteadyStateResult {
        tail_mass: rho.tail_mass(),
        min_eigenvalue: rho.min_eigenvalue(),
        rho,
        residual,
        method: super::SteadyMethod::Evolved,
        converged: ev.steady,
        hermitization,
        pivot_ratio: f64::NAN,
    })
}
