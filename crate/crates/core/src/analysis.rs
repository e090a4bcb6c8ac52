//! Closed-form limits and physical-parameter estimates.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::DensityMatrix;

/// CODATA 2018 values, SI units.
pub mod constants {
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    pub const HBAR: f64 = 1.054_571_817e-34;
}

use constants::*;

/// Largest Poisson mass allowed above the cutoff in [`dephased_mixture`].
pub const MIXTURE_TAIL_TOL: f64 = 1e-6;

/// Steady amplitude of the linear (U = 0, lambda = 0) cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude {
    /// `2 i A e^{i theta}`, the amplitude in the frame rotating at the
    /// detuning; independent of `delta`.
    pub rotating: C64,
    /// `i A e^{i theta} / (1/2 - i delta)`, the stationary amplitude of the
    /// simulated equation. Equal to `rotating` when `delta = 0`.
    pub stationary: C64,
}

pub fn coherent_steady_amplitude(params: &ModelParams) -> Result<CoherentAmplitude> {
    params.validate()?;
    let t = params.toggles;
    if t.kerr && params.u != 0.0 {
        return Err(Error::NotApplicable("closed-form amplitude requires U = 0"));
    }
    if (t.dephasing || t.feedback_drift) && params.lam != 0.0 {
        return Err(Error::NotApplicable("closed-form amplitude requires lambda = 0"));
    }
    if !t.lindblad {
        return Err(Error::NotApplicable("closed-form amplitude requires cavity loss"));
    }
    let drive = if t.pump {
        C64::from_polar(params.amp, params.theta)
    } else {
        C64::new(0.0, 0.0)
    };
    let delta = if t.hamiltonian { params.delta } else { 0.0 };
    let i = C64::new(0.0, 1.0);
    Ok(CoherentAmplitude {
        rotating: 2.0 * i * drive,
        stationary: i * drive / C64::new(0.5, -delta),
    })
}

/// Diagonal mixture of coherent states of magnitude `alpha_mag` over all
/// phases: Poisson weights `e^{-|a|^2} |a|^{2n} / n!`, renormalized.
pub fn dephased_mixture(alpha_mag: f64, n_cut: usize) -> Result<DensityMatrix> {
    if !(alpha_mag >= 0.0 && alpha_mag.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha_mag",
            reason: format!("must be finite and non-negative, got {alpha_mag}"),
        });
    }
    if n_cut < 2 {
        return Err(Error::InvalidDimension(n_cut));
    }
    let mean = alpha_mag * alpha_mag;
    let mut weights = Vec::with_capacity(n_cut);
    let mut ln_fact = 0.0;
    for n in 0..n_cut {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let w = if mean == 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (-mean + n as f64 * mean.ln() - ln_fact).exp()
        };
        weights.push(w);
    }
    let kept: f64 = weights.iter().sum();
    let tail = (1.0 - kept).max(0.0);
    if tail >= MIXTURE_TAIL_TOL {
        return Err(Error::InvalidParameter {
            name: "n_cut",
            reason: format!(
                "Poisson mass {tail:.2e} above cutoff {n_cut} for |alpha| = {alpha_mag}; \
                 increase n_cut"
            ),
        });
    }
    let mut mat = Array2::zeros((n_cut, n_cut));
    for (n, w) in weights.into_iter().enumerate() {
        mat[[n, n]] = C64::new(w / kept, 0.0);
    }
    DensityMatrix::from_matrix(mat)
}

/// Detection efficiency seen by the feedback loop when a fraction `r` of
/// the output is diverted to a detector of quantum efficiency `eta0`.
pub fn effective_eta(eta0: f64, r: f64) -> Result<f64> {
    if !(eta0 > 0.0 && eta0 <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta0",
            reason: format!("must lie in (0, 1], got {eta0}"),
        });
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidParameter {
            name: "reflectance",
            reason: format!("must lie in [0, 1], got {r}"),
        });
    }
    Ok(eta0 * r)
}

/// Inputs of the polariton interaction estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolaritonParams {
    /// Exciton Bohr radius in nm.
    pub bohr_radius: f64,
    /// Exciton Hopfield fraction `|X|`.
    pub hopfield_x: f64,
    /// Relative permittivity `epsilon / epsilon_0`.
    pub permittivity: f64,
    /// Trap area in square micrometres.
    pub trap_area: f64,
}

impl PolaritonParams {
    /// GaAs quantum wells in a 1 um diameter trap at zero detuning.
    pub fn gaas() -> Self {
        PolaritonParams {
            bohr_radius: 10.0,
            hopfield_x: std::f64::consts::FRAC_1_SQRT_2,
            permittivity: 13.0,
            trap_area: std::f64::consts::FRAC_PI_4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                })
            }
        };
        positive("bohr_radius", self.bohr_radius)?;
        positive("permittivity", self.permittivity)?;
        positive("trap_area", self.trap_area)?;
        if !(0.0..=1.0).contains(&self.hopfield_x) {
            return Err(Error::InvalidParameter {
                name: "hopfield_x",
                reason: format!("must lie in [0, 1], got {}", self.hopfield_x),
            });
        }
        Ok(())
    }
}

impl Default for PolaritonParams {
    fn default() -> Self {
        Self::gaas()
    }
}

/// `U = 30 e^2 a_B |X|^4 / (pi^3 epsilon A)`, in micro-electronvolts.
pub fn estimate_interaction(p: &PolaritonParams) -> Result<f64> {
    p.validate()?;
    let e = ELEMENTARY_CHARGE;
    let a_b = p.bohr_radius * 1e-9;
    let eps = p.permittivity * VACUUM_PERMITTIVITY;
    let area = p.trap_area * 1e-12;
    let joules = 30.0 * e * e * a_b * p.hopfield_x.powi(4)
        / (std::f64::consts::PI.powi(3) * eps * area);
    Ok(joules / e * 1e6)
}

/// `U / (hbar gamma)` for an interaction in ueV and a polariton lifetime
/// `1/gamma` in picoseconds.
pub fn interaction_in_linewidths(u_uev: f64, lifetime_ps: f64) -> Result<f64> {
    if !(lifetime_ps > 0.0 && lifetime_ps.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lifetime",
            reason: format!("must be positive, got {lifetime_ps}"),
        });
    }
    let joules = u_uev * 1e-6 * ELEMENTARY_CHARGE;
    Ok(joules * lifetime_ps * 1e-12 / HBAR)
}
