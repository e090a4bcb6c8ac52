//! Right-hand side of the feedback master equation
//!
//! ```text
//! drho/dt = i[H, rho] - (1/2) L[a, rho]
//!           - (lam^2 / 2 eta) [n, [n, rho]]
//!           + i lam [n, rho a^dag + a rho]
//! L[a, rho] = a^dag a rho + rho a^dag a - 2 a rho a^dag
//! ```
//!
//! with `H` from [`crate::fock::build_hamiltonian`] and `gamma = 1`. The
//! generator is evaluated as a five-point stencil on the `(n, m)` index
//! grid; no dense matrix products are formed.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{diagonal_energies, pump_coefficient};
use crate::params::ModelParams;
use crate::state::DensityMatrix;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Precomputed stencil coefficients for one parameter set.
#[derive(Debug, Clone)]
pub struct Generator {
    dim: usize,
    energies: Vec<f64>,
    /// `A e^{i theta}`.
    pump: C64,
    loss: f64,
    dephasing: f64,
    feedback: f64,
    sqrt: Vec<f64>,
}

impl Generator {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let d = params.n_cut;
        Ok(Generator {
            dim: d,
            energies: diagonal_energies(params),
            pump: pump_coefficient(params),
            loss: if params.toggles.lindblad { 1.0 } else { 0.0 },
            dephasing: params.dephasing_rate(),
            feedback: if params.toggles.feedback_drift {
                params.lam
            } else {
                0.0
            },
            sqrt: (0..=d).map(|k| (k as f64).sqrt()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient multiplying `rho_nm` in `(drho/dt)_nm`.
    #[inline]
    fn diagonal(&self, n: usize, m: usize) -> C64 {
        let k = n as f64 - m as f64;
        C64::new(
            -0.5 * self.loss * (n + m) as f64 - self.dephasing * k * k,
            self.energies[n] - self.energies[m],
        )
    }

    /// Visit every coupling `(drho/dt)_nm += c * rho_{n', m'}` as
    /// `f(n', m', c)`. Used to assemble the Liouvillian.
    pub(crate) fn for_each_coupling(&self, n: usize, m: usize, mut f: impl FnMut(usize, usize, C64)) {
        let d = self.dim;
        let s = &self.sqrt;
        let p = self.pump;
        f(n, m, self.diagonal(n, m));
        let drift = I * (self.feedback * (n as f64 - m as f64));
        if n >= 1 {
            f(n - 1, m, I * p * s[n]);
        }
        if n + 1 < d {
            f(n + 1, m, I * p.conj() * s[n + 1] + drift * s[n + 1]);
        }
        if m + 1 < d {
            f(n, m + 1, -I * p * s[m + 1] + drift * s[m + 1]);
        }
        if m >= 1 {
            f(n, m - 1, -I * p.conj() * s[m]);
        }
        if n + 1 < d && m + 1 < d && self.loss != 0.0 {
            f(n + 1, m + 1, C64::new(self.loss * s[n + 1] * s[m + 1], 0.0));
        }
    }

    /// `out = drho/dt` for a row-major `d x d` matrix `rho`.
    pub fn apply_into(&self, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        debug_assert_eq!(rho.len(), d * d);
        debug_assert_eq!(out.len(), d * d);
        let s = &self.sqrt;
        let p = self.pump;
        let ip = I * p;
        let ipc = I * p.conj();
        for n in 0..d {
            let row = n * d;
            for m in 0..d {
                let idx = row + m;
                let mut acc = self.diagonal(n, m) * rho[idx];
                // rho a^dag + a rho, shared by the pump and the feedback drift
                let up_m = if m + 1 < d { rho[idx + 1] * s[m + 1] } else { C64::new(0.0, 0.0) };
                let up_n = if n + 1 < d { rho[idx + d] * s[n + 1] } else { C64::new(0.0, 0.0) };
                if n >= 1 {
                    acc += ip * (rho[idx - d] * s[n]);
                }
                if m >= 1 {
                    acc -= ipc * (rho[idx - 1] * s[m]);
                }
                acc += ipc * up_n - ip * up_m;
                if self.feedback != 0.0 {
                    acc += I * (self.feedback * (n as f64 - m as f64)) * (up_m + up_n);
                }
                if n + 1 < d && m + 1 < d {
                    acc += self.loss * s[n + 1] * s[m + 1] * rho[idx + d + 1];
                }
                out[idx] = acc;
            }
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let mut out = Array2::zeros((self.dim, self.dim));
        let src = rho.matrix().as_standard_layout();
        self.apply_into(
            src.as_slice().expect("standard layout"),
            out.as_slice_mut().expect("fresh array is contiguous"),
        );
        Ok(out)
    }
}

/// Evaluate `drho/dt` for the given parameters.
///
/// The result is traceless and, for Hermitian `rho`, Hermitian. It is a
/// generic matrix rather than a density matrix.
pub fn apply_rhs(params: &ModelParams, rho: &DensityMatrix) -> Result<Array2<C64>> {
    Generator::new(params)?.apply(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TermToggles;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_is_dark_without_pump() {
        let p = ModelParams::new(6)
            .with_kerr(0.7)
            .with_detuning(1.3)
            .with_feedback(0.9, 0.4);
        let out = apply_rhs(&p, &DensityMatrix::vacuum(6).unwrap()).unwrap();
        assert!(out.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let p = ModelParams::new(5);
        assert!(matches!(
            apply_rhs(&p, &DensityMatrix::vacuum(4).unwrap()),
            Err(Error::DimensionMismatch { expected: 5, found: 4 })
        ));
    }

    #[test]
    fn dephasing_only_is_elementwise() {
        let mut t = TermToggles::none();
        t.dephasing = true;
        let p = ModelParams::new(8).with_feedback(0.7, 0.6).with_toggles(t);
        let rate = 0.49 / 1.2;
        let rho = Array2::from_shape_fn((8, 8), |(n, m)| {
            C64::new(1.0 + n as f64, 0.5 * m as f64 - 0.3 * n as f64)
        });
        let rho = DensityMatrix::from_matrix(rho).unwrap();
        let out = apply_rhs(&p, &rho).unwrap();
        for n in 0..8 {
            for m in 0..8 {
                let k = n as f64 - m as f64;
                let want = -rate * k * k * rho.get(n, m);
                assert_abs_diff_eq!(out[[n, m]].re, want.re, epsilon = 1e-12);
                assert_abs_diff_eq!(out[[n, m]].im, want.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_photon_decays_into_vacuum() {
        let mut t = TermToggles::none();
        t.lindblad = true;
        let p = ModelParams::new(3).with_toggles(t);
        let out = apply_rhs(&p, &DensityMatrix::fock(3, 1).unwrap()).unwrap();
        assert_abs_diff_eq!(out[[1, 1]].re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[[0, 0]].re, 1.0, epsilon = 1e-15);
    }
}
