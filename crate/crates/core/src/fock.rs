//! Truncated Fock-space operators.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// A dense operator on the truncated Fock space `|0>, ..., |n_cut - 1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    mat: Array2<C64>,
}

impl FockOperator {
    pub fn zeros(dim: usize) -> Self {
        FockOperator {
            mat: Array2::zeros((dim, dim)),
        }
    }

    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        Ok(FockOperator { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[[row, col]]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        FockOperator {
            mat: self.mat.t().mapv(|z| z.conj()),
        }
    }

    pub fn dot(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_dim(other)?;
        Ok(FockOperator {
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn add(&self, other: &FockOperator) -> Result<FockOperator> {
        self.check_dim(other)?;
        Ok(FockOperator {
            mat: &self.mat + &other.mat,
        })
    }

    pub fn scale(&self, factor: C64) -> FockOperator {
        FockOperator {
            mat: &self.mat * factor,
        }
    }

    /// `max |H_nm - conj(H_mn)|`.
    pub fn hermiticity_residue(&self) -> f64 {
        hermiticity_residue(&self.mat)
    }

    fn check_dim(&self, other: &FockOperator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn hermiticity_residue(m: &Array2<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in i..d {
            worst = worst.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    worst
}

/// Truncated annihilation operator, `<n-1| a |n> = sqrt(n)`.
pub fn annihilation_op(n_cut: usize) -> Result<FockOperator> {
    if n_cut < 2 {
        return Err(Error::InvalidDimension(n_cut));
    }
    let mut mat = Array2::zeros((n_cut, n_cut));
    for n in 1..n_cut {
        mat[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { mat })
}

pub fn creation_op(n_cut: usize) -> Result<FockOperator> {
    annihilation_op(n_cut).map(|a| a.dagger())
}

pub fn number_op(n_cut: usize) -> Result<FockOperator> {
    if n_cut < 2 {
        return Err(Error::InvalidDimension(n_cut));
    }
    Ok(FockOperator {
        mat: Array2::from_diag(&ndarray::Array1::from_iter(
            (0..n_cut).map(|n| C64::new(n as f64, 0.0)),
        )),
    })
}

/// Diagonal of the number-conserving part of `H`: detuning plus Kerr,
/// `delta * n + (u / 2) n (n - 1)`, each gated by its toggle.
pub(crate) fn diagonal_energies(params: &ModelParams) -> Vec<f64> {
    let t = &params.toggles;
    (0..params.n_cut)
        .map(|n| {
            let n = n as f64;
            let mut e = 0.0;
            if t.hamiltonian {
                e += params.delta * n;
            }
            if t.kerr {
                e += 0.5 * params.u * n * (n - 1.0);
            }
            e
        })
        .collect()
}

/// Complex coefficient `A e^{i theta}` multiplying `a^dagger` in the pump
/// term, or zero when the pump is switched off.
pub(crate) fn pump_coefficient(params: &ModelParams) -> C64 {
    if params.toggles.pump {
        C64::from_polar(params.amp, params.theta)
    } else {
        C64::new(0.0, 0.0)
    }
}

/// Assemble `H = delta a^dag a + A (e^{i theta} a^dag + e^{-i theta} a) + (u/2) a^dag a^dag a a`
/// in units of `hbar gamma`.
///
/// The pump enters with a relative plus sign so that `H` is Hermitian and
/// the coherent amplitude obeys `d<a>/dt = i delta <a> + i A e^{i theta} - <a>/2`
/// under the `+i[H, rho]` generator.
pub fn build_hamiltonian(params: &ModelParams) -> Result<FockOperator> {
    params.validate()?;
    let d = params.n_cut;
    let mut mat = Array2::zeros((d, d));
    for (n, e) in diagonal_energies(params).into_iter().enumerate() {
        mat[[n, n]] = C64::new(e, 0.0);
    }
    let p = pump_coefficient(params);
    for n in 1..d {
        let s = (n as f64).sqrt();
        mat[[n, n - 1]] += p * s;
        mat[[n - 1, n]] += p.conj() * s;
    }
    Ok(FockOperator { mat })
}
