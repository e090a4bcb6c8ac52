//! Density matrices in the truncated Fock basis.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::hermiticity_residue;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-6;

/// `rho = sum_nm rho_nm |n><m|`, stored densely with `rho[[n, m]] = rho_nm`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Wrap a square matrix without checking the physical invariants.
    /// Use [`DensityMatrix::check`] when the source is untrusted.
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        if r < 2 {
            return Err(Error::InvalidDimension(r));
        }
        Ok(DensityMatrix { mat })
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(dim, 0)
    }

    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if n >= dim {
            return Err(Error::InvalidState(format!(
                "Fock level {n} outside cutoff {dim}"
            )));
        }
        let mut mat = Array2::zeros((dim, dim));
        mat[[n, n]] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { mat })
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn from_pure(psi: &Array1<C64>) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let d = psi.len();
        let mat = Array2::from_shape_fn((d, d), |(n, m)| psi[n] * psi[m].conj() / norm2);
        Self::from_matrix(mat)
    }

    /// Truncated coherent state `|alpha>`, renormalized over the cutoff.
    pub fn coherent(dim: usize, alpha: C64) -> Result<Self> {
        Self::from_pure(&coherent_amplitudes(dim, alpha))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn matrix_mut(&mut self) -> &mut Array2<C64> {
        &mut self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.mat[[n, m]]
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn hermiticity_residue(&self) -> f64 {
        hermiticity_residue(&self.mat)
    }

    /// Replace `rho` by `(rho + rho^dag) / 2` and return the largest
    /// elementwise correction that was applied.
    pub fn hermitize(&mut self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let avg = 0.5 * (self.mat[[i, j]] + self.mat[[j, i]].conj());
                worst = worst.max((avg - self.mat[[i, j]]).norm());
                self.mat[[i, j]] = avg;
                self.mat[[j, i]] = avg.conj();
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum_nm rho_nm rho_mn
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for n in 0..d {
            for m in 0..d {
                acc += self.mat[[n, m]] * self.mat[[m, n]];
            }
        }
        acc.re
    }

    /// Population of the top 10% of Fock levels (at least one level).
    pub fn tail_mass(&self) -> f64 {
        let d = self.dim();
        let start = d - (d / 10).max(1);
        (start..d).map(|n| self.mat[[n, n]].re).sum()
    }

    /// Largest off-diagonal magnitude.
    pub fn max_offdiagonal(&self) -> f64 {
        self.mat
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    }

    /// Trace norm `||rho - sigma||_1`, the sum of absolute eigenvalues of
    /// the difference (no factor 1/2).
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let diff = &self.mat - &other.mat;
        Ok(hermitian_eigenvalues(&diff).iter().map(|v| v.abs()).sum())
    }

    /// `<psi| rho |psi>` for a normalized `psi`.
    pub fn fidelity_with_pure(&self, psi: &Array1<C64>) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.len(),
            });
        }
        let rho_psi = self.mat.dot(psi);
        Ok(psi
            .iter()
            .zip(rho_psi.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re)
    }

    /// Verify the density-matrix invariants: Hermitian, unit trace,
    /// positive up to truncation noise.
    pub fn check(&self) -> Result<()> {
        let herm = self.hermiticity_residue();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (residue {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let lo = self.min_eigenvalue();
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "minimum eigenvalue {lo:.3e} below -1e-6"
            )));
        }
        Ok(())
    }

    /// Row-major flattening, used by the state file format.
    pub fn to_row_major(&self) -> (Vec<f64>, Vec<f64>) {
        self.mat.iter().map(|z| (z.re, z.im)).unzip()
    }
}

/// Fock amplitudes `e^{-|alpha|^2/2} alpha^n / sqrt(n!)`, evaluated by
/// recurrence so large `n` never forms a factorial.
pub fn coherent_amplitudes(dim: usize, alpha: C64) -> Array1<C64> {
    let mut out = Array1::zeros(dim);
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        out[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

pub(crate) fn hermitian_eigenvalues(m: &Array2<C64>) -> Vec<f64> {
    let d = m.nrows();
    let h = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[[i, j]] + m[[j, i]].conj()));
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fock_and_mixture_purity() {
        let r = DensityMatrix::fock(5, 2).unwrap();
        assert_abs_diff_eq!(r.purity(), 1.0, epsilon = 1e-15);
        r.check().unwrap();

        let mut mat = Array2::zeros((4, 4));
        mat[[0, 0]] = C64::new(0.5, 0.0);
        mat[[1, 1]] = C64::new(0.5, 0.0);
        let r = DensityMatrix::from_matrix(mat).unwrap();
        assert_abs_diff_eq!(r.purity(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn check_flags_each_invariant() {
        let mut mat = Array2::zeros((3, 3));
        mat[[0, 0]] = C64::new(1.0, 0.0);
        mat[[0, 1]] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::from_matrix(mat.clone()).unwrap().check().is_err());

        mat[[0, 1]] = C64::new(0.0, 0.0);
        mat[[0, 0]] = C64::new(0.9, 0.0);
        assert!(DensityMatrix::from_matrix(mat.clone()).unwrap().check().is_err());

        mat[[0, 0]] = C64::new(1.1, 0.0);
        mat[[1, 1]] = C64::new(-0.1, 0.0);
        assert!(DensityMatrix::from_matrix(mat).unwrap().check().is_err());
    }

    #[test]
    fn coherent_state_statistics() {
        let alpha = C64::new(1.0, -0.5);
        let r = DensityMatrix::coherent(40, alpha).unwrap();
        r.check().unwrap();
        let psi = coherent_amplitudes(40, alpha);
        assert_abs_diff_eq!(r.fidelity_with_pure(&psi).unwrap(), 1.0, epsilon = 1e-12);
        let mean_n: f64 = (0..40).map(|n| n as f64 * r.get(n, n).re).sum();
        assert_abs_diff_eq!(mean_n, alpha.norm_sqr(), epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_of_orthogonal_states_is_two() {
        let a = DensityMatrix::fock(4, 0).unwrap();
        let b = DensityMatrix::fock(4, 3).unwrap();
        assert_abs_diff_eq!(a.trace_distance(&b).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.trace_distance(&a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn hermitize_reports_correction() {
        let mut mat = Array2::zeros((2, 2));
        mat[[0, 0]] = C64::new(1.0, 0.0);
        mat[[0, 1]] = C64::new(0.2, 0.0);
        let mut r = DensityMatrix::from_matrix(mat).unwrap();
        let c = r.hermitize();
        assert_abs_diff_eq!(c, 0.1, epsilon = 1e-15);
        assert!(r.hermiticity_residue() == 0.0);
    }

    #[test]
    fn tail_mass_covers_top_decile() {
        let r = DensityMatrix::fock(20, 18).unwrap();
        assert_eq!(r.tail_mass(), 1.0);
        let r = DensityMatrix::fock(20, 17).unwrap();
        assert_eq!(r.tail_mass(), 0.0);
        let r = DensityMatrix::fock(5, 4).unwrap();
        assert_eq!(r.tail_mass(), 1.0);
    }
}
