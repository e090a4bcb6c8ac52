//! Vectorized generator for the direct steady-state solver.
//!
//! Vectorization is column-major: `vec(rho)[n + m * d] = rho_nm`, so the
//! Liouvillian row for output element `(n, m)` sits at index `n + m * d`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use sprs::{CsMat, TriMat};

use crate::error::{Error, Result};
use crate::master::Generator;
use crate::params::ModelParams;
use crate::state::DensityMatrix;

/// Largest cutoff for which the `d^2 x d^2` system is assembled by default.
pub const DEFAULT_MAX_CUTOFF: usize = 128;

#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    matrix: CsMat<C64>,
}

pub fn build_liouvillian(params: &ModelParams) -> Result<Liouvillian> {
    build_liouvillian_guarded(params, DEFAULT_MAX_CUTOFF)
}

pub fn build_liouvillian_guarded(params: &ModelParams, max_cutoff: usize) -> Result<Liouvillian> {
    params.validate()?;
    let d = params.n_cut;
    if d > max_cutoff {
        return Err(Error::ResourceGuard {
            dim: d * d,
            limit: max_cutoff,
        });
    }
    let gen = Generator::new(params)?;
    let size = d * d;
    let mut tri = TriMat::with_capacity((size, size), 6 * size);
    for m in 0..d {
        for n in 0..d {
            let row = vec_index(d, n, m);
            gen.for_each_coupling(n, m, |n2, m2, c| {
                if c != C64::new(0.0, 0.0) {
                    tri.add_triplet(row, vec_index(d, n2, m2), c);
                }
            });
        }
    }
    Ok(Liouvillian {
        dim: d,
        matrix: tri.to_csr(),
    })
}

#[inline]
pub fn vec_index(d: usize, n: usize, m: usize) -> usize {
    n + m * d
}

pub fn vectorize(rho: &Array2<C64>) -> Vec<C64> {
    let d = rho.nrows();
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for ((n, m), z) in rho.indexed_iter() {
        v[vec_index(d, n, m)] = *z;
    }
    v
}

pub fn unvectorize(v: &[C64], d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |(n, m)| v[vec_index(d, n, m)])
}

impl Liouvillian {
    /// Fock cutoff `d`; the matrix is `d^2 x d^2`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CsMat<C64> {
        &self.matrix
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim * self.dim);
        self.matrix
            .outer_iterator()
            .map(|row| row.iter().map(|(j, c)| c * v[j]).sum())
            .collect()
    }

    /// `unvec(L vec(rho))`, i.e. `drho/dt`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(unvectorize(&self.mul_vec(&vectorize(rho.matrix())), self.dim))
    }

    /// Euclidean norm of `L vec(rho)`, equal to the Frobenius norm of `drho/dt`.
    pub fn residual(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self
            .apply(rho)?
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}
