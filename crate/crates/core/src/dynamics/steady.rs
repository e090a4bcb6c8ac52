//! Direct steady-state solve of the vectorized generator.
//!
//! The stationary state spans the null space of `L`. One equation (the
//! one for `rho_00`) is replaced by the trace constraint and the system
//! is reordered by Fock-space diagonal `k = n - m`; in that ordering every
//! coupling, including the trace row, lies within `d + 1` of the diagonal,
//! so a banded LU handles `d = 128` comfortably.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::banded::BandLu;
use crate::error::{Error, Result};
use crate::liouvillian::{build_liouvillian, build_liouvillian_guarded, unvectorize, vec_index, Liouvillian};
use crate::params::ModelParams;
use crate::state::{DensityMatrix, POSITIVITY_TOL};

/// Pivot ratios below this are treated as a singular system.
pub const DEGENERACY_THRESHOLD: f64 = 1e-13;

pub const DEFAULT_SS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteadyMethod {
    Direct,
    Evolved,
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    /// `||L vec(rho)||_2` of the returned (hermitized) state.
    pub residual: f64,
    pub method: SteadyMethod,
    pub converged: bool,
    pub tail_mass: f64,
    /// Largest elementwise change made by hermitization.
    pub hermitization: f64,
    pub min_eigenvalue: f64,
    pub pivot_ratio: f64,
}

impl SteadyStateResult {
    /// Positivity holds to within truncation tolerance. Parameter sets
    /// that fail this are flagged rather than rejected.
    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue >= -POSITIVITY_TOL
    }
}

/// Position of `(n, m)` when unknowns are grouped by diagonal
/// `k = n - m` (from `-(d-1)` to `d-1`) and by `min(n, m)` within a group.
struct DiagonalOrdering {
    d: usize,
    starts: Vec<usize>,
}

impl DiagonalOrdering {
    fn new(d: usize) -> Self {
        let mut starts = Vec::with_capacity(2 * d - 1);
        let mut acc = 0;
        for k in -(d as isize - 1)..=(d as isize - 1) {
            starts.push(acc);
            acc += d - k.unsigned_abs();
        }
        DiagonalOrdering { d, starts }
    }

    #[inline]
    fn position(&self, n: usize, m: usize) -> usize {
        let block = n as isize - m as isize + self.d as isize - 1;
        self.starts[block as usize] + n.min(m)
    }
}

pub fn solve_steady_direct(params: &ModelParams) -> Result<SteadyStateResult> {
    solve_with(params, build_liouvillian(params)?, DEFAULT_SS_TOL)
}

/// As [`solve_steady_direct`] with an explicit cutoff guard and tolerance.
pub fn solve_steady_direct_with(
    params: &ModelParams,
    max_cutoff: usize,
    ss_tol: f64,
) -> Result<SteadyStateResult> {
    solve_with(params, build_liouvillian_guarded(params, max_cutoff)?, ss_tol)
}

fn solve_with(params: &ModelParams, liou: Liouvillian, ss_tol: f64) -> Result<SteadyStateResult> {
    let d = params.n_cut;
    let size = d * d;
    let order = DiagonalOrdering::new(d);
    // vec index -> (n, m)
    let coords = |v: usize| (v % d, v / d);
    let trace_row = order.position(0, 0);

    let mut entries = Vec::with_capacity(liou.nnz() + d);
    let (mut kl, mut ku) = (0usize, 0usize);
    let mut push = |i: usize, j: usize, c: C64, entries: &mut Vec<(usize, usize, C64)>| {
        if j < i {
            kl = kl.max(i - j);
        } else {
            ku = ku.max(j - i);
        }
        entries.push((i, j, c));
    };
    for (r, row) in liou.matrix().outer_iterator().enumerate() {
        let (n, m) = coords(r);
        let i = order.position(n, m);
        if i == trace_row {
            continue;
        }
        for (c, v) in row.iter() {
            let (n2, m2) = coords(c);
            push(i, order.position(n2, m2), *v, &mut entries);
        }
    }
    for n in 0..d {
        push(trace_row, order.position(n, n), C64::new(1.0, 0.0), &mut entries);
    }

    let lu = BandLu::factor(size, kl, ku, entries)
        .map_err(|_| Error::DegenerateSteadyState { pivot_ratio: 0.0 })?;
    let pivot_ratio = lu.pivot_ratio();
    if pivot_ratio < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateSteadyState { pivot_ratio });
    }
    let mut b = vec![C64::new(0.0, 0.0); size];
    b[trace_row] = C64::new(1.0, 0.0);
    lu.solve_in_place(&mut b);
    if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateSteadyState { pivot_ratio });
    }

    let mut v = vec![C64::new(0.0, 0.0); size];
    for m in 0..d {
        for n in 0..d {
            v[vec_index(d, n, m)] = b[order.position(n, m)];
        }
    }
    let mut rho = DensityMatrix::from_matrix(unvectorize(&v, d))?;
    let hermitization = rho.hermitize();
    let residual = liou.residual(&rho)?;
    Ok(SteadyStateResult {
        tail_mass: rho.tail_mass(),
        min_eigenvalue: rho.min_eigenvalue(),
        rho,
        residual,
        method: SteadyMethod::Direct,
        converged: residual < ss_tol,
        hermitization,
        pivot_ratio,
    })
}
