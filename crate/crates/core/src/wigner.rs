//! Wigner distribution on a phase-space grid and its integrated negativity.
//!
//! With `alpha = x + i p` and `x_k = 4|alpha|^2`, the matrix element that
//! multiplies `rho_{n, n+k}` is
//!
//! ```text
//! (2/pi) (-1)^n e^{ik phi} g_n,   g_n = x_k^{k/2} e^{-x_k/2} sqrt(n!/(n+k)!) L_n^k(x_k)
//! ```
//!
//! and `g_n` obeys a three-term recurrence that never forms a factorial, so
//! evaluation stays finite for any cutoff and `|alpha|` used here.

use std::f64::consts::FRAC_2_PI;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::{mean_photon_number, quadrature_moments};
use crate::error::{Error, Result};
use crate::par::*;
use crate::state::DensityMatrix;

pub const NORMALIZATION_TOL: f64 = 1e-3;
/// Largest change in negativity tolerated when the grid is doubled.
pub const REFINEMENT_TOL: f64 = 1e-3;
pub const MIN_POINTS: usize = 16;

/// Target cell size of automatic grids.
const AUTO_CELL: f64 = 0.04;
const AUTO_MIN_POINTS: usize = 64;
const AUTO_MAX_POINTS: usize = 640;
const MAX_REFINED_POINTS: usize = 1280;
/// Fock diagonals whose total weight is below this are skipped.
const BAND_TOL: f64 = 1e-15;

/// Uniform grid of cell centres over `[x_min, x_max] x [p_min, p_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x: (f64, f64), p: (f64, f64), nx: usize, np: usize) -> Result<Self> {
        let g = PhaseSpaceGrid {
            x_min: x.0,
            x_max: x.1,
            p_min: p.0,
            p_max: p.1,
            nx,
            np,
        };
        g.validate()?;
        Ok(g)
    }

    /// `[-half, half]^2` with `n` points per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half), (-half, half), n, n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_min >= self.x_max || self.p_min >= self.p_max {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!(
                    "bounds must be finite and ordered, got x [{}, {}], p [{}, {}]",
                    self.x_min, self.x_max, self.p_min, self.p_max
                ),
            });
        }
        if self.nx < MIN_POINTS || self.np < MIN_POINTS {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!(
                    "need at least {MIN_POINTS} points per axis, got {}x{}",
                    self.nx, self.np
                ),
            });
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / self.np as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + (j as f64 + 0.5) * self.dp()
    }

    /// Same bounds, twice the points per axis.
    pub fn refined(&self) -> Self {
        PhaseSpaceGrid {
            nx: 2 * self.nx,
            np: 2 * self.np,
            ..*self
        }
    }

    /// Same bounds, half the points per axis (never below the minimum).
    pub fn coarsened(&self) -> Self {
        PhaseSpaceGrid {
            nx: (self.nx / 2).max(MIN_POINTS),
            np: (self.np / 2).max(MIN_POINTS),
            ..*self
        }
    }

    /// Largest `|alpha|` on the grid boundary.
    pub fn max_radius(&self) -> f64 {
        let x = self.x_min.abs().max(self.x_max.abs());
        let p = self.p_min.abs().max(self.p_max.abs());
        x.hypot(p)
    }
}

/// Grid selection in configuration files: the string `"auto"` or an
/// explicit grid object.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GridPolicy {
    #[default]
    Auto,
    Explicit(PhaseSpaceGrid),
}

impl Serialize for GridPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GridPolicy::Auto => s.serialize_str("auto"),
            GridPolicy::Explicit(g) => g.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for GridPolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Grid(PhaseSpaceGrid),
        }
        match Raw::deserialize(d)? {
            Raw::Name(s) if s == "auto" => Ok(GridPolicy::Auto),
            Raw::Name(s) => Err(serde::de::Error::custom(format!(
                "grid must be \"auto\" or a grid object, got \"{s}\""
            ))),
            Raw::Grid(g) => Ok(GridPolicy::Explicit(g)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    /// `values[[i, j]] = W(x_i + i p_j)`.
    pub values: Array2<f64>,
    pub quadrature_weight: f64,
    /// Largest `|Im W|` met during evaluation.
    pub imag_residue: f64,
    /// `<n>` of the source state, used to suggest bounds.
    pub mean_n: f64,
}

impl WignerField {
    /// Midpoint-rule `int W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.quadrature_weight
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(x, p, W)` in row order.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .indexed_iter()
            .map(|((i, j), &w)| (self.grid.x(i), self.grid.p(j), w))
    }

    fn check_normalization(&self) -> Result<()> {
        let integral = self.integral();
        if (integral - 1.0).abs() < NORMALIZATION_TOL {
            return Ok(());
        }
        let half = suggested_half_width(self.mean_n);
        Err(Error::GridTooSmall {
            integral,
            suggested: [-half, half, -half, half],
        })
    }
}

/// `4 + 2 |alpha|` with `|alpha| = sqrt(<n>)`.
fn suggested_half_width(mean_n: f64) -> f64 {
    4.0 + 2.0 * mean_n.max(0.0).sqrt()
}

/// Per-state tables for fast evaluation at many points.
pub struct WignerKernel {
    /// Diagonals `k >= bands` are negligible and skipped.
    bands: usize,
    /// `up[k][n] = (-1)^n rho_{n, n+k}`, `lo[k][n] = (-1)^n rho_{n+k, n}`.
    up: Vec<Vec<C64>>,
    lo: Vec<Vec<C64>>,
    /// Per diagonal: `(2n+1+k, 1/sqrt((n+1)(n+1+k)), sqrt(n(n+k))/sqrt((n+1)(n+1+k)))`.
    rec: Vec<Vec<(f64, f64, f64)>>,
    /// `ln(k!) / 2`.
    half_ln_fact: Vec<f64>,
}

impl WignerKernel {
    pub fn new(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let m = rho.matrix();
        let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut up: Vec<Vec<C64>> = Vec::with_capacity(d);
        let mut lo: Vec<Vec<C64>> = Vec::with_capacity(d);
        let mut rec = Vec::with_capacity(d);
        for k in 0..d {
            let len = d - k;
            up.push((0..len).map(|n| sign(n) * m[[n, n + k]]).collect());
            lo.push((0..len).map(|n| sign(n) * m[[n + k, n]]).collect());
            rec.push(
                (0..len)
                    .map(|n| {
                        let (nf, kf) = (n as f64, k as f64);
                        let c = 1.0 / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
                        (2.0 * nf + 1.0 + kf, c, (nf * (nf + kf)).sqrt() * c)
                    })
                    .collect(),
            );
        }
        let mut half_ln_fact = vec![0.0; d];
        for k in 1..d {
            half_ln_fact[k] = half_ln_fact[k - 1] + 0.5 * (k as f64).ln();
        }
        // |g_n| <= 1, so a diagonal contributes at most its l1 norm
        let weight = |k: usize| -> f64 {
            up[k].iter().chain(&lo[k]).map(|z: &C64| z.norm()).sum()
        };
        let bands = (0..d).rev().find(|&k| weight(k) > BAND_TOL).map_or(1, |k| k + 1);
        WignerKernel {
            bands,
            up,
            lo,
            rec,
            half_ln_fact,
        }
    }

    /// `W(alpha)` before discarding the imaginary part.
    pub fn eval(&self, alpha: C64) -> C64 {
        let r = alpha.norm();
        let x = 4.0 * r * r;
        let unit = if r > 0.0 { alpha / r } else { C64::new(1.0, 0.0) };
        let mut phase = C64::new(1.0, 0.0);
        let mut w = C64::new(0.0, 0.0);
        for k in 0..self.bands {
            let g0 = if x == 0.0 {
                if k == 0 {
                    1.0
                } else {
                    break;
                }
            } else {
                (0.5 * k as f64 * x.ln() - 0.5 * x - self.half_ln_fact[k]).exp()
            };
            let (up, lo, rec) = (&self.up[k], &self.lo[k], &self.rec[k]);
            let (mut su, mut sl) = (up[0] * g0, lo[0] * g0);
            let (mut prev, mut g) = (0.0, g0);
            for n in 1..up.len() {
                let (a, c, bc) = rec[n - 1];
                let next = (a - x) * c * g - bc * prev;
                prev = g;
                g = next;
                su += up[n] * g;
                sl += lo[n] * g;
            }
            if k == 0 {
                w += su;
            } else {
                w += phase * su + phase.conj() * sl;
            }
            phase *= unit;
        }
        w * FRAC_2_PI
    }
}

/// `W(alpha)` for a single point, as a complex number whose imaginary part
/// vanishes for Hermitian `rho`.
pub fn wigner_at(rho: &DensityMatrix, alpha: C64) -> C64 {
    WignerKernel::new(rho).eval(alpha)
}

pub fn wigner_transform(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    grid.validate()?;
    let kernel = WignerKernel::new(rho);
    let mut values = Array2::<f64>::zeros((grid.nx, grid.np));
    let np = grid.np;
    let residues: Vec<f64> = values
        .as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(np)
        .enumerate()
        .map(|(i, row)| {
            let x = grid.x(i);
            let mut residue = 0.0f64;
            for (j, out) in row.iter_mut().enumerate() {
                let w = kernel.eval(C64::new(x, grid.p(j)));
                *out = w.re;
                residue = residue.max(w.im.abs());
            }
            residue
        })
        .collect();
    Ok(WignerField {
        grid: *grid,
        values,
        quadrature_weight: grid.cell_area(),
        imag_residue: residues.into_iter().fold(0.0, f64::max),
        mean_n: mean_photon_number(rho),
    })
}

/// `1/2 int (|W| - W) dx dp` by the midpoint rule.
pub fn negativity(field: &WignerField) -> Result<f64> {
    field.check_normalization()?;
    let neg: f64 = field.values.iter().map(|&w| (-w).max(0.0)).sum();
    Ok(neg * field.quadrature_weight)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityReport {
    pub value: f64,
    /// `|N(grid) - N(coarser grid)|`.
    pub refinement_delta: f64,
    pub integral: f64,
    pub grid: PhaseSpaceGrid,
}

impl NegativityReport {
    pub fn accepted(&self) -> bool {
        self.refinement_delta < REFINEMENT_TOL
    }
}

/// Negativity on `grid`, together with the change from a grid with half
/// the points per axis.
pub fn negativity_with_refinement(
    rho: &DensityMatrix,
    grid: &PhaseSpaceGrid,
) -> Result<NegativityReport> {
    let fine = wigner_transform(rho, grid)?;
    let value = negativity(&fine)?;
    let coarse = negativity(&wigner_transform(rho, &grid.coarsened())?)?;
    Ok(NegativityReport {
        value,
        refinement_delta: (value - coarse).abs(),
        integral: fine.integral(),
        grid: *grid,
    })
}

/// Bounds `centre +- (4 sigma + 1)` per axis and roughly `AUTO_CELL` spacing.
pub fn auto_grid(rho: &DensityMatrix) -> PhaseSpaceGrid {
    let q = quadrature_moments(rho);
    let hx = 4.0 * q.sigma_x + 1.0;
    let hp = 4.0 * q.sigma_p + 1.0;
    PhaseSpaceGrid {
        x_min: q.mean_x - hx,
        x_max: q.mean_x + hx,
        p_min: q.mean_p - hp,
        p_max: q.mean_p + hp,
        nx: points_for(2.0 * hx),
        np: points_for(2.0 * hp),
    }
}

fn points_for(span: f64) -> usize {
    let n = (span / AUTO_CELL).ceil() as usize;
    (n + n % 2).clamp(AUTO_MIN_POINTS, AUTO_MAX_POINTS)
}

/// Symmetric grid `[-h, h]^2` with `h = 4 + 2 sqrt(<n>)`.
pub fn default_grid(rho: &DensityMatrix) -> PhaseSpaceGrid {
    let half = suggested_half_width(mean_photon_number(rho));
    let n = points_for(2.0 * half);
    PhaseSpaceGrid {
        x_min: -half,
        x_max: half,
        p_min: -half,
        p_max: half,
        nx: n,
        np: n,
    }
}

/// Smallest box containing both grids, at the automatic spacing.
fn union(a: &PhaseSpaceGrid, b: &PhaseSpaceGrid) -> PhaseSpaceGrid {
    let (x_min, x_max) = (a.x_min.min(b.x_min), a.x_max.max(b.x_max));
    let (p_min, p_max) = (a.p_min.min(b.p_min), a.p_max.max(b.p_max));
    PhaseSpaceGrid {
        x_min,
        x_max,
        p_min,
        p_max,
        nx: points_for(x_max - x_min),
        np: points_for(p_max - p_min),
    }
}

/// Negativity on a grid inferred from the state, doubling the resolution
/// until the refinement check passes (or the point cap is reached).
///
/// The automatic box follows the first two moments, which undersizes
/// strongly non-Gaussian states (crescents wrapped around the origin). If
/// that box fails the normalization check it is widened to also cover the
/// symmetric default box.
pub fn negativity_report(rho: &DensityMatrix, auto: bool) -> Result<NegativityReport> {
    let mut grid = if auto { auto_grid(rho) } else { default_grid(rho) };
    let mut report = match negativity_with_refinement(rho, &grid) {
        Err(Error::GridTooSmall { .. }) if auto => {
            grid = union(&grid, &default_grid(rho));
            negativity_with_refinement(rho, &grid)?
        }
        other => other?,
    };
    while !report.accepted() && grid.nx.max(grid.np) * 2 <= MAX_REFINED_POINTS {
        let coarse = report.value;
        grid = grid.refined();
        let field = wigner_transform(rho, &grid)?;
        let value = negativity(&field)?;
        report = NegativityReport {
            value,
            refinement_delta: (value - coarse).abs(),
            integral: field.integral(),
            grid,
        };
    }
    Ok(report)
}

pub fn negativity_of_state(rho: &DensityMatrix, auto_grid: bool) -> Result<f64> {
    negativity_report(rho, auto_grid).map(|r| r.value)
}
