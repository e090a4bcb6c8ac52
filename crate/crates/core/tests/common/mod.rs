//! Helpers shared by the integration tests: reference implementations
//! written independently of the library code paths they check.

#![allow(dead_code)]

use std::f64::consts::FRAC_2_PI;

use kfs_core::{DensityMatrix, ModelParams};
use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Weight of `rho_nm` in `W(alpha)` from the derivative form
///
/// ```text
/// W_nm = (2/pi) e^{2|a|^2} / (-2)^{n+m} d^n/d(a*)^n [(-4 a*)^m e^{-4 a a*}]
/// ```
///
/// expanded by the Leibniz rule, normalized by `sqrt(n! m!)` and conjugated
/// so that `W = sum_nm rho_nm W_nm` for `rho = sum rho_nm |n><m|`.
pub fn derivative_weight(n: usize, m: usize, alpha: C64) -> C64 {
    let ac = alpha.conj();
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..=n.min(m) {
        let falling = factorial(m) / factorial(m - k);
        sum += binomial(n, k)
            * falling
            * (-4.0f64).powi(m as i32)
            * ac.powi((m - k) as i32)
            * (-4.0 * alpha).powi((n - k) as i32);
    }
    let gauss = (-4.0 * alpha.norm_sqr()).exp() * (2.0 * alpha.norm_sqr()).exp();
    let w = FRAC_2_PI * gauss * sum / (-2.0f64).powi((n + m) as i32);
    (w / (factorial(n) * factorial(m)).sqrt()).conj()
}

pub fn oracle_wigner(rho: &DensityMatrix, alpha: C64) -> C64 {
    let d = rho.dim();
    let mut w = C64::new(0.0, 0.0);
    for n in 0..d {
        for m in 0..d {
            w += rho.get(n, m) * derivative_weight(n, m, alpha);
        }
    }
    w
}

/// `G G^dag / Tr` for a complex Gaussian `G`, optionally with only the
/// lowest `support` levels populated.
pub fn random_state(d: usize, support: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let mut g = Array2::<C64>::zeros((d, d));
    for i in 0..support.min(d) {
        for j in 0..d {
            g[[i, j]] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let mut rho = g.dot(&g.t().mapv(|z| z.conj()));
    let tr: C64 = rho.diag().sum();
    rho.mapv_inplace(|z| z / tr.re);
    let mut r = DensityMatrix::from_matrix(rho).unwrap();
    r.hermitize();
    r
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) - b.dot(a)
}

/// The master equation built from dense operator products, as printed:
///
/// ```text
/// i[H, rho] - 1/2 (N rho + rho N - 2 a rho a^dag)
///   - lam^2/(2 eta) [N, [N, rho]] + i lam [N, rho a^dag + a rho]
/// ```
pub fn dense_rhs(p: &ModelParams, rho: &Array2<C64>) -> Array2<C64> {
    let d = p.n_cut;
    let t = p.toggles;
    let mut a = Array2::<C64>::zeros((d, d));
    for n in 1..d {
        a[[n - 1, n]] = c((n as f64).sqrt(), 0.0);
    }
    let ad = dagger(&a);
    let num = ad.dot(&a);
    let eye = Array2::<C64>::eye(d);

    let mut h = Array2::<C64>::zeros((d, d));
    if t.hamiltonian {
        h = h + num.mapv(|z| z * p.delta);
    }
    if t.pump {
        let pump = C64::from_polar(p.amp, p.theta);
        h = h + ad.mapv(|z| z * pump) + a.mapv(|z| z * pump.conj());
    }
    if t.kerr {
        h = h + num.dot(&(&num - &eye)).mapv(|z| z * (0.5 * p.u));
    }

    let mut out = commutator(&h, rho).mapv(|z| I * z);
    if t.lindblad {
        let jump = a.dot(rho).dot(&ad);
        out = out - (num.dot(rho) + rho.dot(&num) - jump.mapv(|z| 2.0 * z)).mapv(|z| 0.5 * z);
    }
    if t.dephasing {
        let k = p.lam * p.lam / (2.0 * p.eta);
        out = out - commutator(&num, &commutator(&num, rho)).mapv(|z| k * z);
    }
    if t.feedback_drift {
        let x = rho.dot(&ad) + a.dot(rho);
        out = out + commutator(&num, &x).mapv(|z| I * p.lam * z);
    }
    out
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
