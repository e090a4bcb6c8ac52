use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::state::DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mean_n: f64,
    pub mean_a: C64,
    pub purity: f64,
    pub tail_mass: f64,
}

pub fn observables(rho: &DensityMatrix) -> Observables {
    Observables {
        mean_n: mean_photon_number(rho),
        mean_a: mean_amplitude(rho),
        purity: rho.purity(),
        tail_mass: rho.tail_mass(),
    }
}

/// `Tr(a^dag a rho)`.
pub fn mean_photon_number(rho: &DensityMatrix) -> f64 {
    (0..rho.dim()).map(|n| n as f64 * rho.get(n, n).re).sum()
}

/// `Tr(a rho) = sum_n sqrt(n) rho_{n, n-1}`.
pub fn mean_amplitude(rho: &DensityMatrix) -> C64 {
    (1..rho.dim())
        .map(|n| (n as f64).sqrt() * rho.get(n, n - 1))
        .sum()
}

/// `Tr(a^2 rho)`.
pub fn mean_amplitude_squared(rho: &DensityMatrix) -> C64 {
    (2..rho.dim())
        .map(|n| ((n * (n - 1)) as f64).sqrt() * rho.get(n, n - 2))
        .sum()
}

/// Means and standard deviations of `x = (a + a^dag)/2` and
/// `p = (a - a^dag)/2i`, in the convention `alpha = x + i p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

pub fn quadrature_moments(rho: &DensityMatrix) -> QuadratureMoments {
    let a = mean_amplitude(rho);
    let a2 = mean_amplitude_squared(rho);
    let n = mean_photon_number(rho);
    let x2 = (2.0 * a2.re + 2.0 * n + 1.0) / 4.0;
    let p2 = (-2.0 * a2.re + 2.0 * n + 1.0) / 4.0;
    QuadratureMoments {
        mean_x: a.re,
        mean_p: a.im,
        sigma_x: (x2 - a.re * a.re).max(0.0).sqrt(),
        sigma_p: (p2 - a.im * a.im).max(0.0).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    #[test]
    fn number_state() {
        let o = observables(&DensityMatrix::fock(5, 2).unwrap());
        assert_eq!(o.mean_n, 2.0);
        assert_abs_diff_eq!(o.purity, 1.0, epsilon = 1e-15);
        assert_eq!(o.mean_a, C64::new(0.0, 0.0));
    }

    #[test]
    fn even_mixture_purity() {
        let mut m = Array2::zeros((3, 3));
        m[[0, 0]] = C64::new(0.5, 0.0);
        m[[1, 1]] = C64::new(0.5, 0.0);
        let o = observables(&DensityMatrix::from_matrix(m).unwrap());
        assert_abs_diff_eq!(o.purity, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn coherent_moments() {
        let alpha = C64::new(1.5, -0.5);
        let r = DensityMatrix::coherent(40, alpha).unwrap();
        let o = observables(&r);
        assert_abs_diff_eq!(o.mean_a.re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.mean_a.im, -0.5, epsilon = 1e-12);
        let q = quadrature_moments(&r);
        assert_abs_diff_eq!(q.sigma_x, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(q.sigma_p, 0.5, epsilon = 1e-10);
    }
}
