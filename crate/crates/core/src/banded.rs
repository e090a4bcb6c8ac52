//! LU factorization of complex banded matrices with partial pivoting.
//!
//! Rows are stored as dense windows `[i - kl, i + kl + ku]`, which leaves
//! room for the fill produced by row interchanges. Multipliers are kept
//! per elimination step, so the solve replays interchanges in order.

use num_complex::Complex64 as C64;

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    upper: Vec<C64>,
    multipliers: Vec<C64>,
    pivots: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPivot {
    pub column: usize,
}

impl BandLu {
    /// Factor an `n x n` matrix given as `(row, col, value)` entries, all of
    /// which must satisfy `-kl <= col - row <= ku`. Duplicates are summed.
    pub fn factor(
        n: usize,
        kl: usize,
        ku: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self, ZeroPivot> {
        let width = 2 * kl + ku + 1;
        let mut a = vec![C64::new(0.0, 0.0); n * width];
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}x{n}");
            assert!(
                j + kl >= i && j <= i + ku,
                "entry ({i}, {j}) outside band kl={kl} ku={ku}"
            );
            a[i * width + j + kl - i] += v;
        }
        let at = |i: usize, j: usize| i * width + j + kl - i;

        let mut multipliers = vec![C64::new(0.0, 0.0); n * kl];
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = a[at(k, k)].norm();
            for r in k + 1..=last {
                let v = a[at(r, k)].norm();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                return Err(ZeroPivot { column: k });
            }
            pivots[k] = p;
            let right = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=right {
                    a.swap(at(k, c), at(p, c));
                }
            }
            let pivot = a[at(k, k)];
            for r in k + 1..=last {
                let l = a[at(r, k)] / pivot;
                multipliers[k * kl + (r - k - 1)] = l;
                a[at(r, k)] = C64::new(0.0, 0.0);
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let (src, dst) = (at(k, k + 1), at(r, k + 1));
                let len = right - k;
                // rows k < r never overlap in storage
                let (head, tail) = a.split_at_mut(dst);
                let src = &head[src..src + len];
                for (d, s) in tail[..len].iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            width,
            upper: a,
            multipliers,
            pivots,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `min |u_kk| / max |u_kk|`; a cheap conditioning indicator.
    pub fn pivot_ratio(&self) -> f64 {
        let (lo, hi) = (0..self.n)
            .map(|k| self.upper[k * self.width + self.kl].norm())
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            0.0
        } else {
            lo / hi
        }
    }

    /// Overwrite `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + kl).min(n - 1);
            let m = &self.multipliers[k * kl..k * kl + (last - k)];
            for (br, &l) in b[k + 1..=last].iter_mut().zip(m) {
                *br -= l * bk;
            }
        }
        for k in (0..n).rev() {
            let right = (k + kl + ku).min(n - 1);
            let row = &self.upper[k * w..(k + 1) * w];
            let mut acc = b[k];
            for c in k + 1..=right {
                acc -= row[c + kl - k] * b[c];
            }
            b[k] = acc / row[kl];
        }
    }
}
