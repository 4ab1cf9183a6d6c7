use num_complex::Complex64;
use rayon::prelude::*;

use super::Factorization;

/// Row-major LU factorization with partial pivoting, `PA = LU`.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
}

/// Rows below which the elimination stays sequential.
const PARALLEL_ROWS: usize = 64;

impl DenseLu {
    /// Factorizes a row-major `n × n` matrix. Exactly singular pivots are
    /// kept; [`Factorization::pivot_range`] exposes them.
    pub fn factor(mut a: Vec<Complex64>, n: usize) -> Self {
        assert_eq!(a.len(), n * n, "dense LU needs a square matrix");
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap_or(k);
            pivots.push(p);
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
            }
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let pivot = pivot_row[k];
            if pivot.norm() == 0.0 {
                continue;
            }
            let eliminate = |row: &mut [Complex64]| {
                let f = row[k] / pivot;
                row[k] = f;
                if f.norm() != 0.0 {
                    for c in k + 1..n {
                        row[c] -= f * pivot_row[c];
                    }
                }
            };
            if n - k > PARALLEL_ROWS {
                tail.par_chunks_mut(n).for_each(eliminate);
            } else {
                tail.chunks_mut(n).for_each(eliminate);
            }
        }
        Self { n, lu: a, pivots }
    }
}

impl Factorization for DenseLu {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        for k in 0..n {
            b.swap(k, self.pivots[k]);
        }
        for r in 0..n {
            let row = &self.lu[r * n..r * n + r];
            let s = row.iter().zip(&b[..r]).fold(b[r], |acc, (l, x)| acc - l * x);
            b[r] = s;
        }
        for r in (0..n).rev() {
            let row = &self.lu[r * n..(r + 1) * n];
            let s = row[r + 1..].iter().zip(&b[r + 1..]).fold(b[r], |acc, (u, x)| acc - u * x);
            b[r] = s / row[r];
        }
    }

    fn pivot_range(&self) -> (f64, f64) {
        (0..self.n)
            .map(|k| self.lu[k * self.n + k].norm())
            .fold((f64::INFINITY, 0.0), |(lo, hi), p| (lo.min(p), hi.max(p)))
    }
}
