use num_complex::Complex64;
use rayon::prelude::*;

use super::Factorization;
use crate::fock::SparseMatrix;
use crate::{Error, Result};

/// Banded LU with partial pivoting.
///
/// Row slot `r` stores columns `r−kl ..= r+kl+ku`, which is exactly the
/// room that row exchanges and fill-in need.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

const PARALLEL_ROWS: usize = 16;

impl BandedLu {
    /// Bytes needed to factor an `n × n` matrix with the given bandwidths.
    pub fn storage_bytes(n: usize, kl: usize, ku: usize) -> usize {
        n.saturating_mul(2 * kl + ku + 1).saturating_mul(std::mem::size_of::<Complex64>())
    }

    /// Factors `a + shift·I`; refuses when the band storage exceeds
    /// `max_bytes`.
    pub fn factor(a: &SparseMatrix, shift: Complex64, max_bytes: usize) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                found: a.cols(),
            });
        }
        let n = a.rows();
        let (kl, ku) = a.bandwidths();
        let bytes = Self::storage_bytes(n, kl, ku);
        if bytes > max_bytes {
            return Err(Error::MemoryGuard {
                what: "band storage bytes",
                estimate: bytes,
                cap: max_bytes,
            });
        }
        let width = 2 * kl + ku + 1;
        let mut data = vec![Complex64::new(0.0, 0.0); n * width];
        for (r, c, v) in a.triplets() {
            data[r * width + c + kl - r] += v;
        }
        if shift != Complex64::new(0.0, 0.0) {
            for r in 0..n {
                data[r * width + kl] += shift;
            }
        }
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data,
            pivots: Vec::with_capacity(n),
        };
        lu.eliminate();
        Ok(lu)
    }

    /// Position of column `c` in row slot `r`.
    #[inline]
    fn at(&self, r: usize, c: usize) -> usize {
        r * self.width + c + self.kl - r
    }

    fn eliminate(&mut self) {
        let (n, kl, ku, w) = (self.n, self.kl, self.ku, self.width);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let p = (k..=last)
                .max_by(|&i, &j| {
                    self.data[self.at(i, k)].norm().total_cmp(&self.data[self.at(j, k)].norm())
                })
                .unwrap_or(k);
            self.pivots.push(p);
            let c_end = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=c_end {
                    let (i, j) = (self.at(k, c), self.at(p, c));
                    self.data.swap(i, j);
                }
            }
            let pivot = self.data[self.at(k, k)];
            if pivot.norm() == 0.0 || last == k {
                continue;
            }
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            // Pivot row entries for columns k..=c_end.
            let prow = &head[k * w + kl..k * w + kl + (c_end - k) + 1];
            let rows = &mut tail[..(last - k) * w];
            let eliminate = |(i, row): (usize, &mut [Complex64])| {
                let r = k + 1 + i;
                let off = k + kl - r;
                let f = row[off] / pivot;
                row[off] = f;
                if f.norm() != 0.0 {
                    for (x, u) in row[off + 1..off + 1 + (c_end - k)].iter_mut().zip(&prow[1..]) {
                        *x -= f * u;
                    }
                }
            };
            if last - k > PARALLEL_ROWS {
                rows.par_chunks_mut(w).enumerate().for_each(eliminate);
            } else {
                rows.chunks_mut(w).enumerate().for_each(eliminate);
            }
        }
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

impl Factorization for BandedLu {
    fn dim(&self) -> usize {
        self.n
    }

    fn solve_in_place(&self, b: &mut [Complex64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            b.swap(k, self.pivots[k]);
            let bk = b[k];
            if bk.norm() != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    b[r] -= self.data[self.at(r, k)] * bk;
                }
            }
        }
        for r in (0..n).rev() {
            let c_end = (r + kl + ku).min(n - 1);
            let mut s = b[r];
            for c in r + 1..=c_end {
                s -= self.data[self.at(r, c)] * b[c];
            }
            b[r] = s / self.data[self.at(r, r)];
        }
    }

    fn pivot_range(&self) -> (f64, f64) {
        (0..self.n)
            .map(|k| self.data[self.at(k, k)].norm())
            .fold((f64::INFINITY, 0.0), |(lo, hi), p| (lo.min(p), hi.max(p)))
    }
}
