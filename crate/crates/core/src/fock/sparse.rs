//! Compressed-sparse-row complex matrices.

use std::io::{self, Write};

use num_complex::Complex64;

use crate::{Error, Result};

/// Entries with magnitude below this are dropped as structural zeros.
pub const DROP_TOLERANCE: f64 = 1e-15;

/// Square or rectangular complex matrix in CSR layout.
///
/// Column indices within a row are sorted and unique; stored values are
/// never below [`DROP_TOLERANCE`] in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
        .expect("diagonal indices are in range")
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are
    /// summed; sums below the drop tolerance are discarded.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut entries: Vec<(usize, usize, Complex64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v.norm() >= DROP_TOLERANCE {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Row-major dense input.
    pub fn from_dense(rows: usize, cols: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Self::from_triplets(
            rows,
            cols,
            data.iter()
                .enumerate()
                .map(|(k, &v)| (k / cols, k % cols, v)),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Iterates `(col, value)` over the stored entries of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Iterates all stored `(row, col, value)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(self.rows, self.cols, self.triplets().map(|(r, c, v)| (r, c, v * s)))
            .expect("same shape")
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_triplets(
            self.cols,
            self.rows,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())),
        )
        .expect("transposed shape")
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.cols, self.rows, self.triplets().map(|(r, c, v)| (c, r, v)))
            .expect("transposed shape")
    }

    pub fn conj(&self) -> Self {
        Self {
            values: self.values.iter().map(|v| v.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Self::from_triplets(self.rows, self.cols, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Self::from_triplets(
            self.rows,
            self.cols,
            self.triplets()
                .chain(other.triplets().map(|(r, c, v)| (r, c, -v))),
        )
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut triplets = Vec::new();
        let mut accum = vec![Complex64::new(0.0, 0.0); other.cols];
        let mut touched = vec![false; other.cols];
        let mut pattern = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    accum[c] += a * b;
                }
            }
            for &c in &pattern {
                triplets.push((r, c, accum[c]));
                accum[c] = Complex64::new(0.0, 0.0);
                touched[c] = false;
            }
            pattern.clear();
        }
        Self::from_triplets(self.rows, other.cols, triplets)
    }

    /// Kronecker product `self ⊗ other`; the left factor indexes slowest.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                triplets.push((r1 * other.rows + r2, c1 * other.cols + c2, v1 * v2));
            }
        }
        Self::from_triplets(rows, cols, triplets).expect("kron indices in range")
    }

    /// `y = self · x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.cols, "matvec input length");
        assert_eq!(y.len(), self.rows, "matvec output length");
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * self.cols];
        for (r, c, v) in self.triplets() {
            out[r * self.cols + c] = v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum (induced 1-norm).
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for (_, c, v) in self.triplets() {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `‖A − A†‖_F / ‖A‖_F ≤ tol` (true for the zero matrix).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return true;
        }
        match self.sub(&self.dagger()) {
            Ok(diff) => diff.frobenius_norm() <= tol * norm,
            Err(_) => false,
        }
    }

    /// Lower and upper bandwidths `(kl, ku)`.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (r, c, _) in self.triplets() {
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        (kl, ku)
    }

    /// Writes the matrix as a coordinate list: a header line then one
    /// `row,col,re,im` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# coo {}x{} nnz={}", self.rows, self.cols, self.nnz())?;
        writeln!(w, "row,col,re,im")?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r},{c},{:.16e},{:.16e}", v.re, v.im)?;
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 1.0)), (1, 0, c(1e-17, 0.0))],
        )
        .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0, 1.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet_is_rejected() {
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseMatrix::from_dense(
            2,
            3,
            &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0), c(1.0, -1.0)],
        )
        .unwrap();
        let b = SparseMatrix::from_dense(
            3,
            2,
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let p = a.mul(&b).unwrap().to_dense();
        // Row 0: [1, 2i, 0]·B = [1 + 2i·i, 4i] = [-1, 4i]
        // Row 1: [0, 3, 1-i]·B = [3i + 1 - i, 6 + 1 - i]
        assert_eq!(p, vec![c(-1.0, 0.0), c(0.0, 4.0), c(1.0, 2.0), c(7.0, -1.0)]);
    }

    #[test]
    fn kron_index_layout_puts_left_factor_slowest() {
        let a = SparseMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let b = SparseMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0))]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.get(0, 1), c(1.0, 0.0));
        assert_eq!(k.get(2, 3), c(2.0, 0.0));
        assert_eq!(k.nnz(), 2);
    }

    #[test]
    fn coo_dump_lists_every_entry() {
        let m = SparseMatrix::from_triplets(3, 3, vec![(0, 2, c(1.5, -0.5)), (2, 0, c(1.0, 0.0))])
            .unwrap();
        let mut buf = Vec::new();
        m.write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0,2,1.5"));
    }

    #[test]
    fn bandwidths_of_tridiagonal() {
        let m = SparseMatrix::from_triplets(
            4,
            4,
            vec![(1, 0, c(1.0, 0.0)), (0, 1, c(1.0, 0.0)), (3, 1, c(1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(m.bandwidths(), (2, 1));
    }
}
