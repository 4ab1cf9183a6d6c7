use std::io::{self, Write};

use num_complex::Complex64;

use super::{CompositeSpace, FockSpace, SparseMatrix};
use crate::{Error, Result};

/// Operators larger than this are never densified implicitly.
pub const DENSE_DIM_LIMIT: usize = 4096;

/// A sparse complex operator on a (composite) truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: CompositeSpace,
    matrix: SparseMatrix,
}

impl FockOperator {
    pub fn new(space: impl Into<CompositeSpace>, matrix: SparseMatrix) -> Result<Self> {
        let space = space.into();
        let dim = space.total_dim();
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn identity(space: impl Into<CompositeSpace>) -> Self {
        let space = space.into();
        let dim = space.total_dim();
        Self {
            space,
            matrix: SparseMatrix::identity(dim),
        }
    }

    pub fn zero(space: impl Into<CompositeSpace>) -> Self {
        let space = space.into();
        let dim = space.total_dim();
        Self {
            space,
            matrix: SparseMatrix::zeros(dim, dim),
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.dagger(),
        }
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(s.into()),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.sub(&other.matrix)?,
        })
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.mul(&other.matrix)?,
        })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.is_hermitian(tol)
    }

    /// Row-major dense copy; refused above `max_dim`.
    pub fn to_dense(&self, max_dim: usize) -> Result<Vec<Complex64>> {
        if self.dim() > max_dim {
            return Err(Error::InvalidArgument(format!(
                "refusing dense storage of a {}-dimensional operator (limit {max_dim})",
                self.dim()
            )));
        }
        Ok(self.matrix.to_dense())
    }

    pub fn write_coo<W: Write>(&self, w: W) -> io::Result<()> {
        self.matrix.write_coo(w)
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::InvalidArgument(format!(
                "operators act on different spaces: {} vs {}",
                self.space, other.space
            )));
        }
        Ok(())
    }
}

/// Ladder operator `b` with `⟨n−1|b|n⟩ = √n`.
pub fn annihilation(space: &FockSpace) -> FockOperator {
    let dim = space.dim();
    let matrix = SparseMatrix::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0))),
    )
    .expect("ladder indices in range");
    FockOperator {
        space: space.clone().into(),
        matrix,
    }
}

pub fn creation(space: &FockSpace) -> FockOperator {
    annihilation(space).dagger()
}

/// `b†b = diag(0, 1, …, dim−1)`.
pub fn number(space: &FockSpace) -> FockOperator {
    let diag: Vec<_> = (0..space.dim())
        .map(|n| Complex64::new(n as f64, 0.0))
        .collect();
    FockOperator {
        space: space.clone().into(),
        matrix: SparseMatrix::from_diagonal(&diag),
    }
}

/// Neighbouring-level transition `b_n = √n |n−1⟩⟨n|`, `1 ≤ n ≤ dim−1`.
pub fn fock_transition(space: &FockSpace, n: usize) -> Result<FockOperator> {
    if n == 0 || n >= space.dim() {
        return Err(Error::InvalidArgument(format!(
            "transition index {n} outside 1..={}",
            space.dim() - 1
        )));
    }
    let dim = space.dim();
    let matrix = SparseMatrix::from_triplets(
        dim,
        dim,
        [(n - 1, n, Complex64::new((n as f64).sqrt(), 0.0))],
    )?;
    Ok(FockOperator {
        space: space.clone().into(),
        matrix,
    })
}

/// Projector `|n⟩⟨n|`.
pub fn projector(space: &FockSpace, n: usize) -> Result<FockOperator> {
    if n >= space.dim() {
        return Err(Error::InvalidArgument(format!(
            "level {n} outside a {}-level space",
            space.dim()
        )));
    }
    let dim = space.dim();
    let matrix = SparseMatrix::from_triplets(dim, dim, [(n, n, Complex64::new(1.0, 0.0))])?;
    Ok(FockOperator {
        space: space.clone().into(),
        matrix,
    })
}

/// Embeds a single-factor operator as `1 ⊗ … ⊗ op ⊗ … ⊗ 1` at `slot`.
pub fn lift(op: &FockOperator, composite: &CompositeSpace, slot: usize) -> Result<FockOperator> {
    let factor = composite.factor(slot)?;
    if op.space.num_factors() != 1 || &op.space.factors()[0] != factor {
        return Err(Error::InvalidArgument(format!(
            "operator on {} cannot be lifted into slot {slot} ({factor}) of {composite}",
            op.space
        )));
    }
    let left = SparseMatrix::identity(composite.factors()[..slot].iter().map(FockSpace::dim).product());
    let right = SparseMatrix::identity(composite.stride(slot));
    let matrix = left.kron(&op.matrix).kron(&right);
    FockOperator::new(composite.clone(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(dim: usize, label: &str) -> FockSpace {
        FockSpace::new(dim, label).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn annihilation_dim3_entries() {
        let b = annihilation(&mode(3, "m"));
        let m = b.matrix();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), c(1.0));
        assert!((m.get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn annihilation_dim2_single_entry() {
        let b = annihilation(&mode(2, "m"));
        assert_eq!(b.matrix().nnz(), 1);
        assert_eq!(b.matrix().get(0, 1), c(1.0));
    }

    #[test]
    fn number_is_creation_times_annihilation() {
        let s = mode(5, "m");
        let n = creation(&s).mul(&annihilation(&s)).unwrap();
        for (k, d) in n.matrix().diagonal().iter().enumerate() {
            assert!((d - c(k as f64)).norm() < 1e-14);
        }
        assert!(n.sub(&number(&s)).unwrap().matrix().max_abs() < 1e-14);
    }

    #[test]
    fn fock_transitions() {
        let s = mode(4, "m");
        let b1 = fock_transition(&s, 1).unwrap();
        assert_eq!(b1.matrix().get(0, 1), c(1.0));
        let b3 = fock_transition(&s, 3).unwrap();
        assert!((b3.matrix().get(2, 3).re - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(b3.matrix().nnz(), 1);

        let mut sum = FockOperator::zero(s.clone());
        for n in 1..4 {
            sum = sum.add(&fock_transition(&s, n).unwrap()).unwrap();
        }
        assert_eq!(sum, annihilation(&s));

        assert!(fock_transition(&s, 0).is_err());
        assert!(fock_transition(&s, 4).is_err());
    }

    #[test]
    fn lift_number_into_first_slot() {
        let a = mode(2, "a");
        let b = mode(2, "b");
        let comp = CompositeSpace::new(vec![a.clone(), b]).unwrap();
        let lifted = lift(&number(&a), &comp, 0).unwrap();
        let diag: Vec<f64> = lifted.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn lift_identity_is_identity() {
        let a = mode(3, "a");
        let b = mode(2, "b");
        let comp = CompositeSpace::new(vec![a, b.clone()]).unwrap();
        let lifted = lift(&FockOperator::identity(b), &comp, 1).unwrap();
        assert_eq!(lifted, FockOperator::identity(comp));
    }

    #[test]
    fn lifts_into_different_slots_commute() {
        let a = mode(3, "a");
        let b = mode(4, "b");
        let comp = CompositeSpace::new(vec![a.clone(), b.clone()]).unwrap();
        let la = lift(&annihilation(&a), &comp, 0).unwrap();
        let lb = lift(&creation(&b), &comp, 1).unwrap();
        assert!(la.commutator(&lb).unwrap().matrix().frobenius_norm() < 1e-14);
    }

    #[test]
    fn lift_rejects_wrong_factor_and_slot() {
        let a = mode(3, "a");
        let b = mode(4, "b");
        let comp = CompositeSpace::new(vec![a.clone(), b]).unwrap();
        assert!(lift(&number(&a), &comp, 1).is_err());
        assert!(lift(&number(&a), &comp, 2).is_err());
    }

    #[test]
    fn canonical_commutator_except_top_level() {
        let s = mode(6, "m");
        let comm = annihilation(&s).commutator(&creation(&s)).unwrap();
        let diag = comm.matrix().diagonal();
        for (n, d) in diag.iter().enumerate().take(5) {
            assert!((d - c(1.0)).norm() < 1e-14, "level {n}");
        }
        // Truncation artifact on the top level: 1 − dim.
        assert!((diag[5] - c(-5.0)).norm() < 1e-14);
    }

    #[test]
    fn dense_refused_above_limit() {
        let s = mode(10, "m");
        assert!(number(&s).to_dense(5).is_err());
        assert_eq!(number(&s).to_dense(10).unwrap().len(), 100);
    }
}
