use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::build_full_hamiltonian;
use super::SystemConfig;
use crate::fock::{annihilation, lift, CompositeSpace, DensityMatrix, FockOperator, SparseMatrix};
use crate::{Error, Result};

/// Default cap on the stored nonzeros of a superoperator (≈ 0.5 GB).
pub const DEFAULT_NNZ_CAP: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiouvillianKind {
    /// Acts on column-stacked density matrices, `vec(ρ)[i + jD] = ρ_ij`.
    Full,
    /// Acts on population vectors `P_n` of the mechanical mode.
    ReducedPopulation,
}

/// Linear generator `ẋ = L x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    space: CompositeSpace,
    matrix: SparseMatrix,
    kind: LiouvillianKind,
}

impl Liouvillian {
    pub fn new(space: CompositeSpace, matrix: SparseMatrix, kind: LiouvillianKind) -> Result<Self> {
        let d = space.total_dim();
        let expected = match kind {
            LiouvillianKind::Full => d * d,
            LiouvillianKind::ReducedPopulation => d,
        };
        if matrix.rows() != expected || matrix.cols() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: matrix.rows().max(matrix.cols()),
            });
        }
        Ok(Self { space, matrix, kind })
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn kind(&self) -> LiouvillianKind {
        self.kind
    }

    /// Length of the vectors the generator acts on.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Indices of the vector entries that hold probabilities (the
    /// diagonal of ρ, or every entry for populations).
    pub fn trace_indices(&self) -> Vec<usize> {
        let d = self.space.total_dim();
        match self.kind {
            LiouvillianKind::Full => (0..d).map(|i| i * (d + 1)).collect(),
            LiouvillianKind::ReducedPopulation => (0..d).collect(),
        }
    }

    /// `max_col |Σ_i L[(i,i), col]|`: how far the identity is from being
    /// a left null vector.
    pub fn trace_defect(&self) -> f64 {
        let mut sums = vec![Complex64::new(0.0, 0.0); self.dim()];
        for r in self.trace_indices() {
            for (c, v) in self.matrix.row(r) {
                sums[c] += v;
            }
        }
        sums.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(x)
    }

    /// `L[ρ]` for a full generator, returned as a row-major matrix.
    pub fn apply_to_density(&self, rho: &DensityMatrix) -> Result<Vec<Complex64>> {
        if self.kind != LiouvillianKind::Full || rho.space() != &self.space {
            return Err(Error::InvalidArgument("state does not match this generator".into()));
        }
        Ok(unvectorize(&self.apply(&vectorize(rho)), self.space.total_dim()))
    }

    pub fn write_coo<W: Write>(&self, w: W) -> io::Result<()> {
        self.matrix.write_coo(w)
    }
}

/// Column-stacked copy of a density matrix.
pub fn vectorize(rho: &DensityMatrix) -> Vec<Complex64> {
    let d = rho.dim();
    let data = rho.data();
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            v[i + j * d] = data[i * d + j];
        }
    }
    v
}

/// Row-major matrix from a column-stacked vector.
pub fn unvectorize(v: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = v[i + j * d];
        }
    }
    m
}

/// `−i(I⊗H − Hᵀ⊗I)`: `vec(−i[H, ρ])`.
pub fn commutator_superop(h: &SparseMatrix) -> Result<SparseMatrix> {
    let id = SparseMatrix::identity(h.rows());
    id.kron(h).sub(&h.transpose().kron(&id)).map(|m| m.scale(Complex64::new(0.0, -1.0)))
}

/// `c̄⊗c − ½ I⊗c†c − ½ (c†c)ᵀ⊗I`: `vec(cρc† − ½{c†c, ρ})`.
pub fn dissipator_superop(c: &SparseMatrix) -> Result<SparseMatrix> {
    let id = SparseMatrix::identity(c.rows());
    let cdc = c.dagger().mul(c)?;
    c.conj()
        .kron(c)
        .sub(&id.kron(&cdc).scale_real(0.5))?
        .sub(&cdc.transpose().kron(&id).scale_real(0.5))
}

fn nnz_estimate(h: &SparseMatrix, collapse: &[SparseMatrix]) -> Result<usize> {
    let d = h.rows();
    let mut total = 2 * d * h.nnz();
    for c in collapse {
        total += c.nnz() * c.nnz() + 2 * d * c.dagger().mul(c)?.nnz();
    }
    Ok(total)
}

/// `L = −i[H, ·] + Σ_k D[c_k]` with rates absorbed into the `c_k`.
pub fn lindblad(h: &FockOperator, collapse: &[FockOperator], nnz_cap: usize) -> Result<Liouvillian> {
    let space = h.space().clone();
    let ops: Vec<SparseMatrix> = collapse
        .iter()
        .map(|c| {
            if c.space() != &space {
                Err(Error::InvalidArgument("collapse operator on a different space".into()))
            } else {
                Ok(c.matrix().clone())
            }
        })
        .collect::<Result<_>>()?;
    let estimate = nnz_estimate(h.matrix(), &ops)?;
    if estimate > nnz_cap {
        return Err(Error::MemoryGuard {
            what: "superoperator nonzeros",
            estimate,
            cap: nnz_cap,
        });
    }
    let mut l = commutator_superop(h.matrix())?;
    for c in &ops {
        l = l.add(&dissipator_superop(c)?)?;
    }
    Liouvillian::new(space, l, LiouvillianKind::Full)
}

/// Collapse operators `√κ a_j`, `√(γ_m(n̄+1)) b`, `√(γ_m n̄) b†`, zero-rate
/// channels omitted.
pub fn collapse_operators(config: &SystemConfig) -> Result<Vec<FockOperator>> {
    let space = config.space();
    let d = &config.derived;
    let mut ops = Vec::new();
    let b = lift(&annihilation(&config.mech_space()), &space, 0)?;
    let channels = [(d.gamma_m * (d.n_bar + 1.0), b.clone()), (d.gamma_m * d.n_bar, b.dagger())];
    for (rate, op) in channels {
        if rate > 0.0 {
            ops.push(op.scale(Complex64::new(rate.sqrt(), 0.0)));
        }
    }
    if d.kappa > 0.0 {
        for j in 0..config.cavity_truncations.len() {
            let a = lift(&annihilation(space.factor(j + 1)?), &space, j + 1)?;
            ops.push(a.scale(Complex64::new(d.kappa.sqrt(), 0.0)));
        }
    }
    Ok(ops)
}

/// Full multi-mode generator of the mechanics and the driven cavity
/// fluctuations.
pub fn build_full_liouvillian(config: &SystemConfig) -> Result<Liouvillian> {
    build_full_liouvillian_capped(config, DEFAULT_NNZ_CAP)
}

pub fn build_full_liouvillian_capped(config: &SystemConfig, nnz_cap: usize) -> Result<Liouvillian> {
    let h = build_full_hamiltonian(config)?;
    lindblad(&h, &collapse_operators(config)?, nnz_cap)
}
