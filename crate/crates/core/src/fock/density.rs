use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CompositeSpace, FockOperator, FockSpace};
use crate::{Error, Result};

/// Relative Frobenius tolerance for Hermiticity of a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on `Tr ρ = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as round-off.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Dense density matrix on a composite Fock space (row-major storage).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: CompositeSpace,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validated constructor: checks shape, Hermiticity and unit trace.
    pub fn from_dense(space: impl Into<CompositeSpace>, data: Vec<Complex64>) -> Result<Self> {
        let rho = Self::from_dense_unchecked(space, data)?;
        rho.check_hermitian(HERMITIAN_TOL)?;
        rho.check_trace()?;
        Ok(rho)
    }

    /// Shape-checked constructor without the physical invariants, for
    /// intermediate results that are normalized afterwards.
    pub fn from_dense_unchecked(space: impl Into<CompositeSpace>, data: Vec<Complex64>) -> Result<Self> {
        let space = space.into();
        let dim = space.total_dim();
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { space, data })
    }

    /// Diagonal state `Σ_n p_n |n⟩⟨n|` in the flat basis of `space`.
    pub fn diagonal(space: impl Into<CompositeSpace>, populations: &[f64]) -> Result<Self> {
        let space = space.into();
        let dim = space.total_dim();
        if populations.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: populations.len(),
            });
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (i, &p) in populations.iter().enumerate() {
            data[i * dim + i] = Complex64::new(p, 0.0);
        }
        Self::from_dense(space, data)
    }

    pub fn basis_state(space: impl Into<CompositeSpace>, index: usize) -> Result<Self> {
        let space = space.into();
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut p = vec![0.0; dim];
        p[index] = 1.0;
        Self::diagonal(space, &p)
    }

    /// Truncated, renormalized Gibbs state with occupation ratio
    /// `n̄/(n̄+1)` between neighbouring levels.
    pub fn thermal(space: &FockSpace, n_bar: f64) -> Result<Self> {
        if !(n_bar >= 0.0) {
            return Err(Error::InvalidArgument(format!("thermal occupancy {n_bar} < 0")));
        }
        let q = n_bar / (n_bar + 1.0);
        let mut p: Vec<f64> = (0..space.dim()).map(|n| q.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        Self::diagonal(space.clone(), &p)
    }

    pub fn maximally_mixed(space: impl Into<CompositeSpace>) -> Result<Self> {
        let space = space.into();
        let dim = space.total_dim();
        Self::diagonal(space, &vec![1.0 / dim as f64; dim])
    }

    /// Pure state `|ψ⟩⟨ψ|`, normalizing `ψ`.
    pub fn pure(space: impl Into<CompositeSpace>, psi: &[Complex64]) -> Result<Self> {
        let space = space.into();
        let dim = space.total_dim();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.len(),
            });
        }
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(Error::InvalidArgument("zero state vector".into()));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = psi[i] * psi[j].conj() / norm2;
            }
        }
        Self::from_dense(space, data)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim() + j]
    }

    pub fn trace(&self) -> Complex64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖ρ − ρ†‖_F / ‖ρ‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (self.data[i * d + j] - self.data[j * d + i].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    /// Tensor product `self ⊗ other` on the concatenated space.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut factors = self.space.factors().to_vec();
        factors.extend_from_slice(other.space.factors());
        let space = CompositeSpace::new(factors)?;
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for i1 in 0..da {
            for j1 in 0..da {
                let a = self.data[i1 * da + j1];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i2 in 0..db {
                    for j2 in 0..db {
                        data[(i1 * db + i2) * d + j1 * db + j2] = a * other.data[i2 * db + j2];
                    }
                }
            }
        }
        Ok(Self { space, data })
    }

    /// Reduced state on the factor at `keep`, tracing out all others.
    pub fn partial_trace(&self, keep: usize) -> Result<Self> {
        let factor = self.space.factor(keep)?.clone();
        let dims = self.space.dims();
        let dk = dims[keep];
        let inner = self.space.stride(keep);
        let outer: usize = dims[..keep].iter().product();
        let d = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dk * dk];
        for o in 0..outer {
            for r in 0..inner {
                for a in 0..dk {
                    let row = (o * dk + a) * inner + r;
                    for b in 0..dk {
                        let col = (o * dk + b) * inner + r;
                        out[a * dk + b] += self.data[row * d + col];
                    }
                }
            }
        }
        Ok(Self {
            space: factor.into(),
            data: out,
        })
    }

    /// `Tr(ρ · op)`.
    pub fn expectation(&self, op: &FockOperator) -> Result<Complex64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        // Tr(ρ A) = Σ_ij ρ_ji A_ij
        let d = self.dim();
        Ok(op
            .matrix()
            .triplets()
            .map(|(i, j, a)| self.data[j * d + i] * a)
            .sum())
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| {
            0.5 * (self.data[i * d + j] + self.data[j * d + i].conj())
        });
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Trace norm `‖self − other‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::InvalidArgument("states live on different spaces".into()));
        }
        let diff = Self {
            space: self.space.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        };
        Ok(diff.eigenvalues().iter().map(|x| x.abs()).sum())
    }

    /// Replaces ρ by `(ρ + ρ†)/2` and rescales to unit trace.
    pub fn hermitize_and_normalize(&mut self) -> Result<()> {
        let d = self.dim();
        for i in 0..d {
            for j in i..d {
                let avg = 0.5 * (self.data[i * d + j] + self.data[j * d + i].conj());
                self.data[i * d + j] = avg;
                self.data[j * d + i] = avg.conj();
            }
        }
        let tr = self.trace().re;
        if !(tr.abs() > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidState(format!("cannot normalize a state with trace {tr}")));
        }
        self.data.iter_mut().for_each(|z| *z /= tr);
        Ok(())
    }

    /// Clips eigenvalues in `[−POSITIVITY_TOL, 0)` to zero and renormalizes.
    /// Returns the most negative eigenvalue found before clipping.
    pub fn clip_negative_eigenvalues(&mut self) -> Result<f64> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.data[i * d + j]);
        let eig = m.symmetric_eigen();
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "density matrix has eigenvalue {min:.3e} below -{POSITIVITY_TOL:.0e}"
            )));
        }
        if min < 0.0 {
            let clipped = eig.eigenvalues.map(|x| x.max(0.0));
            let total: f64 = clipped.iter().sum();
            let v = &eig.eigenvectors;
            for i in 0..d {
                for j in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += v[(i, k)] * clipped[k] * v[(j, k)].conj();
                    }
                    self.data[i * d + j] = acc / total;
                }
            }
        }
        Ok(min)
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        self.check_hermitian(1e-10)?;
        self.check_trace()?;
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Writes all entries as `row,col,re,im` lines after a schema header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let d = self.dim();
        writeln!(w, "# schema: nanofock.density_matrix v1 space={}", self.space)?;
        writeln!(w, "row,col,re,im")?;
        for i in 0..d {
            for j in 0..d {
                let z = self.data[i * d + j];
                writeln!(w, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        Ok(())
    }

    fn check_hermitian(&self, tol: f64) -> Result<()> {
        let defect = self.hermiticity_defect();
        if defect > tol {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian (relative defect {defect:.3e})"
            )));
        }
        Ok(())
    }

    fn check_trace(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(())
    }
}
