use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::superop::{unvectorize, Liouvillian, LiouvillianKind};
use crate::fock::{DensityMatrix, SparseMatrix};
use crate::linalg::{gmres, norm2, probe_vector, BandedLu, DenseLu, Factorization, GmresOptions};
use crate::{Error, Result};

/// Largest generator dimension solved by dense LU under `Auto`.
pub const DENSE_MAX_DIM: usize = 1024;
/// Pivot magnitude, relative to `max|L|`, treated as singular.
pub const DEGENERACY_PIVOT_RATIO: f64 = 1e-14;
/// Residual bound `‖L x‖ ≤ RESIDUAL_TOL·‖L‖₁` on every solution.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Memory cap for the banded preconditioner.
pub const BAND_STORAGE_CAP: usize = 2_000_000_000;
/// Eigenvalues above this (and below zero) are round-off and left alone.
const CLIP_THRESHOLD: f64 = -1e-12;
const PREFER_PIN_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Dense,
    Iterative,
    Auto,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub method: String,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Smallest LU pivot relative to `max|L|`.
    pub min_pivot_ratio: Option<f64>,
    pub pinned_index: Option<usize>,
    /// Most negative eigenvalue removed by clipping.
    pub clipped_eigenvalue: Option<f64>,
    pub generator_norm: f64,
}

/// Solved stationary state. `populations` are always the phonon
/// populations; `rho` is present for full generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub kind: LiouvillianKind,
    #[serde(skip)]
    pub rho: Option<DensityMatrix>,
    pub populations: Vec<f64>,
    /// `‖L x‖₂` of the returned state.
    pub residual: f64,
    pub diagnostics: SolverDiagnostics,
}

impl SteadyState {
    pub fn from_populations(populations: Vec<f64>, method: &str) -> Self {
        Self {
            kind: LiouvillianKind::ReducedPopulation,
            rho: None,
            populations,
            residual: 0.0,
            diagnostics: SolverDiagnostics {
                method: method.to_string(),
                ..Default::default()
            },
        }
    }

    /// Population of the top level relative to the largest one.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.populations.iter().copied().fold(0.0, f64::max);
        self.populations.last().copied().unwrap_or(0.0) / max
    }
}

/// Null vector of `L` normalized to unit trace, as a Hermitian,
/// positivity-checked state.
pub fn steady_state_solve(l: &Liouvillian, method: SolveMethod) -> Result<SteadyState> {
    let scale = l.matrix().max_abs();
    if scale == 0.0 {
        return Err(Error::Degenerate("the generator vanishes identically".into()));
    }
    let defect = l.trace_defect();
    if defect > 1e-8 * scale {
        return Err(Error::InvalidArgument(format!(
            "generator is not trace preserving (defect {defect:.3e})"
        )));
    }
    let method = match method {
        SolveMethod::Auto if l.dim() <= DENSE_MAX_DIM => SolveMethod::Dense,
        SolveMethod::Auto => SolveMethod::Iterative,
        m => m,
    };
    let (x, mut diagnostics) = match method {
        SolveMethod::Dense => dense_null_vector(l)?,
        _ => iterative_null_vector(l)?,
    };
    diagnostics.generator_norm = l.matrix().norm_one();
    finish(l, x, diagnostics)
}

fn finish(l: &Liouvillian, x: Vec<Complex64>, mut diagnostics: SolverDiagnostics) -> Result<SteadyState> {
    let norm = diagnostics.generator_norm;
    let (rho, populations, vec) = match l.kind() {
        LiouvillianKind::Full => {
            let d = l.space().total_dim();
            let mut rho = DensityMatrix::from_dense_unchecked(l.space().clone(), unvectorize(&x, d))?;
            rho.hermitize_and_normalize()?;
            let min = rho.min_eigenvalue();
            if min < CLIP_THRESHOLD {
                rho.clip_negative_eigenvalues()?;
                diagnostics.clipped_eigenvalue = Some(min);
            }
            rho.validate()?;
            let mech = rho.partial_trace(0)?.populations();
            let vec = super::superop::vectorize(&rho);
            (Some(rho), mech, vec)
        }
        LiouvillianKind::ReducedPopulation => {
            let total: Complex64 = x.iter().sum();
            let p: Vec<f64> = x.iter().map(|z| (z / total).re).collect();
            if let Some(bad) = p.iter().copied().find(|&v| v < -1e-10) {
                return Err(Error::InvalidState(format!("negative population {bad:.3e}")));
            }
            let vec = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            (None, p, vec)
        }
    };
    let residual = norm2(&l.apply(&vec));
    if residual > RESIDUAL_TOL * norm {
        return Err(Error::Numerical(format!(
            "steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}·‖L‖ = {:.3e}",
            RESIDUAL_TOL * norm
        )));
    }
    Ok(SteadyState {
        kind: l.kind(),
        rho,
        populations,
        residual,
        diagnostics,
    })
}

/// Solves `L x = 0` with `x_pin = 1` by dense LU of `L` without row and
/// column `pin`.
fn pinned_dense_solve(l: &SparseMatrix, pin: usize, scale: f64) -> Result<(Vec<Complex64>, f64)> {
    let n = l.rows();
    let m = n - 1;
    let shrink = |i: usize| if i < pin { i } else { i - 1 };
    let mut a = vec![Complex64::new(0.0, 0.0); m * m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    for (r, c, v) in l.triplets() {
        if r == pin {
            continue;
        }
        if c == pin {
            rhs[shrink(r)] = -v;
        } else {
            a[shrink(r) * m + shrink(c)] = v;
        }
    }
    let lu = DenseLu::factor(a, m);
    let ratio = if m == 0 { 1.0 } else { lu.pivot_range().0 / scale };
    if !(ratio > DEGENERACY_PIVOT_RATIO) {
        return Err(Error::Degenerate(format!(
            "smallest LU pivot is {ratio:.3e}·max|L|; the null space has dimension > 1"
        )));
    }
    lu.solve_in_place(&mut rhs);
    let mut x = Vec::with_capacity(n);
    x.extend_from_slice(&rhs[..pin]);
    x.push(Complex64::new(1.0, 0.0));
    x.extend_from_slice(&rhs[pin..]);
    Ok((x, ratio))
}

fn dense_null_vector(l: &Liouvillian) -> Result<(Vec<Complex64>, SolverDiagnostics)> {
    let scale = l.matrix().max_abs();
    let probs = l.trace_indices();
    let mut pin = probs[0];
    let (mut x, mut ratio) = pinned_dense_solve(l.matrix(), pin, scale)?;
    // A small pinned entry loses relative accuracy; pin the largest
    // probability instead.
    let best = *probs
        .iter()
        .max_by(|&&a, &&b| x[a].norm().total_cmp(&x[b].norm()))
        .expect("non-empty");
    if x[pin].norm() < PREFER_PIN_RATIO * x[best].norm() {
        pin = best;
        (x, ratio) = pinned_dense_solve(l.matrix(), pin, scale)?;
    }
    Ok((
        x,
        SolverDiagnostics {
            method: "dense_lu".into(),
            min_pivot_ratio: Some(ratio),
            pinned_index: Some(pin),
            ..Default::default()
        },
    ))
}

/// GMRES on `L` with the trace condition replacing one row, right
/// preconditioned by a banded LU of `L − σI`.
fn iterative_null_vector(l: &Liouvillian) -> Result<(Vec<Complex64>, SolverDiagnostics)> {
    let n = l.dim();
    let scale = l.matrix().max_abs();
    let sigma = 1e-12 * scale;
    let precond = BandedLu::factor(l.matrix(), Complex64::new(-sigma, 0.0), BAND_STORAGE_CAP)?;
    let (min_pivot, _) = precond.pivot_range();

    // Inverse iteration from two unrelated vectors lands on the same
    // direction only if the null space is one-dimensional.
    let mut u1 = probe_vector(n, 17);
    let mut u2 = probe_vector(n, 23);
    precond.solve_in_place(&mut u1);
    precond.solve_in_place(&mut u2);
    let overlap = crate::linalg::dot(&u1, &u2).norm() / (norm2(&u1) * norm2(&u2));
    if !(1.0 - overlap < 1e-4) {
        return Err(Error::Degenerate(format!(
            "inverse iteration from independent starts disagrees (1 − |cos| = {:.3e})",
            1.0 - overlap
        )));
    }

    let probs = l.trace_indices();
    let row = probs[0];
    let mut is_trace = vec![false; n];
    probs.iter().for_each(|&i| is_trace[i] = true);
    let matrix = l.matrix();
    let apply = |x: &[Complex64], y: &mut [Complex64]| {
        matrix.matvec_into(x, y);
        y[row] = probs.iter().map(|&i| x[i]).sum::<Complex64>() * scale;
    };
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    b[row] = Complex64::new(scale, 0.0);
    let options = GmresOptions {
        restart: 60,
        max_iterations: 300,
        tolerance: 1e-12,
    };
    let out = gmres(apply, |v| precond.solve_in_place(v), &b, options)?;
    Ok((
        out.x,
        SolverDiagnostics {
            method: "gmres_banded_lu".into(),
            iterations: out.iterations,
            residual_history: out.residual_history,
            min_pivot_ratio: Some(min_pivot / scale),
            pinned_index: None,
            ..Default::default()
        },
    ))
}
