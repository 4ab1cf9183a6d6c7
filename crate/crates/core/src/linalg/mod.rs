//! Linear solvers for steady-state problems: dense and banded LU with
//! partial pivoting, and restarted GMRES.

mod banded;
mod dense;
mod gmres;

pub use banded::BandedLu;
pub use dense::DenseLu;
pub use gmres::{gmres, GmresOptions, GmresOutcome};

use num_complex::Complex64;

/// A factorized square matrix.
pub trait Factorization: Sync {
    fn dim(&self) -> usize;

    /// Overwrites `b` with `A⁻¹b`.
    fn solve_in_place(&self, b: &mut [Complex64]);

    /// `(min, max)` magnitude of the pivots of U.
    fn pivot_range(&self) -> (f64, f64);
}

/// `Σ conj(a_i) b_i`, summed in index order.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `y ← y + s·x`
pub fn axpy(s: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Deterministic pseudo-random unit-scale complex vector (splitmix64).
pub fn probe_vector(n: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}
