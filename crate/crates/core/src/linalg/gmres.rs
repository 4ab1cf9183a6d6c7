use num_complex::Complex64;

use super::{axpy, dot, norm2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iterations: usize,
    /// Target `‖b − Ax‖/‖b‖`.
    pub tolerance: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 40,
            max_iterations: 400,
            tolerance: 1e-13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual after each inner iteration.
    pub residual_history: Vec<f64>,
}

/// Right-preconditioned restarted GMRES for `A x = b` with `x₀ = 0`.
///
/// `apply(x, y)` writes `y = A x`; `precondition(v)` overwrites `v` with
/// `M⁻¹v`.
pub fn gmres(
    apply: impl Fn(&[Complex64], &mut [Complex64]),
    precondition: impl Fn(&mut [Complex64]),
    b: &[Complex64],
    options: GmresOptions,
) -> Result<GmresOutcome> {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let b_norm = norm2(b);
    let mut x = vec![zero; n];
    let mut history = Vec::new();
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            x,
            iterations: 0,
            residual_history: history,
        });
    }
    let m = options.restart.max(1).min(n.max(1));
    let mut iterations = 0;
    let mut scratch = vec![zero; n];

    while iterations < options.max_iterations {
        // r = b − A x
        apply(&x, &mut scratch);
        let r: Vec<Complex64> = b.iter().zip(&scratch).map(|(p, q)| p - q).collect();
        let beta = norm2(&r);
        if beta / b_norm <= options.tolerance {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual_history: history,
            });
        }
        let mut basis: Vec<Vec<Complex64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = vec![vec![zero; m]; m + 1];
        let (mut cs, mut sn) = (vec![zero; m], vec![zero; m]);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;

        for k in 0..m {
            iterations += 1;
            let mut z = basis[k].clone();
            precondition(&mut z);
            let mut w = vec![zero; n];
            apply(&z, &mut w);
            for (i, v) in basis.iter().enumerate() {
                let hik = dot(v, &w);
                h[i][k] = hik;
                axpy(-hik, v, &mut w);
            }
            // One reorthogonalization pass keeps the basis orthogonal when
            // the preconditioned operator is far from normal.
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i][k] += c;
                axpy(-c, v, &mut w);
            }
            let wn = norm2(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for i in 0..k {
                let t = cs[i].conj() * h[i][k] + sn[i].conj() * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (a, bb) = (h[k][k], h[k + 1][k]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if denom == 0.0 {
                cs[k] = Complex64::new(1.0, 0.0);
                sn[k] = zero;
            } else {
                cs[k] = a / denom;
                sn[k] = bb / denom;
            }
            h[k][k] = cs[k].conj() * a + sn[k].conj() * bb;
            h[k + 1][k] = zero;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k].conj() * g[k];
            k_used = k + 1;
            let rel = g[k + 1].norm() / b_norm;
            history.push(rel);
            if rel <= options.tolerance || wn == 0.0 || iterations >= options.max_iterations {
                break;
            }
            basis.push(w.iter().map(|z| z / wn).collect());
        }

        // Back substitution for the Krylov coefficients.
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![zero; n];
        for (yi, v) in y.iter().zip(&basis) {
            axpy(*yi, v, &mut update);
        }
        precondition(&mut update);
        for (xi, u) in x.iter_mut().zip(&update) {
            *xi += u;
        }
    }

    apply(&x, &mut scratch);
    let r: Vec<Complex64> = b.iter().zip(&scratch).map(|(p, q)| p - q).collect();
    let rel = norm2(&r) / b_norm;
    if rel <= options.tolerance {
        return Ok(GmresOutcome {
            x,
            iterations,
            residual_history: history,
        });
    }
    history.push(rel);
    Err(Error::Convergence {
        iterations,
        residual_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SparseMatrix;
    use crate::linalg::probe_vector;

    fn laplacian(n: usize, shift: f64) -> SparseMatrix {
        SparseMatrix::from_triplets(
            n,
            n,
            (0..n).flat_map(|i| {
                let mut v = vec![(i, i, Complex64::new(2.0 + shift, 0.3))];
                if i > 0 {
                    v.push((i, i - 1, Complex64::new(-1.0, 0.0)));
                }
                if i + 1 < n {
                    v.push((i, i + 1, Complex64::new(-1.0, 0.0)));
                }
                v
            }),
        )
        .unwrap()
    }

    #[test]
    fn unpreconditioned_solve() {
        let a = laplacian(60, 0.5);
        let x = probe_vector(60, 1);
        let b = a.matvec(&x);
        let out = gmres(|v, y| a.matvec_into(v, y), |_| {}, &b, GmresOptions::default()).unwrap();
        let err: Vec<_> = out.x.iter().zip(&x).map(|(p, q)| p - q).collect();
        assert!(norm2(&err) < 1e-10 * norm2(&x));
        assert!(out.residual_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let a = laplacian(30, 0.0);
        let lu = crate::linalg::DenseLu::factor(a.to_dense(), 30);
        let b = probe_vector(30, 2);
        let out = gmres(
            |v, y| a.matvec_into(v, y),
            |v| crate::linalg::Factorization::solve_in_place(&lu, v),
            &b,
            GmresOptions::default(),
        )
        .unwrap();
        assert!(out.iterations <= 2);
    }

    #[test]
    fn iteration_cap_reports_history() {
        let a = laplacian(200, 0.0);
        let b = probe_vector(200, 3);
        let opts = GmresOptions {
            restart: 5,
            max_iterations: 10,
            tolerance: 1e-14,
        };
        match gmres(|v, y| a.matvec_into(v, y), |_| {}, &b, opts) {
            Err(Error::Convergence {
                iterations,
                residual_history,
            }) => {
                assert_eq!(iterations, 10);
                assert!(!residual_history.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }
}
