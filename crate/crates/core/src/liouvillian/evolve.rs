use num_complex::Complex64;

use super::superop::{unvectorize, vectorize, Liouvillian, LiouvillianKind};
use crate::fock::DensityMatrix;
use crate::{Error, Result};

/// Sampled solution of `ẋ = L x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Vectorized states (column-stacked ρ or populations).
    pub states: Vec<Vec<Complex64>>,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn density(&self, l: &Liouvillian, k: usize) -> Result<DensityMatrix> {
        if l.kind() != LiouvillianKind::Full {
            return Err(Error::InvalidArgument("population trajectories carry no density matrix".into()));
        }
        let d = l.space().total_dim();
        DensityMatrix::from_dense_unchecked(l.space().clone(), unvectorize(&self.states[k], d))
    }

    pub fn last(&self) -> &[Complex64] {
        self.states.last().expect("at least the initial state")
    }
}

/// Options for [`time_evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Local error tolerance relative to the state norm.
    pub tolerance: f64,
    /// Number of equally spaced output times after `t = 0`.
    pub samples: usize,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            samples: 100,
            max_steps: 2_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau; the generator is autonomous, so the nodes
// are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince integration of `ẋ = L x` from `x0` up to
/// `t_final`, sampled at `samples` equally spaced times.
pub fn time_evolve(l: &Liouvillian, x0: &[Complex64], t_final: f64, options: EvolveOptions) -> Result<Trajectory> {
    let n = l.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidArgument(format!("t_final must be non-negative, got {t_final}")));
    }
    let probs = l.trace_indices();
    let trace = |x: &[Complex64]| probs.iter().map(|&i| x[i]).sum::<Complex64>();
    let trace0 = trace(x0);

    let samples = options.samples.max(1);
    let outputs: Vec<f64> = (1..=samples).map(|k| t_final * k as f64 / samples as f64).collect();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.to_vec()],
        steps: 0,
        rejected: 0,
    };
    if t_final == 0.0 {
        return Ok(traj);
    }

    let norm_l = l.matrix().norm_one();
    let mut h = if norm_l > 0.0 { (0.01 / norm_l).min(t_final) } else { t_final };
    let h_min = 1e-14 * t_final;
    let mut t = 0.0;
    let mut x = x0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    l.matrix().matvec_into(&x, &mut k[0]);
    let mut stage = vec![Complex64::new(0.0, 0.0); n];
    let mut next_out = 0;

    while next_out < outputs.len() {
        let target = outputs[next_out];
        let step = h.min(target - t);
        for s in 1..7 {
            stage.copy_from_slice(&x);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j] * step;
                if a != 0.0 {
                    for (y, v) in stage.iter_mut().zip(kj) {
                        *y += v * a;
                    }
                }
            }
            l.matrix().matvec_into(&stage, &mut k[s]);
        }
        // Stage 7 is evaluated at the fifth-order solution (FSAL).
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                e += k[s][i] * (B5[s] - B4[s]);
            }
            err = err.max((e * step).norm());
            scale = scale.max(stage[i].norm()).max(x[i].norm());
        }
        let tol = options.tolerance * scale.max(1e-300);
        traj.steps += 1;
        if traj.steps > options.max_steps {
            return Err(Error::Stiff { t, step: h });
        }
        let accepted = err <= tol || step <= h_min;
        if accepted {
            t += step;
            x.copy_from_slice(&stage);
            k.swap(0, 6);
            if (t - target).abs() <= 1e-12 * t_final {
                t = target;
                traj.times.push(t);
                traj.states.push(x.clone());
                next_out += 1;
            }
        } else {
            traj.rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
        // A step shortened to hit an output time says nothing about h.
        h = if accepted && step < h { h.max(step * factor) } else { step * factor };
        if h < h_min {
            return Err(Error::Stiff { t, step: h });
        }
    }

    let drift = (trace(traj.last()) - trace0).norm();
    if drift > 1e-8 * trace0.norm().max(1.0) {
        return Err(Error::Numerical(format!("trace drifted by {drift:.3e} during integration")));
    }
    Ok(traj)
}

/// Convenience wrapper starting from a density matrix.
pub fn evolve_density(l: &Liouvillian, rho0: &DensityMatrix, t_final: f64, options: EvolveOptions) -> Result<Trajectory> {
    if l.kind() != LiouvillianKind::Full || rho0.space() != l.space() {
        return Err(Error::InvalidArgument("initial state does not match this generator".into()));
    }
    time_evolve(l, &vectorize(rho0), t_final, options)
}
