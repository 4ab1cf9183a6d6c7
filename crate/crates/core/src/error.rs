use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "buckling instability: |V_es,2| = {v_es2:.6e} N/m reaches the critical value {critical:.6e} N/m"
    )]
    Buckling { v_es2: f64, critical: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("truncation too small: {0}")]
    Truncation(String),

    #[error("steady state is not unique: {0}")]
    Degenerate(String),

    #[error("no convergence after {iterations} iterations (final residual {:.3e})", residual_history.last().copied().unwrap_or(f64::NAN))]
    Convergence {
        iterations: usize,
        residual_history: Vec<f64>,
    },

    #[error("step size underflow at t = {t:.6e} s (h = {step:.3e} s); the system is too stiff for explicit integration, use the steady-state solver")]
    Stiff { t: f64, step: f64 },

    #[error("sideband lines not resolved at n = {n}: lambda = {lambda:.6e} rad/s < 3 Gamma_n = {required:.6e} rad/s")]
    Unresolved { n: usize, lambda: f64, required: f64 },

    #[error("problem too large: estimated {what} {estimate} exceeds the cap of {cap}")]
    MemoryGuard {
        what: &'static str,
        estimate: usize,
        cap: usize,
    },
}
