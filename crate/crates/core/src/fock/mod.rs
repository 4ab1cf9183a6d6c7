//! Truncated Fock-space operator algebra.
//!
//! Operators are sparse complex matrices tagged with the tensor-product
//! space they act on. Composite bases are ordered lexicographically with
//! the first factor varying slowest. Operators are exact on the truncated
//! space; the `[b, b†] = 1` defect on the top level is left in place and
//! truncation adequacy is checked downstream on solved populations.

mod density;
mod operator;
mod space;
mod sparse;

pub use density::{DensityMatrix, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use operator::{
    annihilation, creation, fock_transition, lift, number, projector, FockOperator, DENSE_DIM_LIMIT,
};
pub use space::{CompositeSpace, FockSpace};
pub use sparse::{SparseMatrix, DROP_TOLERANCE};
