//! Master-equation generators and their stationary and transient
//! solutions.
//!
//! The full generator acts on column-stacked density matrices of
//! `mech ⊗ cav1 ⊗ …`, `vec(ρ)[i + jD] = ρ_ij`, so that
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. The reduced generator acts on phonon
//! populations only; the population sector of the Fock-resolved reduced
//! master equation is closed.

mod config;
mod evolve;
mod hamiltonian;
mod rates;
mod reduced;
mod steady;
mod superop;

pub use config::{SystemConfig, DEFAULT_CAVITY_TRUNCATION, DEFAULT_MECH_TRUNCATION};
pub use evolve::{evolve_density, time_evolve, EvolveOptions, Trajectory};
pub use hamiltonian::{build_full_hamiltonian, mechanical_hamiltonian};
pub use rates::{sideband_rate, transition_rates, RateTable};
pub use reduced::{build_reduced_generator, build_reduced_master_equation, reduced_shifts, reduced_steady_populations};
pub use steady::{steady_state_solve, SolveMethod, SolverDiagnostics, SteadyState, DENSE_MAX_DIM};
pub use superop::{
    build_full_liouvillian, build_full_liouvillian_capped, collapse_operators, commutator_superop,
    dissipator_superop, lindblad, unvectorize, vectorize, Liouvillian, LiouvillianKind, DEFAULT_NNZ_CAP,
};
