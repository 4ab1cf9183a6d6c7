//! Simulation of a driven, nonlinear nanomechanical oscillator coupled to
//! several laser-driven optical cavity modes.
//!
//! The crate is layered bottom-up:
//!
//! - [`fock`]: truncated Fock-space operator algebra (sparse complex
//!   operators, tensor embedding, density matrices, partial traces).
//! - [`device`]: maps physical device inputs (beam, electrostatic
//!   softening, cavity, lasers) to the effective parameters of the master
//!   equations and checks the approximations they rely on.
//! - [`liouvillian`]: the full multi-mode Lindblad generator, the
//!   Fock-resolved reduced generator, steady-state solvers and time
//!   evolution.
//! - [`observables`]: Wigner functions, probe sideband spectra and the
//!   inversion from sideband peak ratios back to phonon populations.
//!
//! All frequencies and rates are angular (rad/s) internally.

pub mod constants;
pub mod device;
mod error;
pub mod fock;
pub mod linalg;
pub mod liouvillian;
pub mod observables;
pub mod presets;

pub use error::{Error, Result};

pub use num_complex::Complex64;
