//! Physical constants (CODATA 2018, SI) and unit helpers.

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Ångström, m.
pub const ANGSTROM: f64 = 1e-10;

/// Conversion factor from the polarizability-per-length unit
/// `4π ε₀ Å²` to SI (F·m).
pub const POLARIZABILITY_PER_LENGTH_UNIT: f64 = 4.0 * PI * EPSILON_0 * ANGSTROM * ANGSTROM;

/// Angular frequency (rad/s) from an ordinary frequency (Hz).
pub fn angular(hz: f64) -> f64 {
    2.0 * PI * hz
}

/// Ordinary frequency (Hz) from an angular frequency (rad/s).
pub fn ordinary(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}
