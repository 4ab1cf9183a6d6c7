//! From beam, field, cavity and laser inputs to the parameters of the
//! master equations.

pub mod beam;
pub mod cavity;
pub mod derived;
pub mod drive;
pub mod quadrature;
pub mod regime;
pub mod softening;
pub mod thermal;

pub use beam::{base_frequency, duffing_beta, mode_shape_factor, nonlinearity_per_phonon, zero_point_motion, BeamSpec};
pub use cavity::{
    absorption_ratio, cavity_amplitude, cavity_linewidth, coupling_g0, degraded_finesse, enhanced_coupling,
    evanescent_decay, CavitySpec, ElectrodeSpec, FinesseReport,
};
pub use derived::{
    sideband_laser, transition_frequency, CouplingModel, DerivedParams, DeviceSpec, EffectiveSpec, LaserParams,
};
pub use drive::{Detuning, DriveSpec, DriveStrength, LaserSpec};
pub use regime::{regime_check, regime_check_with, Check, CheckResult, Status, Thresholds, ValidationReport};
pub use softening::{
    buckling_curvature, electrostatic_quadratic, softened_frequency, softened_frequency_from_curvature,
    tune_field_amplitude, FieldModel, GaussianLobe, SofteningSpec,
};
pub use thermal::thermal_occupancy;
