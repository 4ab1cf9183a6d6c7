//! Parameter sets of the two worked device examples: a 1.0 µm (10,0)
//! nanotube with a high-finesse toroid, and a longer tube with more
//! moderate cavity and drive parameters.

use std::f64::consts::SQRT_2;

use crate::constants::{angular, AMU, POLARIZABILITY_PER_LENGTH_UNIT};
use crate::device::{
    sideband_laser, BeamSpec, CavitySpec, Detuning, DeviceSpec, DriveSpec, DriveStrength, EffectiveSpec,
    ElectrodeSpec, LaserSpec, SofteningSpec,
};

pub const CNT_RADIUS: f64 = 0.39e-9;
pub const CNT_SOUND_SPEED: f64 = 21_000.0;
/// Carbon atoms per translational unit cell of a (10,0) tube.
const CNT_ATOMS_PER_CELL: f64 = 40.0;
const CNT_CELL_LENGTH: f64 = 0.4263e-9;
const CARBON_MASS_AMU: f64 = 12.011;

pub fn cnt_10_0_linear_mass_density() -> f64 {
    CNT_ATOMS_PER_CELL * CARBON_MASS_AMU * AMU / CNT_CELL_LENGTH
}

/// Static `(α_∥, α_⊥)` per unit length in F·m.
pub fn cnt_10_0_polarizabilities() -> (f64, f64) {
    (142.0 * POLARIZABILITY_PER_LENGTH_UNIT, 10.9 * POLARIZABILITY_PER_LENGTH_UNIT)
}

fn cnt_beam(length: f64, quality_factor: f64) -> BeamSpec {
    BeamSpec {
        length,
        kappa_tilde: CNT_RADIUS / SQRT_2,
        sound_speed: CNT_SOUND_SPEED,
        quality_factor,
        effective_mass: None,
        linear_mass_density: Some(cnt_10_0_linear_mass_density()),
    }
}

fn toroid(finesse: f64, circumference: f64) -> CavitySpec {
    CavitySpec {
        bare_finesse: finesse,
        round_trip_length: circumference,
        refractive_index: 1.44,
        wavelength: 1.1e-6,
        waist: 1.4e-6,
        surface_field_ratio: 0.4,
        gap: 50e-9,
        evanescent_decay: None,
        external_coupling_fraction: 0.1,
    }
}

/// Heats on the first line, cools on the second and third.
fn fock_one_drives(strengths: [DriveStrength; 3]) -> DriveSpec {
    let detunings = [(1, 1), (-1, 2), (-1, 3)];
    DriveSpec {
        lasers: detunings
            .iter()
            .zip(strengths)
            .map(|(&(sign, n), strength)| LaserSpec {
                detuning: Detuning::Sideband { sign, n },
                strength,
            })
            .collect(),
        probe: None,
    }
}

pub fn reference_beam() -> BeamSpec {
    cnt_beam(1.0e-6, 5e6)
}

pub fn reference_cavity() -> CavitySpec {
    toroid(3e6, 1.35e-3)
}

pub fn reference_electrode() -> ElectrodeSpec {
    ElectrodeSpec {
        diameter: 10e-9,
        conductivity_2d: 2e-5,
        misalignment: 1f64.to_radians(),
    }
}

pub fn reference_device() -> DeviceSpec {
    DeviceSpec {
        beam: reference_beam(),
        softening: SofteningSpec::Zeta(4.0),
        cavity: reference_cavity(),
        electrode: Some(reference_electrode()),
        optical_polarizability: cnt_10_0_polarizabilities().0,
        temperature: 0.020,
        drives: fock_one_drives([DriveStrength::Power(1.2); 3]),
    }
}

/// The first example stated directly in terms of its effective
/// parameters.
pub fn reference_effective() -> EffectiveSpec {
    EffectiveSpec {
        omega_m: angular(5.23e6),
        lambda: angular(209e3),
        kappa: angular(52.3e3),
        quality_factor: 5e6,
        temperature: 0.020,
        drives: fock_one_drives([DriveStrength::Coupling(angular(21.0e3)); 3]),
    }
}

/// A weak probe resonant with the cavity.
pub fn resonant_probe(coupling: f64) -> LaserSpec {
    LaserSpec {
        detuning: Detuning::Absolute(0.0),
        strength: DriveStrength::Coupling(coupling),
    }
}

pub fn moderate_beam() -> BeamSpec {
    cnt_beam(1.7e-6, 1.5e6)
}

pub fn moderate_cavity() -> CavitySpec {
    toroid(2e6, 1.80e-3)
}

/// Second example. The couplings follow from the launched powers through
/// the evanescent-coupling estimate with the first example's geometry.
pub fn moderate_device() -> DeviceSpec {
    DeviceSpec {
        beam: moderate_beam(),
        softening: SofteningSpec::Zeta(3.3),
        cavity: moderate_cavity(),
        electrode: Some(reference_electrode()),
        optical_polarizability: cnt_10_0_polarizabilities().0,
        temperature: 0.030,
        drives: fock_one_drives([
            DriveStrength::Power(22e-3),
            DriveStrength::Power(22e-3),
            DriveStrength::Power(44e-3),
        ]),
    }
}

/// Single laser on the first red sideband.
pub fn cooling_drive(coupling: f64) -> DriveSpec {
    DriveSpec {
        lasers: vec![sideband_laser(-1, 1, coupling)],
        probe: None,
    }
}
