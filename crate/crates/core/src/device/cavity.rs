//! Whispering-gallery cavity: linewidth, evanescent coupling to the beam
//! and electrode absorption.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{C_LIGHT, EPSILON_0, HBAR};
use crate::{Error, Result};

/// Refractive index of silica, used when none is given.
pub const SILICA_INDEX: f64 = 1.44;

/// Prefactor of the TE-mode placement correction `C ≈ 0.17/√(κ_⊥(d+a_c))`.
pub const PLACEMENT_PREFACTOR: f64 = 0.17;

/// Optical cavity geometry; lengths in m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    pub bare_finesse: f64,
    pub round_trip_length: f64,
    #[serde(default = "default_index")]
    pub refractive_index: f64,
    pub wavelength: f64,
    pub waist: f64,
    pub surface_field_ratio: f64,
    pub gap: f64,
    /// Inverse evanescent decay length (1/m); derived when absent.
    #[serde(default)]
    pub evanescent_decay: Option<f64>,
    pub external_coupling_fraction: f64,
}

fn default_index() -> f64 {
    SILICA_INDEX
}

impl CavitySpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("bare_finesse", self.bare_finesse),
            ("round_trip_length", self.round_trip_length),
            ("refractive_index", self.refractive_index),
            ("wavelength", self.wavelength),
            ("waist", self.waist),
            ("surface_field_ratio", self.surface_field_ratio),
            ("gap", self.gap),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("cavity.{name} must be positive, got {v}")));
            }
        }
        if self.refractive_index <= 1.0 && self.evanescent_decay.is_none() {
            return Err(Error::InvalidArgument(
                "cavity.refractive_index must exceed 1 to derive the evanescent decay".into(),
            ));
        }
        if let Some(k) = self.evanescent_decay {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "cavity.evanescent_decay must be positive, got {k}"
                )));
            }
        }
        let f = self.external_coupling_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "cavity.external_coupling_fraction must lie in (0, 1], got {f}"
            )));
        }
        Ok(())
    }

    /// Resonance frequency `2πc/λ_opt` (rad/s).
    pub fn resonance(&self) -> f64 {
        2.0 * PI * C_LIGHT / self.wavelength
    }

    /// Mode volume `π a_c² L_c`.
    pub fn mode_volume(&self) -> f64 {
        PI * self.waist * self.waist * self.round_trip_length
    }
}

/// `κ = 2πc/(n_r L_c F)` for a given finesse.
pub fn linewidth_for_finesse(cavity: &CavitySpec, finesse: f64) -> f64 {
    2.0 * PI * C_LIGHT / (cavity.refractive_index * cavity.round_trip_length * finesse)
}

/// Total linewidth κ (rad/s) from the bare finesse.
pub fn cavity_linewidth(cavity: &CavitySpec) -> f64 {
    linewidth_for_finesse(cavity, cavity.bare_finesse)
}

/// κ_⊥, supplied or `(2π/λ_opt)·√(n_r² − 1)`.
pub fn evanescent_decay(cavity: &CavitySpec) -> f64 {
    cavity
        .evanescent_decay
        .unwrap_or_else(|| 2.0 * PI / cavity.wavelength * (cavity.refractive_index.powi(2) - 1.0).sqrt())
}

/// Placement correction `C = 0.17/√(κ_⊥(d + a_c))`.
pub fn placement_correction(cavity: &CavitySpec) -> f64 {
    PLACEMENT_PREFACTOR / (evanescent_decay(cavity) * (cavity.gap + cavity.waist)).sqrt()
}

/// Order-of-magnitude single-photon coupling gradient (rad/s per m):
/// `G₀ = ω_j·α_∥L/(ε₀V_c)·ξ²κ_⊥e^(−2κ_⊥d)·C`, with `alpha_parallel` the
/// polarizability per unit length (F·m).
pub fn coupling_g0(cavity: &CavitySpec, alpha_parallel: f64, length: f64, omega_j: f64) -> f64 {
    let k = evanescent_decay(cavity);
    omega_j * alpha_parallel * length / (EPSILON_0 * cavity.mode_volume())
        * cavity.surface_field_ratio.powi(2)
        * k
        * (-2.0 * k * cavity.gap).exp()
        * placement_correction(cavity)
}

/// Intracavity amplitude `α = √(P_in κ_ex/ħω_L)/(Δ + iκ/2)`.
pub fn cavity_amplitude(power: f64, kappa: f64, external_fraction: f64, omega_l: f64, detuning: f64) -> Complex64 {
    let num = (power * external_fraction * kappa / (HBAR * omega_l)).sqrt();
    Complex64::new(num, 0.0) / Complex64::new(detuning, 0.5 * kappa)
}

/// Enhanced coupling `g = 2α x_ZPM G₀`.
pub fn enhanced_coupling(g0: f64, x_zpm: f64, amplitude: Complex64) -> Complex64 {
    amplitude * (2.0 * x_zpm * g0)
}

/// Launched power that produces `|g|` at the given detuning.
pub fn power_for_coupling(
    g_abs: f64,
    g0: f64,
    x_zpm: f64,
    kappa: f64,
    external_fraction: f64,
    omega_l: f64,
    detuning: f64,
) -> f64 {
    let alpha = g_abs / (2.0 * x_zpm * g0);
    alpha * alpha * (detuning * detuning + 0.25 * kappa * kappa) * HBAR * omega_l / (external_fraction * kappa)
}

/// Tip-electrode parameters: diameter in m, 2D conductivity in S,
/// misalignment in rad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeSpec {
    pub diameter: f64,
    pub conductivity_2d: f64,
    pub misalignment: f64,
}

impl ElectrodeSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("diameter", self.diameter),
            ("conductivity_2d", self.conductivity_2d),
            ("misalignment", self.misalignment),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "electrode.{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinesseReport {
    pub bare_finesse: f64,
    pub finesse: f64,
    pub absorbed_ratio: f64,
    /// Present when an intracavity photon number was supplied.
    pub circulating_power: Option<f64>,
    pub absorbed_power: Option<f64>,
}

/// Upper estimate of `P_a/P_c` for electrodes near the cavity surface.
pub fn absorption_ratio(cavity: &CavitySpec, electrode: &ElectrodeSpec) -> f64 {
    let k = evanescent_decay(cavity);
    let a = cavity.waist;
    PI * electrode.conductivity_2d * electrode.diameter * cavity.surface_field_ratio.powi(2)
        / (C_LIGHT * EPSILON_0 * a)
        * (PI / (k * a)).sqrt()
        * (-2.0 * k * cavity.gap).exp()
        * electrode.misalignment.sin()
}

/// Finesse degraded by electrode absorption, `1/(1/F_c + P_a/2P_c)`.
/// With `photons = |α|²` and the laser frequency, the circulating power
/// `n_cav ħω_L c/(n_r L_c)` and absorbed power are also estimated.
pub fn degraded_finesse(
    cavity: &CavitySpec,
    electrode: &ElectrodeSpec,
    photons: Option<(f64, f64)>,
) -> FinesseReport {
    let ratio = absorption_ratio(cavity, electrode);
    let finesse = 1.0 / (1.0 / cavity.bare_finesse + 0.5 * ratio);
    let circulating = photons.map(|(n, omega_l)| {
        n * HBAR * omega_l * C_LIGHT / (cavity.refractive_index * cavity.round_trip_length)
    });
    FinesseReport {
        bare_finesse: cavity.bare_finesse,
        finesse,
        absorbed_ratio: ratio,
        circulating_power: circulating,
        absorbed_power: circulating.map(|p| p * ratio),
    }
}
