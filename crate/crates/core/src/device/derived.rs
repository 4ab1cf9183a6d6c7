use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::beam::{base_frequency, duffing_beta, nonlinearity_per_phonon, zero_point_motion, BeamSpec};
use super::cavity::{
    cavity_amplitude, cavity_linewidth, coupling_g0, degraded_finesse, enhanced_coupling, power_for_coupling,
    CavitySpec, ElectrodeSpec, FinesseReport,
};
use super::drive::{Detuning, DriveSpec, DriveStrength, LaserSpec};
use super::softening::{softened_frequency, SofteningSpec};
use super::thermal::thermal_occupancy;
use crate::{Error, Result};

/// Raw physical description of the device. SI units, angular
/// frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub beam: BeamSpec,
    pub softening: SofteningSpec,
    pub cavity: CavitySpec,
    #[serde(default)]
    pub electrode: Option<ElectrodeSpec>,
    /// Longitudinal optical polarizability per unit length (F·m).
    pub optical_polarizability: f64,
    pub temperature: f64,
    pub drives: DriveSpec,
}

/// Device given directly by the parameters entering the master
/// equations. Drive strengths must be couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpec {
    pub omega_m: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub quality_factor: f64,
    pub temperature: f64,
    pub drives: DriveSpec,
}

/// Where the enhanced couplings come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingModel {
    /// Evanescent-field estimate of G₀; order of magnitude only.
    Estimate,
    /// Couplings supplied directly.
    Specified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserParams {
    pub detuning: f64,
    pub laser_frequency: Option<f64>,
    pub power: Option<f64>,
    /// Intracavity amplitude α.
    pub amplitude: Option<Complex64>,
    pub g0: Option<f64>,
    /// Enhanced coupling g_m.
    pub coupling: Complex64,
}

impl LaserParams {
    /// `|g|²/κ`, the peak cavity-induced rate.
    pub fn peak_rate(&self, kappa: f64) -> f64 {
        self.coupling.norm_sqr() / kappa
    }
}

/// Every parameter of the master equations, in rad/s unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub omega_m0: Option<f64>,
    pub omega_m: f64,
    /// `ω_m′ = ω_m + λ`.
    pub omega_m_prime: f64,
    pub lambda: f64,
    pub gamma_m: f64,
    pub kappa: f64,
    /// m
    pub x_zpm: Option<f64>,
    /// N/m³
    pub beta: Option<f64>,
    /// kg
    pub effective_mass: Option<f64>,
    pub n_bar: f64,
    /// K
    pub temperature: f64,
    pub lasers: Vec<LaserParams>,
    pub probe: Option<LaserParams>,
    pub coupling_model: CouplingModel,
    pub finesse: Option<FinesseReport>,
}

impl DerivedParams {
    /// `δ_n = ω_m′ + λ(n−1)`, the frequency of the `|n−1⟩ ↔ |n⟩` line.
    pub fn transition_frequency(&self, n: usize) -> f64 {
        transition_frequency(self.omega_m_prime, self.lambda, n)
    }

    pub fn transition_table(&self, n_max: usize) -> Vec<f64> {
        (1..=n_max).map(|n| self.transition_frequency(n)).collect()
    }

    pub fn couplings(&self) -> Vec<Complex64> {
        self.lasers.iter().map(|l| l.coupling).collect()
    }

    pub fn detunings(&self) -> Vec<f64> {
        self.lasers.iter().map(|l| l.detuning).collect()
    }

    /// Structural checks; zero λ, κ or γ_m are allowed so that limiting
    /// cases of the master equations can be built.
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0) || !self.omega_m.is_finite() {
            return Err(Error::InvalidArgument(format!("omega_m must be positive, got {}", self.omega_m)));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("kappa", self.kappa),
            ("gamma_m", self.gamma_m),
            ("n_bar", self.n_bar),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be non-negative, got {v}")));
            }
        }
        if let Some(w0) = self.omega_m0 {
            if self.omega_m > w0 * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument("softened frequency exceeds the bare one".into()));
            }
        }
        Ok(())
    }
}

pub fn transition_frequency(omega_m_prime: f64, lambda: f64, n: usize) -> f64 {
    omega_m_prime + lambda * (n as f64 - 1.0)
}

/// Coupling of the given magnitude with the phase of `1/(Δ + iκ/2)`.
fn phased_coupling(g_abs: f64, detuning: f64, kappa: f64) -> Complex64 {
    let phase = Complex64::new(detuning, 0.5 * kappa).conj();
    if phase.norm() == 0.0 {
        return Complex64::new(g_abs, 0.0);
    }
    phase / phase.norm() * g_abs
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.softening.validate()?;
        self.cavity.validate()?;
        if let Some(e) = &self.electrode {
            e.validate()?;
        }
        if !(self.optical_polarizability >= 0.0) {
            return Err(Error::InvalidArgument("optical polarizability must be non-negative".into()));
        }
        self.drives.validate()
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        self.validate()?;
        let beam = &self.beam;
        let omega_m0 = base_frequency(beam);
        let omega_m = softened_frequency(beam, &self.softening)?;
        let lambda = nonlinearity_per_phonon(beam, omega_m)?;
        let omega_m_prime = omega_m + lambda;
        let mass = beam.effective_mass();
        let x_zpm = zero_point_motion(mass, omega_m);
        let kappa = cavity_linewidth(&self.cavity);
        let n_bar = thermal_occupancy(self.temperature, omega_m_prime)?;
        let omega_c = self.cavity.resonance();
        let g0 = coupling_g0(&self.cavity, self.optical_polarizability, beam.length, omega_c);
        let fraction = self.cavity.external_coupling_fraction;

        let laser = |spec: &LaserSpec| -> Result<LaserParams> {
            let detuning = spec.detuning.resolve(|n| transition_frequency(omega_m_prime, lambda, n));
            let omega_l = omega_c + detuning;
            let power = match spec.strength {
                DriveStrength::Power(p) => p,
                DriveStrength::Coupling(g) if g == 0.0 => 0.0,
                DriveStrength::Coupling(g) => {
                    if !(g0 > 0.0) {
                        return Err(Error::InvalidArgument(
                            "cannot reach a target coupling with vanishing G0".into(),
                        ));
                    }
                    power_for_coupling(g, g0, x_zpm, kappa, fraction, omega_l, detuning)
                }
            };
            let amplitude = cavity_amplitude(power, kappa, fraction, omega_l, detuning);
            Ok(LaserParams {
                detuning,
                laser_frequency: Some(omega_l),
                power: Some(power),
                amplitude: Some(amplitude),
                g0: Some(g0),
                coupling: enhanced_coupling(g0, x_zpm, amplitude),
            })
        };
        let lasers = self.drives.lasers.iter().map(laser).collect::<Result<Vec<_>>>()?;
        let probe = self.drives.probe.as_ref().map(laser).transpose()?;

        let finesse = self.electrode.as_ref().map(|e| {
            let brightest = lasers
                .iter()
                .filter_map(|l| Some((l.amplitude?.norm_sqr(), l.laser_frequency?)))
                .fold(None, |acc: Option<(f64, f64)>, x| match acc {
                    Some(a) if a.0 >= x.0 => Some(a),
                    _ => Some(x),
                });
            degraded_finesse(&self.cavity, e, brightest)
        });

        let derived = DerivedParams {
            omega_m0: Some(omega_m0),
            omega_m,
            omega_m_prime,
            lambda,
            gamma_m: omega_m / beam.quality_factor,
            kappa,
            x_zpm: Some(x_zpm),
            beta: Some(duffing_beta(beam)),
            effective_mass: Some(mass),
            n_bar,
            temperature: self.temperature,
            lasers,
            probe,
            coupling_model: CouplingModel::Estimate,
            finesse,
        };
        derived.validate()?;
        Ok(derived)
    }
}

impl EffectiveSpec {
    pub fn derive(&self) -> Result<DerivedParams> {
        self.drives.validate()?;
        if !(self.quality_factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "quality_factor must be positive, got {}",
                self.quality_factor
            )));
        }
        for (name, v) in [
            ("omega_m", self.omega_m),
            ("lambda", self.lambda),
            ("kappa", self.kappa),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        let omega_m_prime = self.omega_m + self.lambda;
        let n_bar = thermal_occupancy(self.temperature, omega_m_prime)?;
        let laser = |spec: &LaserSpec| -> Result<LaserParams> {
            let detuning = spec.detuning.resolve(|n| transition_frequency(omega_m_prime, self.lambda, n));
            let g = match spec.strength {
                DriveStrength::Coupling(g) => g,
                DriveStrength::Power(_) => {
                    return Err(Error::InvalidArgument(
                        "effective device parameters need drive couplings, not powers".into(),
                    ))
                }
            };
            Ok(LaserParams {
                detuning,
                laser_frequency: None,
                power: None,
                amplitude: None,
                g0: None,
                coupling: phased_coupling(g, detuning, self.kappa),
            })
        };
        let derived = DerivedParams {
            omega_m0: None,
            omega_m: self.omega_m,
            omega_m_prime,
            lambda: self.lambda,
            gamma_m: self.omega_m / self.quality_factor,
            kappa: self.kappa,
            x_zpm: None,
            beta: None,
            effective_mass: None,
            n_bar,
            temperature: self.temperature,
            lasers: self.drives.lasers.iter().map(laser).collect::<Result<_>>()?,
            probe: self.drives.probe.as_ref().map(laser).transpose()?,
            coupling_model: CouplingModel::Specified,
            finesse: None,
        };
        derived.validate()?;
        Ok(derived)
    }
}

/// A laser at `sign·δ_n` with the given coupling magnitude.
pub fn sideband_laser(sign: i8, n: usize, coupling: f64) -> LaserSpec {
    LaserSpec {
        detuning: Detuning::Sideband { sign, n },
        strength: DriveStrength::Coupling(coupling),
    }
}
