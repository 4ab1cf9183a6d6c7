use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::constants::HBAR;
use crate::{Error, Result};

/// `4.73` as used in the clamped-clamped base-frequency formula.
pub const CLAMPED_WAVENUMBER: f64 = 4.73;
/// First root of `cos(x)·cosh(x) = 1`, used for the mode shape itself.
pub const CLAMPED_ROOT: f64 = 4.730_040_744_862_704;
/// Geometric Duffing coefficient: `β = 0.060·m*·ω_m0²/κ̃²`.
pub const DUFFING_PREFACTOR: f64 = 0.060;

/// Doubly clamped beam; lengths in m, speeds in m/s, masses in kg.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub length: f64,
    /// Transverse scale κ̃ (for a nanotube `R/√2`).
    pub kappa_tilde: f64,
    pub sound_speed: f64,
    pub quality_factor: f64,
    pub effective_mass: Option<f64>,
    pub linear_mass_density: Option<f64>,
}

impl BeamSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("kappa_tilde", self.kappa_tilde),
            ("sound_speed", self.sound_speed),
            ("quality_factor", self.quality_factor),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("beam.{name} must be positive, got {v}")));
            }
        }
        match (self.effective_mass, self.linear_mass_density) {
            (None, None) => Err(Error::InvalidArgument(
                "beam needs effective_mass or linear_mass_density".into(),
            )),
            (Some(m), _) if !(m > 0.0) => Err(Error::InvalidArgument(format!(
                "beam.effective_mass must be positive, got {m}"
            ))),
            (_, Some(rho)) if !(rho > 0.0) => Err(Error::InvalidArgument(format!(
                "beam.linear_mass_density must be positive, got {rho}"
            ))),
            (Some(m), Some(rho)) => {
                let from_density = rho * self.length * mode_shape_factor();
                if ((m - from_density) / from_density).abs() > 0.01 {
                    Err(Error::InvalidArgument(format!(
                        "effective_mass {m:.4e} kg disagrees with linear_mass_density (implies {from_density:.4e} kg) by more than 1%"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Effective modal mass, from the explicit value or from the mass
    /// density as `(∫φ₀²dy/L)·ρ_L·L`.
    pub fn effective_mass(&self) -> f64 {
        self.effective_mass
            .unwrap_or_else(|| self.linear_mass_density.unwrap_or(f64::NAN) * self.length * mode_shape_factor())
    }

    /// Fundamental clamped-clamped mode shape normalized to unit midpoint
    /// deflection.
    pub fn mode_shape(&self, y: f64) -> f64 {
        clamped_mode(y / self.length) / clamped_mode(0.5)
    }
}

fn clamped_mode(s: f64) -> f64 {
    let k = CLAMPED_ROOT;
    let sigma = (k.cosh() - k.cos()) / (k.sinh() - k.sin());
    let x = k * s;
    x.cosh() - x.cos() - sigma * (x.sinh() - x.sin())
}

/// `∫₀^L φ₀² dy / L` for the midpoint-normalized fundamental (≈ 0.3965).
pub fn mode_shape_factor() -> f64 {
    let mid = clamped_mode(0.5);
    integrate(|s| (clamped_mode(s) / mid).powi(2), 0.0, 1.0).expect("smooth integrand converges")
}

/// Unstressed clamped-clamped frequency `ω_m0 = c_s·κ̃·(4.73/L)²`.
pub fn base_frequency(beam: &BeamSpec) -> f64 {
    beam.sound_speed * beam.kappa_tilde * (CLAMPED_WAVENUMBER / beam.length).powi(2)
}

/// Duffing coefficient β (N/m³).
pub fn duffing_beta(beam: &BeamSpec) -> f64 {
    DUFFING_PREFACTOR * beam.effective_mass() * base_frequency(beam).powi(2) / beam.kappa_tilde.powi(2)
}

/// Zero-point amplitude `√(ħ/2m*ω_m)`.
pub fn zero_point_motion(mass: f64, omega_m: f64) -> f64 {
    (HBAR / (2.0 * mass * omega_m)).sqrt()
}

/// Nonlinearity per phonon `λ = 3βx_ZPM⁴/ħ = 0.045·ħ·ω_m0²/(m*κ̃²ω_m²)`.
pub fn nonlinearity_per_phonon(beam: &BeamSpec, omega_m: f64) -> Result<f64> {
    if !(omega_m > 0.0) {
        return Err(Error::InvalidArgument(format!("omega_m must be positive, got {omega_m}")));
    }
    let x = zero_point_motion(beam.effective_mass(), omega_m);
    Ok(3.0 * duffing_beta(beam) * x.powi(4) / HBAR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ordinary;
    use crate::presets;

    #[test]
    fn mode_shape_is_clamped_and_normalized() {
        let beam = presets::reference_beam();
        assert!(beam.mode_shape(0.0).abs() < 1e-12);
        assert!(beam.mode_shape(beam.length).abs() < 1e-9);
        assert!((beam.mode_shape(0.5 * beam.length) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mode_shape_factor_value() {
        assert!((mode_shape_factor() - 0.3965).abs() < 5e-4, "{}", mode_shape_factor());
    }

    #[test]
    fn reference_base_frequency() {
        let f0 = ordinary(base_frequency(&presets::reference_beam()));
        // c_s κ̃ (4.73/L)² / 2π with κ̃ = 0.39 nm/√2, L = 1 µm.
        assert!((f0 / 1e6 - 20.62).abs() < 0.01, "{f0}");
        assert!((f0 / 4.0 / 5.23e6 - 1.0).abs() < 0.05);
    }

    #[test]
    fn doubling_length_quarters_frequency() {
        let mut beam = presets::reference_beam();
        let w1 = base_frequency(&beam);
        beam.length *= 2.0;
        assert!((base_frequency(&beam) / w1 - 0.25).abs() < 1e-14);
    }

    #[test]
    fn nonlinearity_closed_form_and_scaling() {
        let beam = presets::reference_beam();
        let w0 = base_frequency(&beam);
        let lam4 = nonlinearity_per_phonon(&beam, w0 / 4.0).unwrap();
        let closed = 0.045 * HBAR * w0 * w0 / (beam.effective_mass() * beam.kappa_tilde.powi(2) * (w0 / 4.0).powi(2));
        assert!((lam4 / closed - 1.0).abs() < 1e-12);
        let lam1 = nonlinearity_per_phonon(&beam, w0).unwrap();
        assert!((lam4 / lam1 - 16.0).abs() < 1e-10);
        assert!(nonlinearity_per_phonon(&beam, 0.0).is_err());
    }

    #[test]
    fn mass_inputs_must_agree() {
        let mut beam = presets::reference_beam();
        let m = beam.effective_mass();
        beam.effective_mass = Some(m * 1.005);
        assert!(beam.validate().is_ok());
        beam.effective_mass = Some(m * 1.05);
        assert!(beam.validate().is_err());
        beam.effective_mass = None;
        beam.linear_mass_density = None;
        assert!(beam.validate().is_err());
    }
}
