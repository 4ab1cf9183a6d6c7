use crate::constants::{HBAR, K_B};
use crate::{Error, Result};

/// Bose occupancy `1/(exp(ħω/k_BT) − 1)`; zero at `T = 0`.
pub fn thermal_occupancy(temperature: f64, omega: f64) -> Result<f64> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("frequency must be positive, got {omega}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}
