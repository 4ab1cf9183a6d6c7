use serde::{Deserialize, Serialize};

use super::SystemConfig;
use crate::device::{DerivedParams, LaserParams};

/// Cavity-induced rate `|g|²κ/(4(Δ − s·δ)² + κ²)`: phonon adding for
/// `s = +1`, removing for `s = −1`.
pub fn sideband_rate(coupling_sq: f64, kappa: f64, detuning: f64, sign: f64, delta: f64) -> f64 {
    let x = detuning - sign * delta;
    coupling_sq * kappa / (4.0 * x * x + kappa * kappa)
}

/// Per-laser transition rates between neighbouring Fock levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    /// `δ_n` for `n = 1..=n_max`.
    pub delta: Vec<f64>,
    /// `A₊,j^n` at `[n−1][j]`.
    pub a_plus: Vec<Vec<f64>>,
    /// `A₋,j^n` at `[n−1][j]`.
    pub a_minus: Vec<Vec<f64>>,
}

impl RateTable {
    pub fn new(derived: &DerivedParams, lasers: &[LaserParams], n_max: usize) -> Self {
        let delta = derived.transition_table(n_max);
        let rates = |sign: f64| {
            delta
                .iter()
                .map(|&d| {
                    lasers
                        .iter()
                        .map(|l| sideband_rate(l.coupling.norm_sqr(), derived.kappa, l.detuning, sign, d))
                        .collect()
                })
                .collect()
        };
        Self {
            a_plus: rates(1.0),
            a_minus: rates(-1.0),
            delta,
        }
    }

    /// Table for the driving lasers of `derived`.
    pub fn for_drives(derived: &DerivedParams, n_max: usize) -> Self {
        Self::new(derived, &derived.lasers, n_max)
    }

    pub fn n_max(&self) -> usize {
        self.delta.len()
    }

    pub fn num_lasers(&self) -> usize {
        self.a_plus.first().map_or(0, Vec::len)
    }

    /// `Σ_j A₊,j^n`; zero outside `1..=n_max`.
    pub fn plus_total(&self, n: usize) -> f64 {
        total(&self.a_plus, n)
    }

    /// `Σ_j A₋,j^n`; zero outside `1..=n_max`.
    pub fn minus_total(&self, n: usize) -> f64 {
        total(&self.a_minus, n)
    }

    /// Entry-wise sum of two tables over the same levels.
    pub fn combined(&self, other: &Self) -> Self {
        let join = |a: &[Vec<f64>], b: &[Vec<f64>]| {
            a.iter().zip(b).map(|(x, y)| x.iter().chain(y).copied().collect()).collect()
        };
        Self {
            delta: self.delta.clone(),
            a_plus: join(&self.a_plus, &other.a_plus),
            a_minus: join(&self.a_minus, &other.a_minus),
        }
    }
}

fn total(table: &[Vec<f64>], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    table.get(n - 1).map_or(0.0, |row| row.iter().sum())
}

/// Rates of the driving lasers for `n = 1..N_m−1`.
pub fn transition_rates(config: &SystemConfig) -> RateTable {
    RateTable::for_drives(&config.derived, config.mech_truncation - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use proptest::prelude::*;

    #[test]
    fn resonant_peaks() {
        let d = presets::reference_effective().derive().unwrap();
        let t = RateTable::for_drives(&d, 5);
        let peak = d.lasers[0].peak_rate(d.kappa);
        assert!((t.a_plus[0][0] / peak - 1.0).abs() < 1e-12);
        assert!((t.a_minus[1][1] / peak - 1.0).abs() < 1e-12);
        assert!((t.a_minus[2][2] / peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_resonant_suppression() {
        let d = presets::reference_effective().derive().unwrap();
        let t = RateTable::for_drives(&d, 5);
        let ratio = t.a_minus[0][1] / t.a_minus[1][1];
        let (k, l) = (d.kappa, d.lambda);
        assert!((ratio - k * k / (4.0 * l * l + k * k)).abs() < 1e-12);
        assert!((1.0 / ratio - 65.0).abs() < 2.0, "{}", 1.0 / ratio);
    }

    proptest! {
        #[test]
        fn bounded_by_peak(g in 0.0f64..1e6, k in 1e2f64..1e7, det in -1e8f64..1e8, d in 1e5f64..1e8) {
            for s in [1.0, -1.0] {
                let a = sideband_rate(g * g, k, det, s, d);
                prop_assert!(a >= 0.0);
                prop_assert!(a <= g * g / k * (1.0 + 1e-12));
            }
        }
    }
}
