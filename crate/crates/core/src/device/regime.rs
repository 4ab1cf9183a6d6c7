//! Validity conditions of the reduced description, each reported as a
//! ratio that must be small.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::derived::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `N_max²λ ≪ 6ω_m`
    Rwa,
    /// `κ ≪ ω_m`
    ResolvedSideband,
    /// `n̄γ_m ≪ |g_j|²/κ` for every driven mode
    ThermalHeating,
    /// `|g_j| ≪ κ`
    AdiabaticElimination,
    /// `|g_j|²/κ ≪ λ`
    StrongNonlinearity,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Rwa,
        Check::ResolvedSideband,
        Check::ThermalHeating,
        Check::AdiabaticElimination,
        Check::StrongNonlinearity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Rwa => "rwa",
            Check::ResolvedSideband => "resolved_sideband",
            Check::ThermalHeating => "thermal_heating",
            Check::AdiabaticElimination => "adiabatic_elimination",
            Check::StrongNonlinearity => "strong_nonlinearity",
        }
    }

    pub fn inequality(self) -> &'static str {
        match self {
            Check::Rwa => "N_max^2 lambda << 6 omega_m",
            Check::ResolvedSideband => "kappa << omega_m",
            Check::ThermalHeating => "n_bar gamma_m << |g_j|^2/kappa",
            Check::AdiabaticElimination => "|g_j| << kappa",
            Check::StrongNonlinearity => "|g_j|^2/kappa << lambda",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A ratio `r` passes for `r ≤ pass`, warns for `pass < r < fail` and
/// fails otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub pass: f64,
    pub fail: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { pass: 0.5, fail: 1.0 }
    }
}

impl Thresholds {
    pub fn classify(&self, ratio: f64) -> Status {
        if ratio <= self.pass {
            Status::Pass
        } else if ratio < self.fail {
            Status::Warn
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: Check,
    pub inequality: String,
    /// Infinite when the condition cannot hold at all (no drive).
    pub ratio: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_max: usize,
    pub thresholds: Thresholds,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn get(&self, check: Check) -> &CheckResult {
        self.checks.iter().find(|c| c.check == check).expect("every check is evaluated")
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn any_fail(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    /// Checks whose status is not `Pass`.
    pub fn tripped(&self) -> Vec<Check> {
        self.checks.iter().filter(|c| c.status != Status::Pass).map(|c| c.check).collect()
    }
}

pub fn regime_ratio(derived: &DerivedParams, n_max: usize, check: Check) -> f64 {
    let kappa = derived.kappa;
    let peaks = derived.lasers.iter().map(|l| l.peak_rate(kappa));
    match check {
        Check::Rwa => (n_max * n_max) as f64 * derived.lambda / (6.0 * derived.omega_m),
        Check::ResolvedSideband => kappa / derived.omega_m,
        Check::ThermalHeating => {
            match peaks.filter(|&p| p > 0.0).reduce(f64::min) {
                Some(weakest) => derived.n_bar * derived.gamma_m / weakest,
                None => f64::INFINITY,
            }
        }
        Check::AdiabaticElimination => {
            derived.lasers.iter().map(|l| l.coupling.norm()).fold(0.0, f64::max) / kappa
        }
        Check::StrongNonlinearity => peaks.fold(0.0, f64::max) / derived.lambda,
    }
}

pub fn regime_check(derived: &DerivedParams, n_max: usize) -> ValidationReport {
    regime_check_with(derived, n_max, Thresholds::default())
}

pub fn regime_check_with(derived: &DerivedParams, n_max: usize, thresholds: Thresholds) -> ValidationReport {
    let checks = Check::ALL
        .iter()
        .map(|&check| {
            let ratio = regime_ratio(derived, n_max, check);
            CheckResult {
                check,
                inequality: check.inequality().to_string(),
                ratio,
                status: thresholds.classify(ratio),
            }
        })
        .collect();
    ValidationReport {
        n_max,
        thresholds,
        checks,
    }
}
