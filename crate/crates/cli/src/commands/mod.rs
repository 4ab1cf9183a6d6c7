pub mod device;
pub mod spectrum;
pub mod steady;
pub mod sweep;

use nanofock::device::{regime_check_with, DerivedParams, ValidationReport};
use nanofock::liouvillian::{reduced_steady_populations, SystemConfig};
use serde::Serialize;

use crate::config::{LoadedConfig, SimulationSection};
use crate::error::{CliError, Result};
use crate::output::{Manifest, OutputDir, SolverRecord};

/// Everything a command needs: the parsed config, the output directory
/// and the manifest being assembled.
pub struct Context {
    pub loaded: LoadedConfig,
    pub out: OutputDir,
    pub manifest: Manifest,
}

impl Context {
    pub fn sim(&self) -> &SimulationSection {
        &self.loaded.config.simulation
    }

    pub fn hash(&self) -> String {
        self.loaded.sha256.clone()
    }

    pub fn derive(&mut self) -> Result<DerivedParams> {
        let d = self.loaded.device.derive()?;
        self.manifest.derived = Some(d.clone());
        Ok(d)
    }

    pub fn regime(&mut self, d: &DerivedParams) -> ValidationReport {
        let report = regime_check_with(d, self.sim().rwa_phonons, self.sim().thresholds);
        self.manifest.validation = Some(report.clone());
        report
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let message = message.into();
        eprintln!("warning: {message}");
        self.manifest.warnings.push(message);
    }

    pub fn record_solver(&mut self, record: SolverRecord) {
        self.manifest.solver.push(record);
    }
}

/// One step of a truncation-doubling loop.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStep {
    pub mech_truncation: usize,
    /// Largest per-level change from the previous step.
    pub drift: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ReducedRun {
    pub populations: Vec<f64>,
    pub mech_truncation: usize,
    pub tail_ratio: f64,
    pub history: Vec<ConvergenceStep>,
}

pub fn max_drift(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn reduced_at(d: &DerivedParams, sim: &SimulationSection, n: usize) -> nanofock::Result<Vec<f64>> {
    let mut config = SystemConfig::new(d.clone(), n)?;
    config.include_reduced_shifts = sim.include_reduced_shifts;
    Ok(reduced_steady_populations(&config, n - 1)?.populations)
}

/// Reduced steady populations; with `converge` the truncation doubles
/// until the populations move by less than the configured tolerance.
pub fn reduced(d: &DerivedParams, sim: &SimulationSection, converge: bool) -> Result<ReducedRun> {
    let mut n = sim.mech_truncation;
    let mut previous: Option<Vec<f64>> = None;
    let mut history = Vec::new();
    loop {
        match reduced_at(d, sim, n) {
            Ok(p) => {
                let drift = previous.as_ref().map(|q| max_drift(&p, q));
                history.push(ConvergenceStep {
                    mech_truncation: n,
                    drift,
                    note: None,
                });
                let done = !converge || drift.is_some_and(|x| x < sim.converge_tolerance);
                if done {
                    let tail_ratio = p.last().copied().unwrap_or(0.0) / p.iter().copied().fold(0.0, f64::max);
                    return Ok(ReducedRun {
                        populations: p,
                        mech_truncation: n,
                        tail_ratio,
                        history,
                    });
                }
                previous = Some(p);
            }
            Err(e @ nanofock::Error::Truncation(_)) if converge => history.push(ConvergenceStep {
                mech_truncation: n,
                drift: None,
                note: Some(e.to_string()),
            }),
            Err(e @ nanofock::Error::Truncation(_)) => {
                return Err(CliError::Solver(format!(
                    "{e}; rerun with --converge or raise simulation.mech_truncation"
                )))
            }
            Err(e) => return Err(CliError::from_solver(e)),
        }
        if 2 * n > sim.max_mech_truncation {
            return Err(CliError::Solver(format!(
                "reduced populations not converged to {:.1e} below simulation.max_mech_truncation = {}",
                sim.converge_tolerance, sim.max_mech_truncation
            )));
        }
        n *= 2;
    }
}
