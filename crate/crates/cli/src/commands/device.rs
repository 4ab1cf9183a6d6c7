use nanofock::constants::ordinary;
use nanofock::device::{DerivedParams, Status, ValidationReport};
use serde::Serialize;

use super::Context;
use crate::error::{CliError, Result};
use crate::output::to_json;

/// Derived parameters in ordinary frequency units, for reading by eye.
#[derive(Debug, Serialize)]
struct OrdinarySummary {
    omega_m0_hz: Option<f64>,
    omega_m_hz: f64,
    omega_m_prime_hz: f64,
    lambda_hz: f64,
    kappa_hz: f64,
    gamma_m_hz: f64,
    detunings_hz: Vec<f64>,
    couplings_hz: Vec<f64>,
}

impl OrdinarySummary {
    fn new(d: &DerivedParams) -> Self {
        Self {
            omega_m0_hz: d.omega_m0.map(ordinary),
            omega_m_hz: ordinary(d.omega_m),
            omega_m_prime_hz: ordinary(d.omega_m_prime),
            lambda_hz: ordinary(d.lambda),
            kappa_hz: ordinary(d.kappa),
            gamma_m_hz: ordinary(d.gamma_m),
            detunings_hz: d.lasers.iter().map(|l| ordinary(l.detuning)).collect(),
            couplings_hz: d.lasers.iter().map(|l| ordinary(l.coupling.norm())).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct DerivedFile<'a> {
    schema: &'static str,
    config_sha256: String,
    derived: &'a DerivedParams,
    ordinary: OrdinarySummary,
    validation: &'a ValidationReport,
}

fn print_summary(d: &DerivedParams, report: &ValidationReport) {
    let hz = |label: &str, w: f64| println!("{label:<16} {:>14.6e} Hz", ordinary(w));
    if let Some(w0) = d.omega_m0 {
        hz("omega_m0/2pi", w0);
    }
    hz("omega_m/2pi", d.omega_m);
    hz("lambda/2pi", d.lambda);
    hz("kappa/2pi", d.kappa);
    hz("gamma_m/2pi", d.gamma_m);
    println!("{:<16} {:>14.6e}", "n_bar", d.n_bar);
    for (j, l) in d.lasers.iter().enumerate() {
        println!(
            "laser {j}: detuning/2pi {:.6e} Hz, |g|/2pi {:.6e} Hz{}",
            ordinary(l.detuning),
            ordinary(l.coupling.norm()),
            l.power.map(|p| format!(", power {p:.4e} W")).unwrap_or_default()
        );
    }
    print_report(report);
}

fn print_report(report: &ValidationReport) {
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "pass",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        };
        println!("{:<24} {:>12.4e}  {status}  ({})", c.check.name(), c.ratio, c.inequality);
    }
}

fn regime_outcome(report: &ValidationReport) -> Result<()> {
    if report.any_fail() {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| format!("{} (ratio {:.3e})", c.check.name(), c.ratio))
            .collect();
        return Err(CliError::Regime(failed.join(", ")));
    }
    Ok(())
}

pub fn device(ctx: &mut Context) -> Result<()> {
    let d = ctx.derive()?;
    let report = ctx.regime(&d);
    print_summary(&d, &report);
    let file = DerivedFile {
        schema: "nanofock derived v1",
        config_sha256: ctx.hash(),
        derived: &d,
        ordinary: OrdinarySummary::new(&d),
        validation: &report,
    };
    ctx.out.write_json("derived.json", &file)?;
    regime_outcome(&report)
}

pub fn validate(ctx: &mut Context) -> Result<()> {
    let d = ctx.derive()?;
    let report = ctx.regime(&d);
    print!("{}", to_json(&report));
    regime_outcome(&report)
}
