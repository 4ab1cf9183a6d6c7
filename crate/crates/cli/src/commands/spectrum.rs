use nanofock::constants::ordinary;
use nanofock::observables::{populations_from_spectrum, power_spectrum, Reconstruction, SpectrumInputs};
use serde::Serialize;

use super::{max_drift, reduced, Context};
use crate::error::{CliError, Result};

/// Largest per-level population error accepted by `--selftest`.
pub const SELFTEST_TOLERANCE: f64 = 0.02;

/// Levels below this fraction of the largest population get no line.
const LINE_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct SpectrumArgs {
    pub converge: bool,
    pub selftest: bool,
}

#[derive(Debug, Serialize)]
struct PeakRow {
    n: usize,
    offset_plus_hz: f64,
    offset_minus_hz: f64,
    linewidth_hz: f64,
    rate_plus: f64,
    rate_minus: f64,
    height_plus: f64,
    height_minus: f64,
}

#[derive(Debug, Serialize)]
struct SelfTest {
    max_error: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct PeaksFile {
    schema: &'static str,
    config_sha256: String,
    mech_truncation: usize,
    laser_frequency_hz: Option<f64>,
    line_spacing_hz: f64,
    resolved: bool,
    peaks: Vec<PeakRow>,
    model_populations: Vec<f64>,
    reconstruction: Option<Reconstruction>,
    selftest: Option<SelfTest>,
    warnings: Vec<String>,
    error: Option<String>,
}

pub fn spectrum(ctx: &mut Context, args: SpectrumArgs) -> Result<()> {
    if !ctx.loaded.device.has_probe() {
        return Err(CliError::Config(format!(
            "at {}.probe: the spectrum command needs a probe laser",
            ctx.loaded.device.prefix()
        )));
    }
    let d = ctx.derive()?;
    let report = ctx.regime(&d);
    if !report.all_pass() {
        let tripped: Vec<_> = report.tripped().iter().map(|c| c.name()).collect();
        ctx.warn(format!("regime checks not passed: {}", tripped.join(", ")));
    }
    let sim = ctx.sim().clone();
    let red = reduced(&d, &sim, args.converge)?;
    let max = red.populations.iter().copied().fold(0.0, f64::max);
    let lines = red
        .populations
        .iter()
        .rposition(|&p| p >= LINE_CUTOFF * max)
        .map_or(2, |k| (k + 1).max(2))
        .min(red.populations.len());
    let mut populations = red.populations[..lines].to_vec();
    let kept: f64 = populations.iter().sum();
    populations.iter_mut().for_each(|p| *p /= kept);

    let inputs = SpectrumInputs::from_derived(&d, lines + 1).map_err(CliError::from_solver)?;
    let data = power_spectrum(&populations, &inputs, &sim.spectrum.options()).map_err(CliError::from_solver)?;
    let tag = format!("config_sha256={}", ctx.hash());
    ctx.out.write_with("spectrum.csv", |w| data.write_csv(w, Some(&tag)))?;

    let mut warnings = data.warnings.clone();
    let inversion = populations_from_spectrum(&data);
    let (reconstruction, error) = match inversion {
        Ok(r) => {
            warnings.extend(r.warnings.iter().cloned());
            (Some(r), None)
        }
        Err(e) => (None, Some(e)),
    };
    for w in &warnings {
        ctx.warn(w.clone());
    }

    let selftest = match (&reconstruction, args.selftest) {
        (Some(r), true) => {
            let max_error = max_drift(&r.populations, &populations);
            Some(SelfTest {
                max_error,
                tolerance: SELFTEST_TOLERANCE,
                passed: max_error < SELFTEST_TOLERANCE,
            })
        }
        _ => None,
    };

    println!(
        "{:>4} {:>16} {:>16} {:>12} {:>12} {:>12}",
        "n", "blue/2pi [Hz]", "red/2pi [Hz]", "width [Hz]", "h_blue", "h_red"
    );
    for p in &data.peaks {
        println!(
            "{:>4} {:>16.6e} {:>16.6e} {:>12.4e} {:>12.4e} {:>12.4e}",
            p.n,
            ordinary(p.offset_plus),
            ordinary(p.offset_minus),
            ordinary(p.linewidth),
            p.height_plus,
            p.height_minus
        );
    }
    if let Some(r) = &reconstruction {
        println!("recovered P_0..P_3 = {:?}", &r.populations[..r.populations.len().min(4)]);
        println!("recovered W(0,0) = {:.6}", r.wigner_origin);
    }
    if let Some(s) = &selftest {
        println!("selftest: max per-level error {:.3e} (tolerance {SELFTEST_TOLERANCE})", s.max_error);
    }

    let file = PeaksFile {
        schema: "nanofock peaks v1",
        config_sha256: ctx.hash(),
        mech_truncation: red.mech_truncation,
        laser_frequency_hz: data.laser_frequency.map(ordinary),
        line_spacing_hz: ordinary(data.line_spacing),
        resolved: data.resolved,
        peaks: data
            .peaks
            .iter()
            .map(|p| PeakRow {
                n: p.n,
                offset_plus_hz: ordinary(p.offset_plus),
                offset_minus_hz: ordinary(p.offset_minus),
                linewidth_hz: ordinary(p.linewidth),
                rate_plus: p.rate_plus,
                rate_minus: p.rate_minus,
                height_plus: p.height_plus,
                height_minus: p.height_minus,
            })
            .collect(),
        model_populations: populations,
        reconstruction,
        selftest,
        warnings,
        error: error.as_ref().map(|e| e.to_string()),
    };
    ctx.out.write_json("peaks.json", &file)?;

    if let Some(e) = error {
        return Err(match CliError::from_solver(e) {
            CliError::Config(m) | CliError::Solver(m) => CliError::Analysis(m),
            other => other,
        });
    }
    if let Some(s) = &file.selftest {
        if !s.passed {
            return Err(CliError::Analysis(format!(
                "selftest inversion error {:.3e} exceeds {SELFTEST_TOLERANCE}",
                s.max_error
            )));
        }
    }
    Ok(())
}
