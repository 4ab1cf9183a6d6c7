use nanofock::device::DerivedParams;
use nanofock::fock::DensityMatrix;
use nanofock::liouvillian::{build_full_liouvillian, steady_state_solve, SteadyState, SystemConfig};
use nanofock::observables::{wigner_from_density_matrix, wigner_from_populations, wigner_origin, WignerData};
use serde::Serialize;

use super::{max_drift, reduced, ConvergenceStep, Context};
use crate::config::SimulationSection;
use crate::error::{CliError, Result};
use crate::output::SolverRecord;

/// Largest per-level gap accepted between the full and reduced paths.
pub const COMPARE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
pub struct SteadyArgs {
    pub full: bool,
    pub compare: bool,
    pub converge: bool,
}

#[derive(Debug, Serialize)]
struct ReducedSummary {
    mech_truncation: usize,
    populations: Vec<f64>,
    tail_ratio: f64,
    wigner_origin: f64,
    convergence: Vec<ConvergenceStep>,
}

#[derive(Debug, Serialize)]
struct FullSummary {
    mech_truncation: usize,
    cavity_truncation: usize,
    populations: Vec<f64>,
    residual: f64,
    method: String,
    wigner_origin: f64,
    convergence: Vec<ConvergenceStep>,
    /// Largest population change when the cavities get one more level.
    cavity_drift: Option<f64>,
}

#[derive(Debug, Serialize)]
struct LevelDiff {
    n: usize,
    reduced: f64,
    full: f64,
    abs_diff: f64,
}

#[derive(Debug, Serialize)]
struct Comparison {
    tolerance: f64,
    max_abs_diff: f64,
    within_tolerance: bool,
    levels: Vec<LevelDiff>,
}

#[derive(Debug, Serialize)]
struct WignerSummary {
    source: &'static str,
    origin_value: f64,
    min_value: f64,
    min_location: (f64, f64),
    max_value: f64,
    normalization: f64,
    warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
struct PopulationsFile {
    schema: &'static str,
    config_sha256: String,
    reduced: ReducedSummary,
    full: Option<FullSummary>,
    comparison: Option<Comparison>,
    wigner: Option<WignerSummary>,
}

struct FullRun {
    state: SteadyState,
    mech: DensityMatrix,
    mech_truncation: usize,
    history: Vec<ConvergenceStep>,
    cavity_drift: Option<f64>,
}

fn full_at(d: &DerivedParams, sim: &SimulationSection, n: usize, cavity: usize) -> Result<SteadyState> {
    let config = SystemConfig::with_cavities(d.clone(), n, vec![cavity; d.lasers.len()])
        .map_err(CliError::from_solver)?;
    let l = build_full_liouvillian(&config).map_err(CliError::from_solver)?;
    steady_state_solve(&l, sim.solver).map_err(CliError::from_solver)
}

fn record(ctx: &mut Context, label: &str, n: usize, s: &SteadyState) {
    ctx.record_solver(SolverRecord {
        label: label.to_string(),
        mech_truncation: n,
        residual: s.residual,
        diagnostics: s.diagnostics.clone(),
    });
}

fn full(ctx: &mut Context, d: &DerivedParams, converge: bool) -> Result<FullRun> {
    let sim = ctx.sim().clone();
    let cavity = sim.cavity_truncation;
    let mut n = sim.mech_truncation;
    let mut history = Vec::new();
    let mut state = full_at(d, &sim, n, cavity)?;
    record(ctx, "full", n, &state);
    history.push(ConvergenceStep {
        mech_truncation: n,
        drift: None,
        note: None,
    });
    let mut cavity_drift = None;
    if converge {
        loop {
            if 2 * n > sim.max_full_mech_truncation {
                ctx.warn(format!(
                    "full master equation not checked beyond N_m = {n} (simulation.max_full_mech_truncation = {})",
                    sim.max_full_mech_truncation
                ));
                break;
            }
            let next = full_at(d, &sim, 2 * n, cavity)?;
            record(ctx, "full", 2 * n, &next);
            let drift = max_drift(&next.populations, &state.populations);
            n *= 2;
            state = next;
            history.push(ConvergenceStep {
                mech_truncation: n,
                drift: Some(drift),
                note: None,
            });
            if drift < sim.converge_tolerance {
                break;
            }
        }
        let config = SystemConfig::with_cavities(d.clone(), n, vec![cavity + 1; d.lasers.len()])
            .map_err(CliError::from_solver)?;
        match build_full_liouvillian(&config).and_then(|l| steady_state_solve(&l, sim.solver)) {
            Ok(wider) => {
                record(ctx, "full_cavity_check", n, &wider);
                let drift = max_drift(&wider.populations, &state.populations);
                if drift >= sim.converge_tolerance {
                    ctx.warn(format!(
                        "cavity truncation {cavity} not converged: populations move by {drift:.3e} at {}",
                        cavity + 1
                    ));
                }
                cavity_drift = Some(drift);
            }
            Err(e @ nanofock::Error::MemoryGuard { .. }) => {
                ctx.warn(format!("cavity truncation check at {} skipped: {e}", cavity + 1));
            }
            Err(e) => return Err(CliError::from_solver(e)),
        }
    }
    let rho = state
        .rho
        .as_ref()
        .ok_or_else(|| CliError::Solver("full solve returned no density matrix".into()))?;
    let mech = rho.partial_trace(0).map_err(CliError::from_solver)?;
    Ok(FullRun {
        state,
        mech,
        mech_truncation: n,
        history,
        cavity_drift,
    })
}

fn summarize(data: &WignerData, source: &'static str) -> WignerSummary {
    WignerSummary {
        source,
        origin_value: data.origin_value,
        min_value: data.min_value,
        min_location: data.min_location,
        max_value: data.max_value,
        normalization: data.normalization,
        warnings: data.warnings.clone(),
    }
}

pub fn steady(ctx: &mut Context, args: SteadyArgs) -> Result<()> {
    let d = ctx.derive()?;
    let report = ctx.regime(&d);
    if !report.all_pass() {
        let tripped: Vec<_> = report.tripped().iter().map(|c| c.name()).collect();
        ctx.warn(format!("regime checks not passed: {}", tripped.join(", ")));
    }
    let sim = ctx.sim().clone();
    let red = reduced(&d, &sim, args.converge)?;
    println!("reduced: N_m = {}, tail ratio {:.3e}", red.mech_truncation, red.tail_ratio);

    let full_run = if args.full || args.compare {
        let f = full(ctx, &d, args.converge)?;
        println!(
            "full: N_m = {}, residual {:.3e} ({})",
            f.mech_truncation, f.state.residual, f.state.diagnostics.method
        );
        Some(f)
    } else {
        None
    };

    let comparison = if args.compare {
        let f = &full_run.as_ref().expect("compare runs the full path").state;
        let levels: Vec<LevelDiff> = (0..f.populations.len())
            .map(|n| {
                let r = red.populations.get(n).copied().unwrap_or(0.0);
                let p = f.populations[n];
                LevelDiff {
                    n,
                    reduced: r,
                    full: p,
                    abs_diff: (r - p).abs(),
                }
            })
            .collect();
        let max_abs_diff = levels.iter().map(|l| l.abs_diff).fold(0.0, f64::max);
        println!("{:>4} {:>14} {:>14} {:>12}", "n", "reduced", "full", "|dP|");
        for l in &levels {
            println!("{:>4} {:>14.6e} {:>14.6e} {:>12.3e}", l.n, l.reduced, l.full, l.abs_diff);
        }
        if max_abs_diff > COMPARE_TOLERANCE {
            ctx.warn(format!(
                "full and reduced populations differ by {max_abs_diff:.3e} (> {COMPARE_TOLERANCE})"
            ));
        }
        Some(Comparison {
            tolerance: COMPARE_TOLERANCE,
            max_abs_diff,
            within_tolerance: max_abs_diff <= COMPARE_TOLERANCE,
            levels,
        })
    } else {
        None
    };

    let wigner = if ctx.loaded.config.output.wigner {
        let (data, source) = match &full_run {
            Some(f) => {
                let grid = sim.wigner.grid(&f.state.populations);
                (wigner_from_density_matrix(&f.mech, &grid), "full")
            }
            None => {
                let grid = sim.wigner.grid(&red.populations);
                (wigner_from_populations(&red.populations, &grid), "reduced")
            }
        };
        let data = data.map_err(CliError::from_solver)?;
        for w in &data.warnings {
            ctx.warn(format!("wigner: {w}"));
        }
        let tag = format!("config_sha256={}", ctx.hash());
        ctx.out.write_with("wigner.csv", |w| data.write_csv(w, Some(&tag)))?;
        Some(summarize(&data, source))
    } else {
        None
    };

    let w0 = wigner_origin(&red.populations);
    println!("P_0..P_3 = {:?}", &red.populations[..red.populations.len().min(4)]);
    println!("W(0,0) = {w0:.6}");
    let file = PopulationsFile {
        schema: "nanofock populations v1",
        config_sha256: ctx.hash(),
        reduced: ReducedSummary {
            mech_truncation: red.mech_truncation,
            tail_ratio: red.tail_ratio,
            wigner_origin: w0,
            populations: red.populations,
            convergence: red.history,
        },
        full: full_run.map(|f| FullSummary {
            mech_truncation: f.mech_truncation,
            cavity_truncation: sim.cavity_truncation,
            wigner_origin: wigner_origin(&f.state.populations),
            populations: f.state.populations,
            residual: f.state.residual,
            method: f.state.diagnostics.method,
            convergence: f.history,
            cavity_drift: f.cavity_drift,
        }),
        comparison,
        wigner,
    };
    ctx.out.write_json("populations.json", &file)
}
