use nanofock::constants::ordinary;
use nanofock::device::{regime_check_with, Status};
use nanofock::observables::wigner_origin;
use rayon::prelude::*;
use serde_json::Value;

use super::{reduced, Context};
use crate::config::{from_value, lookup_mut, SweepSection};
use crate::error::{CliError, Result};
use crate::units::split_quantity;

pub const SWEEP_CSV_SCHEMA: &str = "# nanofock sweep v1";

const COLUMNS: [&str; 17] = [
    "index",
    "value",
    "status",
    "omega_m_hz",
    "lambda_hz",
    "kappa_hz",
    "gamma_m_hz",
    "n_bar",
    "max_coupling_hz",
    "regime",
    "levels",
    "p0",
    "p1",
    "p2",
    "mean_phonons",
    "w00",
    "error",
];

#[derive(Debug, Clone, Default)]
pub struct SweepArgs {
    pub parameter: Option<String>,
    pub values: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub steps: Option<usize>,
    pub converge: bool,
}

fn token(s: &str) -> Value {
    let t = s.trim();
    t.parse::<f64>().map_or_else(|_| Value::String(t.to_string()), Value::from)
}

/// Evenly spaced values between two numbers that share a unit.
fn range(from: &str, to: &str, steps: usize) -> Result<Vec<Value>> {
    let bad = |m: String| CliError::Config(format!("at --from/--to: {m}"));
    if steps == 0 {
        return Err(CliError::Config("at --steps: needs at least one step".into()));
    }
    let (a, b, unit) = match (from.trim().parse::<f64>(), to.trim().parse::<f64>()) {
        (Ok(a), Ok(b)) => (a, b, None),
        _ => {
            let (a, ua) = split_quantity(from).ok_or_else(|| bad(format!("cannot read \"{from}\"")))?;
            let (b, ub) = split_quantity(to).ok_or_else(|| bad(format!("cannot read \"{to}\"")))?;
            if ua != ub {
                return Err(bad(format!("units differ (\"{ua}\" vs \"{ub}\")")));
            }
            (a, b, Some(ua.to_string()))
        }
    };
    Ok((0..steps)
        .map(|k| {
            let v = if steps == 1 {
                a
            } else {
                a + (b - a) * k as f64 / (steps - 1) as f64
            };
            // Drop round-off so the labels read as typed.
            let v: f64 = format!("{v:.12e}").parse().expect("formatted float parses");
            match &unit {
                Some(u) => Value::String(format!("{v} {u}")),
                None => Value::from(v),
            }
        })
        .collect())
}

fn sweep_spec(ctx: &Context, args: &SweepArgs) -> Result<SweepSection> {
    let from_config = ctx.loaded.config.sweep.clone();
    let parameter = args
        .parameter
        .clone()
        .or_else(|| from_config.as_ref().map(|s| s.parameter.clone()))
        .ok_or_else(|| CliError::Config("sweep needs --param or a sweep section in the config".into()))?;
    let values = match (&args.values, &args.from, &args.to) {
        (Some(list), None, None) => list.split(',').map(token).collect(),
        (None, Some(from), Some(to)) => range(from, to, args.steps.unwrap_or(2))?,
        (None, None, None) => from_config
            .map(|s| s.values)
            .ok_or_else(|| CliError::Config("sweep needs --values, --from/--to or sweep.values".into()))?,
        _ => return Err(CliError::Config("give either --values or both --from and --to".into())),
    };
    if values.is_empty() {
        return Err(CliError::Config("at sweep.values: no sweep points".into()));
    }
    Ok(SweepSection { parameter, values })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn label(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Fills `row` as far as the point gets; the error ends the row.
fn evaluate(base: &Value, spec: &SweepSection, value: &Value, converge: bool, row: &mut [String]) -> Result<()> {
    let mut tree = base.clone();
    *lookup_mut(&mut tree, &spec.parameter).expect("sweep path checked up front") = value.clone();
    let (config, device) = from_value(&tree)?;
    let d = device.derive()?;
    let g_max = d.lasers.iter().map(|l| l.coupling.norm()).fold(0.0, f64::max);
    for (i, x) in [d.omega_m, d.lambda, d.kappa, d.gamma_m].into_iter().enumerate() {
        row[3 + i] = fmt(ordinary(x));
    }
    row[7] = fmt(d.n_bar);
    row[8] = fmt(ordinary(g_max));
    let report = regime_check_with(&d, config.simulation.rwa_phonons, config.simulation.thresholds);
    row[9] = if report.any_fail() {
        "fail"
    } else if report.checks.iter().any(|c| c.status == Status::Warn) {
        "warn"
    } else {
        "pass"
    }
    .to_string();
    let red = reduced(&d, &config.simulation, converge)?;
    let p = &red.populations;
    row[10] = red.mech_truncation.to_string();
    for k in 0..3 {
        row[11 + k] = fmt(p.get(k).copied().unwrap_or(0.0));
    }
    row[14] = fmt(p.iter().enumerate().map(|(n, x)| n as f64 * x).sum());
    row[15] = fmt(wigner_origin(p));
    Ok(())
}

pub fn sweep(ctx: &mut Context, args: &SweepArgs) -> Result<()> {
    let spec = sweep_spec(ctx, args)?;
    let mut probe = ctx.loaded.raw.clone();
    if lookup_mut(&mut probe, &spec.parameter).is_none() {
        return Err(CliError::Config(format!(
            "at sweep.parameter: \"{}\" does not exist in the config",
            spec.parameter
        )));
    }
    match ctx.derive() {
        Ok(d) => {
            ctx.regime(&d);
        }
        Err(e) => ctx.warn(format!("base config does not derive: {e}")),
    }

    let base = &ctx.loaded.raw;
    let rows: Vec<Vec<String>> = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(i, value)| {
            let mut row = vec![String::new(); COLUMNS.len()];
            row[0] = i.to_string();
            row[1] = label(value);
            match evaluate(base, &spec, value, args.converge, &mut row) {
                Ok(()) => row[2] = "ok".into(),
                Err(e) => {
                    row[2] = "error".into();
                    row[16] = e.to_string();
                }
            }
            row
        })
        .collect();

    let failed = rows.iter().filter(|r| r[2] == "error").count();
    for r in &rows {
        println!("{:>4} {:>16} {:>6} p1={:<24} w00={}", r[0], r[1], r[2], r[12], r[15]);
    }
    if failed > 0 {
        ctx.warn(format!("{failed} of {} sweep points failed", rows.len()));
    }
    let tag = format!("{SWEEP_CSV_SCHEMA} config_sha256={} parameter={}", ctx.hash(), spec.parameter);
    ctx.out.write_with("sweep.csv", |w| {
        use std::io::Write;
        writeln!(w, "{tag}")?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(COLUMNS)?;
        for r in &rows {
            csv.write_record(r)?;
        }
        csv.flush()
    })
}
