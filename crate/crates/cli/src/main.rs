//! `nanofock`: derived device parameters, regime checks, steady states,
//! probe spectra and parameter sweeps from one JSON run config.
//!
//! Exit codes: 0 success, 1 config error, 2 regime failure (including
//! buckling), 3 analysis precondition failure, 4 solver failure.

mod commands;
mod config;
mod error;
mod output;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::spectrum::SpectrumArgs;
use commands::steady::SteadyArgs;
use commands::sweep::SweepArgs;
use commands::Context;
use error::{CliError, Result};
use output::{Manifest, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "nanofock", version, about = "Fock-state preparation in driven nonlinear optomechanics")]
struct Cli {
    /// Print the JSON schema of the run config and exit.
    #[arg(long)]
    print_schema: bool,

    /// Run config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derived parameters and regime checks.
    Device,
    /// Regime checks only, as JSON on stdout.
    Validate,
    /// Steady-state populations and Wigner function.
    Steady {
        /// Also solve the full master equation.
        #[arg(long)]
        full: bool,
        /// Per-level comparison of the full and reduced populations (implies --full).
        #[arg(long)]
        compare: bool,
        /// Double the truncation until the populations settle.
        #[arg(long)]
        converge: bool,
    },
    /// Probe spectrum, peak table and inverted populations.
    Spectrum {
        #[arg(long)]
        converge: bool,
        /// Check the inversion against the model populations.
        #[arg(long)]
        selftest: bool,
    },
    /// Sweep one config entry over a list or range of values.
    Sweep {
        /// Dotted config path, e.g. device.physical.softening.zeta.
        #[arg(long = "param", value_name = "PATH")]
        parameter: Option<String>,
        /// Comma-separated values, e.g. "0 K,20 mK,100 mK".
        #[arg(long)]
        values: Option<String>,
        #[arg(long, requires = "to")]
        from: Option<String>,
        #[arg(long, requires = "from")]
        to: Option<String>,
        #[arg(long, default_value_t = 2)]
        steps: usize,
        #[arg(long)]
        converge: bool,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Device => "device",
            Self::Validate => "validate",
            Self::Steady { .. } => "steady",
            Self::Spectrum { .. } => "spectrum",
            Self::Sweep { .. } => "sweep",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.print_schema {
        print!("{}", config::SCHEMA);
        return Ok(());
    }
    let command = cli
        .command
        .ok_or_else(|| CliError::Config("no command given (device, validate, steady, spectrum, sweep)".into()))?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("at --threads: {e}")))?;
    }
    let path = cli.config.ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let loaded = config::load(&path)?;
    let dir = cli.out.unwrap_or_else(|| loaded.config.output.directory.clone());
    let out = OutputDir::create(&dir)?;
    let manifest = Manifest::new(command.name(), &loaded.path, &loaded.sha256);
    let mut ctx = Context {
        loaded,
        out,
        manifest,
    };
    let outcome = match command {
        Command::Device => commands::device::device(&mut ctx),
        Command::Validate => commands::device::validate(&mut ctx),
        Command::Steady {
            full,
            compare,
            converge,
        } => commands::steady::steady(
            &mut ctx,
            SteadyArgs {
                full,
                compare,
                converge,
            },
        ),
        Command::Spectrum { converge, selftest } => {
            commands::spectrum::spectrum(&mut ctx, SpectrumArgs { converge, selftest })
        }
        Command::Sweep {
            parameter,
            values,
            from,
            to,
            steps,
            converge,
        } => commands::sweep::sweep(
            &mut ctx,
            &SweepArgs {
                parameter,
                values,
                from,
                to,
                steps: Some(steps),
                converge,
            },
        ),
    };
    let Context { out, manifest, .. } = ctx;
    manifest.finish(&out, &outcome)?;
    outcome
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
