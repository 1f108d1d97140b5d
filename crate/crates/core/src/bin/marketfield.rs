//! `marketfield` command line: figure regeneration and verification.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use marketfield::config::{OutputFormat, RunConfig};
use marketfield::figures::{run_demand, run_figure, FigureSpec};
use marketfield::verify::{parse_overrides, run_verify};

#[derive(Parser)]
#[command(
    name = "marketfield",
    version,
    about = "Gauge-field market model: figures and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regenerate one figure (1-8) as CSV and/or SVG.
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=8))]
        id: u8,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Write the demand-circle family.
    Demand {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Run the numerical checks.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a tolerance, `NAME=VALUE`. Repeatable.
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tol: Vec<String>,
    },
}

fn load(path: Option<&PathBuf>, out: Option<PathBuf>, format: Option<OutputFormat>) -> marketfield::Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    if let Some(f) = format {
        cfg.format = f;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, marketfield::Error> {
    match cli.command {
        Command::Figure {
            id,
            config,
            out,
            format,
        } => {
            let cfg = load(config.as_ref(), out, format)?;
            for path in run_figure(FigureSpec::new(id)?, &cfg)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Demand { config, out, format } => {
            let cfg = load(config.as_ref(), out, format)?;
            for path in run_demand(&cfg)? {
                println!("{}", path.display());
            }
            Ok(true)
        }
        Command::Verify { config, tol } => {
            let cfg = load(config.as_ref(), None, None)?;
            let overrides = parse_overrides(&tol)?;
            let report = run_verify(&cfg, &overrides)?;
            for check in &report.checks {
                println!("{check}");
            }
            let failed = report.failures().count();
            println!("{} checks, {failed} failed", report.checks.len());
            Ok(failed == 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
