//! `rsv`: configuration-driven runner for the domain-variation checks.
//!
//! Exit codes: 0 when every embedded check passes, 1 when some check fails
//! (the failure list goes to stderr as JSON), 2 on configuration or
//! computation errors.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Format};
use report::Report;

#[derive(Debug, Parser)]
#[command(name = "rsv", version, about = "Domain variations of Robin energies and eigenvalues on balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; overrides `output.formats`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Tie-breaking seed for the classification witness search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Ė(0) or λ̇(0), with the oracle's first derivative.
    FirstVariation,
    /// Ë(0) or λ̈(0) by the series, the boundary functional and the oracle.
    SecondVariation,
    /// Steklov eigenvalues μ_s of the ball.
    Steklov,
    /// S̈(0) in closed form and by finite differences of the area.
    Surface,
    /// Sign of Ë(0) for torsion, with witness modes.
    Classify,
    /// Dirichlet eigenvalue and energy variations.
    Dirichlet,
    /// (t, E, λ, S, V) along the perturbation family.
    Sweep,
}

fn run(cli: &Cli) -> Result<Report> {
    let path = cli.config.as_ref().context("--config PATH is required")?;
    let cfg = ExperimentConfig::load(path)?;
    let report = match cli.command {
        Command::FirstVariation => commands::first_variation(&cfg),
        Command::SecondVariation => commands::second_variation(&cfg),
        Command::Steklov => commands::steklov(&cfg),
        Command::Surface => commands::surface(&cfg),
        Command::Classify => commands::classify(&cfg, cli.seed),
        Command::Dirichlet => commands::dirichlet(&cfg),
        Command::Sweep => commands::sweep(&cfg),
    }?;
    let formats = cli.format.map_or(cfg.output.formats.clone(), |f| vec![f]);
    if let Some(dir) = cli.out.as_ref().or(cfg.output.directory.as_ref()) {
        report.write(dir, &formats)?;
    }
    print!("{}", report.render(formats.first().copied().unwrap_or(Format::Kv)));
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) if report.failures.is_empty() => ExitCode::SUCCESS,
        Ok(report) => {
            eprint!("{}", report.failures_json());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
