//! `randonb`: reproducible experiment runner for orbit moments, Haar Monte
//! Carlo and flat-torus quantum variances.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Command, ExperimentConfig, Format, Overrides, SpectrumSource};

#[derive(Parser, Debug)]
#[command(name = "randonb", version, about = "Orbit moments, Haar Monte Carlo and torus quantum-variance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    /// TOML file with any of the options below; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed. Falls back to the config file, then RANDONB_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Matrix dimensions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    d: Option<Vec<usize>>,

    /// Torus dimension.
    #[arg(long, global = true)]
    dim: Option<usize>,

    #[arg(long, global = true)]
    n_min: Option<u64>,

    #[arg(long, global = true)]
    n_max: Option<u64>,

    #[arg(long, global = true)]
    min_multiplicity: Option<u64>,

    /// Random bases per torus shell.
    #[arg(long, global = true)]
    draws: Option<u64>,

    /// Random spectra per dimension.
    #[arg(long, global = true)]
    spectra: Option<usize>,

    /// Largest dimension at which the Weingarten oracle runs.
    #[arg(long, global = true)]
    weingarten_max_d: Option<usize>,

    /// Explicit eigenvalues, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["grid", "shell"])]
    lambda: Option<Vec<f64>>,

    /// Equally spaced eigenvalues on [-1, 1].
    #[arg(long, global = true, conflicts_with = "shell")]
    grid: Option<usize>,

    /// Spectrum of the default torus observable on shell DIM,N.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1)]
    shell: Option<Vec<u64>>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Closed-form, Weingarten and Monte-Carlo moments of one spectrum.
    Moments,
    /// Closed forms against Monte Carlo over random spectra.
    McVerify,
    /// Compare both printed beta_4 forms with the exact oracle.
    Beta4Adjudicate,
    /// Partial sums along the grid sequence d_n = n.
    Slln,
    /// Lattice-shell multiplicities and growth slope.
    TorusShells,
    /// Quantum variances of random bases on torus eigenspaces.
    TorusQe,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Moments => Command::Moments,
            Cmd::McVerify => Command::McVerify,
            Cmd::Beta4Adjudicate => Command::Beta4Adjudicate,
            Cmd::Slln => Command::Slln,
            Cmd::TorusShells => Command::TorusShells,
            Cmd::TorusQe => Command::TorusQe,
        }
    }
}

fn overrides(cli: &Cli) -> Result<Overrides> {
    let spectrum = match (&cli.lambda, cli.grid, &cli.shell) {
        (Some(values), _, _) => Some(SpectrumSource::List { values: values.clone() }),
        (None, Some(d), _) => Some(SpectrumSource::Grid { d }),
        (None, None, Some(v)) => match v.as_slice() {
            &[dim, n] => Some(SpectrumSource::Shell { dim: dim as usize, n }),
            _ => bail!("--shell: expected DIM,N"),
        },
        _ => None,
    };
    Ok(Overrides {
        command: cli.command.map(Command::from),
        seed: cli.seed,
        samples: cli.samples,
        format: cli.format,
        out: cli.out.clone(),
        d: cli.d.clone(),
        dim: cli.dim,
        n_min: cli.n_min,
        n_max: cli.n_max,
        min_multiplicity: cli.min_multiplicity,
        draws: cli.draws,
        spectra: cli.spectra,
        weingarten_max_d: cli.weingarten_max_d,
        spectrum,
    })
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: Command,
    config: &'a ExperimentConfig,
    generator: &'a str,
    summary: &'a str,
    discrepancy: bool,
    result: &'a serde_json::Value,
}

fn run(cli: Cli) -> Result<bool> {
    let flags = overrides(&cli)?;
    let file = match &cli.config {
        Some(p) => {
            let (cfg, text) = config::load_file(p)?;
            Some((p.as_path(), cfg, text))
        }
        None => None,
    };
    let cfg = config::resolve(flags, file, std::env::var(config::SEED_ENV).ok())?;
    let outcome = match cfg.command {
        Command::Moments => commands::moments(&cfg),
        Command::McVerify => commands::mc_verify(&cfg),
        Command::Beta4Adjudicate => commands::beta4_adjudicate(&cfg),
        Command::Slln => commands::slln(&cfg),
        Command::TorusShells => commands::torus_shells(&cfg),
        Command::TorusQe => commands::torus_qe(&cfg),
    }?;
    let bytes = match cfg.format {
        Format::Json => {
            let env = Envelope {
                command: cfg.command,
                config: &cfg,
                generator: commands::generator(),
                summary: &outcome.summary,
                discrepancy: outcome.discrepancy,
                result: &outcome.result,
            };
            let mut s = serde_json::to_vec_pretty(&env)?;
            s.push(b'\n');
            s
        }
        Format::Csv => outcome.csv,
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, &bytes).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    eprintln!(
        "{} (seed {}, {:?}): {}",
        cfg.command,
        cfg.seed,
        cfg.seed_source,
        outcome.summary
    );
    Ok(outcome.discrepancy)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: oracle disagreement beyond tolerance; see the report");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
