use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{EngineChoice, ParamsSource, RunConfig};

/// Price European calls under a GTS Lévy model.
#[derive(Debug, Parser)]
#[command(name = "gts", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags take precedence over the config file.
#[derive(Debug, Args)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Parameter file (as written by `fit`), or `sp500` / `fit`.
    #[arg(long, global = true, value_name = "PATH")]
    params: Option<String>,
    #[arg(long, global = true, value_name = "R", allow_negative_numbers = true)]
    rate: Option<f64>,
    #[arg(long, global = true, value_name = "S")]
    spot: Option<f64>,
    #[arg(long, global = true, value_enum)]
    engine: Option<EngineChoice>,
    /// Output directory.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Price CSV for fitting.
    #[arg(long, global = true, value_name = "PATH")]
    data: Option<PathBuf>,
    #[arg(long, global = true, value_name = "D")]
    days_per_year: Option<u32>,
    /// Contour shift of the generalized engine.
    #[arg(long, global = true, value_name = "Q", allow_negative_numbers = true)]
    q: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum-likelihood fit to daily log returns.
    Fit,
    /// Solve for the Esscher parameter and write the risk-neutral measure.
    Esscher,
    /// Price one option (--strike and --tau) or the full table.
    Price {
        #[arg(long)]
        strike: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Optimal contour shift per moneyness from payoff reconstruction.
    Qcalib,
    /// GTS minus Black-Scholes over the configured grids.
    Surface,
    /// Density grids of the log return.
    Density,
}

/// Bad invocation; exits with status 2.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for Usage {}

fn build_config(o: &Overrides) -> anyhow::Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &o.params {
        cfg.params = ParamsSource::Named(p.clone());
    }
    if let Some(v) = o.rate {
        cfg.rate = v;
    }
    if let Some(v) = o.spot {
        cfg.spot = v;
    }
    if let Some(v) = o.engine {
        cfg.engine = v;
    }
    if let Some(v) = &o.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &o.data {
        cfg.data = Some(v.clone());
    }
    if let Some(v) = o.days_per_year {
        cfg.days_per_year = v;
    }
    if let Some(v) = o.q {
        cfg.contour.q = v;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = build_config(&cli.overrides)?;
    if let Command::Price { strike, tau } = &cli.command {
        cfg.strike = strike.or(cfg.strike);
        cfg.tau = tau.or(cfg.tau);
    }
    match cli.command {
        Command::Fit => commands::fit(&cfg),
        Command::Esscher => commands::esscher(&cfg),
        Command::Price { .. } => commands::price(&cfg),
        Command::Qcalib => commands::qcalib(&cfg),
        Command::Surface => commands::surface(&cfg),
        Command::Density => commands::density(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // parser errors span several lines
            let msg = format!("{e:#}");
            let line: Vec<&str> = msg
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("error: {}", line.join(" "));
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
