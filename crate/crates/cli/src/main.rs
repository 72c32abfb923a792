//! `supernorm`: run property suites, evaluate `T_phi` norms and Gaussian
//! expectations of serialized elements, and sample regulator expectations.
//!
//! Exit status is 0 on success, 1 when a suite or certificate check is
//! violated and 2 on usage, configuration or input errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use supernorm::NormMode;

use commands::Status;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "supernorm", version, about = "Property checks and norms for Grassmann-boson elements")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Suite id or group (`all`, `exact`, `float`); replaces the configured list.
    #[arg(long = "suite", global = true)]
    suites: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per suite.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    /// Worker threads; rayon's default when absent.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Lp,
    Grid,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected property suites.
    Verify,
    /// Evaluate the T_phi semi-norm of an element at a field.
    Norm {
        element: PathBuf,
        field: PathBuf,
        /// Certificate path; `<out>/certificate.json` by default.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Gaussian expectation of a polynomial element.
    Expect {
        element: PathBuf,
        /// Compute E_C theta F, keeping the external field.
        #[arg(long)]
        theta: bool,
        /// Output element file; stdout by default.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Monte-Carlo regulator expectations as CSV.
    Sample,
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !cli.suites.is_empty() {
        cfg.suites = cli.suites.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = Some(t);
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = Some(o.clone());
    }
    if let Some(m) = cli.mode {
        cfg.norm.mode = match m {
            Mode::Exact => NormMode::Exact,
            Mode::Lp => NormMode::Lp,
            Mode::Grid => NormMode::Grid,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<Status> {
    let cfg = load(cli)?;
    if let Some(n) = cli.workers {
        if n == 0 {
            anyhow::bail!("--workers must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Verify => commands::verify(&cfg),
        Command::Norm { element, field, certificate } => commands::norm(&cfg, element, field, certificate.clone()),
        Command::Expect { element, theta, output } => commands::expect(&cfg, element, *theta, output.as_deref()),
        Command::Sample => commands::sample(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
