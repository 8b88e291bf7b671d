//! `nkl`: runs the k-NN experiments and writes bit-stable CSV and JSON.
//!
//! Exit status: 0 when no check fails, 2 when a check fails, 1 on a usage,
//! configuration or I/O error.

mod catalog;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{DistributionId, Policy, RunConfig};
use error::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "nkl",
    version,
    about = "k-nearest-neighbor experiments on general metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(RunArgs),
    /// Print the experiment catalog.
    ListExperiments,
}

/// List-valued flags take comma-separated values, e.g. `--n 250,1000`.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// Master seed [default: 1].
    #[arg(long, env = "NKL_SEED")]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Test points per training draw.
    #[arg(long)]
    inner: Option<usize>,
    /// Davies truncation depth L, or Cantor schedule levels.
    #[arg(long)]
    depth: Option<usize>,
    /// Cantor failure budget.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Allowed distance from the Bayes error.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    policy: Option<Policy>,
    #[arg(long, value_enum)]
    distribution: Option<DistributionId>,
    /// Output directory [default: nkl-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn flags(&self) -> RunConfig {
        RunConfig {
            experiment: self.experiment.clone(),
            seed: self.seed,
            n: self.n.clone(),
            k: self.k.clone(),
            trials: self.trials,
            inner: self.inner,
            depth: self.depth,
            delta: self.delta,
            alpha: self.alpha.clone(),
            epsilon: self.epsilon,
            tolerance: self.tolerance,
            policy: self.policy,
            distribution: self.distribution,
            out: self.out.clone(),
            workers: self.workers,
        }
    }
}

fn list_experiments() {
    for e in catalog::CATALOG {
        println!("{:<22} {}", e.id, e.anchor);
    }
}

/// Returns whether every counted check passed.
fn run(args: &RunArgs) -> Result<bool> {
    let file = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.overlay(args.flags());
    let seed = cfg.seed.unwrap_or(1);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let result = pool.build()?.install(|| catalog::run(&cfg, seed))?;
    let entry = catalog::find(cfg.experiment.as_deref().unwrap_or_default())?;

    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("nkl-out"));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Write {
        path: dir.clone(),
        source,
    })?;
    let id = entry.id;
    let mut csv = Vec::new();
    output::write_csv(&mut csv, &result)?;
    output::write_file(&dir.join(format!("{id}.csv")), &csv)?;
    let summary = output::summary(&result, &cfg, entry.anchor, seed);
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    output::write_file(&dir.join(format!("{id}.json")), json.as_bytes())?;

    for c in &result.checks {
        println!("{:<8} {} ({})", c.status.to_string(), c.name, c.rule);
    }
    println!("wrote {}", dir.join(format!("{id}.{{csv,json}}")).display());
    Ok(output::no_failures(&result))
}

fn main() -> ExitCode {
    // clap reports usage errors with status 2, which is reserved for failed checks
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::ListExperiments => {
            list_experiments();
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(&args) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(2),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
