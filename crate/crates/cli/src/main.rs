use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use doco_core::harness::{self, ExperimentConfig};
use doco_core::topology::{gossip_matrix_for, TopologyKind};

#[derive(Parser, Debug)]
#[command(name = "doco", version, about = "Decentralized online optimization with compressed gossip")]
struct Cli {
    /// Run a single seed instead of the config's seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path (CSV for `run`, text table otherwise).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Record every k-th round.
    #[arg(long, global = true)]
    stride: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write per-round records as CSV.
    Run { config: PathBuf },
    /// Run a config at several horizons and fit the regret exponent.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
    },
    /// Print the spectrum of a topology's gossip matrix.
    ValidateMatrix {
        topology: TopologyKind,
        n: usize,
        /// Skip the (I + P)/2 step.
        #[arg(long)]
        no_lazify: bool,
    },
    /// Paired-seed regret table of two configs.
    Compare { a: PathBuf, b: PathBuf },
    /// Mean rounds for information to cross half of a cycle.
    DelayProbe {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        omega: f64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

fn load(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg.harness.seeds = vec![seed];
    }
    if let Some(stride) = cli.stride {
        cfg.harness.stride = stride;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load(&cli, config)?;
            if let Some(out) = &cli.out {
                cfg.harness.output = Some(out.clone());
            }
            let to_stdout = cfg.harness.output.is_none();
            let result = harness::run_experiment(&cfg)?;
            if to_stdout {
                harness::write_csv(io::stdout().lock(), &result)?;
            }
            for run in &result.runs {
                eprintln!(
                    "seed {}: mean final regret {:.6e}, bytes {:.0}",
                    run.seed,
                    run.outcome.mean_regret(),
                    run.outcome.total_bytes
                );
            }
        }
        Command::Sweep { config, horizons } => {
            let cfg = load(&cli, config)?;
            let result = harness::scaling_sweep(&cfg, horizons)?;
            emit(cli.out.as_deref(), &result.to_text())?;
        }
        Command::ValidateMatrix { topology, n, no_lazify } => {
            let (_, p) = gossip_matrix_for(*topology, *n, !no_lazify)?;
            let s = p.spectrum();
            let text = format!(
                "sigma2 {:.12}\nrho {:.12}\nbeta {:.12}\nmin_eigenvalue {:.12}\npsd {}\n",
                s.sigma2,
                s.rho,
                s.beta,
                s.min_eigenvalue,
                p.is_psd()
            );
            emit(cli.out.as_deref(), &text)?;
        }
        Command::Compare { a, b } => {
            let table = harness::compare(&load(&cli, a)?, &load(&cli, b)?)?;
            emit(cli.out.as_deref(), &table.to_text())?;
        }
        Command::DelayProbe { n, omega, trials } => {
            if !(*omega > 0.0 && *omega <= 1.0) {
                bail!("omega must lie in (0, 1]");
            }
            let r = harness::delay_probe(*n, *omega, *trials, cli.seed.unwrap_or(0))?;
            let m = (n - 2) / 2;
            let text = format!(
                "hops {}\nmean {:.6}\nstderr {:.6}\nexpected {}\n",
                r.hops,
                r.mean,
                r.stderr,
                (m as f64 / (2.0 * omega)).ceil()
            );
            emit(cli.out.as_deref(), &text)?;
        }
    }
    Ok(())
}
