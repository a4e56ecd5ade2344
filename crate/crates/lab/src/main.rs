//! `oneway-lab`: experiment runner for one-way protocol simulations.
//!
//! Exit status is 0 when every check passes, 1 when an invariant fails (a replay file is
//! written next to the reports) and 2 on bad input.

mod entropy;
mod learn;
mod lsd;
mod majix;
mod oracle;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use oneway::instance::{parse_instance, InstanceFile};
use oneway::majix::default_repetitions;
use oneway::oracle::DEFAULT_EXACT_LIMIT;
use oneway::protocol::DEFAULT_DIM_CAP;

use crate::report::Outcome;

#[derive(Parser)]
#[command(name = "oneway-lab", version, about = "Simulate and audit one-way quantum communication protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a quantum protocol into a deterministic one and audit every update.
    Learn {
        instance: PathBuf,
        /// Learner precision; defaults to the protocol's error bound.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
        dim_cap: usize,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
    },
    /// MajIx completeness, cheating optimum and B->A Monte Carlo.
    Majix {
        /// Instance file; without one a sweep over every k is generated.
        instance: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Monte-Carlo trials per row.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = default_repetitions())]
        reps: u32,
        #[arg(long, default_value_t = 121)]
        n: usize,
        /// Random 1-inputs in the generated sweep.
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LSD distance, optimal proof and sampled minimization.
    Lsd {
        instance: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Sampled unit-vector pairs per instance.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pinsker, Uhlmann, ordering and Klein sweeps.
    EntropyCheck {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact deterministic one-way cost by conflict-graph coloring.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EXACT_LIMIT)]
        exact_limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the command recorded in a replay file.
    Replay {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("loading {}", path.display()))
}

fn load_opt(path: Option<&PathBuf>) -> Result<Option<InstanceFile>> {
    path.map(|p| load(p)).transpose()
}

fn setting<T: std::str::FromStr>(file: &InstanceFile, key: &str) -> Result<Option<T>> {
    file.run
        .get(key)
        .map(|v| v.parse().map_err(|_| anyhow!("bad `{key}` setting `{v}`")))
        .transpose()
}

fn replay(file: &InstanceFile) -> Result<Outcome> {
    let command = file.run.get("command").ok_or_else(|| anyhow!("replay file has no `command` setting"))?;
    match command.as_str() {
        "learn" => learn::run(
            file,
            &learn::LearnArgs {
                epsilon: setting(file, "epsilon")?,
                dim_cap: DEFAULT_DIM_CAP,
                exact_limit: DEFAULT_EXACT_LIMIT,
            },
        ),
        "majix" => majix::run(
            Some(file),
            &majix::MajIxArgs {
                seed: setting(file, "seed")?.unwrap_or(0),
                n: 0,
                instances: 0,
                trials: setting(file, "trials")?.unwrap_or(10_000),
                reps: setting(file, "reps")?.unwrap_or_else(default_repetitions),
            },
        ),
        "lsd" => lsd::run(
            Some(file),
            &lsd::LsdArgs {
                seed: setting(file, "seed")?.unwrap_or(0),
                dim: 0,
                samples: setting(file, "trials")?.unwrap_or(10_000),
            },
        ),
        "entropy-check" => entropy::replay_pair(file),
        "oracle" => oracle::run(file, setting(file, "exact_limit")?.unwrap_or(DEFAULT_EXACT_LIMIT)),
        other => bail!("unknown command `{other}` in replay file"),
    }
}

fn execute(command: Command) -> Result<(Outcome, Option<PathBuf>)> {
    Ok(match command {
        Command::Learn { instance, epsilon, out, dim_cap, exact_limit } => {
            (learn::run(&load(&instance)?, &learn::LearnArgs { epsilon, dim_cap, exact_limit })?, out)
        }
        Command::Majix { instance, seed, trials, reps, n, instances, out } => {
            let file = load_opt(instance.as_ref())?;
            (majix::run(file.as_ref(), &majix::MajIxArgs { seed, n, instances, trials, reps })?, out)
        }
        Command::Lsd { instance, seed, trials, dim, out } => {
            let file = load_opt(instance.as_ref())?;
            (lsd::run(file.as_ref(), &lsd::LsdArgs { seed, dim, samples: trials })?, out)
        }
        Command::EntropyCheck { seed, trials, out } => (entropy::run(seed, trials)?, out),
        Command::Oracle { instance, exact_limit, out } => (oracle::run(&load(&instance)?, exact_limit)?, out),
        Command::Replay { file, out } => (replay(&load(&file)?)?, out),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (outcome, out) = match execute(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let replay_path = match outcome.emit(out.as_deref()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if outcome.passed() {
        return ExitCode::SUCCESS;
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    if let Some(p) = replay_path {
        eprintln!("replay file: {}", p.display());
    }
    ExitCode::from(1)
}
