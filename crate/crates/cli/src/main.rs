use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use cegar_core::bench::{load_cases, run_benchmark, to_csv, BenchCase, BenchError};
use cegar_core::random::{seeded_cases, RandomModelConfig};
use cegar_core::{
    abstract_mc_with, export_dot, parse_model, parse_property, write_report, CegarConfig, Counterexample, FinalVerdict,
    Strategy,
};

/// Explicit-state CEGAR model checker.
#[derive(Debug, Parser)]
#[command(name = "cegar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check one property on one model.
    Check(CheckArgs),
    /// Compare refinement strategies on a set of models; prints CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Model file in .kmod format.
    #[arg(long)]
    model: PathBuf,
    /// Property, `AG <pred>` or `GF <pred>`.
    #[arg(long)]
    prop: String,
    /// Variables hidden in the initial abstraction.
    #[arg(long, value_delimiter = ',')]
    hide: Vec<String>,
    #[arg(long, default_value = "extra-var")]
    strategy: Strategy,
    /// Maximum number of rounds (default: twice the number of states).
    #[arg(long)]
    cap: Option<usize>,
    /// Write a JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the abstract model of each round as iter_<k>.dot into this directory.
    #[arg(long)]
    dot_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of .kmod files, each with an optional .prop sidecar.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "extra-var,smallest-dead,smallest-bad,visible-minimal")]
    strategies: Vec<Strategy>,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generate N random models with K boolean variables, given as `N,K`.
    #[arg(long, value_parser = parse_pair)]
    random: Option<(usize, usize)>,
    /// Property for models without a .prop sidecar.
    #[arg(long)]
    prop: Option<String>,
    /// Hidden variables for models without a .prop sidecar.
    #[arg(long, value_delimiter = ',')]
    hide: Vec<String>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (n, k) = s.split_once(',').ok_or("expected N,K")?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (n, k) = (num(n)?, num(k)?);
    if !(1..=20).contains(&k) {
        return Err("K must be between 1 and 20".into());
    }
    Ok((n, k))
}

const EXIT_VIOLATED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(args) => cmd_check(&args),
        Command::Bench(args) => cmd_bench(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_USAGE, e.into())
    }
}

fn render_path(cex: &Counterexample) -> String {
    let join = |ids: &[cegar_core::StateId]| ids.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" -> ");
    match cex {
        Counterexample::Finite { path } => format!("path: {}", join(path)),
        Counterexample::Lasso { prefix, cycle } => format!("prefix: {}\nloop: {}", join(prefix), join(cycle)),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn cmd_check(args: &CheckArgs) -> Result<u8, Failure> {
    let text = read(&args.model)?;
    let model = parse_model(&text).with_context(|| args.model.display().to_string())?;
    let property = parse_property(&args.prop).context("--prop")?;
    let mut config = CegarConfig::new(args.hide.iter().cloned(), args.strategy);
    config.iteration_cap = args.cap;
    if let Some(dir) = &args.dot_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }

    let mut dot_error = None;
    let report = abstract_mc_with(Arc::new(model), &property, &config, |round| {
        let Some(dir) = &args.dot_dir else { return };
        let written = export_dot(round.abstract_model.model(), round.counterexample)
            .map_err(anyhow::Error::from)
            .and_then(|dot| {
                let path = dir.join(format!("iter_{}.dot", round.iteration));
                fs::write(&path, dot).with_context(|| format!("cannot write {}", path.display()))
            });
        if let Err(e) = written {
            dot_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = dot_error {
        return Err(e.into());
    }
    if let Some(path) = &args.report {
        fs::write(path, write_report(&report)).with_context(|| format!("cannot write {}", path.display()))?;
    }

    let n = report.total_iterations();
    Ok(match &report.final_verdict {
        FinalVerdict::Holds => {
            println!("holds ({n} iterations)");
            0
        }
        FinalVerdict::Violated(cex) => {
            println!("violated ({n} iterations)\n{}", render_path(cex));
            EXIT_VIOLATED
        }
        FinalVerdict::CapExceeded => {
            eprintln!("error: iteration cap exceeded after {n} iterations");
            EXIT_CAP
        }
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, Failure> {
    if args.models.is_none() && args.random.is_none() {
        return Err(anyhow!("nothing to run: give --models and/or --random").into());
    }
    let fallback = match &args.prop {
        Some(p) => Some((parse_property(p).context("--prop")?, args.hide.clone())),
        None => None,
    };
    let mut cases: Vec<BenchCase> = match &args.models {
        Some(dir) => load_cases(dir, fallback.as_ref())?,
        None => Vec::new(),
    };
    if let Some((n, k)) = args.random {
        let config = RandomModelConfig {
            variables: k,
            ..Default::default()
        };
        cases.extend(seeded_cases(args.seed, n, &config));
    }
    match run_benchmark(&cases, &args.strategies) {
        Ok(rows) => {
            print!("{}", to_csv(&rows));
            Ok(0)
        }
        Err(e @ BenchError::Disagreement { .. }) => Err(Failure(EXIT_DISAGREEMENT, e.into())),
        Err(e) => Err(e.into()),
    }
}
