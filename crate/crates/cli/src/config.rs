use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use hybridsat::cover::Rho;
use hybridsat::hybrid::{PbsKind, Strategy, StrategyKind, StrategyParams};

/// Version of the JSON records written by every subcommand.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Strategy flags shared by `solve` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct StrategyArgs {
    /// brute, schoening, naive, or a PBS solver run over a cover:
    /// promise-ball, fast-ball, qball, qfast-ball, schoening-pbs
    #[arg(long, default_value = "fast-ball")]
    pub strategy: String,
    /// Ball fraction of the cover, `a/b` or decimal
    #[arg(long, default_value = "1/4")]
    pub rho: String,
    /// Cover blocks
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// FastBall code length
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    /// Qubit budget M (required for qfast-ball)
    #[arg(long)]
    pub qubits: Option<f64>,
    /// Variables left to the quantum sub-solver (naive)
    #[arg(long)]
    pub m: Option<usize>,
    /// Walks per center for schoening-pbs
    #[arg(long, default_value_t = 64)]
    pub repetitions: usize,
    /// Walks for the plain schoening strategy
    #[arg(long, default_value_t = 1000)]
    pub tries: usize,
}

/// Everything a run needs, checked for consistency.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub instances: Vec<PathBuf>,
    pub strategy: Strategy,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(instances: Vec<PathBuf>, args: &StrategyArgs, seed: u64, output: Option<PathBuf>, format: Format) -> Result<Self> {
        Ok(RunConfig {
            instances,
            strategy: strategy_from(args, seed)?,
            output,
            format,
        })
    }
}

fn normalize(s: &str) -> String {
    s.to_ascii_lowercase().replace(['-', '_'], "")
}

pub fn parse_kind(name: &str, m: Option<usize>) -> Result<StrategyKind> {
    let pbs = |k| Ok(StrategyKind::SpaceSplit(k));
    match normalize(name).as_str() {
        "brute" | "bruteforce" => Ok(StrategyKind::BruteForce),
        "schoening" | "schoning" => Ok(StrategyKind::Schoening),
        "naive" | "naivebottomup" => match m {
            Some(m) => Ok(StrategyKind::NaiveBottomUp { m }),
            None => bail!("strategy naive needs --m"),
        },
        "schoeningpbs" => pbs(PbsKind::Schoening),
        "promiseball" => pbs(PbsKind::PromiseBall),
        "fastball" => pbs(PbsKind::FastBall),
        "qball" => pbs(PbsKind::QBall),
        "qfastball" => pbs(PbsKind::QFastBall),
        other => bail!("unknown strategy {other:?}"),
    }
}

pub fn strategy_from(args: &StrategyArgs, seed: u64) -> Result<Strategy> {
    let kind = parse_kind(&args.strategy, args.m)?;
    if kind == StrategyKind::SpaceSplit(PbsKind::QFastBall) && args.qubits.is_none() {
        bail!("qfast-ball needs a qubit budget (--qubits)");
    }
    let rho: Rho = args.rho.parse().with_context(|| format!("--rho {}", args.rho))?;
    let params = StrategyParams {
        rho,
        d: args.d,
        t: args.t,
        qubits: args.qubits,
        seed,
        repetitions: args.repetitions,
        tries: args.tries,
        ..StrategyParams::default()
    };
    Ok(Strategy::new(kind).with_params(params))
}

pub fn strategy_name(kind: StrategyKind) -> String {
    match kind {
        StrategyKind::BruteForce => "brute".into(),
        StrategyKind::Schoening => "schoening".into(),
        StrategyKind::SpaceSplit(PbsKind::Schoening) => "schoening-pbs".into(),
        StrategyKind::SpaceSplit(k) => k.name().into(),
        StrategyKind::NaiveBottomUp { m } => format!("naive(m={m})"),
    }
}
