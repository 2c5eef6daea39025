//! End-to-end 3SAT drivers: brute force, Schöning, space splitting over a
//! binary cover with any PBS solver, and the naive bottom-up hybrid.

mod naive;
mod split;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula};
use crate::cover::Rho;
use crate::error::{Error, Result};
use crate::pbs::PbsStats;
use crate::resource::QubitModel;

pub use naive::{brute_force, naive_bottom_up, schoening_solve, BRUTE_FORCE_MAX_N, NAIVE_MAX_ENUM};
pub use split::{qfastball, space_split_solve, QFastBallRun, QBALL_MAX_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PbsKind {
    Schoening,
    PromiseBall,
    FastBall,
    QBall,
    QFastBall,
}

impl PbsKind {
    pub const ALL: [PbsKind; 5] = [
        PbsKind::Schoening,
        PbsKind::PromiseBall,
        PbsKind::FastBall,
        PbsKind::QBall,
        PbsKind::QFastBall,
    ];

    /// Whether a miss on every center proves unsatisfiability.
    pub fn is_exact(self) -> bool {
        self != PbsKind::Schoening
    }

    pub fn name(self) -> &'static str {
        match self {
            PbsKind::Schoening => "schoening",
            PbsKind::PromiseBall => "promise-ball",
            PbsKind::FastBall => "fast-ball",
            PbsKind::QBall => "qball",
            PbsKind::QFastBall => "qfast-ball",
        }
    }
}

impl fmt::Display for PbsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PbsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PbsKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParam(format!("unknown PBS solver {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyKind {
    BruteForce,
    /// Independent Schöning walks from random starts, `params.tries` of them.
    Schoening,
    SpaceSplit(PbsKind),
    /// Classical enumeration of `n - m` variables, QBall on the rest.
    NaiveBottomUp { m: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyParams {
    pub rho: Rho,
    /// Cover blocks.
    pub d: usize,
    /// FastBall code length.
    pub t: usize,
    /// Qubit budget for QFastBall; `None` never switches to QBall.
    pub qubits: Option<f64>,
    pub qubit_model: QubitModel,
    pub seed: u64,
    /// Walks per center for Schöning PBS.
    pub repetitions: usize,
    /// Walks for the plain Schöning strategy.
    pub tries: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            rho: Rho { num: 1, den: 4 },
            d: 1,
            t: 3,
            qubits: None,
            qubit_model: QubitModel::default(),
            seed: 0,
            repetitions: 64,
            tries: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub params: StrategyParams,
}

impl Strategy {
    pub fn new(kind: StrategyKind) -> Self {
        Strategy {
            kind,
            params: StrategyParams::default(),
        }
    }

    pub fn with_params(mut self, params: StrategyParams) -> Self {
        self.params = params;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let p = &self.params;
        match self.kind {
            StrategyKind::SpaceSplit(kind) => {
                if p.d == 0 || p.d > n.max(1) {
                    return Err(Error::InvalidParam(format!("need 1 <= d <= n, got d={}", p.d)));
                }
                if kind == PbsKind::Schoening && p.repetitions == 0 {
                    return Err(Error::InvalidParam("repetitions must be positive".into()));
                }
            }
            StrategyKind::Schoening if p.tries == 0 => {
                return Err(Error::InvalidParam("tries must be positive".into()));
            }
            StrategyKind::NaiveBottomUp { m } if m > n => {
                return Err(Error::InvalidParam(format!("m={m} exceeds n={n}")));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveOutcome {
    Sat(Assignment),
    Unsat,
    /// A randomized search ran out of budget.
    Unknown(String),
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            SolveOutcome::Sat(y) => Some(y),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    pub centers_tried: u64,
    pub pbs_calls: u64,
    /// Summed solver counters (leaves, clause evaluations, oracle queries, ...).
    pub stats: PbsStats,
    /// Cost under the naive hybrid's model, when that strategy ran.
    pub modeled_work: Option<f64>,
    /// QBall radius limit for QFastBall runs.
    pub r_tilde: Option<usize>,
    pub wall_time_s: f64,
}

impl SolveReport {
    fn new(outcome: SolveOutcome) -> Self {
        SolveReport {
            outcome,
            centers_tried: 0,
            pbs_calls: 0,
            stats: PbsStats::default(),
            modeled_work: None,
            r_tilde: None,
            wall_time_s: 0.0,
        }
    }

    /// Classical nodes plus oracle queries.
    pub fn total_work(&self) -> u64 {
        self.stats.total_work()
    }
}

/// Runs `strategy` on `f`. Every SAT witness is checked against `f`.
pub fn solve(f: &Formula, strategy: &Strategy) -> Result<SolveReport> {
    strategy.validate(f.num_vars())?;
    let start = Instant::now();
    let p = &strategy.params;
    let mut report = match strategy.kind {
        StrategyKind::BruteForce => brute_force(f)?,
        StrategyKind::Schoening => schoening_solve(f, p.tries, p.seed)?,
        StrategyKind::SpaceSplit(kind) => space_split_solve(f, kind, p)?,
        StrategyKind::NaiveBottomUp { m } => naive_bottom_up(f, m, p.seed)?,
    };
    if let Some(y) = report.outcome.witness() {
        if !f.is_satisfied_by(y) {
            return Err(Error::Build(format!("{:?} returned a non-satisfying witness", strategy.kind)));
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
