//! Promise-Ball-SAT: find a satisfying assignment within Hamming distance
//! `r` of a center. Solvers here are classical; [`QuantumLeaf`] lets a
//! caller substitute a quantum ball solver below some radius.

mod fastball;
mod promise;
mod schoening;

use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula};
use crate::error::{Error, Result};

pub use fastball::{fast_ball, fast_ball_with, BallPolicy, FastBallParams};
pub use promise::{promise_ball, promise_ball_with};
pub use schoening::{schoening_pbs, schoening_walk};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PbsInstance {
    pub formula: Formula,
    pub center: Assignment,
    pub radius: usize,
}

impl PbsInstance {
    pub fn new(formula: Formula, center: Assignment, radius: usize) -> Result<Self> {
        if center.len() != formula.num_vars() {
            return Err(Error::LengthMismatch {
                expected: formula.num_vars(),
                got: center.len(),
            });
        }
        if radius > formula.num_vars() {
            return Err(Error::InvalidParam(format!(
                "radius {radius} exceeds n = {}",
                formula.num_vars()
            )));
        }
        Ok(PbsInstance {
            formula,
            center,
            radius,
        })
    }

    pub fn contains(&self, y: &Assignment) -> bool {
        self.center.hamming(y) <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Found(Assignment),
    NotFound,
}

impl Outcome {
    pub fn is_found(&self) -> bool {
        matches!(self, Outcome::Found(_))
    }

    pub fn witness(&self) -> Option<&Assignment> {
        match self {
            Outcome::Found(y) => Some(y),
            Outcome::NotFound => None,
        }
    }
}

impl From<Option<Assignment>> for Outcome {
    fn from(o: Option<Assignment>) -> Self {
        o.map_or(Outcome::NotFound, Outcome::Found)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PbsStats {
    /// Classical recursion nodes (calls).
    pub nodes: u64,
    /// Classical nodes that did not branch.
    pub leaves: u64,
    pub clause_evals: u64,
    pub walk_steps: u64,
    /// Quantum oracle queries (QBall₁∘QBall₂ evaluations).
    pub oracle_queries: u64,
    pub quantum_calls: u64,
    /// Witnesses outside the top-level ball dropped under [`BallPolicy::Strict`].
    pub discarded: u64,
    /// Set when a promise-mode witness lies outside the requested ball.
    pub overshoot: bool,
    /// Radii handed to the quantum solver from FastBall's covering step.
    pub code_switch_radii: Vec<usize>,
    /// Radii handed to the quantum solver from inside PromiseBall.
    pub ball_switch_radii: Vec<usize>,
}

impl PbsStats {
    pub fn merge(&mut self, o: &PbsStats) {
        self.nodes += o.nodes;
        self.leaves += o.leaves;
        self.clause_evals += o.clause_evals;
        self.walk_steps += o.walk_steps;
        self.oracle_queries += o.oracle_queries;
        self.quantum_calls += o.quantum_calls;
        self.discarded += o.discarded;
        self.overshoot |= o.overshoot;
        self.code_switch_radii.extend_from_slice(&o.code_switch_radii);
        self.ball_switch_radii.extend_from_slice(&o.ball_switch_radii);
    }

    /// Classical nodes plus quantum queries, the unit used to compare solvers.
    pub fn total_work(&self) -> u64 {
        self.nodes + self.oracle_queries
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PbsResult {
    pub outcome: Outcome,
    pub stats: PbsStats,
}

/// A ball solver used below a radius threshold, e.g. amplified QBall.
pub trait QuantumLeaf {
    /// Largest radius handed to [`QuantumLeaf::solve`].
    fn threshold(&self) -> usize;

    /// Searches `B_r(center)` for a satisfying assignment of `f`. With
    /// `within = Some((c, d))` only assignments at distance `<= d` from `c`
    /// count as solutions.
    fn solve(
        &mut self,
        f: &Formula,
        center: &Assignment,
        r: usize,
        within: Option<(&Assignment, usize)>,
        stats: &mut PbsStats,
    ) -> Result<Option<Assignment>>;
}

/// First clause falsified by `x`, charging one evaluation per clause looked at.
pub(crate) fn first_unsat(f: &Formula, x: &Assignment, stats: &mut PbsStats) -> Option<usize> {
    let found = f.first_unsatisfied(x);
    stats.clause_evals += found.map_or(f.num_clauses(), |j| j + 1) as u64;
    found
}

/// Ground truth: a satisfying assignment in `B_r(center)` of minimum
/// distance (ties by lexicographic flip set), by exhaustive enumeration.
pub fn ball_scan(inst: &PbsInstance) -> Option<Assignment> {
    let n = inst.formula.num_vars();
    let mut x = inst.center.clone();
    for size in 0..=inst.radius.min(n) {
        let mut idx: Vec<usize> = (1..=size).collect();
        loop {
            for &v in &idx {
                x.flip(v);
            }
            let ok = inst.formula.is_satisfied_by(&x);
            let hit = ok.then(|| x.clone());
            for &v in &idx {
                x.flip(v);
            }
            if hit.is_some() {
                return hit;
            }
            // next combination of `size` elements from 1..=n
            let mut i = size;
            while i > 0 && idx[i - 1] == n - size + i {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for m in i..size {
                idx[m] = idx[m - 1] + 1;
            }
        }
    }
    None
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// The four-clause formula satisfied exactly by 011, 101, 110 and 111.
    pub fn four_clause() -> Formula {
        Formula::from_lits(3, &[&[1, 2, 3], &[-1, 2, 3], &[1, -2, 3], &[1, 2, -3]]).unwrap()
    }

    pub fn inst(f: Formula, center: &str, r: usize) -> PbsInstance {
        PbsInstance::new(f, Assignment::parse(center).unwrap(), r).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn ball_scan_examples() {
        assert_eq!(ball_scan(&inst(four_clause(), "000", 1)), None);
        let y = ball_scan(&inst(four_clause(), "000", 2)).unwrap();
        assert_eq!(y.to_string(), "110");
        let y = ball_scan(&inst(four_clause(), "111", 0)).unwrap();
        assert_eq!(y.to_string(), "111");
    }

    #[test]
    fn instance_validation() {
        let f = four_clause();
        assert!(PbsInstance::new(f.clone(), Assignment::zeros(2), 1).is_err());
        assert!(PbsInstance::new(f, Assignment::zeros(3), 4).is_err());
    }
}
