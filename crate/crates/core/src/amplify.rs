//! Exact model of amplitude amplification over the choice register.
//!
//! The QBall oracle is classical-reversible, so Grover iterations stay in
//! the plane spanned by the uniform superpositions over marked and unmarked
//! choice strings. Counting the marked strings is enough to get the exact
//! success probability of every schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::reference::{choice_strings, flip_set, x_of};
use crate::circuit::QBallCircuit;
use crate::cnf::{Assignment, Formula, VariableSet};
use crate::error::{Error, Result};
use crate::gen::{derive_seed, rng};
use crate::pbs::{Outcome, PbsInstance, PbsResult, PbsStats, QuantumLeaf};

/// Largest `3^r` enumerated exhaustively.
pub const ENUM_BUDGET: u64 = 1_000_000;

/// Attempts before falling back to a classical scan of the choice strings.
pub const RETRY_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedCount {
    pub total: u64,
    pub marked: u64,
}

impl MarkedCount {
    pub fn new(total: u64, marked: u64) -> Result<Self> {
        if total == 0 || marked > total {
            return Err(Error::InvalidParam(format!("need 0 <= m <= N, N > 0; got m={marked}, N={total}")));
        }
        Ok(MarkedCount { total, marked })
    }

    /// `asin(sqrt(m/N))`.
    pub fn theta(&self) -> f64 {
        (self.marked as f64 / self.total as f64).sqrt().asin()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum MarkMode {
    /// The non-reversible reference computation of `V(s)`.
    #[default]
    Reference,
    /// The reversible QBall₁/QBall₂ programs on the simulator.
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplificationPlan {
    pub iterations: u64,
    pub success_prob: f64,
    /// `2k + 1` evaluations of QBall₁∘QBall₂.
    pub oracle_queries: u64,
}

/// Flip sets `V(s)` of every choice string with their marks, for a formula
/// already subsumed into the all-zero center.
fn leaves(f: &Formula, r: usize, mode: MarkMode) -> Result<Vec<(VariableSet, bool)>> {
    let total = 3u64
        .checked_pow(r as u32)
        .filter(|&t| t <= ENUM_BUDGET)
        .ok_or_else(|| Error::Budget(format!("3^{r} choice strings exceed {ENUM_BUDGET}")))?;
    let n = f.num_vars();
    let mut out = Vec::with_capacity(total as usize);
    match mode {
        // r = 0 has no choices to compute; both modes reduce to evaluating F at the center.
        MarkMode::Reference | MarkMode::Circuit if r == 0 => {
            out.push((VariableSet::empty(), f.is_satisfied_by(&Assignment::zeros(n))));
        }
        MarkMode::Reference => {
            for s in choice_strings(r) {
                let v = flip_set(f, &s);
                let sat = f.is_satisfied_by(&x_of(&v, n));
                out.push((v, sat));
            }
        }
        MarkMode::Circuit => {
            let q = QBallCircuit::build(f, r)?;
            for s in choice_strings(r) {
                let run = q.run_choice(&s, false)?;
                out.push((run.v, run.satisfied));
            }
        }
    }
    Ok(out)
}

/// Counts the choice strings whose flip set satisfies `f`. `f` must already
/// be subsumed into the all-zero center.
pub fn enumerate_marked(f: &Formula, r: usize, mode: MarkMode) -> Result<MarkedCount> {
    let all = leaves(f, r, mode)?;
    MarkedCount::new(all.len() as u64, all.iter().filter(|l| l.1).count() as u64)
}

/// Success probability after `k` Grover iterations.
pub fn grover_success(mc: MarkedCount, k: u64) -> f64 {
    if mc.marked == 0 {
        return 0.0;
    }
    if mc.marked == mc.total {
        // every iteration maps the uniform state to itself up to sign
        return 1.0;
    }
    ((2 * k + 1) as f64 * mc.theta()).sin().powi(2)
}

/// The same quantity by iterating the two reflections on the
/// (marked, unmarked) amplitude pair.
pub fn rotation_success(mc: MarkedCount, k: u64) -> f64 {
    let p = mc.marked as f64 / mc.total as f64;
    let (a0, b0) = (p.sqrt(), (1.0 - p).sqrt());
    let (mut a, mut b) = (a0, b0);
    for _ in 0..k {
        // oracle: phase flip on marked
        a = -a;
        // diffusion: 2|u><u| - I about the uniform state (a0, b0)
        let dot = a * a0 + b * b0;
        a = 2.0 * dot * a0 - a;
        b = 2.0 * dot * b0 - b;
    }
    a * a
}

/// `k = floor(pi / (4 theta))`; `None` when nothing is marked.
pub fn optimal_iterations(mc: MarkedCount) -> Option<AmplificationPlan> {
    if mc.marked == 0 {
        return None;
    }
    let k = (std::f64::consts::FRAC_PI_4 / mc.theta()).floor() as u64;
    Some(AmplificationPlan {
        iterations: k,
        success_prob: grover_success(mc, k),
        oracle_queries: 2 * k + 1,
    })
}

/// Simulated QBall search of `B_r(center)`: counts the marked choice
/// strings exactly, then samples measurements at the optimal schedule until
/// one succeeds. Oracle queries are recorded in the stats. With nothing
/// marked, one full single-solution schedule is charged and `NotFound`
/// returned.
pub fn qball_solve(inst: &PbsInstance, rng_seed: u64) -> Result<PbsResult> {
    qball_solve_with(inst, rng_seed, MarkMode::Reference)
}

pub fn qball_solve_with(inst: &PbsInstance, rng_seed: u64, mode: MarkMode) -> Result<PbsResult> {
    qball_solve_within(inst, rng_seed, mode, None)
}

/// As [`qball_solve_with`], with the oracle also requiring the assignment to
/// lie within distance `d` of `c` when `within = Some((c, d))`.
pub fn qball_solve_within(
    inst: &PbsInstance,
    rng_seed: u64,
    mode: MarkMode,
    within: Option<(&Assignment, usize)>,
) -> Result<PbsResult> {
    let f = inst.formula.subsume_center(&inst.center)?;
    let (n, r) = (f.num_vars(), inst.radius);
    let all = leaves(&f, r, mode)?;
    let inside = |v: &VariableSet| within.map_or(true, |(c, d)| c.hamming(&inst.center.xor(&x_of(v, n))) <= d);
    let marked: Vec<&VariableSet> = all.iter().filter(|l| l.1 && inside(&l.0)).map(|l| &l.0).collect();
    let mc = MarkedCount::new(all.len() as u64, marked.len() as u64)?;
    let mut stats = PbsStats {
        quantum_calls: 1,
        ..PbsStats::default()
    };
    let Some(plan) = optimal_iterations(mc) else {
        // the device cannot know m = 0; it pays for the schedule that would
        // have found a single marked string
        let one = MarkedCount::new(mc.total, 1)?;
        stats.oracle_queries = optimal_iterations(one).map_or(1, |p| p.oracle_queries);
        return Ok(PbsResult {
            outcome: Outcome::NotFound,
            stats,
        });
    };
    let mut g = rng(rng_seed);
    let mut pick = None;
    for _ in 0..RETRY_CAP {
        stats.oracle_queries += plan.oracle_queries;
        if g.gen::<f64>() < plan.success_prob {
            pick = Some(marked[g.gen_range(0..marked.len())]);
            break;
        }
    }
    let v = match pick {
        Some(v) => v,
        None => {
            stats.oracle_queries += mc.total;
            marked[0]
        }
    };
    let y = inst.center.xor(&x_of(v, n));
    debug_assert!(inst.formula.is_satisfied_by(&y) && inst.contains(&y));
    debug_assert!(within.map_or(true, |(c, d)| c.hamming(&y) <= d));
    Ok(PbsResult {
        outcome: Outcome::Found(y),
        stats,
    })
}

/// Amplified QBall as the leaf solver below radius `threshold`.
#[derive(Debug, Clone)]
pub struct QBallLeaf {
    pub threshold: usize,
    pub mode: MarkMode,
    seed: u64,
    calls: u64,
}

impl QBallLeaf {
    pub fn new(threshold: usize, seed: u64) -> Self {
        QBallLeaf {
            threshold,
            mode: MarkMode::Reference,
            seed,
            calls: 0,
        }
    }

    pub fn with_mode(mut self, mode: MarkMode) -> Self {
        self.mode = mode;
        self
    }
}

impl QuantumLeaf for QBallLeaf {
    fn threshold(&self) -> usize {
        self.threshold
    }

    fn solve(
        &mut self,
        f: &Formula,
        center: &Assignment,
        r: usize,
        within: Option<(&Assignment, usize)>,
        stats: &mut PbsStats,
    ) -> Result<Option<Assignment>> {
        let inst = PbsInstance::new(f.clone(), center.clone(), r.min(f.num_vars()))?;
        let seed = derive_seed(self.seed, self.calls);
        self.calls += 1;
        let res = qball_solve_within(&inst, seed, self.mode, within)?;
        stats.merge(&res.stats);
        Ok(res.outcome.witness().cloned())
    }
}
