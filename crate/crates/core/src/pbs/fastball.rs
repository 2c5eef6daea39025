use serde::{Deserialize, Serialize};

use super::promise::promise_ball_with;
use super::{first_unsat, Outcome, PbsInstance, PbsResult, PbsStats, QuantumLeaf};
use crate::cnf::{Assignment, Formula, Literal};
use crate::cover::{build_choice_cover, ChoiceCode};
use crate::error::{Error, Result};
use crate::resource::fastball_delta;

/// How witnesses found deep in the recursion are treated.
///
/// The covering step moves the center by up to `t` flips while charging
/// only `Δ`, and the small-matching case fixes clause variables without
/// charging them, so a witness can lie outside the requested ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BallPolicy {
    /// Drop witnesses outside the requested ball and keep searching. The
    /// solver then decides exactly whether the ball holds a solution.
    #[default]
    Strict,
    /// Return the first satisfying assignment reached, wherever it lies.
    /// Complete for the ball; a witness may overshoot it.
    Promise,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastBallParams {
    pub t: usize,
    pub k: usize,
    pub delta: usize,
    pub code: ChoiceCode,
    pub policy: BallPolicy,
}

impl FastBallParams {
    pub fn new(t: usize, k: usize) -> Result<Self> {
        let delta = fastball_delta(t, k);
        if delta < 1 {
            return Err(Error::InvalidParam(format!("t={t}, k={k} gives Δ < 1")));
        }
        Ok(FastBallParams {
            t,
            k,
            delta,
            code: build_choice_cover(k, t)?,
            policy: BallPolicy::Strict,
        })
    }

    pub fn with_policy(mut self, policy: BallPolicy) -> Self {
        self.policy = policy;
        self
    }
}

pub fn fast_ball(inst: &PbsInstance, params: &FastBallParams) -> Result<PbsResult> {
    fast_ball_with(inst, params, None)
}

/// FastBall with an optional quantum solver substituted at radius
/// `≤ leaf.threshold()`, both for covering-step children and inside the
/// small-matching PromiseBall calls.
pub fn fast_ball_with(
    inst: &PbsInstance,
    params: &FastBallParams,
    mut leaf: Option<&mut dyn QuantumLeaf>,
) -> Result<PbsResult> {
    if let Some(w) = inst.formula.clauses().iter().map(|c| c.len()).find(|&w| w > params.k) {
        return Err(Error::ClauseTooWide {
            width: w,
            max: params.k,
        });
    }
    let mut stats = PbsStats::default();
    let within = match params.policy {
        BallPolicy::Strict => Some((&inst.center, inst.radius)),
        BallPolicy::Promise => None,
    };
    let found = match leaf.as_deref_mut() {
        Some(q) if inst.radius <= q.threshold() => q.solve(&inst.formula, &inst.center, inst.radius, within, &mut stats)?,
        _ => {
            let mut ctx = Ctx {
                f: &inst.formula,
                params,
                leaf,
                within,
                stats: &mut stats,
            };
            ctx.recurse(inst.center.clone(), inst.radius)?
        }
    };
    if let Some(y) = &found {
        debug_assert!(inst.formula.is_satisfied_by(y));
        stats.overshoot = !inst.contains(y);
    }
    Ok(PbsResult {
        outcome: Outcome::from(found),
        stats,
    })
}

struct Ctx<'a, 'q> {
    f: &'a Formula,
    params: &'a FastBallParams,
    leaf: Option<&'q mut dyn QuantumLeaf>,
    within: Option<(&'a Assignment, usize)>,
    stats: &'a mut PbsStats,
}

impl Ctx<'_, '_> {
    fn accept(&mut self, y: Assignment) -> Option<Assignment> {
        match self.within {
            Some((c, r)) if c.hamming(&y) > r => {
                self.stats.discarded += 1;
                None
            }
            _ => Some(y),
        }
    }

    /// Greedy maximal set of pairwise variable-disjoint width-`k` clauses
    /// falsified by `x`, in clause order.
    fn disjoint_unsat(&mut self, x: &Assignment) -> Vec<usize> {
        let k = self.params.k;
        let mut used: Vec<usize> = Vec::new();
        let mut picked = Vec::new();
        for (j, c) in self.f.clauses().iter().enumerate() {
            if c.len() != k {
                continue;
            }
            self.stats.clause_evals += 1;
            if c.is_satisfied_by(x.bits()) {
                continue;
            }
            if c.literals().iter().any(|l| used.contains(&l.var())) {
                continue;
            }
            used.extend(c.literals().iter().map(|l| l.var()));
            picked.push(j);
        }
        picked
    }

    fn recurse(&mut self, x: Assignment, r: usize) -> Result<Option<Assignment>> {
        self.stats.nodes += 1;
        if first_unsat(self.f, &x, self.stats).is_none() {
            self.stats.leaves += 1;
            return Ok(self.accept(x));
        }
        if r == 0 {
            self.stats.leaves += 1;
            return Ok(None);
        }
        let g = self.disjoint_unsat(&x);
        if g.len() < self.params.t {
            self.small_matching(&g, x, r)
        } else {
            self.cover_step(&g[..self.params.t], x, r)
        }
    }

    /// Every assignment of the matched clauses' variables, each followed by
    /// PromiseBall with the unchanged radius.
    fn small_matching(&mut self, g: &[usize], x: Assignment, r: usize) -> Result<Option<Assignment>> {
        let mut vars: Vec<usize> = g
            .iter()
            .flat_map(|&j| self.f.clauses()[j].literals().iter().map(|l| l.var()))
            .collect();
        vars.sort_unstable();
        for beta in 0u64..1 << vars.len() {
            let mut xb = x.clone();
            let lits: Vec<Literal> = vars
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let val = (beta >> i) & 1 == 1;
                    xb.set(v, val);
                    Literal::new(v, !val)
                })
                .collect();
            let fb = self.f.restrict_all(&lits);
            assert!(
                !fb.clauses()
                    .iter()
                    .any(|c| c.len() == self.params.k && !c.is_satisfied_by(xb.bits())),
                "falsified width-k clause survived the matching restriction"
            );
            let leaf: Option<&mut dyn QuantumLeaf> = match &mut self.leaf {
                Some(q) => Some(&mut **q),
                None => None,
            };
            let found = promise_ball_with(&fb, &xb, r, leaf, self.within, self.stats)?;
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// For each code word, flip the chosen variable of each clause in `h`
    /// and recurse with radius `r - Δ`.
    fn cover_step(&mut self, h: &[usize], x: Assignment, r: usize) -> Result<Option<Assignment>> {
        let sub_r = r.saturating_sub(self.params.delta);
        let choices: Vec<Vec<usize>> = h.iter().map(|&j| self.f.clauses()[j].sorted_vars()).collect();
        for w in &self.params.code.words {
            let mut xw = x.clone();
            for (vars, &wi) in choices.iter().zip(w) {
                xw.flip(vars[wi as usize - 1]);
            }
            let found = match self.leaf.as_deref_mut() {
                Some(q) if sub_r <= q.threshold() => {
                    self.stats.code_switch_radii.push(sub_r);
                    let y = q.solve(self.f, &xw, sub_r, self.within, self.stats)?;
                    y.and_then(|y| self.accept(y))
                }
                _ => self.recurse(xw, sub_r)?,
            };
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{ball_scan, promise_ball};
    use super::*;
    use crate::gen::{planted_3sat, random_3sat, random_assignment, rng};

    fn params() -> FastBallParams {
        FastBallParams::new(3, 3).unwrap()
    }

    #[test]
    fn base_cases() {
        let r = fast_ball(&inst(four_clause(), "111", 0), &params()).unwrap();
        assert_eq!(r.outcome.witness().unwrap().to_string(), "111");
        assert_eq!(r.stats.nodes, 1);
        let r = fast_ball(&inst(four_clause(), "000", 0), &params()).unwrap();
        assert_eq!(r.outcome, Outcome::NotFound);
    }

    #[test]
    fn params_validation() {
        let p = params();
        assert_eq!(p.delta, 1);
        assert_eq!(p.code.radius, 1);
        assert!(FastBallParams::new(2, 2).is_err());
        let wide = Formula::from_lits(4, &[&[1, 2, 3, 4]]).unwrap();
        let i = PbsInstance::new(wide, Assignment::zeros(4), 1).unwrap();
        assert!(matches!(fast_ball(&i, &p), Err(Error::ClauseTooWide { .. })));
    }

    #[test]
    fn strict_agrees_with_ball_scan() {
        let p = params();
        let mut g = rng(21);
        for i in 0..200 {
            let n = 8 + i % 5;
            let (f, center, r) = if i % 2 == 0 {
                let f = random_3sat(n, 4 * n, &mut g);
                (f, random_assignment(n, &mut g), i % 5)
            } else {
                let (f, plant) = planted_3sat(n, 4 * n, &mut g);
                let mut c = plant.clone();
                for v in 1..=(i % 5) {
                    c.flip(v);
                }
                (f, c, i % 5)
            };
            let inst = PbsInstance::new(f, center, r).unwrap();
            let res = fast_ball(&inst, &p).unwrap();
            assert_eq!(res.outcome.is_found(), ball_scan(&inst).is_some(), "instance {i}");
            if let Some(y) = res.outcome.witness() {
                assert!(inst.contains(y) && inst.formula.is_satisfied_by(y));
            }
        }
    }

    #[test]
    fn promise_mode_is_complete_and_sound() {
        let p = params().with_policy(BallPolicy::Promise);
        let mut g = rng(8);
        for i in 0..150 {
            let f = random_3sat(10, 40, &mut g);
            let inst = PbsInstance::new(f, random_assignment(10, &mut g), i % 5).unwrap();
            let res = fast_ball(&inst, &p).unwrap();
            if ball_scan(&inst).is_some() {
                assert!(res.outcome.is_found());
            }
            if let Some(y) = res.outcome.witness() {
                assert!(inst.formula.is_satisfied_by(y));
                assert_eq!(res.stats.overshoot, !inst.contains(y));
            }
        }
    }

    #[test]
    fn agrees_with_promise_ball_on_four_clause() {
        for r in 0..=3 {
            let i = inst(four_clause(), "000", r);
            assert_eq!(
                fast_ball(&i, &params()).unwrap().outcome.is_found(),
                promise_ball(&i).outcome.is_found()
            );
        }
    }
}
