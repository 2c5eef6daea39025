use rand::Rng;

use super::{first_unsat, Outcome, PbsInstance, PbsResult, PbsStats};
use crate::gen::{derive_seed, rng};

/// One random walk from the center: repeatedly flip a uniformly random
/// variable of the first falsified clause. `max_steps = None` means `3n`.
/// A satisfying assignment is reported only if it lies inside the ball.
pub fn schoening_walk(inst: &PbsInstance, rng_seed: u64, max_steps: Option<usize>) -> PbsResult {
    let mut stats = PbsStats::default();
    let steps = max_steps.unwrap_or(3 * inst.formula.num_vars());
    let mut rng = rng(rng_seed);
    let mut x = inst.center.clone();
    let mut outcome = Outcome::NotFound;
    for step in 0..=steps {
        match first_unsat(&inst.formula, &x, &mut stats) {
            None => {
                if inst.contains(&x) {
                    outcome = Outcome::Found(x);
                }
                break;
            }
            Some(j) if step < steps => {
                let lits = inst.formula.clauses()[j].literals();
                if lits.is_empty() {
                    break;
                }
                x.flip(lits[rng.gen_range(0..lits.len())].var());
                stats.walk_steps += 1;
            }
            Some(_) => {}
        }
    }
    PbsResult { outcome, stats }
}

/// Repeats [`schoening_walk`] with seeds derived from `rng_seed`.
pub fn schoening_pbs(inst: &PbsInstance, rng_seed: u64, repetitions: usize) -> PbsResult {
    let mut stats = PbsStats::default();
    for rep in 0..repetitions.max(1) {
        let res = schoening_walk(inst, derive_seed(rng_seed, rep as u64), None);
        stats.merge(&res.stats);
        stats.nodes += 1;
        if res.outcome.is_found() {
            return PbsResult {
                outcome: res.outcome,
                stats,
            };
        }
    }
    PbsResult {
        outcome: Outcome::NotFound,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::cnf::Formula;

    #[test]
    fn satisfied_center_takes_no_steps() {
        let r = schoening_walk(&inst(four_clause(), "111", 0), 1, None);
        assert_eq!(r.outcome.witness().unwrap().to_string(), "111");
        assert_eq!(r.stats.walk_steps, 0);
    }

    #[test]
    fn unit_clause_always_found() {
        let f = Formula::from_lits(1, &[&[1]]).unwrap();
        let hits = (0..1000)
            .filter(|&s| schoening_walk(&inst(f.clone(), "0", 1), s, None).outcome.is_found())
            .count();
        assert_eq!(hits, 1000);
    }

    #[test]
    fn unsat_never_found() {
        let f = Formula::from_lits(1, &[&[1], &[-1]]).unwrap();
        let r = schoening_pbs(&inst(f, "0", 1), 3, 50);
        assert_eq!(r.outcome, Outcome::NotFound);
    }

    #[test]
    fn radius_zero() {
        assert!(schoening_pbs(&inst(four_clause(), "011", 0), 0, 1).outcome.is_found());
        assert!(!schoening_pbs(&inst(four_clause(), "000", 0), 0, 5).outcome.is_found());
    }

    #[test]
    fn deterministic_given_seed() {
        let i = inst(four_clause(), "000", 2);
        assert_eq!(schoening_walk(&i, 9, None), schoening_walk(&i, 9, None));
    }
}
