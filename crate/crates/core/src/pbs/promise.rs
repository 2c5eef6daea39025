use super::{first_unsat, Outcome, PbsInstance, PbsResult, PbsStats, QuantumLeaf};
use crate::cnf::{Assignment, Formula};
use crate::error::Result;

/// Deterministic three-way branching: flip each variable of the first
/// falsified clause in turn and recurse on the restricted formula with
/// radius `r - 1`. Exact on `B_r(center)`.
pub fn promise_ball(inst: &PbsInstance) -> PbsResult {
    let mut stats = PbsStats::default();
    let found = promise_ball_with(
        &inst.formula,
        &inst.center,
        inst.radius,
        None,
        None,
        &mut stats,
    )
    .expect("classical search cannot fail");
    debug_assert!(stats.leaves <= 3u64.saturating_pow(inst.radius as u32));
    PbsResult {
        outcome: Outcome::from(found),
        stats,
    }
}

/// PromiseBall on `f` around `x`. `leaf` takes over once the radius drops
/// to its threshold. `within`, if given, drops witnesses farther than the
/// stated radius from the stated center and keeps searching.
pub fn promise_ball_with(
    f: &Formula,
    x: &Assignment,
    r: usize,
    mut leaf: Option<&mut dyn QuantumLeaf>,
    within: Option<(&Assignment, usize)>,
    stats: &mut PbsStats,
) -> Result<Option<Assignment>> {
    let mut x = x.clone();
    recurse(f, &mut x, r, &mut leaf, within, stats)
}

fn accept(y: Assignment, within: Option<(&Assignment, usize)>, stats: &mut PbsStats) -> Option<Assignment> {
    match within {
        Some((c, r)) if c.hamming(&y) > r => {
            stats.discarded += 1;
            None
        }
        _ => Some(y),
    }
}

fn recurse(
    f: &Formula,
    x: &mut Assignment,
    r: usize,
    leaf: &mut Option<&mut dyn QuantumLeaf>,
    within: Option<(&Assignment, usize)>,
    stats: &mut PbsStats,
) -> Result<Option<Assignment>> {
    if let Some(q) = leaf.as_deref_mut() {
        if r <= q.threshold() {
            stats.ball_switch_radii.push(r);
            let y = q.solve(f, x, r, within, stats)?;
            return Ok(y.and_then(|y| accept(y, within, stats)));
        }
    }
    stats.nodes += 1;
    let Some(j) = first_unsat(f, x, stats) else {
        stats.leaves += 1;
        return Ok(accept(x.clone(), within, stats));
    };
    if r == 0 || f.has_empty_clause() {
        stats.leaves += 1;
        return Ok(None);
    }
    let mut lits = f.clauses()[j].literals().to_vec();
    lits.sort_unstable_by_key(|l| l.var());
    for l in lits {
        let sub = f.restrict(l);
        x.flip(l.var());
        let found = recurse(&sub, x, r - 1, leaf, within, stats)?;
        x.flip(l.var());
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::ball_scan;
    use super::*;
    use crate::gen::{brute_force_sat, random_3sat, rng};

    #[test]
    fn four_clause_radii() {
        assert_eq!(promise_ball(&inst(four_clause(), "000", 1)).outcome, Outcome::NotFound);
        let r = promise_ball(&inst(four_clause(), "000", 2));
        let y = r.outcome.witness().unwrap().to_string();
        assert!(["011", "101", "110"].contains(&y.as_str()));
    }

    #[test]
    fn full_radius_matches_brute_force() {
        let mut g = rng(11);
        for _ in 0..40 {
            let f = random_3sat(10, 45, &mut g);
            let i = PbsInstance::new(f.clone(), Assignment::zeros(10), 10).unwrap();
            let r = promise_ball(&i);
            assert_eq!(r.outcome.is_found(), brute_force_sat(&f).is_some());
            if let Some(y) = r.outcome.witness() {
                assert!(f.is_satisfied_by(y));
            }
        }
    }

    #[test]
    fn agrees_with_ball_scan_and_stays_in_ball() {
        let mut g = rng(5);
        for i in 0..200 {
            let f = random_3sat(9, 30, &mut g);
            let c = crate::gen::random_assignment(9, &mut g);
            let inst = PbsInstance::new(f, c, i % 5).unwrap();
            let r = promise_ball(&inst);
            assert_eq!(r.outcome.is_found(), ball_scan(&inst).is_some());
            if let Some(y) = r.outcome.witness() {
                assert!(inst.contains(y) && inst.formula.is_satisfied_by(y));
            }
            assert!(r.stats.leaves <= 3u64.pow(inst.radius as u32));
        }
    }
}
