use super::{SolveOutcome, SolveReport};
use crate::amplify::qball_solve;
use crate::cnf::{Assignment, Formula, Literal};
use crate::error::{Error, Result};
use crate::gen::{derive_seed, random_assignment, rng};
use crate::pbs::{schoening_walk, PbsInstance};
use crate::resource::gamma0;

pub const BRUTE_FORCE_MAX_N: usize = 24;
/// Largest `n - m` the naive hybrid enumerates classically.
pub const NAIVE_MAX_ENUM: usize = 20;
const NAIVE_MAX_M: usize = 12;

/// Tries all `2^n` assignments in index order.
pub fn brute_force(f: &Formula) -> Result<SolveReport> {
    let n = f.num_vars();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::Budget(format!("brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")));
    }
    let mut report = SolveReport::new(SolveOutcome::Unsat);
    for v in 0u64..1 << n {
        let x = Assignment::from_index(v, n);
        report.stats.nodes += 1;
        let hit = f.first_unsatisfied(&x);
        report.stats.clause_evals += hit.map_or(f.num_clauses(), |j| j + 1) as u64;
        if hit.is_none() {
            report.outcome = SolveOutcome::Sat(x);
            break;
        }
    }
    Ok(report)
}

/// `tries` walks of `3n` steps, each from a fresh uniform start.
pub fn schoening_solve(f: &Formula, tries: usize, seed: u64) -> Result<SolveReport> {
    let n = f.num_vars();
    let mut g = rng(seed);
    let mut report = SolveReport::new(SolveOutcome::Unknown(format!("no witness after {tries} walks")));
    for i in 0..tries {
        let inst = PbsInstance::new(f.clone(), random_assignment(n, &mut g), n)?;
        let res = schoening_walk(&inst, derive_seed(seed, i as u64), None);
        report.pbs_calls += 1;
        report.stats.merge(&res.stats);
        report.stats.nodes += 1;
        if let Some(y) = res.outcome.witness() {
            report.outcome = SolveOutcome::Sat(y.clone());
            break;
        }
    }
    Ok(report)
}

/// Fixes variables `1..=n-m` in every way and decides each residual formula
/// on the last `m` variables with amplified QBall over the whole `m`-cube.
///
/// Every residual is visited, so the cost does not depend on where a
/// witness sits. `modeled_work` charges `2^{γ₀ m / 2}` per residual, the
/// amplified Schöning bound on an `m`-variable device.
pub fn naive_bottom_up(f: &Formula, m: usize, seed: u64) -> Result<SolveReport> {
    let n = f.num_vars();
    if m > n {
        return Err(Error::InvalidParam(format!("m={m} exceeds n={n}")));
    }
    if n - m > NAIVE_MAX_ENUM || m > NAIVE_MAX_M {
        return Err(Error::Budget(format!(
            "naive hybrid needs n-m <= {NAIVE_MAX_ENUM} and m <= {NAIVE_MAX_M}, got n={n} m={m}"
        )));
    }
    let k = n - m;
    let per = (gamma0() * m as f64 / 2.0).exp2();
    let mut report = SolveReport::new(SolveOutcome::Unsat);
    let mut work = 0.0;
    for v in 0u64..1 << k {
        let prefix = Assignment::from_index(v, k);
        let lits: Vec<Literal> = (1..=k).map(|i| Literal::new(i, !prefix.get(i))).collect();
        let residual = f.restrict_all(&lits);
        let mut bits = prefix.bits().to_vec();
        bits.resize(n, false);
        let inst = PbsInstance::new(residual, Assignment::from_bits(bits), m)?;
        let res = qball_solve(&inst, derive_seed(seed, v))?;
        report.centers_tried += 1;
        report.pbs_calls += 1;
        report.stats.merge(&res.stats);
        work += per;
        if let (Some(y), false) = (res.outcome.witness(), report.outcome.is_sat()) {
            report.outcome = SolveOutcome::Sat(y.clone());
        }
    }
    report.modeled_work = Some(work);
    Ok(report)
}
