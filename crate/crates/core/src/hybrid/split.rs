use serde::{Deserialize, Serialize};

use super::{PbsKind, SolveOutcome, SolveReport, StrategyParams};
use crate::amplify::{qball_solve, QBallLeaf};
use crate::cnf::{Assignment, Formula};
use crate::cover::build_binary_cover;
use crate::error::{Error, Result};
use crate::gen::derive_seed;
use crate::pbs::{fast_ball, fast_ball_with, promise_ball, schoening_pbs, FastBallParams, PbsInstance, PbsResult};
use crate::resource::QubitModel;

/// Largest radius handed to the simulated QBall (`3^12` choice strings).
pub const QBALL_MAX_RADIUS: usize = 12;

/// Splits `{0,1}^n` into the balls of a binary cover and runs the chosen PBS
/// solver on each. `ρ >= 1` is the degenerate cover: one center, radius n.
pub fn space_split_solve(f: &Formula, kind: PbsKind, p: &StrategyParams) -> Result<SolveReport> {
    let n = f.num_vars();
    let (centers, radius) = if n == 0 || p.rho.num >= p.rho.den {
        (vec![Assignment::zeros(n)], n)
    } else {
        let cover = build_binary_cover(n, p.rho, p.d.min(n))?;
        let radius = cover.radius;
        (cover.centers, radius)
    };
    let fb = match kind {
        PbsKind::FastBall | PbsKind::QFastBall => Some(FastBallParams::new(p.t, 3)?),
        _ => None,
    };
    let mut report = SolveReport::new(SolveOutcome::Unsat);
    for (i, center) in centers.into_iter().enumerate() {
        let inst = PbsInstance::new(f.clone(), center, radius)?;
        let seed = derive_seed(p.seed, i as u64);
        let res: PbsResult = match kind {
            PbsKind::Schoening => schoening_pbs(&inst, seed, p.repetitions),
            PbsKind::PromiseBall => promise_ball(&inst),
            PbsKind::FastBall => fast_ball(&inst, fb.as_ref().unwrap())?,
            PbsKind::QBall => {
                if radius > QBALL_MAX_RADIUS {
                    return Err(Error::Budget(format!("QBall radius {radius} above {QBALL_MAX_RADIUS}")));
                }
                qball_solve(&inst, seed)?
            }
            PbsKind::QFastBall => {
                let run = qfastball(&inst, fb.as_ref().unwrap(), p.qubits.unwrap_or(0.0), &p.qubit_model, seed)?;
                report.r_tilde = Some(run.r_tilde);
                run.result
            }
        };
        report.centers_tried += 1;
        report.pbs_calls += 1;
        report.stats.merge(&res.stats);
        if let Some(y) = res.outcome.witness() {
            report.outcome = SolveOutcome::Sat(y.clone());
            return Ok(report);
        }
    }
    if !kind.is_exact() {
        report.outcome = SolveOutcome::Unknown(format!("{} walks per center", p.repetitions));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFastBallRun {
    pub result: PbsResult,
    /// Largest QBall radius fitting in the qubit budget.
    pub r_tilde: usize,
}

/// FastBall with amplified QBall taking over at radius `<= r̃(n, M)`, both
/// for covering-step children and inside the small-matching PromiseBall
/// calls. A budget too small for `r = 1` runs plain FastBall.
pub fn qfastball(
    inst: &PbsInstance,
    params: &FastBallParams,
    qubits: f64,
    qm: &QubitModel,
    seed: u64,
) -> Result<QFastBallRun> {
    let r_tilde = qm.r_tilde(inst.formula.num_vars(), qubits);
    let result = if r_tilde == 0 {
        log::info!("{qubits} qubits do not fit radius 1; running FastBall");
        fast_ball(inst, params)?
    } else {
        let mut leaf = QBallLeaf::new(r_tilde.min(QBALL_MAX_RADIUS), seed);
        fast_ball_with(inst, params, Some(&mut leaf))?
    };
    Ok(QFastBallRun { result, r_tilde })
}
