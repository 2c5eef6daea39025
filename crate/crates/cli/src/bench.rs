use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use hybridsat::amplify::qball_solve;
use hybridsat::cnf::Assignment;
use hybridsat::gen::derive_seed;
use hybridsat::hybrid::{qfastball, solve, PbsKind, SolveOutcome, StrategyKind};
use hybridsat::pbs::{fast_ball, promise_ball, schoening_pbs, FastBallParams, PbsInstance};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_kind, strategy_from, strategy_name, StrategyArgs};
use crate::solve::read_formula;

/// One manifest line. With `radius` set, a single PBS call on the ball
/// around `center` (default all zeros); otherwise a full solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub instance: PathBuf,
    pub strategy: String,
    #[serde(default)]
    pub radius: Option<usize>,
    #[serde(default)]
    pub center: Option<String>,
    #[serde(default)]
    pub qubits: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub rho: Option<String>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub t: Option<usize>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub repetitions: Option<usize>,
    #[serde(default)]
    pub tries: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub strategy: String,
    pub radius: Option<usize>,
    pub qubits: Option<f64>,
    pub seed: u64,
    pub result: String,
    pub nodes: u64,
    pub leaves: u64,
    pub clause_evals: u64,
    pub walk_steps: u64,
    pub oracle_queries: u64,
    pub quantum_calls: u64,
    pub total_work: u64,
    pub r_tilde: Option<usize>,
    pub wall_time_s: f64,
}

/// Growth of a counter per unit radius over a PBS sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fit {
    pub strategy: String,
    pub qubits: Option<f64>,
    pub counter: String,
    pub radii: usize,
    /// `exp` of the least-squares slope of `ln(mean counter)` against r.
    pub growth_per_r: f64,
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut e: ManifestEntry =
            serde_json::from_str(line).with_context(|| format!("{} line {}", path.display(), i + 1))?;
        if e.instance.is_relative() {
            e.instance = base.join(&e.instance);
        }
        out.push(e);
    }
    Ok(out)
}

fn run_entry(e: &ManifestEntry, seed: u64) -> Result<BenchRecord> {
    let f = read_formula(&e.instance)?;
    let defaults = StrategyArgs {
        strategy: e.strategy.clone(),
        rho: e.rho.clone().unwrap_or_else(|| "1/4".into()),
        d: e.d.unwrap_or(1),
        t: e.t.unwrap_or(3),
        qubits: e.qubits,
        m: e.m,
        repetitions: e.repetitions.unwrap_or(64),
        tries: e.tries.unwrap_or(1000),
    };
    let start = Instant::now();
    let (result, stats, r_tilde, name) = match e.radius {
        Some(r) => {
            let StrategyKind::SpaceSplit(kind) = parse_kind(&e.strategy, e.m)? else {
                bail!("strategy {} is not a PBS solver; drop `radius`", e.strategy);
            };
            let n = f.num_vars();
            let center = match &e.center {
                Some(c) => Assignment::parse(c)?,
                None => Assignment::zeros(n),
            };
            let inst = PbsInstance::new(f, center, r)?;
            let fb = FastBallParams::new(defaults.t, 3)?;
            let mut r_tilde = None;
            let res = match kind {
                PbsKind::Schoening => schoening_pbs(&inst, seed, defaults.repetitions),
                PbsKind::PromiseBall => promise_ball(&inst),
                PbsKind::FastBall => fast_ball(&inst, &fb)?,
                PbsKind::QBall => qball_solve(&inst, seed)?,
                PbsKind::QFastBall => {
                    let Some(m) = e.qubits else { bail!("qfast-ball needs `qubits`") };
                    let run = qfastball(&inst, &fb, m, &Default::default(), seed)?;
                    r_tilde = Some(run.r_tilde);
                    run.result
                }
            };
            let result = if res.outcome.is_found() { "FOUND" } else { "NOT_FOUND" };
            (result.to_string(), res.stats, r_tilde, strategy_name(StrategyKind::SpaceSplit(kind)))
        }
        None => {
            let s = strategy_from(&defaults, seed)?;
            let rep = solve(&f, &s)?;
            let result = match rep.outcome {
                SolveOutcome::Sat(_) => "SAT",
                SolveOutcome::Unsat => "UNSAT",
                SolveOutcome::Unknown(_) => "UNKNOWN",
            };
            (result.to_string(), rep.stats, rep.r_tilde, strategy_name(s.kind))
        }
    };
    Ok(BenchRecord {
        instance: e.instance.display().to_string(),
        strategy: name,
        radius: e.radius,
        qubits: e.qubits,
        seed,
        result,
        nodes: stats.nodes,
        leaves: stats.leaves,
        clause_evals: stats.clause_evals,
        walk_steps: stats.walk_steps,
        oracle_queries: stats.oracle_queries,
        quantum_calls: stats.quantum_calls,
        total_work: stats.total_work(),
        r_tilde,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs the manifest on `jobs` threads. Records come back in manifest order.
pub fn run(entries: &[ManifestEntry], seed: u64, jobs: usize) -> Result<Vec<BenchRecord>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, e)| {
                let s = e.seed.unwrap_or_else(|| derive_seed(seed, i as u64));
                run_entry(e, s).with_context(|| format!("manifest entry {}", i + 1))
            })
            .collect()
    })
}

fn growth(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

/// Per (strategy, qubits) group of PBS runs with at least two radii.
pub fn fits(records: &[BenchRecord]) -> Vec<Fit> {
    type Key = (String, Option<u64>);
    let mut groups: BTreeMap<Key, BTreeMap<usize, Vec<&BenchRecord>>> = BTreeMap::new();
    for r in records {
        if let Some(radius) = r.radius {
            groups
                .entry((r.strategy.clone(), r.qubits.map(f64::to_bits)))
                .or_default()
                .entry(radius)
                .or_default()
                .push(r);
        }
    }
    let mut out = Vec::new();
    for ((strategy, qubits), by_r) in groups {
        if by_r.len() < 2 {
            continue;
        }
        let counters: [(&str, fn(&BenchRecord) -> u64); 2] = [("leaves", |r| r.leaves), ("total_work", |r| r.total_work)];
        for (name, get) in counters {
            let pts: Vec<(f64, f64)> = by_r
                .iter()
                .map(|(&r, rs)| (r as f64, rs.iter().map(|x| get(x) as f64).sum::<f64>() / rs.len() as f64))
                .collect();
            if pts.iter().any(|p| p.1 <= 0.0) {
                continue;
            }
            out.push(Fit {
                strategy: strategy.clone(),
                qubits: qubits.map(f64::from_bits),
                counter: name.into(),
                radii: pts.len(),
                growth_per_r: growth(&pts),
            });
        }
    }
    out
}

pub fn write_records(out: &mut dyn Write, records: &[BenchRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "instance",
        "strategy",
        "radius",
        "qubits",
        "seed",
        "result",
        "nodes",
        "leaves",
        "clause_evals",
        "walk_steps",
        "oracle_queries",
        "quantum_calls",
        "total_work",
        "r_tilde",
        "wall_time_s",
    ])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_fits(out: &mut dyn Write, fits: &[Fit]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["strategy", "qubits", "counter", "radii", "growth_per_r"])?;
    for f in fits {
        w.serialize(f)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(strategy: &str, radius: usize, leaves: u64) -> BenchRecord {
        BenchRecord {
            instance: "x".into(),
            strategy: strategy.into(),
            radius: Some(radius),
            qubits: None,
            seed: 0,
            result: "NOT_FOUND".into(),
            nodes: leaves,
            leaves,
            clause_evals: 0,
            walk_steps: 0,
            oracle_queries: 0,
            quantum_calls: 0,
            total_work: leaves,
            r_tilde: None,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn fit_recovers_growth() {
        let recs: Vec<BenchRecord> = (1..=5).map(|r| rec("promise-ball", r, 3u64.pow(r as u32))).collect();
        let f = fits(&recs);
        assert_eq!(f.len(), 2);
        assert!((f[0].growth_per_r - 3.0).abs() < 1e-9);
        // a single radius gives no fit
        assert!(fits(&recs[..1]).is_empty());
    }

    #[test]
    fn header_only_for_no_records() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("instance,strategy,radius"));
    }
}
