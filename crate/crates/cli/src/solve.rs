use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use hybridsat::cnf::{parse_dimacs, Formula};
use hybridsat::hybrid::{solve, SolveOutcome, SolveReport, Strategy};
use serde::{Deserialize, Serialize};

use crate::config::{strategy_name, Format, RunConfig, SCHEMA_VERSION};

/// One solver run, flattened for JSON lines and CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub schema_version: u32,
    pub instance: String,
    pub strategy: String,
    pub seed: u64,
    pub n: usize,
    pub clauses: usize,
    /// SAT, UNSAT or UNKNOWN
    pub result: String,
    pub witness: Option<String>,
    pub centers_tried: u64,
    pub pbs_calls: u64,
    pub nodes: u64,
    pub leaves: u64,
    pub clause_evals: u64,
    pub walk_steps: u64,
    pub oracle_queries: u64,
    pub quantum_calls: u64,
    pub discarded: u64,
    pub total_work: u64,
    pub modeled_work: Option<f64>,
    pub r_tilde: Option<usize>,
    pub wall_time_s: f64,
}

impl SolveRecord {
    pub fn new(instance: &str, f: &Formula, strategy: &Strategy, r: &SolveReport) -> Self {
        let (result, witness) = match &r.outcome {
            SolveOutcome::Sat(y) => ("SAT", Some(y.to_string())),
            SolveOutcome::Unsat => ("UNSAT", None),
            SolveOutcome::Unknown(_) => ("UNKNOWN", None),
        };
        SolveRecord {
            schema_version: SCHEMA_VERSION,
            instance: instance.to_string(),
            strategy: strategy_name(strategy.kind),
            seed: strategy.params.seed,
            n: f.num_vars(),
            clauses: f.num_clauses(),
            result: result.into(),
            witness,
            centers_tried: r.centers_tried,
            pbs_calls: r.pbs_calls,
            nodes: r.stats.nodes,
            leaves: r.stats.leaves,
            clause_evals: r.stats.clause_evals,
            walk_steps: r.stats.walk_steps,
            oracle_queries: r.stats.oracle_queries,
            quantum_calls: r.stats.quantum_calls,
            discarded: r.stats.discarded,
            total_work: r.total_work(),
            modeled_work: r.modeled_work,
            r_tilde: r.r_tilde,
            wall_time_s: r.wall_time_s,
        }
    }

    fn text(&self) -> String {
        let mut s = format!("{}\n", self.result);
        if let Some(w) = &self.witness {
            s += &format!("witness {w}\n");
        }
        s += &format!(
            "instance {} strategy {} n {} clauses {}\n",
            self.instance, self.strategy, self.n, self.clauses
        );
        s += &format!(
            "centers {} pbs_calls {} nodes {} leaves {} clause_evals {} walk_steps {} oracle_queries {} quantum_calls {}\n",
            self.centers_tried,
            self.pbs_calls,
            self.nodes,
            self.leaves,
            self.clause_evals,
            self.walk_steps,
            self.oracle_queries,
            self.quantum_calls
        );
        if let Some(r) = self.r_tilde {
            s += &format!("r_tilde {r}\n");
        }
        if let Some(w) = self.modeled_work {
            s += &format!("modeled_work {w:.6e}\n");
        }
        s += &format!("time {:.3}s\n", self.wall_time_s);
        s
    }
}

pub fn read_formula(path: &Path) -> Result<Formula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_records<W: Write>(out: W, records: &[SolveRecord], format: Format) -> Result<()> {
    let mut out = out;
    match format {
        Format::Text => {
            for r in records {
                write!(out, "{}", r.text())?;
            }
        }
        Format::Json => {
            for r in records {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Runs every instance; the exit code follows the last one (10 SAT, 20
/// UNSAT, 0 unknown).
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let mut records = Vec::new();
    let mut code = 0;
    for path in &cfg.instances {
        let f = read_formula(path)?;
        let report = solve(&f, &cfg.strategy).with_context(|| format!("solving {}", path.display()))?;
        code = match report.outcome {
            SolveOutcome::Sat(_) => 10,
            SolveOutcome::Unsat => 20,
            SolveOutcome::Unknown(_) => 0,
        };
        records.push(SolveRecord::new(&path.display().to_string(), &f, &cfg.strategy, &report));
    }
    write_records(out, &records, cfg.format)?;
    Ok(code)
}
