use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use hybridsat::amplify::{enumerate_marked, MarkMode};
use hybridsat::circuit::dump::{dump, parse};
use hybridsat::circuit::reference::{choice_strings, flip_set, x_of};
use hybridsat::circuit::QBallCircuit;
use hybridsat::cnf::{Assignment, Formula};
use hybridsat::gen::rng;
use hybridsat::resource::QubitModel;
use rand::Rng;
use serde::Serialize;

use crate::config::{Format, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Verify {
    None,
    /// 16 random choice strings
    Sample,
    /// Every choice string, plus marked counts from both oracles (r <= 4)
    All,
}

const SAMPLES: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct CircuitReport {
    pub schema_version: u32,
    pub n: usize,
    pub r: usize,
    pub cells: usize,
    pub qubits: usize,
    pub ancillas: usize,
    pub gates: u64,
    pub elementary_gates: u64,
    pub qball2_gates: u64,
    /// `A·r·ln(n/r) + B·r + C·log2(2n)` with the default model.
    pub qubit_bound: f64,
    pub verify: String,
    pub checked_strings: usize,
    /// Marked choice strings as (reference, circuit) under `--verify all`.
    pub marked: Option<(u64, u64)>,
    pub per_subroutine: BTreeMap<String, u64>,
    pub dump: Vec<PathBuf>,
}

pub struct CircuitArgs<'a> {
    pub formula: &'a Formula,
    pub r: usize,
    pub center: Option<&'a str>,
    pub verify: Verify,
    pub dump: Option<&'a Path>,
    pub seed: u64,
}

pub fn run(a: CircuitArgs) -> Result<CircuitReport> {
    let n = a.formula.num_vars();
    if a.r == 0 || a.r > n {
        bail!("need 1 <= r <= n, got r={} with n={n}", a.r);
    }
    let center = match a.center {
        Some(s) => Assignment::parse(s).context("--center")?,
        None => Assignment::zeros(n),
    };
    let f = a.formula.subsume_center(&center)?;
    let q = QBallCircuit::build(&f, a.r)?;
    let st = q.stats();

    let strings: Vec<Vec<u8>> = match a.verify {
        Verify::None => vec![],
        Verify::Sample => {
            let mut g = rng(a.seed);
            (0..SAMPLES).map(|_| (0..a.r).map(|_| g.gen_range(1..=3u8)).collect()).collect()
        }
        Verify::All => choice_strings(a.r).collect(),
    };
    for s in &strings {
        let run = q.run_choice(s, true).with_context(|| format!("choice string {s:?}"))?;
        let v = flip_set(&f, s);
        ensure!(run.v == v, "QBall1 output for {s:?} differs from the reference");
        ensure!(run.satisfied == f.is_satisfied_by(&x_of(&v, n)), "QBall2 output for {s:?} differs from evaluation");
    }
    let marked = if a.verify == Verify::All {
        ensure!(a.r <= 4, "--verify all compares oracles only for r <= 4");
        let reference = enumerate_marked(&f, a.r, MarkMode::Reference)?;
        let circuit = enumerate_marked(&f, a.r, MarkMode::Circuit)?;
        ensure!(reference == circuit, "marked counts differ: {reference:?} vs {circuit:?}");
        Some((reference.marked, circuit.marked))
    } else {
        None
    };

    let mut dumped = Vec::new();
    if let Some(prefix) = a.dump {
        for (tag, p) in [("qball1", q.program1()), ("qball2", q.program2())] {
            let text = dump(&p);
            ensure!(dump(&parse(&text)?) == text, "{tag} listing does not round-trip");
            let path = PathBuf::from(format!("{}.{tag}.txt", prefix.display()));
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            dumped.push(path);
        }
    }

    Ok(CircuitReport {
        schema_version: SCHEMA_VERSION,
        n,
        r: a.r,
        cells: st.cells,
        qubits: st.qubits,
        ancillas: st.ancillas,
        gates: st.gates,
        elementary_gates: st.elementary_gates,
        qball2_gates: st.qball2_gates,
        qubit_bound: QubitModel::default().qubit_count(n, a.r)?,
        verify: format!("{:?}", a.verify).to_lowercase(),
        checked_strings: strings.len(),
        marked,
        per_subroutine: st.per_subroutine,
        dump: dumped,
    })
}

pub fn write(out: &mut dyn Write, r: &CircuitReport, format: Format) -> Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(r)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["n", "r", "cells", "qubits", "ancillas", "gates", "qball2_gates", "qubit_bound"])?;
            w.write_record([
                r.n.to_string(),
                r.r.to_string(),
                r.cells.to_string(),
                r.qubits.to_string(),
                r.ancillas.to_string(),
                r.gates.to_string(),
                r.qball2_gates.to_string(),
                format!("{:.3}", r.qubit_bound),
            ])?;
            w.flush()?;
        }
        Format::Text => {
            writeln!(out, "n {} r {}", r.n, r.r)?;
            writeln!(out, "cells {} (bound {:.1})  qubits {}  ancillas {}", r.cells, r.qubit_bound, r.qubits, r.ancillas)?;
            writeln!(out, "gates {} (elementary {})  qball2 gates {}", r.gates, r.elementary_gates, r.qball2_gates)?;
            writeln!(out, "verified {} choice strings ({})", r.checked_strings, r.verify)?;
            if let Some((a, b)) = r.marked {
                writeln!(out, "marked {a} (reference) {b} (circuit)")?;
            }
            for (name, g) in &r.per_subroutine {
                writeln!(out, "  {name:<12} {g}")?;
            }
            for p in &r.dump {
                writeln!(out, "wrote {}", p.display())?;
            }
        }
    }
    Ok(())
}
