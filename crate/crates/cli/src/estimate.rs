use std::io::Write;

use anyhow::{bail, Context, Result};
use hybridsat::resource::{hybrid_exponent, threshold_ratio, QubitModel};
use serde::Serialize;

use crate::config::{Format, SCHEMA_VERSION};

pub const DEFAULT_C: &str = "0,0.01,0.02,0.05,0.1,0.2,0.3,0.4,0.5";
pub const DEFAULT_SLACK: &str = "0,0.1";

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    /// `grid` or `threshold_ratio`
    pub row: String,
    pub c: Option<f64>,
    pub slack: Option<f64>,
    pub beta: Option<f64>,
    pub f: Option<f64>,
    /// Space splitting with FastBall, `γ₀ + ε`.
    pub exponent_classical: Option<f64>,
    /// Space splitting with QFastBall, `γ₀ + ε − f(c)`.
    pub exponent_hybrid: Option<f64>,
    pub exponent_dantsin: Option<f64>,
    /// Naive bottom-up with a device of `c·n` variables.
    pub exponent_naive: Option<f64>,
    /// Largest QBall radius with `M = c·n` qubits.
    pub r_tilde: Option<usize>,
    pub value: Option<f64>,
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("bad grid value {x:?}")))
        .collect::<Result<_>>()?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        bail!("grid values must be finite and non-negative");
    }
    Ok(v)
}

pub fn table(cs: &[f64], slacks: &[f64], n: usize, qm: &QubitModel) -> Result<Vec<EstimateRow>> {
    let mut rows = Vec::new();
    for &c in cs {
        for &slack in slacks {
            let e = hybrid_exponent(c, slack, qm).with_context(|| format!("c={c} slack={slack}"))?;
            rows.push(EstimateRow {
                row: "grid".into(),
                c: Some(c),
                slack: Some(slack),
                beta: Some(e.beta_c),
                f: Some(e.f_c),
                exponent_classical: Some(e.fastball_split),
                exponent_hybrid: Some(e.qfastball_split),
                exponent_dantsin: Some(e.dantsin),
                exponent_naive: Some(e.naive_hybrid),
                r_tilde: Some(qm.r_tilde(n, c * n as f64)),
                value: None,
            });
        }
    }
    rows.push(EstimateRow {
        row: "threshold_ratio".into(),
        c: None,
        slack: None,
        beta: None,
        f: None,
        exponent_classical: None,
        exponent_hybrid: None,
        exponent_dantsin: None,
        exponent_naive: None,
        r_tilde: None,
        value: Some(threshold_ratio()),
    });
    Ok(rows)
}

pub fn write(out: &mut dyn Write, rows: &[EstimateRow], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let doc = serde_json::json!({ "schema_version": SCHEMA_VERSION, "rows": rows });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Text => {
            writeln!(out, "{:>6} {:>6} {:>9} {:>9} {:>9} {:>9} {:>7}", "c", "slack", "beta", "f", "classical", "hybrid", "r_tilde")?;
            for r in rows {
                match (r.c, r.slack) {
                    (Some(c), Some(s)) => writeln!(
                        out,
                        "{c:>6} {s:>6} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>7}",
                        r.beta.unwrap(),
                        r.f.unwrap(),
                        r.exponent_classical.unwrap(),
                        r.exponent_hybrid.unwrap(),
                        r.r_tilde.unwrap()
                    )?,
                    _ => writeln!(out, "{} {:.6}", r.row, r.value.unwrap())?,
                }
            }
        }
    }
    Ok(())
}
