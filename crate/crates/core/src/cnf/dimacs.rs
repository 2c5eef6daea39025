use super::{Clause, Formula, Literal, DEFAULT_WIDTH};
use crate::error::{Error, Result};

/// Parses DIMACS CNF with clause width at most 3.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    parse_dimacs_with_width(text, DEFAULT_WIDTH)
}

/// Parses DIMACS CNF, rejecting clauses wider than `max_width`.
///
/// Comment lines (`c ...`) are skipped and a line starting with `%` ends
/// the clause section (SATLIB convention). Clauses may span lines.
pub fn parse_dimacs_with_width(text: &str, max_width: usize) -> Result<Formula> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "duplicate problem line".into(),
                });
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("malformed problem line {line:?}"),
                });
            }
            let parse_num = |s: &str| {
                s.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad number {s:?}"),
                })
            };
            header = Some((parse_num(parts[2])?, parse_num(parts[3])?));
            continue;
        }
        let Some((n, _)) = header else {
            return Err(Error::Parse {
                line: line_no,
                msg: "clause before problem line".into(),
            });
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad literal {tok:?}"),
            })?;
            if lit == 0 {
                clauses.push(finish_clause(&current, n, max_width, current_line)?);
                current.clear();
                continue;
            }
            if current.is_empty() {
                current_line = line_no;
            }
            let var = lit.unsigned_abs() as usize;
            if var > n {
                return Err(Error::VarOutOfRange { var, max: n });
            }
            current.push(lit);
        }
    }

    let Some((n, declared)) = header else {
        return Err(Error::Parse {
            line: 0,
            msg: "missing problem line".into(),
        });
    };
    if !current.is_empty() {
        clauses.push(finish_clause(&current, n, max_width, current_line)?);
    }
    if clauses.len() != declared {
        log::warn!(
            "DIMACS header declares {declared} clauses, found {}",
            clauses.len()
        );
    }
    Formula::new(n, clauses)
}

fn finish_clause(lits: &[i64], _n: usize, max_width: usize, line: usize) -> Result<Clause> {
    let clause = Clause::new(lits.iter().map(|&l| Literal::from_dimacs(l))).map_err(|e| match e {
        Error::ComplementaryLiterals { var } => Error::Parse {
            line,
            msg: format!("clause contains both {var} and -{var}"),
        },
        other => other,
    })?;
    if clause.len() > max_width {
        return Err(Error::ClauseTooWide {
            width: clause.len(),
            max: max_width,
        });
    }
    Ok(clause)
}

/// Canonical DIMACS text: header, then one clause per line.
pub fn to_dimacs(f: &Formula) -> String {
    let mut s = format!("p cnf {} {}\n", f.num_vars(), f.num_clauses());
    for c in f.clauses() {
        for l in c.literals() {
            s.push_str(&l.to_dimacs().to_string());
            s.push(' ');
        }
        s.push_str("0\n");
    }
    s
}
