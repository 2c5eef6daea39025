//! Text listing of a program: register map, then each distinct block once
//! (callees first), then the entry block.
//!
//! ```text
//! # hybridsat reversible program v1
//! reg r0 u.pos bits 5
//! reg r1 s trits 3
//! block b0 1 r0 shift[...]
//!   add r0 1 if 1*r1[0] == 2
//!   call b3 inv if 1*r0 <= 4
//! end
//! main b0
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::rc::Rc;

use super::machine::{Atom, Block, Cmp, Instr, Layout, Node, Op, Pred, Program, RegKind, Target, Term};
use crate::error::{Error, Result};

const HEADER: &str = "# hybridsat reversible program v1";

pub fn dump(p: &Program) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for (i, r) in p.layout.regs().iter().enumerate() {
        let (kind, size) = match r.kind {
            RegKind::Bits(w) => ("bits", w),
            RegKind::Trits(l) => ("trits", l),
        };
        writeln!(out, "reg r{i} {} {kind} {size}", r.name).unwrap();
    }
    let mut ids: HashMap<*const Block, usize> = HashMap::new();
    emit(&p.main, &mut ids, &mut out);
    writeln!(out, "main b{}", ids[&Rc::as_ptr(&p.main)]).unwrap();
    out
}

fn emit(b: &Rc<Block>, ids: &mut HashMap<*const Block, usize>, out: &mut String) {
    if ids.contains_key(&Rc::as_ptr(b)) {
        return;
    }
    for n in &b.nodes {
        if let Node::Call { block, .. } = n {
            emit(block, ids, out);
        }
    }
    let id = ids.len();
    ids.insert(Rc::as_ptr(b), id);
    write!(out, "block b{id} {}", b.clean.len()).unwrap();
    for r in &b.clean {
        write!(out, " r{r}").unwrap();
    }
    writeln!(out, " {}", b.name).unwrap();
    for n in &b.nodes {
        match n {
            Node::Instr(i) => write!(out, "  {}", i.op).unwrap(),
            Node::Call { block, inverse, .. } => {
                write!(out, "  call b{}", ids[&Rc::as_ptr(block)]).unwrap();
                if *inverse {
                    out.push_str(" inv");
                }
            }
        }
        let ctrl = match n {
            Node::Instr(i) => &i.ctrl,
            Node::Call { ctrl, .. } => ctrl,
        };
        if !ctrl.is_always() {
            write!(out, " if {ctrl}").unwrap();
        }
        out.push('\n');
    }
    out.push_str("end\n");
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn reg_id(tok: &str, line: usize) -> Result<usize> {
    tok.strip_prefix('r')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(line, format!("bad register {tok:?}")))
}

fn parse_term(tok: &str, line: usize) -> Result<Term> {
    if let Some((r, rest)) = tok.split_once('[') {
        let i = rest.strip_suffix(']').and_then(|s| s.parse().ok());
        return Ok(Term::Trit(reg_id(r, line)?, i.ok_or_else(|| err(line, "bad trit index"))?));
    }
    if let Some((r, b)) = tok.split_once('.') {
        let b = b.parse().map_err(|_| err(line, "bad bit index"))?;
        return Ok(Term::Bit(reg_id(r, line)?, b));
    }
    Ok(Term::Val(reg_id(tok, line)?))
}

fn parse_pred(s: &str, line: usize) -> Result<Pred> {
    let mut atoms = Vec::new();
    for a in s.split(" & ") {
        let toks: Vec<&str> = a.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(err(line, "truncated predicate"));
        }
        let (head, tail) = toks.split_at(toks.len() - 2);
        let cmp = Cmp::from_symbol(tail[0]).ok_or_else(|| err(line, "bad comparison"))?;
        let rhs = tail[1].parse().map_err(|_| err(line, "bad constant"))?;
        let mut terms = Vec::new();
        for t in head.iter().filter(|&&t| t != "+") {
            let (c, term) = t.split_once('*').ok_or_else(|| err(line, "bad term"))?;
            let c = c.parse().map_err(|_| err(line, "bad coefficient"))?;
            terms.push((c, parse_term(term, line)?));
        }
        atoms.push(Atom { terms, cmp, rhs });
    }
    Ok(Pred(atoms))
}

fn parse_op(toks: &[&str], line: usize) -> Result<Op> {
    let r = |i: usize| -> Result<usize> { reg_id(toks.get(i).ok_or_else(|| err(line, "missing operand"))?, line) };
    let nargs = |k: usize| -> Result<()> {
        if toks.len() == k + 1 {
            Ok(())
        } else {
            Err(err(line, format!("{} takes {k} operands", toks[0])))
        }
    };
    Ok(match toks[0] {
        "add" => {
            nargs(2)?;
            let dst = match parse_term(toks[1], line)? {
                Term::Val(r) => Target::Reg(r),
                Term::Trit(r, i) => Target::Trit(r, i),
                Term::Bit(..) => return Err(err(line, "cannot add to a single bit")),
            };
            let c = toks[2].parse().map_err(|_| err(line, "bad constant"))?;
            Op::AddConst { dst, c }
        }
        "addreg" | "subreg" => {
            nargs(2)?;
            Op::AddReg { dst: r(1)?, src: r(2)?, sub: toks[0] == "subreg" }
        }
        "xor" => {
            nargs(2)?;
            Op::XorReg { dst: r(1)?, src: r(2)? }
        }
        "swap" => {
            nargs(2)?;
            Op::Swap { a: r(1)?, b: r(2)? }
        }
        "addtrits" | "subtrits" => {
            nargs(2)?;
            Op::AddTrits { dst: r(1)?, src: r(2)?, sub: toks[0] == "subtrits" }
        }
        "copyfield" => {
            nargs(4)?;
            Op::CopyField { set: r(1)?, pos: r(2)?, len: r(3)?, dst: r(4)? }
        }
        "writefield" | "unwritefield" => {
            nargs(4)?;
            Op::WriteField {
                set: r(1)?,
                pos: r(2)?,
                len: r(3)?,
                src: r(4)?,
                sub: toks[0] == "unwritefield",
            }
        }
        other => return Err(err(line, format!("unknown instruction {other:?}"))),
    })
}

pub fn parse(text: &str) -> Result<Program> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(err(1, "missing header")),
    }
    let mut layout = Layout::new();
    let mut blocks: Vec<Rc<Block>> = Vec::new();
    let mut open: Option<(String, Vec<usize>, Vec<Node>)> = None;
    let mut main = None;
    for (ln, raw) in lines {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some((_, _, nodes)) = open.as_mut() {
            if l == "end" {
                let (name, clean, nodes) = open.take().unwrap();
                blocks.push(Block::new(name, nodes, clean, &layout)?);
                continue;
            }
            let (body, ctrl) = match l.split_once(" if ") {
                Some((b, c)) => (b, parse_pred(c, ln)?),
                None => (l, Pred::always()),
            };
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks[0] == "call" {
                let id: usize = toks
                    .get(1)
                    .and_then(|t| t.strip_prefix('b'))
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(ln, "bad block reference"))?;
                let block = blocks.get(id).ok_or_else(|| err(ln, "block used before definition"))?.clone();
                let inverse = match toks.get(2) {
                    None => false,
                    Some(&"inv") => true,
                    Some(_) => return Err(err(ln, "unexpected token after call")),
                };
                nodes.push(Node::Call { block, inverse, ctrl });
            } else {
                nodes.push(Node::Instr(Instr { op: parse_op(&toks, ln)?, ctrl }));
            }
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks[0] {
            "reg" if toks.len() == 5 => {
                if reg_id(toks[1], ln)? != layout.len() {
                    return Err(err(ln, "registers must be numbered in order"));
                }
                let size: u32 = toks[4].parse().map_err(|_| err(ln, "bad register size"))?;
                match toks[3] {
                    "bits" if (1..=63).contains(&size) => layout.add_bits(toks[2], size),
                    "trits" => layout.add_trits(toks[2], size),
                    _ => return Err(err(ln, "bad register kind")),
                };
            }
            "block" if toks.len() >= 3 => {
                if toks[1] != format!("b{}", blocks.len()) {
                    return Err(err(ln, "blocks must be numbered in order"));
                }
                let nclean: usize = toks[2].parse().map_err(|_| err(ln, "bad clean count"))?;
                let clean = toks
                    .get(3..3 + nclean)
                    .ok_or_else(|| err(ln, "truncated clean list"))?
                    .iter()
                    .map(|t| reg_id(t, ln))
                    .collect::<Result<Vec<_>>>()?;
                let name = toks[3 + nclean..].join(" ");
                open = Some((name, clean, Vec::new()));
            }
            "main" if toks.len() == 2 => {
                let id: usize = toks[1]
                    .strip_prefix('b')
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err(ln, "bad main reference"))?;
                main = Some(blocks.get(id).ok_or_else(|| err(ln, "unknown main block"))?.clone());
            }
            _ => return Err(err(ln, format!("unexpected line {l:?}"))),
        }
    }
    if open.is_some() {
        return Err(err(0, "unterminated block"));
    }
    let main = main.ok_or_else(|| err(0, "no main block"))?;
    Ok(Program { layout, main })
}
