//! Reversible QBall circuits: QBall₁ maps a choice string `s⃗ ∈ {1,2,3}^r`
//! to the block encoding of the flip set `V(s⃗)`, QBall₂ evaluates the
//! formula at `x(V)`. Both run on an instruction-level reversible machine.

pub mod builder;
pub mod dump;
pub mod machine;
pub mod reference;
pub mod setcode;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

pub use builder::{build_append, build_contains, build_extract, build_union, Builder, Dims, JSrc, Routine, VSrc};
pub use machine::{Block, Compiled, GateCounts, Memo, Layout, Op, Pred, Program, RegId, RunOptions, RunStats, Tape};
pub use setcode::{capacity, decode, encode_set, EffEncLayout, SetCode};

use crate::cnf::{Formula, VariableSet};
use crate::error::{Error, Result};
use machine::{Cmp, Instr, Node, Target};

/// Clauses as `(var, negated)` lists, the form the builder consumes.
fn clause_lists(f: &Formula) -> Vec<Vec<(usize, bool)>> {
    f.clauses()
        .iter()
        .map(|c| c.literals().iter().map(|l| (l.var(), l.is_negated())).collect())
        .collect()
}

/// QBall₁ and QBall₂ for one formula (center already subsumed) and radius.
pub struct QBallCircuit {
    pub n: usize,
    pub r: usize,
    pub layout: Layout,
    /// Choice register, one trit per round holding `s_i - 1`.
    pub s: RegId,
    /// Block `l` holds `2^l` elements when bit `l` of the round count is set.
    pub blocks: Vec<RegId>,
    /// Merge temporaries.
    pub temps: Vec<RegId>,
    pub q_out: RegId,
    pub qball1: Rc<Block>,
    pub qball2: Rc<Block>,
    /// Calculate_i and Merge_i per round.
    pub rounds: Vec<(Rc<Block>, Rc<Block>)>,
    builder: Builder,
    clauses: Vec<Vec<(usize, bool)>>,
    compiled: (Compiled, Compiled),
    memo: RefCell<(Memo, Memo)>,
}

/// Result of running both programs on one choice string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceRun {
    pub v: VariableSet,
    pub satisfied: bool,
    pub executed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub n: usize,
    pub r: usize,
    /// Cells touched by QBall₁ (bits plus trits).
    pub cells: usize,
    /// Qubits for those cells, two per trit.
    pub qubits: usize,
    /// Qubits beyond the choice register and the output blocks.
    pub ancillas: usize,
    pub gates: u64,
    pub elementary_gates: u64,
    pub product_form_gates: u64,
    pub qball2_gates: u64,
    /// Largest instruction count among blocks of each routine kind.
    pub per_subroutine: BTreeMap<String, u64>,
}

impl QBallCircuit {
    pub fn build(f: &Formula, r: usize) -> Result<Self> {
        let n = f.num_vars();
        if r > n {
            return Err(Error::InvalidParam(format!("radius {r} exceeds n = {n}")));
        }
        if let Some(w) = f.clauses().iter().map(|c| c.len()).find(|&w| w > 3) {
            return Err(Error::ClauseTooWide { width: w, max: 3 });
        }
        let lmax = if r == 0 { 0 } else { (usize::BITS - 1 - r.leading_zeros()) as usize };
        let kmax = 1usize << lmax;
        let cap = |k: usize| capacity(k, n + r);
        let mut b = Builder::new(Dims {
            n,
            kmax,
            cap_max: cap(kmax),
            clauses: f.num_clauses(),
        });
        let s = b.layout.add_trits("s", r as u32);
        let blocks: Vec<RegId> = (0..=lmax)
            .map(|l| b.layout.add_trits(format!("V.b{l}"), cap(1 << l) as u32))
            .collect();
        let temps: Vec<RegId> = (0..lmax)
            .map(|l| b.layout.add_trits(format!("merge.t{l}"), cap(1 << l) as u32))
            .collect();
        let q_out = b.layout.add_bits("out", 1);
        let clauses = clause_lists(f);
        let blocks_of = |i: usize| -> Vec<(RegId, usize)> {
            (0..=lmax).rev().filter(|l| (i >> l) & 1 == 1).map(|l| (blocks[l], 1 << l)).collect()
        };

        let sc = b.sc.clone();
        // v is consumed by Merge, and a temporary may hold a pending union
        // while an earlier Merge is replayed, so both are only clean around
        // QBall₁ as a whole
        let mut merge_clean = vec![sc.un_jc[0], sc.un_jc[1], sc.un_c[0], sc.un_c[1], sc.cmp, sc.tmp];
        merge_clean.extend([sc.ap_vk, sc.ap_diff, sc.ap_lc, sc.ap_ctl, sc.xc, sc.pos, sc.len, sc.jc, sc.diff]);

        let mut top: Vec<Node> = Vec::new();
        let mut markers = vec![0usize];
        let mut rounds = Vec::new();
        let call = |block: &Rc<Block>, inverse: bool| Node::Call {
            block: block.clone(),
            inverse,
            ctrl: Pred::always(),
        };
        for i in 1..=r {
            let calc = b.calculate(&clauses, i, s, &blocks_of(i - 1))?;
            top.push(call(&calc, false));
            let g = i.trailing_zeros() as usize;
            let first = if g == 0 { blocks[0] } else { temps[0] };
            let mut mn = vec![call(&b.append(first, 0, sc.v)?, false), call(&calc, true)];
            for l in 0..g {
                let out = if l + 1 == g { blocks[g] } else { temps[l + 1] };
                let k = 1 << l;
                mn.push(call(&b.union(blocks[l], k, temps[l], k, out)?, false));
                // undo everything since the merge phase of round i - 2^{l+1}
                let mut seg: Vec<Node> = top[markers[i - (2 << l)]..].to_vec();
                seg.extend_from_slice(&mn[..mn.len() - 1]);
                let seg = Block::new(format!("replay[i={i},l={l}]"), seg, vec![], &b.layout)?;
                mn.push(call(&seg, true));
            }
            let merge = Block::new(format!("merge[i={i}]"), mn, merge_clean.clone(), &b.layout)?;
            top.push(call(&merge, false));
            markers.push(top.len());
            rounds.push((calc, merge));
        }
        let mut q1_clean = merge_clean.clone();
        q1_clean.extend(&temps);
        q1_clean.extend([sc.v, sc.g_cj, sc.g_ctr, sc.g_res, sc.ct_cnt, sc.ct_e, sc.ct_b, sc.clause]);
        q1_clean.extend(sc.a);
        let qball1 = Block::new("qball1", top, q1_clean, &b.layout)?;

        let chain = b.gchain(&clauses, &blocks_of(r))?;
        let flip = |ctrl| {
            Node::Instr(Instr {
                op: Op::AddConst {
                    dst: Target::Reg(q_out),
                    c: 1,
                },
                ctrl,
            })
        };
        let mut q2_clean = vec![sc.g_cj, sc.g_ctr, sc.g_res, sc.clause, sc.ct_cnt, sc.ct_e, sc.ct_b];
        q2_clean.extend(sc.a);
        let qball2 = Block::new(
            "qball2",
            vec![
                call(&chain, false),
                flip(Pred::reg(sc.g_res, Cmp::Eq, 1)),
                flip(Pred::always()),
                call(&chain, true),
            ],
            q2_clean,
            &b.layout,
        )?;
        let compiled = (Compiled::new(&b.layout, &qball1), Compiled::new(&b.layout, &qball2));
        Ok(QBallCircuit {
            compiled,
            memo: RefCell::new((Memo::new(), Memo::new())),
            n,
            r,
            layout: b.layout.clone(),
            s,
            blocks,
            temps,
            q_out,
            qball1,
            qball2,
            rounds,
            builder: b,
            clauses,
        })
    }

    /// Blocks holding `V_i`, largest first, with their element counts.
    pub fn blocks_of(&self, i: usize) -> Vec<(RegId, usize)> {
        (0..self.blocks.len())
            .rev()
            .filter(|l| (i >> l) & 1 == 1)
            .map(|l| (self.blocks[l], 1 << l))
            .collect()
    }

    pub fn program1(&self) -> Program {
        Program {
            layout: self.layout.clone(),
            main: self.qball1.clone(),
        }
    }

    pub fn program2(&self) -> Program {
        Program {
            layout: self.layout.clone(),
            main: self.qball2.clone(),
        }
    }

    fn sub_program(&mut self, main: Rc<Block>) -> Program {
        self.layout = self.builder.layout.clone();
        Program {
            layout: self.layout.clone(),
            main,
        }
    }

    /// Check for clause `j` (1-based) against `V_{i-1}`; result in the G-chain clause bit.
    pub fn check_program(&mut self, j: usize, i: usize) -> Result<(Program, RegId)> {
        let c = self
            .clauses
            .get(j.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| Error::InvalidParam(format!("clause index {j} out of range")))?;
        let out = self.builder.sc.g_cj;
        let blocks = self.blocks_of(i - 1);
        let main = self.builder.check(&c, &blocks, out)?;
        Ok((self.sub_program(main), out))
    }

    /// Select_i; inputs are the G-chain counter, `s` and `V_{i-1}`, output `v`.
    pub fn select_program(&mut self, i: usize) -> Result<Program> {
        let blocks = self.blocks_of(i - 1);
        let clauses = self.clauses.clone();
        let main = self.builder.select(&clauses, i, self.s, &blocks)?;
        Ok(self.sub_program(main))
    }

    pub fn calculate_program(&self, i: usize) -> Program {
        Program {
            layout: self.layout.clone(),
            main: self.rounds[i - 1].0.clone(),
        }
    }

    pub fn scratch(&self) -> &builder::Scratch {
        &self.builder.sc
    }

    /// Writes `V_i` given in insertion order into its blocks.
    pub fn load_effenc(&self, tape: &mut Tape, elems: &[usize]) -> Result<()> {
        let lay = EffEncLayout::new(elems.len(), self.n, self.r);
        for ((reg, _), part) in self.blocks_of(elems.len()).into_iter().zip(lay.split(elems)) {
            let mut sorted = part.to_vec();
            sorted.sort_unstable();
            let cap = self.layout.reg(reg).size();
            let code = setcode::encode_with_capacity(&sorted, cap)?;
            tape.set_trits(&self.layout, reg, &code.trits);
        }
        Ok(())
    }

    /// Decodes `V_i` from the blocks.
    pub fn read_effenc(&self, tape: &Tape, i: usize) -> Result<VariableSet> {
        let mut all = Vec::new();
        for (reg, k) in self.blocks_of(i) {
            let part = decode(tape.trits(&self.layout, reg))?;
            if part.len() != k {
                return Err(Error::Build(format!(
                    "block {} holds {} elements, expected {k}",
                    self.layout.reg(reg).name,
                    part.len()
                )));
            }
            all.extend(part);
        }
        let len = all.len();
        let v = VariableSet::from_unsorted(all);
        if v.len() != len {
            return Err(Error::Build("blocks overlap".into()));
        }
        Ok(v)
    }

    pub fn set_choices(&self, tape: &mut Tape, s: &[u8]) {
        assert_eq!(s.len(), self.r);
        let trits: Vec<u8> = s.iter().map(|&c| c - 1).collect();
        tape.set_trits(&self.layout, self.s, &trits);
    }

    /// Runs QBall₁ then QBall₂ on a zero tape with choices `s` (values
    /// 1..=3), checking the ledger at every routine boundary. With
    /// `verify_inverse`, also runs both inverses and checks that the tape
    /// returns to its start.
    pub fn run_choice(&self, s: &[u8], verify_inverse: bool) -> Result<ChoiceRun> {
        let mut tape = Tape::zeros(&self.layout);
        self.set_choices(&mut tape, s);
        let start = tape.clone();
        let fwd = RunOptions {
            inverse: false,
            check_ledger: true,
        };
        let inv = RunOptions {
            inverse: true,
            check_ledger: true,
        };
        let (q1, q2) = &self.compiled;
        let mut memo = self.memo.borrow_mut();
        let (m1, m2) = &mut *memo;
        let mut executed = q1.run_memo(&mut tape, fwd, m1)?.executed;
        let v = self.read_effenc(&tape, self.r)?;
        executed += q2.run_memo(&mut tape, fwd, m2)?.executed;
        let satisfied = tape.get(&self.layout, self.q_out) == 1;
        if verify_inverse {
            executed += q2.run_memo(&mut tape, inv, m2)?.executed;
            executed += q1.run_memo(&mut tape, inv, m1)?.executed;
            if tape != start {
                return Err(Error::Build("inverse run did not restore the tape".into()));
            }
        }
        Ok(ChoiceRun { v, satisfied, executed })
    }

    /// Compiled QBall₁ and QBall₂.
    pub fn compiled(&self) -> (&Compiled, &Compiled) {
        (&self.compiled.0, &self.compiled.1)
    }

    /// Instructions of the first `m` rounds.
    pub fn prefix_gates(&self, m: usize) -> u64 {
        self.rounds[..m]
            .iter()
            .map(|(c, g)| c.gates.instructions + g.gates.instructions)
            .sum()
    }

    pub fn stats(&self) -> CircuitStats {
        let p1 = self.program1();
        let (cells, qubits) = p1.footprint();
        let io: usize = std::iter::once(self.s)
            .chain(self.blocks_of(self.r).into_iter().map(|b| b.0))
            .map(|r| self.layout.reg(r).qubits())
            .sum();
        let mut per = BTreeMap::new();
        for p in [&p1, &self.program2()] {
            for (name, g) in p.block_gates() {
                let kind = name.split('[').next().unwrap_or(&name).to_string();
                let e = per.entry(kind).or_insert(0u64);
                *e = (*e).max(g.instructions);
            }
        }
        CircuitStats {
            n: self.n,
            r: self.r,
            cells,
            qubits,
            ancillas: qubits.saturating_sub(io),
            gates: self.qball1.gates.instructions,
            elementary_gates: self.qball1.gates.elementary,
            product_form_gates: self.qball1.gates.product_form,
            qball2_gates: self.qball2.gates.instructions,
            per_subroutine: per,
        }
    }
}
