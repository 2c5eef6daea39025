//! Instruction-level reversible machine. Registers are either fixed-width
//! binary numbers or arrays of trits; every instruction is a bijection on
//! the tape with an explicit inverse of the same kind.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RegId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegKind {
    /// Binary number of the given width, least significant bit first.
    Bits(u32),
    /// Array of trit cells, each in `{0, 1, 2}`; 2 is the separator.
    Trits(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegInfo {
    pub name: String,
    pub kind: RegKind,
    slot: usize,
}

impl RegInfo {
    pub fn size(&self) -> usize {
        match self.kind {
            RegKind::Bits(w) | RegKind::Trits(w) => w as usize,
        }
    }

    pub fn is_trits(&self) -> bool {
        matches!(self.kind, RegKind::Trits(_))
    }

    /// Qubits needed, two per trit.
    pub fn qubits(&self) -> usize {
        match self.kind {
            RegKind::Bits(w) => w as usize,
            RegKind::Trits(l) => 2 * l as usize,
        }
    }
}

/// Register map shared by a program and the tapes it runs on.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    regs: Vec<RegInfo>,
    words: usize,
    trits: usize,
}

impl Layout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_bits(&mut self, name: impl Into<String>, width: u32) -> RegId {
        assert!((1..=63).contains(&width), "register width {width} unsupported");
        self.regs.push(RegInfo {
            name: name.into(),
            kind: RegKind::Bits(width),
            slot: self.words,
        });
        self.words += 1;
        self.regs.len() - 1
    }

    pub fn add_trits(&mut self, name: impl Into<String>, len: u32) -> RegId {
        self.regs.push(RegInfo {
            name: name.into(),
            kind: RegKind::Trits(len),
            slot: self.trits,
        });
        self.trits += len as usize;
        self.regs.len() - 1
    }

    pub fn reg(&self, id: RegId) -> &RegInfo {
        &self.regs[id]
    }

    pub fn regs(&self) -> &[RegInfo] {
        &self.regs
    }

    pub fn len(&self) -> usize {
        self.regs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regs.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<RegId> {
        self.regs.iter().position(|r| r.name == name)
    }

    /// Bit cells plus trit cells.
    pub fn cells(&self) -> usize {
        self.regs.iter().map(RegInfo::size).sum()
    }

    pub fn qubits(&self) -> usize {
        self.regs.iter().map(RegInfo::qubits).sum()
    }

    fn mask(&self, id: RegId) -> u64 {
        match self.regs[id].kind {
            RegKind::Bits(w) => (1u64 << w) - 1,
            RegKind::Trits(_) => 0,
        }
    }
}

/// Cell contents for a [`Layout`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tape {
    words: Vec<u64>,
    trits: Vec<u8>,
}

impl Tape {
    pub fn zeros(layout: &Layout) -> Self {
        Tape {
            words: vec![0; layout.words],
            trits: vec![0; layout.trits],
        }
    }

    pub fn get(&self, layout: &Layout, r: RegId) -> u64 {
        let info = layout.reg(r);
        debug_assert!(!info.is_trits());
        self.words[info.slot]
    }

    pub fn set(&mut self, layout: &Layout, r: RegId, v: u64) {
        let info = layout.reg(r);
        debug_assert!(!info.is_trits());
        self.words[info.slot] = v & layout.mask(r);
    }

    pub fn trits(&self, layout: &Layout, r: RegId) -> &[u8] {
        let info = layout.reg(r);
        &self.trits[info.slot..info.slot + info.size()]
    }

    pub fn set_trits(&mut self, layout: &Layout, r: RegId, vals: &[u8]) {
        let info = layout.reg(r);
        let cells = &mut self.trits[info.slot..info.slot + info.size()];
        cells.fill(0);
        cells[..vals.len()].copy_from_slice(vals);
    }

    pub fn is_zero(&self, layout: &Layout, r: RegId) -> bool {
        let info = layout.reg(r);
        if info.is_trits() {
            self.trits(layout, r).iter().all(|&t| t == 0)
        } else {
            self.words[info.slot] == 0
        }
    }

    /// Every cell zero except the listed registers.
    pub fn is_zero_except(&self, layout: &Layout, keep: &[RegId]) -> bool {
        (0..layout.len()).all(|r| keep.contains(&r) || self.is_zero(layout, r))
    }

    /// Fills every register with uniformly random valid contents.
    pub fn randomize<R: rand::Rng>(&mut self, layout: &Layout, rng: &mut R) {
        for r in 0..layout.len() {
            if layout.reg(r).is_trits() {
                let len = layout.reg(r).size();
                let vals: Vec<u8> = (0..len).map(|_| rng.gen_range(0..3)).collect();
                self.set_trits(layout, r, &vals);
            } else {
                self.set(layout, r, rng.gen());
            }
        }
    }

    pub fn check_alphabet(&self, layout: &Layout) -> Result<()> {
        if let Some(cell) = self.trits.iter().position(|&t| t > 2) {
            return Err(Error::Alphabet {
                cell,
                value: self.trits[cell],
            });
        }
        for r in 0..layout.len() {
            let info = layout.reg(r);
            if !info.is_trits() && self.words[info.slot] & !layout.mask(r) != 0 {
                return Err(Error::Alphabet {
                    cell: info.slot,
                    value: 255,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    /// Value of a binary register.
    Val(RegId),
    /// One bit of a binary register.
    Bit(RegId, u32),
    /// One cell of a trit register.
    Trit(RegId, u32),
}

impl Term {
    pub fn reg(self) -> RegId {
        match self {
            Term::Val(r) | Term::Bit(r, _) | Term::Trit(r, _) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    /// The comparison after multiplying both sides by -1.
    fn flipped(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Gt => Cmp::Lt,
            Cmp::Ge => Cmp::Le,
            c => c,
        }
    }

    fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Cmp> {
        Some(match s {
            "==" => Cmp::Eq,
            "!=" => Cmp::Ne,
            "<" => Cmp::Lt,
            "<=" => Cmp::Le,
            ">" => Cmp::Gt,
            ">=" => Cmp::Ge,
            _ => return None,
        })
    }
}

/// `Σ coef·term  cmp  rhs`, evaluated over the integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub terms: Vec<(i64, Term)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

/// Conjunction of atoms; empty means unconditional.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Pred(pub Vec<Atom>);

impl Pred {
    pub fn always() -> Self {
        Pred(Vec::new())
    }

    pub fn is_always(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atom(terms: Vec<(i64, Term)>, cmp: Cmp, rhs: i64) -> Self {
        Pred(vec![Atom { terms, cmp, rhs }])
    }

    /// `reg cmp c` on a binary register.
    pub fn reg(r: RegId, cmp: Cmp, c: i64) -> Self {
        Self::atom(vec![(1, Term::Val(r))], cmp, c)
    }

    pub fn trit(r: RegId, i: u32, cmp: Cmp, c: i64) -> Self {
        Self::atom(vec![(1, Term::Trit(r, i))], cmp, c)
    }

    pub fn bit(r: RegId, b: u32, c: i64) -> Self {
        Self::atom(vec![(1, Term::Bit(r, b))], Cmp::Eq, c)
    }

    pub fn and(mut self, other: Pred) -> Self {
        self.0.extend(other.0);
        self
    }

    pub fn regs(&self) -> impl Iterator<Item = RegId> + '_ {
        self.0.iter().flat_map(|a| a.terms.iter().map(|(_, t)| t.reg()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Reg(RegId),
    Trit(RegId, u32),
}

impl Target {
    pub fn reg(self) -> RegId {
        match self {
            Target::Reg(r) | Target::Trit(r, _) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    /// `dst += c` modulo `2^w` (binary) or 3 (trit cell). A flip is `+1` on a 1-bit register.
    AddConst { dst: Target, c: i64 },
    /// `dst ± src` modulo `2^w`.
    AddReg { dst: RegId, src: RegId, sub: bool },
    XorReg { dst: RegId, src: RegId },
    Swap { a: RegId, b: RegId },
    /// Cellwise `dst ± src` modulo 3 over the cells of `dst`.
    AddTrits { dst: RegId, src: RegId, sub: bool },
    /// XORs the binary number read MSB-first from trits `pos..pos+len` of
    /// `set` into `dst`; identity when the field runs past the register.
    CopyField { set: RegId, pos: RegId, len: RegId, dst: RegId },
    /// Adds (or subtracts) the low `len` bits of `src`, MSB first, to trits
    /// `pos..pos+len` of `set`, and a separator at `pos+len`; identity when
    /// out of bounds.
    WriteField { set: RegId, pos: RegId, len: RegId, src: RegId, sub: bool },
}

impl Op {
    pub fn inverse(&self) -> Op {
        match *self {
            Op::AddConst { dst, c } => Op::AddConst { dst, c: -c },
            Op::AddReg { dst, src, sub } => Op::AddReg { dst, src, sub: !sub },
            Op::AddTrits { dst, src, sub } => Op::AddTrits { dst, src, sub: !sub },
            Op::WriteField { set, pos, len, src, sub } => Op::WriteField {
                set,
                pos,
                len,
                src,
                sub: !sub,
            },
            ref other => other.clone(),
        }
    }

    pub fn writes(&self) -> Vec<RegId> {
        match *self {
            Op::AddConst { dst, .. } => vec![dst.reg()],
            Op::AddReg { dst, .. } | Op::XorReg { dst, .. } | Op::AddTrits { dst, .. } => vec![dst],
            Op::Swap { a, b } => vec![a, b],
            Op::CopyField { dst, .. } => vec![dst],
            Op::WriteField { set, .. } => vec![set],
        }
    }

    pub fn reads(&self) -> Vec<RegId> {
        match *self {
            Op::AddConst { dst, .. } => vec![dst.reg()],
            Op::AddReg { dst, src, .. } | Op::XorReg { dst, src } | Op::AddTrits { dst, src, .. } => {
                vec![dst, src]
            }
            Op::Swap { a, b } => vec![a, b],
            Op::CopyField { set, pos, len, dst } => vec![set, pos, len, dst],
            Op::WriteField { set, pos, len, src, .. } => vec![set, pos, len, src],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instr {
    pub op: Op,
    pub ctrl: Pred,
}

#[derive(Debug, Clone)]
pub enum Node {
    Instr(Instr),
    /// Runs `block` (or its inverse) when `ctrl` holds. The block never
    /// writes a register that `ctrl` reads, so skipping is exact.
    Call {
        block: Rc<Block>,
        inverse: bool,
        ctrl: Pred,
    },
}

/// Gate tallies of a block after full expansion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    /// Machine instructions.
    pub instructions: u64,
    /// Conservative elementary-gate estimate, field copies as single dispatch.
    pub elementary: u64,
    /// Same, with field copies expanded as the full controlled-copy product.
    pub product_form: u64,
}

impl GateCounts {
    fn add(&mut self, o: GateCounts) {
        self.instructions = self.instructions.saturating_add(o.instructions);
        self.elementary = self.elementary.saturating_add(o.elementary);
        self.product_form = self.product_form.saturating_add(o.product_form);
    }
}

#[derive(Debug)]
pub struct Block {
    pub name: String,
    pub nodes: Vec<Node>,
    /// Registers that must be zero whenever the block finishes.
    pub clean: Vec<RegId>,
    pub gates: GateCounts,
    writes: Vec<RegId>,
    reads: Vec<RegId>,
}

fn sorted_union(a: &mut Vec<RegId>, b: impl IntoIterator<Item = RegId>) {
    a.extend(b);
    a.sort_unstable();
    a.dedup();
}

/// Elementary gates to evaluate a predicate into a flag (and back).
fn pred_cost(p: &Pred, layout: &Layout) -> u64 {
    p.0.iter()
        .map(|a| {
            let width: u64 = a
                .terms
                .iter()
                .map(|(_, t)| match *t {
                    Term::Val(r) => layout.reg(r).size() as u64,
                    Term::Bit(..) => 1,
                    Term::Trit(..) => 2,
                })
                .sum();
            4 * width + 2
        })
        .sum::<u64>()
        + p.0.len() as u64
}

fn op_cost(op: &Op, layout: &Layout) -> (u64, u64) {
    let w = |r: RegId| layout.reg(r).size() as u64;
    let single = |x: u64| (x, x);
    match *op {
        Op::AddConst { dst: Target::Reg(r), .. } => single(w(r) * w(r)),
        Op::AddConst { dst: Target::Trit(..), .. } => single(2),
        Op::AddReg { dst, .. } => single(2 * w(dst) * w(dst)),
        Op::XorReg { dst, .. } => single(w(dst)),
        Op::Swap { a, .. } => single(3 * layout.reg(a).qubits() as u64),
        Op::AddTrits { dst, .. } => single(4 * w(dst)),
        Op::CopyField { set, pos, len, .. } | Op::WriteField { set, pos, len, .. } => {
            let s = w(set);
            let lmax = (1u64 << w(len)) - 1;
            let ctrl = 4 * (w(pos) + w(len)) + 2;
            // one controlled copy per in-bounds (position, length) pair
            let mut product = 0u64;
            for j in 0..s {
                for l in 1..=lmax.min(s - j) {
                    product += 2 * l + 2 + ctrl;
                }
            }
            let dispatch = 2 * s * lmax.min(s) + ctrl;
            (dispatch, product)
        }
    }
}

impl Block {
    pub fn new(name: impl Into<String>, nodes: Vec<Node>, clean: Vec<RegId>, layout: &Layout) -> Result<Rc<Block>> {
        let name = name.into();
        let mut writes = Vec::new();
        let mut reads = Vec::new();
        let mut gates = GateCounts::default();
        for node in &nodes {
            match node {
                Node::Instr(ins) => {
                    let w = ins.op.writes();
                    if let Some(r) = ins.ctrl.regs().find(|r| w.contains(r)) {
                        return Err(Error::Build(format!(
                            "{name}: instruction writes its own control register {}",
                            layout.reg(r).name
                        )));
                    }
                    sorted_union(&mut writes, w);
                    sorted_union(&mut reads, ins.op.reads());
                    sorted_union(&mut reads, ins.ctrl.regs());
                    let (e, p) = op_cost(&ins.op, layout);
                    let c = if ins.ctrl.is_always() { 0 } else { 2 * pred_cost(&ins.ctrl, layout) };
                    gates.add(GateCounts {
                        instructions: 1,
                        elementary: e + c,
                        product_form: p + c,
                    });
                }
                Node::Call { block, ctrl, .. } => {
                    if let Some(r) = ctrl.regs().find(|r| block.writes.binary_search(r).is_ok()) {
                        return Err(Error::Build(format!(
                            "{name}: call to {} controlled on register {} it writes",
                            block.name,
                            layout.reg(r).name
                        )));
                    }
                    sorted_union(&mut writes, block.writes.iter().copied());
                    sorted_union(&mut reads, block.reads.iter().copied());
                    sorted_union(&mut reads, ctrl.regs());
                    let mut g = block.gates;
                    if !ctrl.is_always() {
                        let c = 2 * pred_cost(ctrl, layout);
                        g.elementary = g.elementary.saturating_add(g.instructions).saturating_add(c);
                        g.product_form = g.product_form.saturating_add(g.instructions).saturating_add(c);
                    }
                    gates.add(g);
                }
            }
        }
        Ok(Rc::new(Block {
            name,
            nodes,
            clean,
            gates,
            writes,
            reads,
        }))
    }

    pub fn writes(&self) -> &[RegId] {
        &self.writes
    }

    /// Every register the block touches.
    pub fn touched(&self) -> Vec<RegId> {
        let mut v = self.reads.clone();
        sorted_union(&mut v, self.writes.iter().copied());
        v
    }
}

/// A block with its register map.
#[derive(Debug, Clone)]
pub struct Program {
    pub layout: Layout,
    pub main: Rc<Block>,
}

impl Program {
    pub fn gate_count(&self) -> u64 {
        self.main.gates.instructions
    }

    /// Cells and qubits of the registers the program touches.
    pub fn footprint(&self) -> (usize, usize) {
        let regs = self.main.touched();
        (
            regs.iter().map(|&r| self.layout.reg(r).size()).sum(),
            regs.iter().map(|&r| self.layout.reg(r).qubits()).sum(),
        )
    }

    /// Gate counts of every distinct sub-block, keyed by name.
    pub fn block_gates(&self) -> HashMap<String, GateCounts> {
        let mut out = HashMap::new();
        let mut stack = vec![self.main.clone()];
        while let Some(b) = stack.pop() {
            if out.insert(b.name.clone(), b.gates).is_some() {
                continue;
            }
            for n in &b.nodes {
                if let Node::Call { block, .. } = n {
                    stack.push(block.clone());
                }
            }
        }
        out
    }

    pub fn run(&self, tape: &mut Tape, opts: RunOptions) -> Result<RunStats> {
        run_block(&self.layout, &self.main, tape, opts)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub inverse: bool,
    /// Verify each block's clean registers on exit.
    pub check_ledger: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub executed: u64,
    /// Instructions whose control was evaluated, executed or not.
    pub visited: u64,
    pub ledger_checks: u64,
}

pub fn run_block(layout: &Layout, block: &Block, tape: &mut Tape, opts: RunOptions) -> Result<RunStats> {
    Compiled::new(layout, block).run(tape, opts)
}

#[derive(Debug, Clone, Copy)]
struct CTerm {
    coef: i64,
    slot: u32,
    shift: u32,
    mask: u64,
}

#[derive(Debug, Clone, Copy)]
enum CAtom {
    One(Single),
    Many { start: u32, len: u32, cmp: Cmp, rhs: i64 },
}

#[derive(Debug, Clone, Copy)]
enum COp {
    Add { slot: u32, c: u64, mask: u64 },
    AddTrit { slot: u32, c: u64 },
    AddReg { dst: u32, src: u32, mask: u64, neg: bool },
    Xor { dst: u32, src: u32, mask: u64 },
    Swap { a: u32, b: u32, len: u32 },
    AddTrits { dst: u32, src: u32, len: u32, neg: bool },
    CopyField { set: u32, set_len: u32, pos: u32, len: u32, dst: u32, mask: u64 },
    WriteField { set: u32, set_len: u32, pos: u32, len: u32, src: u32, neg: bool },
    Call { proc_id: u32 },
}

#[derive(Debug, Clone, Copy)]
struct CInstr {
    atoms: u32,
    /// 0: unconditional, 1: `single` holds the whole predicate, 2: general.
    kind: u8,
    n_atoms: u32,
    single: Single,
    op: COp,
}

/// `lo <= (mem[slot] >> shift) & mask <= hi`, negated if `neg`.
#[derive(Debug, Clone, Copy, Default)]
struct Single {
    slot: u32,
    shift: u32,
    mask: u64,
    lo: i64,
    hi: i64,
    neg: bool,
}

impl Single {
    #[inline(always)]
    fn holds(&self, mem: &[u64]) -> bool {
        let x = ((mem[self.slot as usize] >> self.shift) & self.mask) as i64;
        (self.lo <= x && x <= self.hi) != self.neg
    }
}

#[derive(Debug, Clone)]
struct Proc {
    start: u32,
    end: u32,
    /// `(first cell, cell count, register)` that must be zero on exit.
    clean: Vec<(u32, u32, RegId)>,
    name: String,
    /// Cell ranges `(touched, written)` when results of this proc are cached.
    memo: Option<(Vec<(u32, u32)>, Vec<(u32, u32)>)>,
}

/// Cached effects of deterministic procs, keyed by the values of every cell
/// the proc touches. A hit replays the written cells and the statistics of
/// the original run, so results are identical with or without the cache.
#[derive(Debug, Default)]
pub struct Memo {
    map: HashMap<(u32, Box<[u64]>), (Box<[u64]>, RunStats)>,
    check: Option<bool>,
    off: bool,
    pub hits: u64,
}

const MEMO_LIMIT: usize = 1 << 18;

impl Memo {
    pub fn new() -> Memo {
        Memo::default()
    }

    /// A memo that never caches; every instruction is interpreted.
    pub fn off() -> Memo {
        Memo {
            off: true,
            ..Memo::default()
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// A block flattened for execution: every reachable block in both
/// directions, registers resolved to cell offsets (one `u64` per bit
/// register and per trit).
#[derive(Debug, Clone)]
pub struct Compiled {
    layout: Layout,
    cell_of: Vec<u32>,
    n_cells: usize,
    terms: Vec<CTerm>,
    atoms: Vec<CAtom>,
    code: Vec<CInstr>,
    procs: Vec<Proc>,
    main: u32,
}

impl Compiled {
    pub fn new(layout: &Layout, main: &Block) -> Compiled {
        let mut cell_of = Vec::with_capacity(layout.len());
        let mut n = 0u32;
        for r in layout.regs() {
            cell_of.push(n);
            n += if r.is_trits() { r.size() as u32 } else { 1 };
        }
        let mut c = Compiled {
            layout: layout.clone(),
            cell_of,
            n_cells: n as usize,
            terms: Vec::new(),
            atoms: Vec::new(),
            code: Vec::new(),
            procs: Vec::new(),
            main: 0,
        };
        let mut ids = HashMap::new();
        c.main = c.compile(main, &mut ids);
        c
    }

    /// Returns the forward proc id; the inverse is `id + 1`.
    fn compile(&mut self, b: &Block, ids: &mut HashMap<*const Block, u32>) -> u32 {
        if let Some(&id) = ids.get(&(b as *const Block)) {
            return id;
        }
        for n in &b.nodes {
            if let Node::Call { block, .. } = n {
                self.compile(block, ids);
            }
        }
        let id = self.procs.len() as u32;
        ids.insert(b as *const Block, id);
        let clean: Vec<(u32, u32, RegId)> = b
            .clean
            .iter()
            .map(|&r| {
                let len = if self.layout.reg(r).is_trits() { self.layout.reg(r).size() } else { 1 };
                (self.cell_of[r], len as u32, r)
            })
            .collect();
        let ranges = |regs: &[RegId]| -> Vec<(u32, u32)> {
            regs.iter()
                .map(|&r| {
                    let info = self.layout.reg(r);
                    (self.cell_of[r], if info.is_trits() { info.size() as u32 } else { 1 })
                })
                .collect()
        };
        let touched = ranges(&b.touched());
        let key_len: u64 = touched.iter().map(|&(_, l)| l as u64).sum();
        let memo = (b.gates.instructions >= 16 * (key_len + 1)).then(|| (touched, ranges(b.writes())));
        for inv in [false, true] {
            let start = self.code.len() as u32;
            let nodes: Box<dyn Iterator<Item = &Node>> = if inv {
                Box::new(b.nodes.iter().rev())
            } else {
                Box::new(b.nodes.iter())
            };
            for node in nodes {
                let (op, ctrl) = match node {
                    Node::Instr(i) => (self.lower(&i.op, inv), &i.ctrl),
                    Node::Call { block, inverse, ctrl } => {
                        let callee = ids[&(Rc::as_ptr(block))];
                        (
                            COp::Call {
                                proc_id: callee + (inv ^ inverse) as u32,
                            },
                            ctrl,
                        )
                    }
                };
                let (atoms, n_atoms) = self.lower_pred(ctrl);
                let (kind, single) = match (n_atoms, self.atoms.last()) {
                    (0, _) => (0, Single::default()),
                    (1, Some(&CAtom::One(sg))) => (1, sg),
                    _ => (2, Single::default()),
                };
                self.code.push(CInstr {
                    atoms,
                    kind,
                    n_atoms,
                    single,
                    op,
                });
            }
            self.procs.push(Proc {
                start,
                end: self.code.len() as u32,
                clean: clean.clone(),
                name: b.name.clone(),
                memo: memo.clone(),
            });
        }
        id
    }

    fn single(&self, a: &Atom) -> Option<Single> {
        let [(coef, t)] = a.terms.as_slice() else { return None };
        let (coef, rhs) = (*coef, a.rhs);
        if coef != 1 && coef != -1 {
            return None;
        }
        // coef * x cmp rhs  <=>  x cmp' coef * rhs with cmp' flipped for -1
        let r = coef * rhs;
        let cmp = if coef == 1 { a.cmp } else { a.cmp.flipped() };
        let (lo, hi, neg) = match cmp {
            Cmp::Eq => (r, r, false),
            Cmp::Ne => (r, r, true),
            Cmp::Lt => (i64::MIN, r - 1, false),
            Cmp::Le => (i64::MIN, r, false),
            Cmp::Gt => (r + 1, i64::MAX, false),
            Cmp::Ge => (r, i64::MAX, false),
        };
        let (slot, shift, mask) = match *t {
            Term::Val(reg) => (self.cell_of[reg], 0, u64::MAX),
            Term::Bit(reg, b) => (self.cell_of[reg], b, 1),
            Term::Trit(reg, i) => (self.cell_of[reg] + i, 0, u64::MAX),
        };
        Some(Single { slot, shift, mask, lo, hi, neg })
    }

    fn lower_pred(&mut self, p: &Pred) -> (u32, u32) {
        let first = self.atoms.len() as u32;
        for a in &p.0 {
            if let Some(sg) = self.single(a) {
                self.atoms.push(CAtom::One(sg));
                continue;
            }
            let start = self.terms.len() as u32;
            for &(coef, t) in &a.terms {
                let (slot, shift, mask) = match t {
                    Term::Val(r) => (self.cell_of[r], 0, u64::MAX),
                    Term::Bit(r, b) => (self.cell_of[r], b, 1),
                    Term::Trit(r, i) => (self.cell_of[r] + i, 0, u64::MAX),
                };
                self.terms.push(CTerm { coef, slot, shift, mask });
            }
            self.atoms.push(CAtom::Many {
                start,
                len: a.terms.len() as u32,
                cmp: a.cmp,
                rhs: a.rhs,
            });
        }
        (first, p.0.len() as u32)
    }

    fn lower(&self, op: &Op, inv: bool) -> COp {
        let cell = |r: RegId| self.cell_of[r];
        let size = |r: RegId| self.layout.reg(r).size() as u32;
        let mask = |r: RegId| self.layout.mask(r);
        match *op {
            Op::AddConst { dst: Target::Reg(r), c } => COp::Add {
                slot: cell(r),
                c: if inv { c.wrapping_neg() } else { c } as u64,
                mask: mask(r),
            },
            Op::AddConst { dst: Target::Trit(r, i), c } => COp::AddTrit {
                slot: cell(r) + i,
                c: (if inv { -c } else { c }).rem_euclid(3) as u64,
            },
            Op::AddReg { dst, src, sub } => COp::AddReg {
                dst: cell(dst),
                src: cell(src),
                mask: mask(dst),
                neg: sub ^ inv,
            },
            Op::XorReg { dst, src } => COp::Xor {
                dst: cell(dst),
                src: cell(src),
                mask: mask(dst),
            },
            Op::Swap { a, b } => COp::Swap {
                a: cell(a),
                b: cell(b),
                len: if self.layout.reg(a).is_trits() { size(a) } else { 1 },
            },
            Op::AddTrits { dst, src, sub } => COp::AddTrits {
                dst: cell(dst),
                src: cell(src),
                len: size(dst).min(size(src)),
                neg: sub ^ inv,
            },
            Op::CopyField { set, pos, len, dst } => COp::CopyField {
                set: cell(set),
                set_len: size(set),
                pos: cell(pos),
                len: cell(len),
                dst: cell(dst),
                mask: mask(dst),
            },
            Op::WriteField { set, pos, len, src, sub } => COp::WriteField {
                set: cell(set),
                set_len: size(set),
                pos: cell(pos),
                len: cell(len),
                src: cell(src),
                neg: sub ^ inv,
            },
        }
    }

    /// Flattened instruction count over all procs, both directions.
    pub fn code_len(&self) -> usize {
        self.code.len()
    }

    pub fn code_bytes(&self) -> usize {
        std::mem::size_of::<CInstr>()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn run(&self, tape: &mut Tape, opts: RunOptions) -> Result<RunStats> {
        self.run_memo(tape, opts, &mut Memo::new())
    }

    /// Like [`Compiled::run`], sharing cached proc effects across calls.
    /// The memo must only be used with this program.
    pub fn run_memo(&self, tape: &mut Tape, opts: RunOptions, memo: &mut Memo) -> Result<RunStats> {
        tape.check_alphabet(&self.layout)?;
        if memo.check != Some(opts.check_ledger) || memo.map.len() > MEMO_LIMIT {
            memo.map.clear();
            memo.check = Some(opts.check_ledger);
        }
        let mut mem = vec![0u64; self.n_cells];
        for (r, info) in self.layout.regs().iter().enumerate() {
            let c = self.cell_of[r] as usize;
            if info.is_trits() {
                for (i, &t) in tape.trits(&self.layout, r).iter().enumerate() {
                    mem[c + i] = t as u64;
                }
            } else {
                mem[c] = tape.get(&self.layout, r);
            }
        }
        let mut ex = Exec {
            c: self,
            mem,
            check: opts.check_ledger,
            stats: RunStats::default(),
            memo,
        };
        let res = ex.proc(self.main + opts.inverse as u32);
        for (r, info) in self.layout.regs().iter().enumerate() {
            let c = self.cell_of[r] as usize;
            if info.is_trits() {
                let vals: Vec<u8> = ex.mem[c..c + info.size()].iter().map(|&t| t as u8).collect();
                tape.set_trits(&self.layout, r, &vals);
            } else {
                tape.set(&self.layout, r, ex.mem[c]);
            }
        }
        res.map(|_| ex.stats)
    }
}

struct Exec<'a> {
    c: &'a Compiled,
    mem: Vec<u64>,
    check: bool,
    stats: RunStats,
    memo: &'a mut Memo,
}

impl Exec<'_> {
    #[inline(always)]
    fn holds(&self, ins: &CInstr) -> bool {
        let atoms = &self.c.atoms[ins.atoms as usize..(ins.atoms + ins.n_atoms) as usize];
        atoms.iter().all(|a| match *a {
            CAtom::One(sg) => sg.holds(&self.mem),
            CAtom::Many { start, len, cmp, rhs } => {
                let mut lhs = 0i64;
                for t in &self.c.terms[start as usize..(start + len) as usize] {
                    lhs += t.coef * ((self.mem[t.slot as usize] >> t.shift) & t.mask) as i64;
                }
                cmp.holds(lhs, rhs)
            }
        })
    }

    fn proc(&mut self, id: u32) -> Result<()> {
        let Some((touched, written)) = &self.c.procs[id as usize].memo else {
            return self.body(id);
        };
        if self.memo.off {
            return self.body(id);
        }
        let mut key = Vec::new();
        for &(c, l) in touched {
            key.extend_from_slice(&self.mem[c as usize..(c + l) as usize]);
        }
        let key = (id, key.into_boxed_slice());
        if let Some((out, st)) = self.memo.map.get(&key) {
            let mut k = 0;
            for &(c, l) in written {
                self.mem[c as usize..(c + l) as usize].copy_from_slice(&out[k..k + l as usize]);
                k += l as usize;
            }
            self.stats.executed += st.executed;
            self.stats.visited += st.visited;
            self.stats.ledger_checks += st.ledger_checks;
            self.memo.hits += 1;
            return Ok(());
        }
        let before = self.stats;
        self.body(id)?;
        let mut out = Vec::new();
        for &(c, l) in written {
            out.extend_from_slice(&self.mem[c as usize..(c + l) as usize]);
        }
        let st = RunStats {
            executed: self.stats.executed - before.executed,
            visited: self.stats.visited - before.visited,
            ledger_checks: self.stats.ledger_checks - before.ledger_checks,
        };
        self.memo.map.insert(key, (out.into_boxed_slice(), st));
        Ok(())
    }

    fn body(&mut self, id: u32) -> Result<()> {
        let p = &self.c.procs[id as usize];
        for k in p.start..p.end {
            let ins = &self.c.code[k as usize];
            self.stats.visited += 1;
            let ok = match ins.kind {
                0 => true,
                1 => ins.single.holds(&self.mem),
                _ => self.holds(ins),
            };
            if !ok {
                continue;
            }
            match ins.op {
                COp::Call { proc_id } => self.proc(proc_id)?,
                op => self.apply(op),
            }
        }
        if self.check && !p.clean.is_empty() {
            self.stats.ledger_checks += 1;
            for &(c, len, r) in &p.clean {
                if self.mem[c as usize..(c + len) as usize].iter().any(|&x| x != 0) {
                    return Err(Error::Ledger {
                        routine: p.name.clone(),
                        register: self.c.layout.reg(r).name.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    #[inline(always)]
    fn apply(&mut self, op: COp) {
        self.stats.executed += 1;
        let m = &mut self.mem;
        match op {
            COp::Add { slot, c, mask } => {
                let s = slot as usize;
                m[s] = m[s].wrapping_add(c) & mask;
            }
            COp::AddTrit { slot, c } => {
                let s = slot as usize;
                m[s] = (m[s] + c) % 3;
            }
            COp::AddReg { dst, src, mask, neg } => {
                let v = m[src as usize];
                let d = &mut m[dst as usize];
                *d = if neg { d.wrapping_sub(v) } else { d.wrapping_add(v) } & mask;
            }
            COp::Xor { dst, src, mask } => {
                let v = m[src as usize];
                m[dst as usize] ^= v & mask;
            }
            COp::Swap { a, b, len } => {
                for i in 0..len as usize {
                    m.swap(a as usize + i, b as usize + i);
                }
            }
            COp::AddTrits { dst, src, len, neg } => {
                for i in 0..len as usize {
                    let v = m[src as usize + i];
                    let v = if neg { (3 - v) % 3 } else { v };
                    let d = &mut m[dst as usize + i];
                    *d = (*d + v) % 3;
                }
            }
            COp::CopyField { set, set_len, pos, len, dst, mask } => {
                let p = m[pos as usize] as usize;
                let l = m[len as usize] as usize;
                if p + l > set_len as usize || l > 63 {
                    return;
                }
                let base = set as usize + p;
                let v = m[base..base + l].iter().fold(0u64, |acc, &t| (acc << 1) | (t == 1) as u64);
                m[dst as usize] ^= v & mask;
            }
            COp::WriteField { set, set_len, pos, len, src, neg } => {
                let p = m[pos as usize] as usize;
                let l = m[len as usize] as usize;
                if p + l >= set_len as usize || l > 63 {
                    return;
                }
                let v = m[src as usize];
                let base = set as usize + p;
                let add = |cell: &mut u64, x: u64| {
                    let x = if neg { (3 - x) % 3 } else { x };
                    *cell = (*cell + x) % 3;
                };
                for t in 0..l {
                    add(&mut m[base + t], (v >> (l - 1 - t)) & 1);
                }
                add(&mut m[base + l], 2);
            }
            COp::Call { .. } => unreachable!("calls are dispatched by proc"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Term::Val(r) => write!(f, "r{r}"),
            Term::Bit(r, b) => write!(f, "r{r}.{b}"),
            Term::Trit(r, i) => write!(f, "r{r}[{i}]"),
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            for (j, (c, t)) in a.terms.iter().enumerate() {
                if j > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{c}*{t}")?;
            }
            write!(f, " {} {}", a.cmp.symbol(), a.rhs)?;
        }
        Ok(())
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Op::AddConst { dst: Target::Reg(r), c } => write!(f, "add r{r} {c}"),
            Op::AddConst { dst: Target::Trit(r, i), c } => write!(f, "add r{r}[{i}] {c}"),
            Op::AddReg { dst, src, sub } => write!(f, "{} r{dst} r{src}", if sub { "subreg" } else { "addreg" }),
            Op::XorReg { dst, src } => write!(f, "xor r{dst} r{src}"),
            Op::Swap { a, b } => write!(f, "swap r{a} r{b}"),
            Op::AddTrits { dst, src, sub } => {
                write!(f, "{} r{dst} r{src}", if sub { "subtrits" } else { "addtrits" })
            }
            Op::CopyField { set, pos, len, dst } => write!(f, "copyfield r{set} r{pos} r{len} r{dst}"),
            Op::WriteField { set, pos, len, src, sub } => write!(
                f,
                "{} r{set} r{pos} r{len} r{src}",
                if sub { "unwritefield" } else { "writefield" }
            ),
        }
    }
}
