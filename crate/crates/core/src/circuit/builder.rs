//! Reversible subroutines over set encodings, and the QBall programs built
//! from them. Workspace registers are shared by every instance of a
//! routine; no routine ever runs inside another instance of itself.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::machine::{Block, Cmp, Instr, Layout, Node, Op, Pred, Program, RegId, Target, Term};
use crate::error::{Error, Result};

/// Bits needed to hold values `0..=x`.
pub fn bits_for(x: usize) -> u32 {
    (usize::BITS - x.leading_zeros()).max(1)
}

/// Index source for Extract and the position pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JSrc {
    Const(i64),
    /// Register value plus offset.
    Reg(RegId, i64),
}

impl JSrc {
    fn key(self) -> String {
        match self {
            JSrc::Const(c) => format!("{c}"),
            JSrc::Reg(r, o) => format!("r{r}{o:+}"),
        }
    }

    /// `Σ terms + coef·j  cmp  rhs`, with `j` folded into the atom.
    fn atom(self, mut terms: Vec<(i64, Term)>, coef: i64, cmp: Cmp, rhs: i64) -> Pred {
        match self {
            JSrc::Const(c) => Pred::atom(terms, cmp, rhs - coef * c),
            JSrc::Reg(r, o) => {
                terms.push((coef, Term::Val(r)));
                Pred::atom(terms, cmp, rhs - coef * o)
            }
        }
    }
}

/// Value compared against in Contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VSrc {
    Const(i64),
    Reg(RegId),
}

/// Sizes that fix register widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    /// Variables; values range up to the sentinel `2n + 1`.
    pub n: usize,
    /// Largest set size any routine handles.
    pub kmax: usize,
    /// Longest set register.
    pub cap_max: usize,
    /// Clauses, for the G-chain counter.
    pub clauses: usize,
}

/// Shared workspace registers.
#[derive(Debug, Clone)]
pub struct Scratch {
    pub pos: RegId,
    pub len: RegId,
    pub jc: RegId,
    pub diff: RegId,
    pub xc: RegId,
    pub ct_cnt: RegId,
    pub ct_e: RegId,
    pub ct_b: RegId,
    pub a: [RegId; 3],
    pub clause: RegId,
    pub g_cj: RegId,
    pub g_ctr: RegId,
    pub g_res: RegId,
    pub v: RegId,
    pub ap_vk: RegId,
    pub ap_diff: RegId,
    pub ap_lc: RegId,
    pub ap_ctl: RegId,
    pub un_jc: [RegId; 2],
    pub un_c: [RegId; 2],
    pub cmp: RegId,
    pub tmp: RegId,
}

pub struct Builder {
    pub layout: Layout,
    pub dims: Dims,
    pub width: u32,
    pub sc: Scratch,
    cache: HashMap<String, Rc<Block>>,
}

fn flip(r: RegId) -> Op {
    Op::AddConst {
        dst: Target::Reg(r),
        c: 1,
    }
}

fn add(r: RegId, c: i64) -> Op {
    Op::AddConst {
        dst: Target::Reg(r),
        c,
    }
}

fn ins(op: Op, ctrl: Pred) -> Node {
    Node::Instr(Instr { op, ctrl })
}

fn call(block: &Rc<Block>, inverse: bool, ctrl: Pred) -> Node {
    Node::Call {
        block: block.clone(),
        inverse,
        ctrl,
    }
}

fn val(r: RegId) -> Term {
    Term::Val(r)
}

impl Builder {
    pub fn new(dims: Dims) -> Self {
        let mut l = Layout::new();
        let width = bits_for(2 * dims.n + 1);
        let kb = bits_for(dims.kmax + 1);
        let sc = Scratch {
            pos: l.add_bits("u.pos", bits_for(dims.cap_max + 1)),
            len: l.add_bits("u.len", bits_for(width as usize + 1)),
            jc: l.add_bits("u.jc", bits_for(dims.kmax + 2)),
            diff: l.add_bits("shift.d", width),
            xc: l.add_bits("extract.c", kb),
            ct_cnt: l.add_bits("contains.cnt", kb),
            ct_e: l.add_bits("contains.e", width),
            ct_b: l.add_bits("contains.b", 1),
            a: [l.add_bits("check.a1", 1), l.add_bits("check.a2", 1), l.add_bits("check.a3", 1)],
            clause: l.add_bits("check.c", 1),
            g_cj: l.add_bits("g.cj", 1),
            g_ctr: l.add_bits("g.ctr", bits_for(dims.clauses) + 1),
            g_res: l.add_bits("g.res", 1),
            v: l.add_bits("v", width),
            ap_vk: l.add_bits("append.vk", width),
            ap_diff: l.add_bits("append.diff", width),
            ap_lc: l.add_bits("append.len", bits_for(width as usize + 1)),
            ap_ctl: l.add_bits("append.ctl", 1),
            un_jc: [l.add_bits("union.jc1", kb), l.add_bits("union.jc2", kb)],
            un_c: [l.add_bits("union.c1", width), l.add_bits("union.c2", width)],
            cmp: l.add_trits("union.cmp", dims.kmax as u32),
            tmp: l.add_trits("union.tmp", dims.cap_max as u32),
        };
        Builder {
            layout: l,
            dims,
            width,
            sc,
            cache: HashMap::new(),
        }
    }

    pub fn sentinel(&self) -> i64 {
        2 * self.dims.n as i64 + 1
    }

    fn set_len(&self, set: RegId) -> usize {
        self.layout.reg(set).size()
    }

    fn cached(
        &mut self,
        key: String,
        clean: Vec<RegId>,
        make: impl FnOnce(&mut Self) -> Result<Vec<Node>>,
    ) -> Result<Rc<Block>> {
        if let Some(b) = self.cache.get(&key) {
            return Ok(b.clone());
        }
        let nodes = make(self)?;
        let b = Block::new(key.clone(), nodes, clean, &self.layout)?;
        self.cache.insert(key, b.clone());
        Ok(b)
    }

    fn extract_clean(&self) -> Vec<RegId> {
        let s = &self.sc;
        vec![s.xc, s.pos, s.len, s.jc, s.diff]
    }

    fn contains_clean(&self) -> Vec<RegId> {
        let s = &self.sc;
        let mut v = vec![s.ct_cnt, s.ct_e, s.ct_b];
        v.extend(self.extract_clean());
        v
    }

    fn append_clean(&self) -> Vec<RegId> {
        let s = &self.sc;
        let mut v = vec![s.ap_vk, s.ap_diff, s.ap_lc, s.ap_ctl];
        v.extend(self.extract_clean());
        v
    }

    /// Position pass: `pos` ← index of the first trit of the `j`-th number,
    /// counting down a `k`-initialised separator counter.
    pub fn u1_pos(&mut self, set: RegId, k: usize, j: JSrc) -> Result<Rc<Block>> {
        let key = format!("u1pos[r{set},k={k},j={}]", j.key());
        self.cached(key, vec![], |b| {
            let s = b.sc.clone();
            let mut nodes = vec![ins(add(s.jc, k as i64), Pred::always())];
            for p in 0..b.set_len(set) as u32 {
                nodes.push(ins(add(s.pos, 1), j.atom(vec![(1, val(s.jc))], 1, Cmp::Ge, k as i64 + 2)));
                nodes.push(ins(add(s.jc, -1), Pred::trit(set, p, Cmp::Eq, 2)));
            }
            Ok(nodes)
        })
    }

    /// Length pass: `len` ← digit count of the `j`-th number.
    pub fn u1_len(&mut self, set: RegId, k: usize, j: JSrc) -> Result<Rc<Block>> {
        let key = format!("u1len[r{set},k={k},j={}]", j.key());
        self.cached(key, vec![], |b| {
            let s = b.sc.clone();
            let mut nodes = Vec::new();
            for p in 0..b.set_len(set) as u32 {
                let hit = j
                    .atom(vec![(1, val(s.jc))], -1, Cmp::Eq, -1)
                    .and(Pred::trit(set, p, Cmp::Ne, 2));
                nodes.push(ins(add(s.len, 1), hit));
                nodes.push(ins(add(s.jc, 1), Pred::trit(set, p, Cmp::Eq, 2)));
            }
            nodes.push(ins(add(s.jc, -(k as i64)), Pred::always()));
            Ok(nodes)
        })
    }

    /// `out += y_c - y_{c-1}` for `c` = the Extract counter.
    pub fn shift(&mut self, set: RegId, k: usize, out: RegId) -> Result<Rc<Block>> {
        let key = format!("shift[r{set},k={k},out=r{out}]");
        let clean = {
            let s = &self.sc;
            vec![s.pos, s.len, s.jc, s.diff]
        };
        self.cached(key, clean, |b| {
            let s = b.sc.clone();
            let j = JSrc::Reg(s.xc, 0);
            let pos = b.u1_pos(set, k, j)?;
            let len = b.u1_len(set, k, j)?;
            let copy = Op::CopyField {
                set,
                pos: s.pos,
                len: s.len,
                dst: s.diff,
            };
            Ok(vec![
                call(&pos, false, Pred::always()),
                call(&len, false, Pred::always()),
                ins(copy.clone(), Pred::always()),
                ins(
                    Op::AddReg {
                        dst: out,
                        src: s.diff,
                        sub: false,
                    },
                    Pred::always(),
                ),
                ins(copy, Pred::always()),
                call(&len, true, Pred::always()),
                call(&pos, true, Pred::always()),
            ])
        })
    }

    /// `out += y_j` of the `k`-element set in `set`; 0 when `j ∉ 1..=k`.
    pub fn extract(&mut self, set: RegId, k: usize, j: JSrc, out: RegId) -> Result<Rc<Block>> {
        let key = format!("extract[r{set},k={k},j={},out=r{out}]", j.key());
        let clean = self.extract_clean();
        self.cached(key, clean, |b| {
            let xc = b.sc.xc;
            let sh = b.shift(set, k, out)?;
            let ctrl = j
                .atom(vec![(1, val(xc))], -1, Cmp::Le, 0)
                .and(j.atom(vec![], 1, Cmp::Le, k as i64));
            let mut nodes = Vec::new();
            for _ in 0..k {
                nodes.push(ins(add(xc, 1), Pred::always()));
                nodes.push(call(&sh, false, ctrl.clone()));
            }
            nodes.push(ins(add(xc, -(k as i64)), Pred::always()));
            Ok(nodes)
        })
    }

    /// `out ^= [v ∈ S]` for the `k`-element set in `set`.
    pub fn contains(&mut self, set: RegId, k: usize, v: VSrc, out: RegId) -> Result<Rc<Block>> {
        let vkey = match v {
            VSrc::Const(c) => format!("{c}"),
            VSrc::Reg(r) => format!("r{r}"),
        };
        let body_key = format!("contains.body[r{set},k={k},v={vkey}]");
        let s = self.sc.clone();
        let body = self.cached(body_key, vec![], |b| {
            let mut nodes = Vec::new();
            let hit = match v {
                VSrc::Const(c) => Pred::reg(s.ct_e, Cmp::Eq, c),
                VSrc::Reg(r) => Pred::atom(vec![(1, val(s.ct_e)), (-1, val(r))], Cmp::Eq, 0),
            };
            for j in 1..=k {
                let ex = b.extract(set, k, JSrc::Const(j as i64), s.ct_e)?;
                nodes.push(call(&ex, false, Pred::reg(s.ct_cnt, Cmp::Eq, 0)));
                nodes.push(ins(flip(s.ct_b), hit.clone()));
                nodes.push(call(&ex, true, Pred::reg(s.ct_cnt, Cmp::Eq, 0)));
                nodes.push(ins(add(s.ct_cnt, 1), Pred::reg(s.ct_b, Cmp::Eq, 1)));
            }
            Ok(nodes)
        })?;
        let key = format!("contains[r{set},k={k},v={vkey},out=r{out}]");
        let clean = self.contains_clean();
        self.cached(key, clean, |_| {
            Ok(vec![
                call(&body, false, Pred::always()),
                ins(flip(out), Pred::reg(s.ct_b, Cmp::Eq, 1)),
                call(&body, true, Pred::always()),
            ])
        })
    }

    fn blocks_key(blocks: &[(RegId, usize)]) -> String {
        blocks.iter().map(|(r, k)| format!("r{r}:{k}")).collect::<Vec<_>>().join(",")
    }

    /// `a_q ^= [var_q ∈ V]` for each of up to three variables, over all blocks.
    fn membership(&mut self, vars: &[usize], blocks: &[(RegId, usize)]) -> Result<Rc<Block>> {
        let key = format!("membership[{vars:?};{}]", Self::blocks_key(blocks));
        self.cached(key, vec![], |b| {
            let mut nodes = Vec::new();
            for (q, &var) in vars.iter().enumerate() {
                for &(reg, k) in blocks {
                    let c = b.contains(reg, k, VSrc::Const(var as i64), b.sc.a[q])?;
                    nodes.push(call(&c, false, Pred::always()));
                }
            }
            Ok(nodes)
        })
    }

    /// `out ^= C(x(V))` for a clause given as `(var, negated)` pairs.
    pub fn check(&mut self, clause: &[(usize, bool)], blocks: &[(RegId, usize)], out: RegId) -> Result<Rc<Block>> {
        if clause.len() > 3 {
            return Err(Error::ClauseTooWide {
                width: clause.len(),
                max: 3,
            });
        }
        let vars: Vec<usize> = clause.iter().map(|l| l.0).collect();
        let key = format!("check[{clause:?};{};out=r{out}]", Self::blocks_key(blocks));
        let mut clean = vec![self.sc.a[0], self.sc.a[1], self.sc.a[2], self.sc.clause];
        clean.extend(self.contains_clean());
        let mem = self.membership(&vars, blocks)?;
        let s = self.sc.clone();
        let body_key = format!("check.body[{clause:?};{}]", Self::blocks_key(blocks));
        let body = self.cached(body_key, vec![], |_| {
            let mut nodes = vec![call(&mem, false, Pred::always())];
            for (q, &(_, neg)) in clause.iter().enumerate() {
                if neg {
                    nodes.push(ins(flip(s.a[q]), Pred::always()));
                }
            }
            let all_false = Pred(
                (0..clause.len())
                    .flat_map(|q| Pred::reg(s.a[q], Cmp::Eq, 0).0)
                    .collect(),
            );
            nodes.push(ins(flip(s.clause), Pred::always()));
            nodes.push(ins(flip(s.clause), all_false));
            Ok(nodes)
        })?;
        self.cached(key, clean, |_| {
            Ok(vec![
                call(&body, false, Pred::always()),
                ins(flip(out), Pred::reg(s.clause, Cmp::Eq, 1)),
                call(&body, true, Pred::always()),
            ])
        })
    }

    /// G-chain over all clauses: afterwards `res = 1 - F(x(V))` and
    /// `ctr = L + 1 - j_min` (0 when satisfied).
    pub fn gchain(&mut self, clauses: &[Vec<(usize, bool)>], blocks: &[(RegId, usize)]) -> Result<Rc<Block>> {
        let key = format!("gchain[{}]", Self::blocks_key(blocks));
        self.cached(key, vec![], |b| {
            let s = b.sc.clone();
            let mut nodes = Vec::new();
            for c in clauses {
                let chk = b.check(c, blocks, s.g_cj)?;
                let idle = Pred::reg(s.g_ctr, Cmp::Eq, 0);
                nodes.push(call(&chk, false, idle.clone()));
                nodes.push(ins(flip(s.g_res), Pred::reg(s.g_cj, Cmp::Eq, 0).and(idle.clone())));
                nodes.push(call(&chk, true, idle));
                nodes.push(ins(add(s.g_ctr, 1), Pred::reg(s.g_res, Cmp::Eq, 1)));
            }
            Ok(nodes)
        })
    }

    /// `v += v_{j,i}(V, s_i)` selected by the G-chain counter.
    pub fn select(
        &mut self,
        clauses: &[Vec<(usize, bool)>],
        i: usize,
        s_reg: RegId,
        blocks: &[(RegId, usize)],
    ) -> Result<Rc<Block>> {
        let key = format!("select[i={i};{}]", Self::blocks_key(blocks));
        let mut clean = vec![self.sc.a[0], self.sc.a[1], self.sc.a[2]];
        clean.extend(self.contains_clean());
        let dummy = (self.dims.n + i) as i64;
        let l = clauses.len() as i64;
        self.cached(key, clean, |b| {
            let s = b.sc.clone();
            let mut nodes = vec![ins(add(s.v, dummy), Pred::reg(s.g_ctr, Cmp::Eq, 0))];
            for (jm1, c) in clauses.iter().enumerate() {
                let mut vars: Vec<usize> = c.iter().map(|l| l.0).collect();
                vars.sort_unstable();
                let mem = b.membership(&vars, blocks)?;
                let mut inner = vec![call(&mem, false, Pred::always())];
                for pattern in 0u32..1 << vars.len() {
                    let free: Vec<usize> = (0..vars.len())
                        .filter(|&q| (pattern >> q) & 1 == 0)
                        .map(|q| vars[q])
                        .collect();
                    let mut cond = Pred::always();
                    for q in 0..vars.len() {
                        cond = cond.and(Pred::reg(s.a[q], Cmp::Eq, ((pattern >> q) & 1) as i64));
                    }
                    for choice in 0..3u32 {
                        let target = free.get(choice as usize).map_or(dummy, |&x| x as i64);
                        let ctrl = cond.clone().and(Pred::trit(s_reg, (i - 1) as u32, Cmp::Eq, choice as i64));
                        inner.push(ins(add(s.v, target), ctrl));
                    }
                }
                inner.push(call(&mem, true, Pred::always()));
                let sel = Block::new(format!("select.clause[i={i},j={}]", jm1 + 1), inner, vec![], &b.layout)?;
                nodes.push(call(&sel, false, Pred::reg(s.g_ctr, Cmp::Eq, l - jm1 as i64)));
            }
            Ok(nodes)
        })
    }

    /// `v ← v_i`: G-chain, Select, inverse G-chain.
    pub fn calculate(
        &mut self,
        clauses: &[Vec<(usize, bool)>],
        i: usize,
        s_reg: RegId,
        blocks: &[(RegId, usize)],
    ) -> Result<Rc<Block>> {
        let key = format!("calculate[i={i}]");
        let clean = {
            let s = &self.sc;
            vec![s.g_cj, s.g_ctr, s.g_res]
        };
        self.cached(key, clean, |b| {
            let g = b.gchain(clauses, blocks)?;
            let sel = b.select(clauses, i, s_reg, blocks)?;
            Ok(vec![
                call(&g, false, Pred::always()),
                call(&sel, false, Pred::always()),
                call(&g, true, Pred::always()),
            ])
        })
    }

    /// Appends `v` (greater than every element) to the `k`-element set.
    pub fn append(&mut self, set: RegId, k: usize, v: RegId) -> Result<Rc<Block>> {
        let key = format!("append[r{set},k={k},v=r{v}]");
        let clean = self.append_clean();
        self.cached(key, clean, |b| {
            let s = b.sc.clone();
            let w = b.width;
            let digits = b.cached(format!("append.digits[w={w}]"), vec![], |_| {
                let mut nodes = Vec::new();
                for bit in (0..w).rev() {
                    let first = Pred::bit(s.ap_diff, bit, 1).and(Pred::reg(s.ap_lc, Cmp::Eq, 0));
                    nodes.push(ins(flip(s.ap_ctl), first));
                    nodes.push(ins(add(s.ap_lc, 1), Pred::reg(s.ap_ctl, Cmp::Eq, 1)));
                }
                nodes.push(ins(flip(s.ap_ctl), Pred::always()));
                Ok(nodes)
            })?;
            let last = b.extract(set, k, JSrc::Const(k as i64), s.ap_vk)?;
            let last_after = b.extract(set, k + 1, JSrc::Const(k as i64), s.ap_vk)?;
            let pos = b.u1_pos(set, k, JSrc::Const(k as i64 + 1))?;
            let pos_after = b.u1_pos(set, k + 1, JSrc::Const(k as i64 + 1))?;
            let diff = |sub| Op::AddReg {
                dst: s.ap_diff,
                src: v,
                sub,
            };
            let vk = |sub| Op::AddReg {
                dst: s.ap_diff,
                src: s.ap_vk,
                sub,
            };
            let a = Pred::always;
            Ok(vec![
                call(&last, false, a()),
                ins(diff(false), a()),
                ins(vk(true), a()),
                call(&digits, false, a()),
                call(&pos, false, a()),
                ins(
                    Op::WriteField {
                        set,
                        pos: s.pos,
                        len: s.ap_lc,
                        src: s.ap_diff,
                        sub: false,
                    },
                    a(),
                ),
                call(&pos_after, true, a()),
                call(&digits, true, a()),
                ins(vk(false), a()),
                ins(diff(true), a()),
                call(&last_after, true, a()),
            ])
        })
    }

    /// `out += enc(S1 ∪ S2)` for disjoint sets of sizes `k1`, `k2`.
    pub fn union(&mut self, s1: RegId, k1: usize, s2: RegId, k2: usize, out: RegId) -> Result<Rc<Block>> {
        let key = format!("union[r{s1}:{k1},r{s2}:{k2},out=r{out}]");
        let mut clean = {
            let s = &self.sc;
            vec![s.un_jc[0], s.un_jc[1], s.un_c[0], s.un_c[1], s.cmp, s.tmp]
        };
        clean.extend(self.append_clean());
        let total = k1 + k2;
        if total > self.dims.kmax || self.set_len(out) > self.set_len(self.sc.tmp) {
            return Err(Error::Build(format!("union of {k1}+{k2} exceeds the workspace")));
        }
        let sent = self.sentinel();
        self.cached(key, clean, |b| {
            let s = b.sc.clone();
            let sets = [(s1, k1), (s2, k2)];
            let mut lp = Vec::new();
            for j in 0..total {
                let mut ex = Vec::new();
                for (bi, &(set, k)) in sets.iter().enumerate() {
                    ex.push(if k > 0 {
                        Some(b.extract(set, k, JSrc::Reg(s.un_jc[bi], 1), s.un_c[bi])?)
                    } else {
                        None
                    });
                }
                let live = |bi: usize| Pred::reg(s.un_jc[bi], Cmp::Lt, sets[bi].1 as i64);
                let done = |bi: usize| Pred::reg(s.un_jc[bi], Cmp::Eq, sets[bi].1 as i64);
                for bi in 0..2 {
                    if let Some(e) = &ex[bi] {
                        lp.push(call(e, false, live(bi)));
                    }
                    lp.push(ins(add(s.un_c[bi], sent), done(bi)));
                }
                let t = Target::Trit(s.cmp, j as u32);
                let c1_minus_c2 = vec![(1, val(s.un_c[0])), (-1, val(s.un_c[1]))];
                lp.push(ins(Op::AddConst { dst: t, c: 1 }, Pred::atom(c1_minus_c2.clone(), Cmp::Lt, 0)));
                lp.push(ins(Op::AddConst { dst: t, c: 2 }, Pred::atom(c1_minus_c2, Cmp::Gt, 0)));
                for bi in 0..2 {
                    let ap = b.append(s.tmp, j, s.un_c[bi])?;
                    lp.push(call(&ap, false, Pred::trit(s.cmp, j as u32, Cmp::Eq, bi as i64 + 1)));
                }
                for bi in (0..2).rev() {
                    lp.push(ins(add(s.un_c[bi], -sent), done(bi)));
                    if let Some(e) = &ex[bi] {
                        lp.push(call(e, true, live(bi)));
                    }
                }
                for bi in 0..2 {
                    lp.push(ins(add(s.un_jc[bi], 1), Pred::trit(s.cmp, j as u32, Cmp::Eq, bi as i64 + 1)));
                }
            }
            let lp = Block::new(format!("union.loop[r{s1}:{k1},r{s2}:{k2}]"), lp, vec![], &b.layout)?;
            Ok(vec![
                call(&lp, false, Pred::always()),
                ins(
                    Op::AddTrits {
                        dst: out,
                        src: s.tmp,
                        sub: false,
                    },
                    Pred::always(),
                ),
                call(&lp, true, Pred::always()),
            ])
        })
    }

    pub fn program(&self, main: Rc<Block>) -> Program {
        Program {
            layout: self.layout.clone(),
            main,
        }
    }
}

/// A stand-alone routine and its interface registers.
#[derive(Debug, Clone)]
pub struct Routine {
    pub program: Program,
    pub regs: BTreeMap<&'static str, RegId>,
}

impl Routine {
    pub fn reg(&self, name: &str) -> RegId {
        self.regs[name]
    }
}

fn bare(n: usize, kmax: usize, capacity: usize) -> Builder {
    Builder::new(Dims {
        n,
        kmax: kmax.max(1),
        cap_max: capacity,
        clauses: 1,
    })
}

/// `|enc S⟩|j⟩|0⟩ ↦ |enc S⟩|j⟩|y_j⟩` for `k`-element subsets of `1..=2n+1`.
pub fn build_extract(k: usize, capacity: usize, n: usize) -> Result<Routine> {
    let mut b = bare(n, k, capacity);
    let set = b.layout.add_trits("set", capacity as u32);
    let j = b.layout.add_bits("j", bits_for(k + 1));
    let out = b.layout.add_bits("out", b.width);
    let main = b.extract(set, k, JSrc::Reg(j, 0), out)?;
    Ok(Routine {
        program: b.program(main),
        regs: BTreeMap::from([("set", set), ("j", j), ("out", out)]),
    })
}

/// `|enc S⟩|v⟩|0⟩ ↦ |enc S⟩|v⟩|v ∈ S⟩`.
pub fn build_contains(k: usize, capacity: usize, n: usize) -> Result<Routine> {
    let mut b = bare(n, k, capacity);
    let set = b.layout.add_trits("set", capacity as u32);
    let v = b.layout.add_bits("v", b.width);
    let out = b.layout.add_bits("out", 1);
    let main = b.contains(set, k, VSrc::Reg(v), out)?;
    Ok(Routine {
        program: b.program(main),
        regs: BTreeMap::from([("set", set), ("v", v), ("out", out)]),
    })
}

/// `|v⟩|enc S⟩ ↦ |v⟩|enc S ∪ {v}⟩` for `k`-element `S`.
pub fn build_append(k: usize, capacity: usize, n: usize) -> Result<Routine> {
    let mut b = bare(n, k + 1, capacity);
    let set = b.layout.add_trits("set", capacity as u32);
    let v = b.layout.add_bits("v", b.width);
    let main = b.append(set, k, v)?;
    Ok(Routine {
        program: b.program(main),
        regs: BTreeMap::from([("set", set), ("v", v)]),
    })
}

/// `|enc S1⟩|enc S2⟩|0⟩ ↦ |enc S1⟩|enc S2⟩|enc S1∪S2⟩` over `1..=max_elem`.
pub fn build_union(k1: usize, k2: usize, n: usize, max_elem: usize) -> Result<Routine> {
    use super::setcode::capacity;
    let total = k1 + k2;
    let cap = capacity(total, max_elem);
    let mut b = bare(n, total, cap);
    let s1 = b.layout.add_trits("s1", capacity(k1, max_elem) as u32);
    let s2 = b.layout.add_trits("s2", capacity(k2, max_elem) as u32);
    let out = b.layout.add_trits("out", cap as u32);
    let main = b.union(s1, k1, s2, k2, out)?;
    Ok(Routine {
        program: b.program(main),
        regs: BTreeMap::from([("s1", s1), ("s2", s2), ("out", out)]),
    })
}
