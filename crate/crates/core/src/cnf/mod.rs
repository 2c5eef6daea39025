//! Clause-list formulas, assignments and the handful of transformations the
//! ball solvers need (restriction, center subsumption, set flips).
//!
//! Variables are 1-based as in DIMACS. Indices in `(n, 2n]` are dummy
//! variables: they may appear in [`VariableSet`]s but never in clauses.

mod dimacs;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dimacs::{parse_dimacs, parse_dimacs_with_width, to_dimacs};

/// Default maximum clause width.
pub const DEFAULT_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    var: u32,
    negated: bool,
}

impl Literal {
    pub fn new(var: usize, negated: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Literal {
            var: var as u32,
            negated,
        }
    }

    pub fn pos(var: usize) -> Self {
        Self::new(var, false)
    }

    pub fn neg(var: usize) -> Self {
        Self::new(var, true)
    }

    /// From a signed DIMACS integer.
    pub fn from_dimacs(lit: i64) -> Self {
        assert!(lit != 0);
        Self::new(lit.unsigned_abs() as usize, lit < 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.negated {
            -(self.var as i64)
        } else {
            self.var as i64
        }
    }

    #[inline]
    pub fn var(self) -> usize {
        self.var as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn complement(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    /// Value of the literal when its variable takes `value`.
    #[inline]
    pub fn value_under(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals over distinct variables. May be empty (an empty
/// clause is unsatisfiable).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, dropping duplicate literals. Complementary literals are
    /// rejected.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Result<Self> {
        let mut out: Vec<Literal> = Vec::with_capacity(3);
        for l in lits {
            match out.iter().find(|o| o.var == l.var) {
                Some(o) if o.negated == l.negated => {}
                Some(_) => return Err(Error::ComplementaryLiterals { var: l.var() }),
                None => out.push(l),
            }
        }
        Ok(Clause { lits: out })
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<Self> {
        Self::new(lits.iter().map(|&l| Literal::from_dimacs(l)))
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.lits.iter().any(|l| l.var() == var)
    }

    #[inline]
    pub fn is_satisfied_by(&self, bits: &[bool]) -> bool {
        self.lits.iter().any(|l| l.value_under(bits[l.var() - 1]))
    }

    /// Variables of the clause in ascending order.
    pub fn sorted_vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.lits.iter().map(|l| l.var()).collect();
        v.sort_unstable();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidParam("formula needs at least one variable".into()));
        }
        for c in &clauses {
            for l in c.literals() {
                if l.var() > num_vars {
                    return Err(Error::VarOutOfRange {
                        var: l.var(),
                        max: num_vars,
                    });
                }
            }
        }
        Ok(Formula { num_vars, clauses })
    }

    /// Convenience constructor from DIMACS-style signed literals.
    pub fn from_lits(num_vars: usize, clauses: &[&[i64]]) -> Result<Self> {
        let cs = clauses
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(num_vars, cs)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn max_width(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.num_vars {
            return Err(Error::LengthMismatch {
                expected: self.num_vars,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Assignment) -> Result<bool> {
        self.check_len(x)?;
        Ok(self.is_satisfied_by(x))
    }

    /// Unchecked evaluation; panics if `x` is shorter than `num_vars`.
    #[inline]
    pub fn is_satisfied_by(&self, x: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.is_satisfied_by(&x.bits))
    }

    /// Index of the lowest-numbered clause falsified by `x`.
    #[inline]
    pub fn first_unsatisfied(&self, x: &Assignment) -> Option<usize> {
        self.clauses.iter().position(|c| !c.is_satisfied_by(&x.bits))
    }

    /// `F|_{l=1}`: clauses containing `l` are dropped and `¬l` is deleted
    /// from the remaining ones. Empty clauses survive in the output.
    pub fn restrict(&self, l: Literal) -> Formula {
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for c in &self.clauses {
            if c.lits.contains(&l) {
                continue;
            }
            let comp = l.complement();
            if c.lits.contains(&comp) {
                clauses.push(Clause {
                    lits: c.lits.iter().copied().filter(|&x| x != comp).collect(),
                });
            } else {
                clauses.push(c.clone());
            }
        }
        Formula {
            num_vars: self.num_vars,
            clauses,
        }
    }

    /// Restricts by several literals in turn.
    pub fn restrict_all(&self, lits: &[Literal]) -> Formula {
        let mut f = self.clone();
        for &l in lits {
            f = f.restrict(l);
        }
        f
    }

    /// `F_x`: every literal on a variable with `x_i = 1` is negated, so that
    /// `F_x(z) = F(z ⊕ x)`.
    pub fn subsume_center(&self, x: &Assignment) -> Result<Formula> {
        self.check_len(x)?;
        let clauses = self
            .clauses
            .iter()
            .map(|c| Clause {
                lits: c
                    .lits
                    .iter()
                    .map(|&l| if x.get(l.var()) { l.complement() } else { l })
                    .collect(),
            })
            .collect();
        Ok(Formula {
            num_vars: self.num_vars,
            clauses,
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_dimacs(self))
    }
}

/// A point of `{0,1}^n`, indexed by 1-based variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Low `n` bits of `v`, variable 1 in the least significant position.
    pub fn from_index(v: u64, n: usize) -> Self {
        Assignment {
            bits: (0..n).map(|i| (v >> i) & 1 == 1).collect(),
        }
    }

    /// Parses a string of `0`/`1`, variable 1 first.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    line: 1,
                    msg: format!("bad assignment character {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment::from_bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Value of 1-based variable `var`.
    #[inline]
    pub fn get(&self, var: usize) -> bool {
        self.bits[var - 1]
    }

    #[inline]
    pub fn set(&mut self, var: usize, value: bool) {
        self.bits[var - 1] = value;
    }

    #[inline]
    pub fn flip(&mut self, var: usize) {
        self.bits[var - 1] = !self.bits[var - 1];
    }

    /// Flips every variable of `v`; dummy indices beyond `len()` are ignored.
    pub fn flip_set(&self, v: &VariableSet) -> Assignment {
        let mut out = self.clone();
        for &i in v.indices() {
            if i <= out.len() {
                out.flip(i);
            }
        }
        out
    }

    pub fn hamming(&self, other: &Assignment) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn xor(&self, other: &Assignment) -> Assignment {
        Assignment {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Strictly increasing list of 1-based variable indices (dummies allowed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariableSet {
    indices: Vec<usize>,
}

impl VariableSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.first() == Some(&0) || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing);
        }
        Ok(VariableSet { indices })
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        assert!(indices.first() != Some(&0), "variables are 1-based");
        VariableSet { indices }
    }

    pub fn empty() -> Self {
        VariableSet::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.indices.binary_search(&v).is_ok()
    }

    /// Inserts `v`, keeping order. Returns false if already present.
    pub fn insert(&mut self, v: usize) -> bool {
        match self.indices.binary_search(&v) {
            Ok(_) => false,
            Err(pos) => {
                self.indices.insert(pos, v);
                true
            }
        }
    }

    /// Number of non-dummy members for a formula over `n` variables.
    pub fn real_count(&self, n: usize) -> usize {
        self.indices.iter().filter(|&&i| i <= n).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_clause() -> Formula {
        Formula::from_lits(3, &[&[1, 2, 3], &[-1, 2, 3], &[1, -2, 3], &[1, 2, -3]]).unwrap()
    }

    #[test]
    fn empty_formula_is_true() {
        let f = Formula::new(3, vec![]).unwrap();
        assert!(f.evaluate(&Assignment::zeros(3)).unwrap());
    }

    #[test]
    fn positive_clause_false_at_zero() {
        let f = Formula::from_lits(3, &[&[1, 2, 3]]).unwrap();
        assert!(!f.evaluate(&Assignment::zeros(3)).unwrap());
    }

    #[test]
    fn four_clause_truth_table() {
        // exhaustive: satisfied exactly at weight >= 2
        let f = four_clause();
        for v in 0..8u64 {
            let x = Assignment::from_index(v, 3);
            assert_eq!(f.evaluate(&x).unwrap(), x.weight() >= 2, "x={x}");
        }
        assert!(f.evaluate(&Assignment::parse("011").unwrap()).unwrap());
    }

    #[test]
    fn evaluate_rejects_length_mismatch() {
        let f = four_clause();
        assert!(matches!(
            f.evaluate(&Assignment::zeros(2)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn empty_clause_is_false_everywhere() {
        let f = Formula::new(2, vec![Clause::empty()]).unwrap();
        for v in 0..4 {
            assert!(!f.is_satisfied_by(&Assignment::from_index(v, 2)));
        }
    }

    #[test]
    fn restrict_examples() {
        let f = Formula::from_lits(3, &[&[1, 2, 3]]).unwrap();
        assert_eq!(f.restrict(Literal::pos(1)).num_clauses(), 0);

        let f = Formula::from_lits(2, &[&[1, 2]]).unwrap();
        assert_eq!(
            f.restrict(Literal::neg(1)),
            Formula::from_lits(2, &[&[2]]).unwrap()
        );

        let f = Formula::from_lits(1, &[&[-1]]).unwrap();
        let g = f.restrict(Literal::pos(1));
        assert!(g.has_empty_clause());
        assert_eq!(g.num_clauses(), 1);
    }

    #[test]
    fn restrict_absent_variable_is_noop() {
        let f = Formula::from_lits(4, &[&[1, 2]]).unwrap();
        assert_eq!(f.restrict(Literal::pos(4)), f);
    }

    #[test]
    fn subsume_examples() {
        let f = four_clause();
        assert_eq!(f.subsume_center(&Assignment::zeros(3)).unwrap(), f);
        let g = Formula::from_lits(1, &[&[1]]).unwrap();
        assert_eq!(
            g.subsume_center(&Assignment::parse("1").unwrap()).unwrap(),
            Formula::from_lits(1, &[&[-1]]).unwrap()
        );
    }

    #[test]
    fn flip_set_examples() {
        let x = Assignment::zeros(4);
        assert_eq!(x.flip_set(&VariableSet::empty()), x);
        let v = VariableSet::new(vec![2, 4]).unwrap();
        assert_eq!(x.flip_set(&v).to_string(), "0101");
        let v = VariableSet::new(vec![1, 6]).unwrap();
        assert_eq!(x.flip_set(&v).to_string(), "1000");
    }

    #[test]
    fn variable_set_rejects_unsorted() {
        assert_eq!(VariableSet::new(vec![3, 2]), Err(Error::NotIncreasing));
        assert_eq!(VariableSet::new(vec![2, 2]), Err(Error::NotIncreasing));
        assert_eq!(VariableSet::new(vec![0, 2]), Err(Error::NotIncreasing));
    }

    #[test]
    fn clause_dedups_and_rejects_complements() {
        let c = Clause::from_dimacs(&[1, 1, 2]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            Clause::from_dimacs(&[1, -1]),
            Err(Error::ComplementaryLiterals { var: 1 })
        );
    }
}
