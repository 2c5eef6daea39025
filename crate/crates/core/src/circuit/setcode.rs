//! Succinct trit encoding of sorted sets: the differences
//! `y1, y2 - y1, ...` in binary, most significant digit first, each
//! followed by the separator symbol 2.

use crate::cnf::VariableSet;
use crate::error::{Error, Result};

pub const SEP: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetCode {
    pub trits: Vec<u8>,
    pub k: usize,
    pub capacity: usize,
}

/// Trits sufficient for any `k`-subset of `1..=max_elem`:
/// `⌊k·log2(max_elem/k)⌋ + 2k`.
pub fn capacity(k: usize, max_elem: usize) -> usize {
    if k == 0 {
        return 0;
    }
    let m = max_elem.max(k) as f64;
    let bits = k as f64 * (m / k as f64).log2();
    (bits + 1e-9).floor() as usize + 2 * k
}

/// Encodes `s` (elements at most `2n`) with capacity for that range.
pub fn encode_set(s: &VariableSet, n: usize) -> Result<SetCode> {
    let max = s.indices().last().copied().unwrap_or(0);
    if max > 2 * n {
        return Err(Error::VarOutOfRange { var: max, max: 2 * n });
    }
    let code = encode_with_capacity(s.indices(), capacity(s.len(), 2 * n))?;
    let k = s.len() as f64;
    debug_assert!(s.is_empty() || code.trits.len() as f64 <= k * (n as f64 / k).log2() + 4.0 * k + 1e-9);
    Ok(code)
}

/// Encodes a strictly increasing list of positive integers.
pub fn encode_with_capacity(elems: &[usize], cap: usize) -> Result<SetCode> {
    if elems.first() == Some(&0) || elems.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NotIncreasing);
    }
    let mut trits = Vec::new();
    let mut prev = 0;
    for &y in elems {
        let d = y - prev;
        prev = y;
        let digits = usize::BITS - d.leading_zeros();
        for b in (0..digits).rev() {
            trits.push(((d >> b) & 1) as u8);
        }
        trits.push(SEP);
    }
    if trits.len() > cap {
        return Err(Error::InvalidParam(format!(
            "encoding needs {} trits, capacity {cap}",
            trits.len()
        )));
    }
    Ok(SetCode {
        trits,
        k: elems.len(),
        capacity: cap,
    })
}

impl SetCode {
    /// The encoding zero-padded to its capacity.
    pub fn padded(&self) -> Vec<u8> {
        let mut t = self.trits.clone();
        t.resize(self.capacity.max(t.len()), 0);
        t
    }
}

/// Decodes a (possibly zero-padded) trit string.
pub fn decode(trits: &[u8]) -> Result<Vec<usize>> {
    let bad = |msg: &str| Error::Parse {
        line: 1,
        msg: msg.to_string(),
    };
    let end = trits.iter().rposition(|&t| t == SEP).map_or(0, |p| p + 1);
    if trits[end..].iter().any(|&t| t != 0) {
        return Err(bad("digits after the last separator"));
    }
    let mut out = Vec::new();
    let mut prev = 0usize;
    for num in trits[..end].split(|&t| t == SEP).take(trits[..end].iter().filter(|&&t| t == SEP).count()) {
        if num.first() != Some(&1) {
            return Err(bad("empty number or leading zero"));
        }
        if num.len() >= usize::BITS as usize {
            return Err(bad("number too long"));
        }
        let d = num.iter().fold(0usize, |acc, &t| (acc << 1) | t as usize);
        prev += d;
        out.push(prev);
    }
    Ok(out)
}

/// Block sizes of the encoding of `V_i`: the binary expansion of `i`,
/// largest first.
pub fn block_sizes(i: usize) -> Vec<usize> {
    (0..usize::BITS)
        .rev()
        .filter(|b| (i >> b) & 1 == 1)
        .map(|b| 1usize << b)
        .collect()
}

/// Unions performed when the `i`-th element joins: one per trailing one of
/// `i - 1`, merging two blocks of size `2^l` each.
pub fn merge_plan(i: usize) -> Vec<(usize, usize)> {
    assert!(i >= 1);
    (0..i.trailing_zeros()).map(|l| (1 << l, 1 << l)).collect()
}

/// Layout of the blocks holding `V_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EffEncLayout {
    pub i: usize,
    /// `(size, capacity)` per block, largest first.
    pub blocks: Vec<(usize, usize)>,
}

impl EffEncLayout {
    /// Layout for `V_i` over `n` variables with dummies up to `n + r`.
    pub fn new(i: usize, n: usize, r: usize) -> Self {
        EffEncLayout {
            i,
            blocks: block_sizes(i).into_iter().map(|k| (k, capacity(k, n + r))).collect(),
        }
    }

    pub fn total_trits(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }

    /// Splits elements given in insertion order over the blocks.
    pub fn split<'a>(&self, elems: &'a [usize]) -> Vec<&'a [usize]> {
        assert_eq!(elems.len(), self.i);
        let mut rest = elems;
        self.blocks
            .iter()
            .map(|&(k, _)| {
                let (head, tail) = rest.split_at(k);
                rest = tail;
                head
            })
            .collect()
    }
}
