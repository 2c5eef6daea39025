//! Plain (irreversible) versions of the circuit routines, used as oracles.

use crate::cnf::{Assignment, Formula, VariableSet};

/// `x(V)`: the all-zero center with the real variables of `V` flipped.
pub fn x_of(v: &VariableSet, n: usize) -> Assignment {
    Assignment::zeros(n).flip_set(v)
}

/// The `s`-th smallest of `vars` not in `v`, or `dummy` if there are fewer.
pub fn select_target(vars: &[usize], v: &VariableSet, s: u8, dummy: usize) -> usize {
    let mut free: Vec<usize> = vars.iter().copied().filter(|&x| !v.contains(x)).collect();
    free.sort_unstable();
    free.get(s as usize - 1).copied().unwrap_or(dummy)
}

/// Next element `v_i` given `V_{i-1}` and the choice `s_i`.
pub fn calculate(f: &Formula, v: &VariableSet, i: usize, s: u8) -> usize {
    let n = f.num_vars();
    match f.first_unsatisfied(&x_of(v, n)) {
        None => n + i,
        Some(j) => select_target(&f.clauses()[j].sorted_vars(), v, s, n + i),
    }
}

/// `V(s⃗)` for a subsumed formula and choices in `1..=3`.
pub fn flip_set(f: &Formula, s: &[u8]) -> VariableSet {
    let mut v = VariableSet::empty();
    for (i, &si) in s.iter().enumerate() {
        let next = calculate(f, &v, i + 1, si);
        v.insert(next);
    }
    v
}

/// All `3^r` choice strings in lexicographic order.
pub fn choice_strings(r: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..3usize.pow(r as u32)).map(move |mut idx| {
        let mut s = vec![1u8; r];
        for c in s.iter_mut().rev() {
            *c = (idx % 3) as u8 + 1;
            idx /= 3;
        }
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn select_examples() {
        let empty = VariableSet::empty();
        assert_eq!(select_target(&[2, 5, 7], &empty, 2, 11), 5);
        let full = VariableSet::new(vec![2, 5, 7]).unwrap();
        for s in 1..=3 {
            assert_eq!(select_target(&[2, 5, 7], &full, s, 11), 11);
        }
    }

    #[test]
    fn calculate_first_round() {
        let f = Formula::from_lits(4, &[&[1, 2, 3], &[-4]]).unwrap();
        assert_eq!(calculate(&f, &VariableSet::empty(), 1, 1), 1);
        let sat = Formula::from_lits(4, &[&[-1]]).unwrap();
        assert_eq!(calculate(&sat, &VariableSet::empty(), 3, 2), 7);
    }

    #[test]
    fn choice_enumeration() {
        let all: Vec<_> = choice_strings(2).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![1, 1]);
        assert_eq!(all[8], vec![3, 3]);
        assert_eq!(choice_strings(0).count(), 1);
    }
}
