use hybridsat::circuit::machine::{Program, RunOptions, Tape};
use hybridsat::circuit::setcode::encode_with_capacity;
use hybridsat::circuit::{build_append, build_contains, build_extract, build_union, capacity, decode};
use hybridsat::gen::rng;
use rand::seq::index::sample;
use rand::Rng;

const CHECKED: RunOptions = RunOptions { inverse: false, check_ledger: true };
const INVERSE: RunOptions = RunOptions { inverse: true, check_ledger: true };

fn random_set<R: Rng>(k: usize, max: usize, g: &mut R) -> Vec<usize> {
    let mut v: Vec<usize> = sample(g, max, k).into_iter().map(|x| x + 1).collect();
    v.sort_unstable();
    v
}

fn reversible_on_random_tapes(p: &Program, seed: u64, count: usize) {
    let mut g = rng(seed);
    for _ in 0..count {
        let mut t = Tape::zeros(&p.layout);
        t.randomize(&p.layout, &mut g);
        let before = t.clone();
        p.run(&mut t, RunOptions::default()).unwrap();
        p.run(&mut t, RunOptions { inverse: true, check_ledger: false }).unwrap();
        assert_eq!(t, before);
    }
}

#[test]
fn extract_matches_decoder() {
    let n = 20;
    let mut g = rng(1);
    for k in 1..=5 {
        let cap = capacity(k, 2 * n);
        let r = build_extract(k, cap, n).unwrap();
        let l = &r.program.layout;
        for _ in 0..20 {
            let set = random_set(k, 2 * n, &mut g);
            let code = encode_with_capacity(&set, cap).unwrap();
            for j in 0..=k + 1 {
                let mut t = Tape::zeros(l);
                t.set_trits(l, r.reg("set"), &code.trits);
                t.set(l, r.reg("j"), j as u64);
                let start = t.clone();
                r.program.run(&mut t, CHECKED).unwrap();
                let want = if (1..=k).contains(&j) { set[j - 1] } else { 0 };
                assert_eq!(t.get(l, r.reg("out")) as usize, want, "set {set:?} j {j}");
                r.program.run(&mut t, INVERSE).unwrap();
                assert_eq!(t, start);
            }
        }
        reversible_on_random_tapes(&r.program, k as u64, 100);
    }
}

#[test]
fn extract_examples() {
    let r = build_extract(2, capacity(2, 10), 5).unwrap();
    let l = &r.program.layout;
    for (j, want) in [(1, 3), (2, 5)] {
        let mut t = Tape::zeros(l);
        t.set_trits(l, r.reg("set"), &[1, 1, 2, 1, 0, 2]);
        t.set(l, r.reg("j"), j);
        r.program.run(&mut t, CHECKED).unwrap();
        assert_eq!(t.get(l, r.reg("out")), want);
    }
}

#[test]
fn contains_matches_membership() {
    let n = 12;
    let mut g = rng(2);
    for k in 0..=5 {
        let cap = capacity(k, 2 * n).max(1);
        let r = build_contains(k, cap, n).unwrap();
        let l = &r.program.layout;
        for _ in 0..10 {
            let set = random_set(k, 2 * n, &mut g);
            let code = encode_with_capacity(&set, cap).unwrap();
            for v in 1..=2 * n {
                let mut t = Tape::zeros(l);
                t.set_trits(l, r.reg("set"), &code.trits);
                t.set(l, r.reg("v"), v as u64);
                r.program.run(&mut t, CHECKED).unwrap();
                assert_eq!(t.get(l, r.reg("out")) == 1, set.contains(&v), "set {set:?} v {v}");
            }
        }
        reversible_on_random_tapes(&r.program, 10 + k as u64, 100);
    }
}

#[test]
fn append_matches_encoder() {
    let n = 20;
    let mut g = rng(3);
    for k in 0..=4 {
        let cap = capacity(k + 1, 2 * n);
        let r = build_append(k, cap, n).unwrap();
        let l = &r.program.layout;
        for _ in 0..30 {
            let mut set = random_set(k + 1, 2 * n, &mut g);
            let v = set.pop().unwrap();
            let mut t = Tape::zeros(l);
            t.set_trits(l, r.reg("set"), &encode_with_capacity(&set, cap).unwrap().trits);
            t.set(l, r.reg("v"), v as u64);
            let start = t.clone();
            r.program.run(&mut t, CHECKED).unwrap();
            set.push(v);
            assert_eq!(decode(t.trits(l, r.reg("set"))).unwrap(), set);
            r.program.run(&mut t, INVERSE).unwrap();
            assert_eq!(t, start);
        }
        reversible_on_random_tapes(&r.program, 20 + k as u64, 100);
    }
}

#[test]
fn append_examples() {
    let r = build_append(1, 6, 5).unwrap();
    let l = &r.program.layout;
    let mut t = Tape::zeros(l);
    t.set_trits(l, r.reg("set"), &[1, 1, 2]);
    t.set(l, r.reg("v"), 5);
    r.program.run(&mut t, CHECKED).unwrap();
    assert_eq!(t.trits(l, r.reg("set")), &[1, 1, 2, 1, 0, 2]);
}

#[test]
fn union_matches_set_union() {
    let n = 10;
    let mut g = rng(4);
    for (k1, k2) in [(1, 1), (2, 2), (1, 0), (0, 2), (2, 1), (3, 2), (4, 4)] {
        let max = 2 * n;
        let r = build_union(k1, k2, n, max).unwrap();
        let l = &r.program.layout;
        for _ in 0..15 {
            let all = random_set(k1 + k2, max, &mut g);
            let mut idx: Vec<usize> = sample(&mut g, k1 + k2, k1).into_iter().collect();
            idx.sort_unstable();
            let a: Vec<usize> = idx.iter().map(|&i| all[i]).collect();
            let b: Vec<usize> = all.iter().copied().filter(|x| !a.contains(x)).collect();
            let mut t = Tape::zeros(l);
            t.set_trits(l, r.reg("s1"), &encode_with_capacity(&a, capacity(k1, max)).unwrap().trits);
            t.set_trits(l, r.reg("s2"), &encode_with_capacity(&b, capacity(k2, max)).unwrap().trits);
            let start = t.clone();
            r.program.run(&mut t, CHECKED).unwrap();
            assert_eq!(decode(t.trits(l, r.reg("out"))).unwrap(), all, "{a:?} ∪ {b:?}");
            r.program.run(&mut t, INVERSE).unwrap();
            assert_eq!(t, start);
        }
        reversible_on_random_tapes(&r.program, 30 + k1 as u64, 100);
    }
}

#[test]
fn union_examples() {
    for (a, b, want) in [
        (vec![3], vec![5], vec![3, 5]),
        (vec![1, 4], vec![2, 9], vec![1, 2, 4, 9]),
        (vec![2, 7], vec![], vec![2, 7]),
    ] {
        let r = build_union(a.len(), b.len(), 5, 10).unwrap();
        let l = &r.program.layout;
        let mut t = Tape::zeros(l);
        t.set_trits(l, r.reg("s1"), &encode_with_capacity(&a, capacity(a.len(), 10)).unwrap().trits);
        t.set_trits(l, r.reg("s2"), &encode_with_capacity(&b, capacity(b.len(), 10)).unwrap().trits);
        r.program.run(&mut t, CHECKED).unwrap();
        assert_eq!(decode(t.trits(l, r.reg("out"))).unwrap(), want);
    }
}

#[test]
fn memo_does_not_change_results() {
    use hybridsat::circuit::{Compiled, Memo};
    let n = 12;
    let progs = [
        build_extract(3, capacity(3, 2 * n), n).unwrap().program,
        build_contains(3, capacity(3, 2 * n), n).unwrap().program,
        build_union(2, 2, n, 2 * n).unwrap().program,
    ];
    let mut g = rng(40);
    for p in &progs {
        let c = Compiled::new(&p.layout, &p.main);
        let mut shared = Memo::new();
        let mut tapes = Vec::new();
        for _ in 0..20 {
            let mut t = Tape::zeros(&p.layout);
            t.randomize(&p.layout, &mut g);
            tapes.push(t);
        }
        for round in 0..2 {
            for t in &tapes {
                for inverse in [false, true] {
                    let opts = RunOptions { inverse, check_ledger: false };
                    let (mut a, mut b) = (t.clone(), t.clone());
                    let sa = c.run_memo(&mut a, opts, &mut Memo::off()).unwrap();
                    let sb = c.run_memo(&mut b, opts, &mut shared).unwrap();
                    assert_eq!(a, b, "round {round}");
                    assert_eq!(sa, sb);
                }
            }
        }
        assert!(shared.hits > 0);
    }
}
