//! Instance generators for tests and sweeps. All take an explicit RNG so runs
//! are reproducible from a single seed.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cnf::{Assignment, Clause, Formula, Literal};

pub type SeedRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child seed (splitmix64 step).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_clause<R: Rng>(n: usize, k: usize, rng: &mut R) -> Clause {
    let vars = sample(rng, n, k.min(n));
    Clause::new(vars.iter().map(|v| Literal::new(v + 1, rng.gen()))).expect("distinct variables")
}

/// Uniform random k-CNF with `clauses` clauses over distinct variables.
pub fn random_ksat<R: Rng>(n: usize, clauses: usize, k: usize, rng: &mut R) -> Formula {
    let cs = (0..clauses).map(|_| random_clause(n, k, rng)).collect();
    Formula::new(n, cs).expect("valid formula")
}

pub fn random_3sat<R: Rng>(n: usize, clauses: usize, rng: &mut R) -> Formula {
    random_ksat(n, clauses, 3, rng)
}

pub fn random_assignment<R: Rng>(n: usize, rng: &mut R) -> Assignment {
    Assignment::from_bits((0..n).map(|_| rng.gen()).collect())
}

/// Random 3-CNF with a planted solution: clauses are resampled until the
/// planted assignment satisfies them. Returns the formula and the plant.
pub fn planted_3sat<R: Rng>(n: usize, clauses: usize, rng: &mut R) -> (Formula, Assignment) {
    let plant = random_assignment(n, rng);
    (planted_with(&plant, clauses, rng), plant)
}

pub fn planted_with<R: Rng>(plant: &Assignment, clauses: usize, rng: &mut R) -> Formula {
    let n = plant.len();
    let mut cs = Vec::with_capacity(clauses);
    while cs.len() < clauses {
        let c = random_clause(n, 3, rng);
        if c.is_satisfied_by(plant.bits()) {
            cs.push(c);
        }
    }
    Formula::new(n, cs).expect("valid formula")
}

/// Pigeonhole principle: `holes + 1` pigeons into `holes` holes. Clause
/// width is `holes` for the pigeon clauses, so `holes <= 3` stays 3-CNF.
pub fn pigeonhole(holes: usize) -> Formula {
    let pigeons = holes + 1;
    let var = |p: usize, h: usize| p * holes + h + 1;
    let mut cs = Vec::new();
    for p in 0..pigeons {
        cs.push(Clause::new((0..holes).map(|h| Literal::pos(var(p, h)))).unwrap());
    }
    for h in 0..holes {
        for p in 0..pigeons {
            for q in p + 1..pigeons {
                cs.push(Clause::new([Literal::neg(var(p, h)), Literal::neg(var(q, h))]).unwrap());
            }
        }
    }
    Formula::new(pigeons * holes, cs).unwrap()
}

/// Exhaustive satisfiability check for small `n` (ground truth for tests).
pub fn brute_force_sat(f: &Formula) -> Option<Assignment> {
    let n = f.num_vars();
    assert!(n <= 26, "brute force limited to 26 variables");
    (0u64..1 << n)
        .map(|v| Assignment::from_index(v, n))
        .find(|x| f.is_satisfied_by(x))
}

/// Random dense 3-CNF certified unsatisfiable by exhaustive search.
pub fn certified_unsat<R: Rng>(n: usize, clauses: usize, rng: &mut R) -> Formula {
    loop {
        let f = random_3sat(n, clauses, rng);
        if brute_force_sat(&f).is_none() {
            return f;
        }
    }
}
