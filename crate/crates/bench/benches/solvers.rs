use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hybridsat::amplify::qball_solve;
use hybridsat::circuit::QBallCircuit;
use hybridsat::cover::{build_binary_cover, Rho};
use hybridsat::gen::{random_3sat, rng};
use hybridsat::hybrid::qfastball;
use hybridsat::pbs::{fast_ball, promise_ball, FastBallParams, PbsInstance};
use hybridsat::resource::QubitModel;
use hybridsat::Assignment;

fn ball(n: usize, r: usize) -> PbsInstance {
    let f = random_3sat(n, (4.26 * n as f64) as usize, &mut rng(7));
    PbsInstance::new(f, Assignment::zeros(n), r).unwrap()
}

fn pbs(c: &mut Criterion) {
    let fb = FastBallParams::new(3, 3).unwrap();
    let qm = QubitModel::default();
    let mut g = c.benchmark_group("pbs_n40");
    for r in [2, 4, 6] {
        let inst = ball(40, r);
        g.bench_with_input(BenchmarkId::new("promise_ball", r), &inst, |b, i| b.iter(|| promise_ball(black_box(i))));
        g.bench_with_input(BenchmarkId::new("fast_ball", r), &inst, |b, i| b.iter(|| fast_ball(black_box(i), &fb).unwrap()));
        let m = qm.qubit_count(40, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("qfastball_rt2", r), &inst, |b, i| {
            b.iter(|| qfastball(black_box(i), &fb, m, &qm, 1).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("qball_n16");
    g.sample_size(10);
    for r in [2, 3] {
        let inst = ball(16, r);
        g.bench_with_input(BenchmarkId::new("qball_solve", r), &inst, |b, i| b.iter(|| qball_solve(black_box(i), 1).unwrap()));
    }
    g.finish();
}

fn covers(c: &mut Criterion) {
    let rho: Rho = "1/4".parse().unwrap();
    let mut g = c.benchmark_group("cover");
    for n in [12, 16, 20] {
        g.bench_with_input(BenchmarkId::new("build_binary_cover", n), &n, |b, &n| {
            b.iter(|| build_binary_cover(black_box(n), rho, 1).unwrap())
        });
    }
    g.finish();
}

fn circuits(c: &mut Criterion) {
    let f = random_3sat(16, 68, &mut rng(3));
    let q = QBallCircuit::build(&f, 3).unwrap();
    c.bench_function("circuit_build_n16_r3", |b| b.iter(|| QBallCircuit::build(black_box(&f), 3).unwrap()));
    c.bench_function("circuit_run_choice_n16_r3", |b| b.iter(|| q.run_choice(black_box(&[1, 2, 3]), false).unwrap()));
}

criterion_group!(benches, pbs, covers, circuits);
criterion_main!(benches);
