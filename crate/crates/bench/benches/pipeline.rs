//! Benchmarks for the hot paths: generator algebra, the invariant-subspace
//! reduction, the root-system solver, and the oscillator-basis oracle.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use vibronic_qes::bethe::solve_bethe;
use vibronic_qes::model::{LevelParams, ModelParams};
use vibronic_qes::oracle::{spectrum, OracleConfig};
use vibronic_qes::sl2::{allowed_couplings, make_generators};

fn bench_commutators(c: &mut Criterion) {
    c.bench_function("sl2 commutators n=10", |bench| {
        bench.iter(|| {
            let g = make_generators(black_box(10));
            let c1 = g.jplus.commutator(&g.jminus).unwrap();
            black_box(c1);
        })
    });
}

fn bench_allowed_couplings(c: &mut Criterion) {
    let mp = ModelParams::new(0.9, 0.3, 0.0).unwrap();
    c.bench_function("allowed couplings n=8", |bench| {
        bench.iter(|| {
            let branches = allowed_couplings(black_box(8), &mp).unwrap();
            black_box(branches);
        })
    });
}

fn bench_solve_bethe(c: &mut Criterion) {
    let mp = ModelParams::new(0.9, 0.3, 0.0).unwrap();
    let lp = LevelParams::for_level(4, &mp);
    c.bench_function("root system n=4", |bench| {
        bench.iter(|| {
            let out = solve_bethe(black_box(4), &lp, &mp, None).unwrap();
            black_box(out);
        })
    });
}

fn bench_oracle(c: &mut Criterion) {
    let mp = ModelParams::new(0.9, 0.3, 0.7).unwrap();
    let cfg = OracleConfig::new(128, 1e-7).unwrap();
    c.bench_function("oracle spectrum N=128", |bench| {
        bench.iter(|| {
            let rep = spectrum(&mp, &cfg).unwrap();
            black_box(rep);
        })
    });
}

criterion_group!(
    benches,
    bench_commutators,
    bench_allowed_couplings,
    bench_solve_bethe,
    bench_oracle
);
criterion_main!(benches);
