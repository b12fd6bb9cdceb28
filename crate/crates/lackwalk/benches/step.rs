use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use lackwalk::experiments::{make_marked_block, make_marked_run};
use lackwalk::{
    build_lattice, step, step_sequential, CoinFamily, CoinSpec, VertexId, WalkState,
};

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");

    // 1D ring, single target
    for n in [1_000usize, 10_000] {
        let g = build_lattice(1, n).unwrap();
        let spec = CoinSpec::new(CoinFamily::G, 0.1 / n as f64).unwrap();
        let marked = make_marked_run(&g, 1, VertexId(0)).unwrap();

        group.bench_with_input(BenchmarkId::new("1d/parallel", n), &n, |b, _| {
            let mut state = WalkState::uniform(g, &spec);
            b.iter(|| step(&mut state, &spec, &marked).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("1d/sequential", n), &n, |b, _| {
            let mut state = WalkState::uniform(g, &spec);
            b.iter(|| step_sequential(&mut state, &spec, &marked).unwrap());
        });
    }

    // 2D torus, 2x1 block
    for side in [40usize, 100] {
        let g = build_lattice(2, side).unwrap();
        let spec = CoinSpec::new(CoinFamily::G, 0.01).unwrap();
        let marked = make_marked_block(&g, 2, 1, g.vertex(0, 0)).unwrap();

        group.bench_with_input(BenchmarkId::new("2d/parallel", side), &side, |b, _| {
            let mut state = WalkState::uniform(g, &spec);
            b.iter(|| step(&mut state, &spec, &marked).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("2d/sequential", side), &side, |b, _| {
            let mut state = WalkState::uniform(g, &spec);
            b.iter(|| step_sequential(&mut state, &spec, &marked).unwrap());
        });
    }

    group.finish();
}

criterion_group!(benches, bench_step);
criterion_main!(benches);
