use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use gaussnet_bench::{chain_resultant, random_states};
use gaussnet_core::ggqc;

fn chain(c: &mut Criterion) {
    let state = chain_resultant(0.5);
    c.bench_function("ggqc chain 9 modes", |b| b.iter(|| ggqc(black_box(&state)).unwrap()));
}

fn random(c: &mut Criterion) {
    let mut group = c.benchmark_group("ggqc random");
    for n in [3, 6, 9, 12] {
        let state = random_states(n, 1).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, s| b.iter(|| ggqc(s).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, chain, random);
criterion_main!(benches);
