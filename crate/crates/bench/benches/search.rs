use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use swreach::examples::cycle_swap;
use swreach::extremal::family_a;
use swreach::{rref, shortest_controllable_sequences, v_chain, RationalMatrix};

fn bfs(c: &mut Criterion) {
    let ex = cycle_swap();
    c.bench_function("shortest cycle_swap", |b| {
        b.iter(|| shortest_controllable_sequences(black_box(&ex), None, 64).unwrap())
    });
    let fa = family_a(6, 6).unwrap();
    c.bench_function("shortest family_a(6,6)", |b| {
        b.iter(|| shortest_controllable_sequences(black_box(&fa), None, 1).unwrap())
    });
}

fn chain(c: &mut Criterion) {
    let fa = family_a(6, 3).unwrap();
    c.bench_function("v_chain family_a(6,3)", |b| b.iter(|| v_chain(black_box(&fa))));
}

fn elimination(c: &mut Criterion) {
    let m = RationalMatrix::from_rows(
        (0..6)
            .map(|i| (0..6).map(|j| swreach::rat(((i * 7 + j * 3) % 5) as i64 - 2)).collect())
            .collect(),
    )
    .unwrap();
    c.bench_function("rref 6x6", |b| b.iter(|| rref(black_box(&m))));
}

criterion_group!(benches, bfs, chain, elimination);
criterion_main!(benches);
