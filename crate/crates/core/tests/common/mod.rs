//! Shared generators for the integration suites.
#![allow(dead_code)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swreach::{rat, RationalMatrix, SwitchedSystem};

pub fn matrix_from(rows: usize, cols: usize, entries: &[i64]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rat(entries[i * cols + j]));
        }
    }
    m
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> RationalMatrix {
    let entries: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
    matrix_from(rows, cols, &entries)
}

pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> RationalMatrix {
    loop {
        let m = random_matrix(rng, n, n, bound);
        if m.rank() == n {
            return m;
        }
    }
}

/// Invertible `A_i`, `B_i` with 1 or 2 columns, entries in `[-2, 2]`.
pub fn random_invertible_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SwitchedSystem {
    let pairs = (0..m)
        .map(|_| {
            let a = random_invertible(rng, n, 2);
            let p = rng.gen_range(1..=2);
            (a, random_matrix(rng, n, p, 2))
        })
        .collect();
    SwitchedSystem::from_pairs(pairs).unwrap()
}

/// Every mode has `Im A + Im B = R^n`, and at least one `A_i` is singular.
pub fn random_regular_singular_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> SwitchedSystem {
    loop {
        let pairs: Vec<_> = (0..m)
            .map(|_| loop {
                let a = random_matrix(rng, n, n, 2);
                let p = rng.gen_range(1..=n);
                let b = random_matrix(rng, n, p, 2);
                if a.hstack(&b).unwrap().rank() == n {
                    break (a, b);
                }
            })
            .collect();
        let sys = SwitchedSystem::from_pairs(pairs).unwrap();
        if !sys.all_a_invertible() {
            return sys;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every word over `1..=m` of length exactly `len`.
pub fn words(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=m).map(move |s| {
                    let mut w = w.clone();
                    w.push(s);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = RationalMatrix> {
    prop::collection::vec(-2i64..=2, rows * cols).prop_map(move |e| matrix_from(rows, cols, &e))
}

pub fn invertible_strategy(n: usize) -> impl Strategy<Value = RationalMatrix> {
    matrix_strategy(n, n).prop_filter("invertible", |m| m.is_invertible().unwrap())
}

/// Systems with `n ≤ max_n`, `m ≤ max_m`, arbitrary `A_i` and 1–2 input columns.
pub fn system_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = SwitchedSystem> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        prop::collection::vec(
            (
                matrix_strategy(n, n),
                (1..=2usize).prop_flat_map(move |p| matrix_strategy(n, p)),
            ),
            m,
        )
        .prop_map(|pairs| SwitchedSystem::from_pairs(pairs).unwrap())
    })
}

pub fn invertible_system_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = SwitchedSystem> {
    (1..=max_n, 1..=max_m).prop_flat_map(|(n, m)| {
        prop::collection::vec(
            (
                invertible_strategy(n),
                (1..=2usize).prop_flat_map(move |p| matrix_strategy(n, p)),
            ),
            m,
        )
        .prop_map(|pairs| SwitchedSystem::from_pairs(pairs).unwrap())
    })
}
