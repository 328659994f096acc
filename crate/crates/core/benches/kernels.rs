// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::hint::black_box;

use collabtwin::metrics::{betweenness_centrality_with, closeness_centrality_with, ClosenessMode};
use collabtwin::netbuild::{collapse, CollabGraph, Direction, NewEdge, SimpleWeightedGraph};
use collabtwin::rulemine::{apriori_frequent_with, Denominator, Transaction};
use collabtwin::{IssueId, Parallelism};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn graph(n: u64, m: usize) -> SimpleWeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut b = CollabGraph::builder();
    for _ in 0..m {
        b.add_edge(NewEdge::new(rng.random_range(1..=n), rng.random_range(1..=n)));
    }
    collapse(&b.build(), Direction::Directed, None).unwrap()
}

fn transactions(count: usize, universe: usize) -> Vec<Transaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    (0..count)
        .map(|i| {
            let items: BTreeSet<String> =
                (0..universe).filter(|k| rng.random_bool(0.5 / (1.0 + *k as f64 / 4.0))).map(|k| format!("{k}->0")).collect();
            Transaction::new(IssueId(i as u64), items)
        })
        .collect()
}

fn paths(c: &mut Criterion) {
    let g = graph(300, 6000);
    let mut group = c.benchmark_group("paths");
    for (name, par) in MODES {
        group.bench_with_input(BenchmarkId::new("betweenness", name), &par, |b, &par| {
            b.iter(|| betweenness_centrality_with(black_box(&g), par))
        });
        group.bench_with_input(BenchmarkId::new("closeness", name), &par, |b, &par| {
            b.iter(|| closeness_centrality_with(black_box(&g), ClosenessMode::Normalized, par))
        });
    }
    group.finish();
}

fn apriori(c: &mut Criterion) {
    let tx = transactions(5000, 40);
    let mut group = c.benchmark_group("apriori");
    for (name, par) in MODES {
        group.bench_with_input(BenchmarkId::new("frequent", name), &par, |b, &par| {
            b.iter(|| apriori_frequent_with(black_box(&tx), 0.01, Denominator::Transactions, par).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, paths, apriori);
criterion_main!(benches);
