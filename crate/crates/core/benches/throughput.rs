use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jacstab_core::corpus::{self, GraphShape};
use jacstab_core::selftest::{check_derive_theta, check_treelike_uniqueness, theta_grid, Depth};
use jacstab_core::stability::{enumerate_stable, Basepoint};
use jacstab_core::{Execution, Polarization, RuleTable, StabilityMode};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_stable");
    let shape = GraphShape { max_vertices: 7, max_markings: 3, max_vertex_genus: 1, max_extra_edges: 4, max_loops: 0 };
    let graph = (0..)
        .map(|s| corpus::random_graph(s, &shape))
        .find(|g| g.vertex_count() >= 6 && !g.is_treelike())
        .unwrap();
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::new(name, graph.vertex_count()), &mode, |b, &mode| {
            b.iter(|| enumerate_stable(black_box(&graph), &Polarization::CanonicalZero, StabilityMode::Qstable, Basepoint::Marking1, mode).unwrap())
        });
    }
    group.finish();
}

fn formula_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("derive_theta_grid");
    group.sample_size(10);
    let rules = RuleTable::default();
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| check_derive_theta(theta_grid(Depth::Small.grid()), black_box(&rules), mode)));
    }
    group.finish();
}

fn treelike_corpus(c: &mut Criterion) {
    let mut group = c.benchmark_group("treelike_corpus");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| check_treelike_uniqueness(black_box(7), 50, 8, mode)));
    }
    group.finish();
}

criterion_group!(benches, enumeration, formula_grid, treelike_corpus);
criterion_main!(benches);
