use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nodelab_core::heuristics::dsatur;
use nodelab_core::par::{map_parallel, map_sequential};
use nodelab_core::{DatasetSpec, Family, Problem};
use nodelab_policy::{greedy_rollout, Hyper, Instance, ModelParameters};

fn dataset(n: usize) -> Vec<Instance> {
    DatasetSpec::new(vec![Family::ser(), Family::ws()], vec![n], 64)
        .generate(7)
        .unwrap()
        .into_iter()
        .map(|g| Instance::new(g.graph, Hyper::with_dim(32).d_in, g.spec.family.dense()).unwrap())
        .collect()
}

fn greedy(c: &mut Criterion) {
    let params = ModelParameters::init(Hyper::with_dim(32), 1).unwrap();
    let insts = dataset(50);
    let one = |i: &Instance| greedy_rollout(&Problem::Coloring, i, &params).unwrap().terminal_cost;
    let mut group = c.benchmark_group("greedy-rollouts");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", insts.len()), |b| b.iter(|| map_sequential(&insts, one)));
    group.bench_function(BenchmarkId::new("parallel", insts.len()), |b| b.iter(|| map_parallel(&insts, one)));
    group.finish();
}

fn heuristic(c: &mut Criterion) {
    let insts = dataset(200);
    let one = |i: &Instance| dsatur(&i.graph).cost;
    let mut group = c.benchmark_group("dsatur");
    group.bench_function(BenchmarkId::new("sequential", insts.len()), |b| b.iter(|| map_sequential(&insts, one)));
    group.bench_function(BenchmarkId::new("parallel", insts.len()), |b| b.iter(|| map_parallel(&insts, one)));
    group.finish();
}

criterion_group!(benches, greedy, heuristic);
criterion_main!(benches);
