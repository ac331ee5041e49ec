use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use zampling::analysis::montecarlo::mc_empty_fraction;
use zampling::data::synthetic_blobs;
use zampling::trainer::{init_p, sampled_accuracies, InitLaw, Model};
use zampling::{ArchSpec, Exec, InfluenceMatrix, SeedSpec, WeightLayout};

fn executors() -> Vec<(&'static str, Exec)> {
    let mut list = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    list.push(("parallel", Exec::Parallel));
    list
}

fn expand(c: &mut Criterion) {
    let layout = WeightLayout::new(&ArchSpec::mnistfc());
    let n = layout.len() / 8;
    let q = InfluenceMatrix::generate(&layout.fan_ins(), n, 10, SeedSpec::new(1)).unwrap();
    let p = init_p(n, InitLaw::Uniform, SeedSpec::new(1)).unwrap();
    let g = vec![1e-3; layout.len()];
    let mut group = c.benchmark_group("influence_mnistfc_d10");
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::new("expand", name), &exec, |b, &exec| {
            b.iter(|| q.expand_with(exec, black_box(p.as_slice())).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("backproject", name), &exec, |b, &exec| {
            b.iter(|| q.backproject_with(exec, black_box(&g), p.as_slice()).unwrap())
        });
    }
    group.finish();
}

fn sampled_evaluation(c: &mut Criterion) {
    let layout = WeightLayout::new(&ArchSpec::small());
    let n = layout.len();
    let q = InfluenceMatrix::generate(&layout.fan_ins(), n, 10, SeedSpec::new(2)).unwrap();
    let model = Model::new(&q, &layout).unwrap();
    let p = init_p(n, InitLaw::Uniform, SeedSpec::new(2)).unwrap();
    let data = synthetic_blobs(50, 10, 784, 3.0, 2).unwrap();
    let mut group = c.benchmark_group("sampled_accuracy_small_20_masks");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sampled_accuracies(exec, model, &p, &data, 20, SeedSpec::new(0), 0).unwrap())
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("empty_fraction_n2000_20_trials");
    group.sample_size(10);
    for (name, exec) in executors() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| mc_empty_fraction(exec, 2000, 1, 2000, 20, SeedSpec::new(3)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, expand, sampled_evaluation, monte_carlo);
criterion_main!(benches);
