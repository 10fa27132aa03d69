use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphdistill::data::{generate_synthetic, SyntheticModel};
use graphdistill::nn::{Batch, Example, MultiTaskNet, NetConfig, TargetScaler, TaskSpec};
use graphdistill::spectral::{featurize_all, HksConfig};
use graphdistill::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn featurize(c: &mut Criterion) {
    let graphs = generate_synthetic(SyntheticModel::Er, 256, 0, Exec::Parallel).unwrap().graphs();
    let cfg = HksConfig::default();
    let mut group = c.benchmark_group("featurize_all");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| featurize_all(&graphs, &cfg, exec).unwrap())
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let ds = generate_synthetic(SyntheticModel::Er, 128, 0, Exec::Parallel).unwrap();
    let hks = HksConfig::default();
    let features = ds.featurize(&hks, Exec::Parallel).unwrap();
    let tasks = vec![TaskSpec::regression("diameter", 1.0), TaskSpec::regression("density", 0.5)];
    let examples: Vec<Example> = ds.to_examples(&features, &tasks).unwrap();
    let refs: Vec<&Example> = examples.iter().collect();
    let scalers = vec![TargetScaler::IDENTITY; tasks.len()];
    let batch = Batch::from_examples(&refs, &tasks, &scalers, hks.num_bins, hks.num_steps).unwrap();
    let net = MultiTaskNet::new(NetConfig::new(hks.num_bins, hks.num_steps, 3, 3, tasks, 0)).unwrap();
    let mut group = c.benchmark_group("loss_and_gradients");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| net.loss_and_gradients(&batch, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, featurize, gradients);
criterion_main!(benches);
