use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use hetpart::predictor::TrainingSample;
use hetpart::rng::seeded;
use hetpart::sim::{protocol_workloads, training_protocol_space};
use hetpart::strategies::run_eml;
use hetpart::{Hyperparameters, ParameterSpace, PlatformModel, TreeEnsemble};

fn samples() -> Vec<TrainingSample> {
    PlatformModel::reference()
        .with_noise(0.03)
        .unwrap()
        .generate_training_data(&training_protocol_space(), &protocol_workloads(), &mut seeded(1))
        .unwrap()
}

fn training(c: &mut Criterion) {
    let data = samples();
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    for n_trees in [50, 200] {
        let hp = Hyperparameters {
            n_trees,
            ..Default::default()
        };
        group.bench_function(format!("{n_trees}_trees_{}_samples", data.len()), |b| {
            b.iter_batched(
                || data.clone(),
                |d| black_box(TreeEnsemble::train(&d, hp).unwrap()),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn prediction(c: &mut Criterion) {
    let data = samples();
    let model = TreeEnsemble::train(&data, Hyperparameters::default()).unwrap();
    c.bench_function("predict_7200", |b| {
        b.iter(|| data.iter().map(|s| model.predict_sample(s).unwrap()).sum::<f64>())
    });
    let space = ParameterSpace::default_space();
    let platform = PlatformModel::reference();
    let mut group = c.benchmark_group("eml");
    group.sample_size(10);
    group.bench_function("scan_57267", |b| {
        b.iter(|| {
            black_box(
                run_eml(&space, &model, &platform, protocol_workloads()[0])
                    .unwrap()
                    .true_energy_s,
            )
        })
    });
    group.finish();
}

criterion_group!(benches, training, prediction);
criterion_main!(benches);
