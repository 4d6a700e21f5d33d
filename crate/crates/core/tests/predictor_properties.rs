use std::collections::BTreeMap;

use proptest::prelude::*;

use hetpart::predictor::{evaluate_model, read_samples_csv, write_samples_csv, GroupBy, TrainingSample};
use hetpart::rng::seeded;
use hetpart::sim::{protocol_workloads, training_protocol_space};
use hetpart::{Affinity, Hyperparameters, PlatformModel, Side, TreeEnsemble};

const AFFINITIES: [&str; 3] = ["compact", "scatter", "balanced"];

fn sample() -> impl Strategy<Value = TrainingSample> {
    (
        prop::bool::ANY,
        prop::sample::select(vec![2u32, 6, 12, 24, 48, 120, 240]),
        0usize..3,
        1u32..=100,
        prop::sample::select(vec![1000.0, 2500.0, 3170.0]),
        0.1f64..100.0,
    )
        .prop_map(|(host, threads, a, fraction, input_size, time_s)| TrainingSample {
            side: if host { Side::Host } else { Side::Device },
            threads,
            affinity: Affinity::new(AFFINITIES[a]),
            fraction,
            input_size,
            time_s,
        })
}

fn samples(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<TrainingSample>> {
    prop::collection::vec(sample(), n)
}

/// Probes restricted to the side and affinity labels seen in `data`.
fn seen_labels(mut probes: Vec<TrainingSample>, data: &[TrainingSample]) -> Vec<TrainingSample> {
    for (i, p) in probes.iter_mut().enumerate() {
        let d = &data[i % data.len()];
        p.side = d.side;
        p.affinity = d.affinity.clone();
    }
    probes
}

fn small_hp() -> Hyperparameters {
    Hyperparameters {
        n_trees: 20,
        max_depth: 3,
        min_samples_leaf: 2,
        shrinkage: 0.3,
    }
}

fn training_mse(m: &TreeEnsemble, data: &[TrainingSample]) -> f64 {
    data.iter()
        .map(|s| (m.predict_sample(s).unwrap() - s.time_s).powi(2))
        .sum::<f64>()
        / data.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn predictions_ignore_sample_order(data in samples(2..80), probes in samples(1..30), seed in any::<u64>()) {
        let probes = seen_labels(probes, &data);
        let mut shuffled = data.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut seeded(seed));
        let a = TreeEnsemble::train(&data, small_hp()).unwrap();
        let b = TreeEnsemble::train(&shuffled, small_hp()).unwrap();
        prop_assert_eq!(&a, &b);
        for p in &probes {
            prop_assert_eq!(a.predict_sample(p).unwrap().to_bits(), b.predict_sample(p).unwrap().to_bits());
        }
    }

    #[test]
    fn constant_shift_moves_every_prediction(data in samples(2..80), probes in samples(1..30), c in 0.0f64..1000.0) {
        let probes = seen_labels(probes, &data);
        let shifted: Vec<_> = data.iter().cloned().map(|mut s| { s.time_s += c; s }).collect();
        let a = TreeEnsemble::train(&data, small_hp()).unwrap();
        let b = TreeEnsemble::train(&shifted, small_hp()).unwrap();
        for p in &probes {
            let (pa, pb) = (a.predict_sample(p).unwrap(), b.predict_sample(p).unwrap());
            prop_assert!((pb - (pa + c)).abs() <= 1e-9 * (1.0 + pb.abs()), "{} vs {} + {}", pb, pa, c);
        }
    }

    #[test]
    fn single_unlimited_tree_interpolates(data in samples(1..120)) {
        // keep one sample per feature vector
        let mut unique = BTreeMap::new();
        for s in data {
            unique.entry((s.side, s.threads, s.affinity.clone(), s.fraction, s.input_size.to_bits())).or_insert(s);
        }
        let data: Vec<_> = unique.into_values().collect();
        let hp = Hyperparameters { n_trees: 1, max_depth: u32::MAX, min_samples_leaf: 1, shrinkage: 1.0 };
        let m = TreeEnsemble::train(&data, hp).unwrap();
        for s in &data {
            let p = m.predict_sample(s).unwrap();
            prop_assert!((p - s.time_s).abs() <= 1e-9 * s.time_s.max(1.0), "{} vs {}", p, s.time_s);
        }
    }

    #[test]
    fn model_document_round_trips(data in samples(2..80), probes in samples(1..50)) {
        let probes = seen_labels(probes, &data);
        let m = TreeEnsemble::train(&data, small_hp()).unwrap();
        let back = TreeEnsemble::from_json(&m.to_json()).unwrap();
        prop_assert_eq!(&back, &m);
        for p in &probes {
            prop_assert_eq!(m.predict_sample(p).unwrap().to_bits(), back.predict_sample(p).unwrap().to_bits());
        }
    }

    #[test]
    fn percent_errors_are_rederivable(data in samples(2..80), eval in samples(1..40)) {
        let eval = seen_labels(eval, &data);
        let m = TreeEnsemble::train(&data, small_hp()).unwrap();
        let report = evaluate_model(&m, &eval, GroupBy::SideThreads).unwrap();
        prop_assert_eq!(report.records.len(), eval.len());
        for (r, s) in report.records.iter().zip(&eval) {
            prop_assert_eq!(r.measured_s, s.time_s);
            prop_assert_eq!(r.absolute_error_s, (r.predicted_s - r.measured_s).abs());
            prop_assert_eq!(r.percent_error, 100.0 * r.absolute_error_s / r.measured_s);
        }
        let total: usize = report.groups.iter().map(|g| g.count).sum();
        prop_assert_eq!(total, eval.len());
    }

    #[test]
    fn samples_csv_round_trips(data in samples(0..50)) {
        let mut buf = Vec::new();
        write_samples_csv(&data, &mut buf).unwrap();
        prop_assert_eq!(read_samples_csv(buf.as_slice()).unwrap(), data);
    }
}

#[test]
fn training_error_never_grows_with_more_trees() {
    let platform = PlatformModel::reference().with_noise(0.03).unwrap();
    let data = platform
        .generate_training_data(&training_protocol_space(), &protocol_workloads()[..1], &mut seeded(3))
        .unwrap();
    let full = TreeEnsemble::train(
        &data,
        Hyperparameters {
            n_trees: 50,
            ..Default::default()
        },
    )
    .unwrap();
    let mut last = f64::INFINITY;
    for k in 1..=50 {
        let mut m = full.clone();
        m.trees.truncate(k);
        let mse = training_mse(&m, &data);
        assert!(mse <= last, "{k} trees: {mse} > {last}");
        last = mse;
    }
}

#[test]
fn generated_csv_is_reproducible() {
    let platform = PlatformModel::reference().with_noise(0.03).unwrap();
    let csv = |seed| {
        let data = platform
            .generate_training_data(&training_protocol_space(), &protocol_workloads(), &mut seeded(seed))
            .unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&data, &mut buf).unwrap();
        buf
    };
    assert_eq!(csv(11), csv(11));
    assert_ne!(csv(11), csv(12));
}
