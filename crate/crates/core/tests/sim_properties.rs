mod common;

use proptest::prelude::*;

use hetpart::rng::SeededRng;
use hetpart::sweep::{argmin_fraction, fraction_sweep, sweep_template};
use hetpart::{Affinity, Configuration, ParameterSpace, PlatformModel, Side, Workload};

fn exact_time(m: &PlatformModel, side: Side, threads: u32, aff: &str, fraction: u32, w: f64) -> f64 {
    m.side_time::<SeededRng>(side, threads, aff, fraction, Workload::new(w).unwrap(), None)
        .unwrap()
}

/// Nested loops in the documented field order; keeps the first strict minimum.
fn linear_scan(space: &ParameterSpace, m: &PlatformModel, w: Workload) -> (Configuration, f64) {
    let mut best: Option<(Configuration, f64)> = None;
    for &ht in space.host_threads() {
        for ha in space.host_affinities() {
            for &dt in space.device_threads() {
                for da in space.device_affinities() {
                    for &f in space.fractions() {
                        let c = Configuration {
                            host_threads: ht,
                            host_affinity: ha.clone(),
                            device_threads: dt,
                            device_affinity: da.clone(),
                            host_fraction: f,
                        };
                        let e = m.evaluate_exact(&c, w).unwrap().energy_s;
                        if best.as_ref().is_none_or(|(_, b)| e < *b) {
                            best = Some((c, e));
                        }
                    }
                }
            }
        }
    }
    best.unwrap()
}

proptest! {
    #[test]
    fn time_grows_with_fraction(
        m in common::platform(),
        threads in 1u32..=300,
        aff in 0usize..3,
        w in 1.0f64..5000.0,
    ) {
        for side in Side::BOTH {
            let names = match side { Side::Host => common::HOST_AFFINITIES, Side::Device => common::DEVICE_AFFINITIES };
            let times: Vec<f64> = (0..=100).map(|f| exact_time(&m, side, threads, names[aff], f, w)).collect();
            prop_assert!(times.windows(2).all(|p| p[0] <= p[1]), "{:?}", times);
        }
    }

    #[test]
    fn time_shrinks_with_threads(
        m in common::platform(),
        fraction in 0u32..=100,
        aff in 0usize..3,
        w in 1.0f64..5000.0,
    ) {
        for side in Side::BOTH {
            let names = match side { Side::Host => common::HOST_AFFINITIES, Side::Device => common::DEVICE_AFFINITIES };
            let times: Vec<f64> = (1..=300).map(|n| exact_time(&m, side, n, names[aff], fraction, w)).collect();
            prop_assert!(times.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn swapping_sides_of_a_symmetric_model(
        side in common::side_model(&["a", "b"]),
        ht in 1u32..=300,
        dt in 1u32..=300,
        ha in 0usize..2,
        da in 0usize..2,
        f in 0u32..=100,
        w in 1.0f64..5000.0,
    ) {
        let m = PlatformModel::new(side.clone(), side, 0.0).unwrap();
        let names = ["a", "b"];
        let c = Configuration {
            host_threads: ht,
            host_affinity: Affinity::new(names[ha]),
            device_threads: dt,
            device_affinity: Affinity::new(names[da]),
            host_fraction: f,
        };
        let swapped = Configuration {
            host_threads: dt,
            host_affinity: Affinity::new(names[da]),
            device_threads: ht,
            device_affinity: Affinity::new(names[ha]),
            host_fraction: 100 - f,
        };
        let w = Workload::new(w).unwrap();
        prop_assert_eq!(m.evaluate_exact(&c, w).unwrap().energy_s, m.evaluate_exact(&swapped, w).unwrap().energy_s);
    }

    #[test]
    fn brute_force_matches_linear_scan(
        space in common::small_space(),
        m in common::platform(),
        w in 1.0f64..5000.0,
    ) {
        let w = Workload::new(w).unwrap();
        let (c, e) = m.brute_force_optimum(&space, w).unwrap();
        let (c2, e2) = linear_scan(&space, &m, w);
        prop_assert_eq!(c, c2);
        prop_assert_eq!(e.energy_s, e2);
    }
}

#[test]
fn brute_force_keeps_first_of_tied_minima() {
    // Both affinities have the same factor, so every pair of configurations
    // differing only in affinity ties.
    let reference = PlatformModel::reference();
    let mut host = reference.side(Side::Host).clone();
    host.affinity_factors.insert("compact".into(), 1.0);
    let m = PlatformModel::new(host, reference.side(Side::Device).clone(), 0.0).unwrap();
    let space = ParameterSpace::new(
        vec![48],
        vec![Affinity::new("compact"), Affinity::new("scatter")],
        vec![240],
        vec![Affinity::new("balanced")],
        (0..=100).collect(),
    )
    .unwrap();
    let (c, _) = m.brute_force_optimum(&space, Workload::new(3170.0).unwrap()).unwrap();
    assert_eq!(c.host_affinity.as_str(), "compact");
}

#[test]
fn reference_model_shows_three_regimes() {
    let m = PlatformModel::reference();
    let argmin = |w: f64, ht: u32| {
        let points = fraction_sweep(
            &m,
            Workload::new(w).unwrap(),
            &sweep_template(ht, "none", 240, "balanced"),
        )
        .unwrap();
        argmin_fraction(&points).unwrap()
    };
    assert_eq!(argmin(190.0, 48), 100);
    let mixed = argmin(3250.0, 48);
    assert!(mixed > 0 && mixed < 100, "{mixed}");
    assert!(argmin(3250.0, 4) <= 30);
}
