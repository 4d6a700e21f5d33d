#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::collection::btree_set;
use proptest::prelude::*;

use hetpart::sim::SideModel;
use hetpart::{Affinity, ParameterSpace, PlatformModel};

pub const HOST_AFFINITIES: [&str; 3] = ["none", "scatter", "compact"];
pub const DEVICE_AFFINITIES: [&str; 3] = ["balanced", "scatter", "compact"];

fn labels(names: &[&str], n: usize) -> Vec<Affinity> {
    names[..n].iter().map(|s| Affinity::new(s)).collect()
}

/// Small spaces (cardinality at most 4 * 3 * 4 * 3 * 6 = 864) drawn from
/// the reference platform's affinity names.
pub fn small_space() -> impl Strategy<Value = ParameterSpace> {
    (
        btree_set(1u32..=64, 1..=4),
        1usize..=3,
        btree_set(1u32..=300, 1..=4),
        1usize..=3,
        btree_set(0u32..=100, 1..=6),
    )
        .prop_map(|(ht, ha, dt, da, f)| {
            ParameterSpace::new(
                ht.into_iter().collect(),
                labels(&HOST_AFFINITIES, ha),
                dt.into_iter().collect(),
                labels(&DEVICE_AFFINITIES, da),
                f.into_iter().collect(),
            )
            .unwrap()
        })
}

pub fn side_model(names: &[&str]) -> impl Strategy<Value = SideModel> {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    (
        1.0f64..100.0,
        1u32..=256,
        0.0f64..0.2,
        proptest::collection::vec(0.5f64..1.0, names.len()),
        0.0f64..2.0,
    )
        .prop_map(move |(base, max, c, factors, overhead)| SideModel {
            base_throughput: base,
            max_threads: max,
            contention: c,
            affinity_factors: names.iter().cloned().zip(factors).collect::<BTreeMap<_, _>>(),
            fixed_overhead_s: overhead,
        })
}

/// Noise-free platform covering [`HOST_AFFINITIES`] and [`DEVICE_AFFINITIES`].
pub fn platform() -> impl Strategy<Value = PlatformModel> {
    (side_model(&HOST_AFFINITIES), side_model(&DEVICE_AFFINITIES))
        .prop_map(|(h, d)| PlatformModel::new(h, d, 0.0).unwrap())
}
