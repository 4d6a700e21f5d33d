//! Workload-fraction sweeps at fixed thread settings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::sim::{PlatformModel, Workload};
use crate::space::{Affinity, Configuration};

/// Host fractions `0, 10, ..., 100`.
pub const SWEEP_FRACTIONS: [u32; 11] = [0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub host_fraction: u32,
    pub t_host_s: f64,
    pub t_device_s: f64,
    pub energy_s: f64,
    /// Energy mapped affinely onto `[1, 10]`.
    pub normalized: f64,
}

/// Evaluates `template` at every sweep fraction; its own fraction is ignored.
pub fn fraction_sweep(model: &PlatformModel, workload: Workload, template: &Configuration) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::with_capacity(SWEEP_FRACTIONS.len());
    for &f in &SWEEP_FRACTIONS {
        let c = Configuration {
            host_fraction: f,
            ..template.clone()
        };
        let e = model.evaluate_exact(&c, workload)?;
        points.push(SweepPoint {
            host_fraction: f,
            t_host_s: e.t_host_s,
            t_device_s: e.t_device_s,
            energy_s: e.energy_s,
            normalized: 0.0,
        });
    }
    let lo = points.iter().map(|p| p.energy_s).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.energy_s).fold(f64::NEG_INFINITY, f64::max);
    for p in &mut points {
        p.normalized = if hi > lo {
            1.0 + 9.0 * (p.energy_s - lo) / (hi - lo)
        } else {
            10.0
        };
    }
    Ok(points)
}

/// Host fraction with the lowest energy; the first one wins ties.
pub fn argmin_fraction(points: &[SweepPoint]) -> Option<u32> {
    points
        .iter()
        .fold(None, |best: Option<&SweepPoint>, p| match best {
            Some(b) if b.energy_s <= p.energy_s => Some(b),
            _ => Some(p),
        })
        .map(|p| p.host_fraction)
}

pub fn sweep_template(
    host_threads: u32,
    host_affinity: &str,
    device_threads: u32,
    device_affinity: &str,
) -> Configuration {
    Configuration {
        host_threads,
        host_affinity: Affinity::new(host_affinity),
        device_threads,
        device_affinity: Affinity::new(device_affinity),
        host_fraction: 0,
    }
}

pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("host_fraction,device_fraction,t_host_s,t_device_s,energy_s,normalized\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.host_fraction,
            100 - p.host_fraction,
            p.t_host_s,
            p.t_device_s,
            p.energy_s,
            p.normalized
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::SideModel;

    fn symmetric() -> PlatformModel {
        let side = SideModel {
            base_throughput: 10.0,
            max_threads: 16,
            contention: 0.05,
            affinity_factors: [("a".to_string(), 1.0)].into(),
            fixed_overhead_s: 0.2,
        };
        PlatformModel::new(side.clone(), side, 0.0).unwrap()
    }

    #[test]
    fn symmetric_model_gives_symmetric_sweep() {
        let pts = fraction_sweep(
            &symmetric(),
            Workload::new(500.0).unwrap(),
            &sweep_template(8, "a", 8, "a"),
        )
        .unwrap();
        for i in 0..pts.len() {
            assert_eq!(pts[i].energy_s, pts[pts.len() - 1 - i].energy_s);
        }
        assert_eq!(argmin_fraction(&pts), Some(50));
    }

    #[test]
    fn normalization_range() {
        let pts = fraction_sweep(
            &PlatformModel::reference(),
            Workload::new(3250.0).unwrap(),
            &sweep_template(48, "scatter", 240, "balanced"),
        )
        .unwrap();
        let max = pts.iter().map(|p| p.normalized).fold(f64::MIN, f64::max);
        let min = pts.iter().map(|p| p.normalized).fold(f64::MAX, f64::min);
        assert_eq!(max, 10.0);
        assert_eq!(min, 1.0);
        assert_eq!(sweep_to_csv(&pts).lines().count(), 12);
    }
}
