//! Parametric host + accelerator performance model.
//!
//! Stands in for real measurements. Each side processes its share of the
//! workload at `base_throughput * S(n) * affinity_factor` units per second,
//! where `S(n) = n / (1 + contention * (n - 1))` and `n` is clamped to the
//! side's `max_threads`. A side that receives work also pays a fixed
//! per-invocation overhead.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::TrainingSample;
use crate::space::{Affinity, Configuration, ParameterSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Host,
    Device,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Host, Side::Device];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Host => "host",
            Side::Device => "device",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Side> {
        match s {
            "host" => Ok(Side::Host),
            "device" => Ok(Side::Device),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Performance parameters of one side of the platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideModel {
    /// Work units per second with a single thread.
    pub base_throughput: f64,
    pub max_threads: u32,
    /// Serial/contention coefficient in `[0, 1)`.
    pub contention: f64,
    pub affinity_factors: BTreeMap<String, f64>,
    pub fixed_overhead_s: f64,
}

impl SideModel {
    /// Effective parallel speedup for `threads` threads.
    pub fn scaling(&self, threads: u32) -> f64 {
        let n = threads.min(self.max_threads) as f64;
        n / (1.0 + self.contention * (n - 1.0))
    }

    fn validate(&self, side: Side) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidModel(format!("{side}: {what}")));
        if !(self.base_throughput > 0.0 && self.base_throughput.is_finite()) {
            return bad(format!(
                "base_throughput must be positive, got {}",
                self.base_throughput
            ));
        }
        if self.max_threads == 0 {
            return bad("max_threads must be positive".into());
        }
        if !(0.0..1.0).contains(&self.contention) {
            return bad(format!("contention must lie in [0, 1), got {}", self.contention));
        }
        if !(self.fixed_overhead_s >= 0.0 && self.fixed_overhead_s.is_finite()) {
            return bad(format!("fixed_overhead_s must be >= 0, got {}", self.fixed_overhead_s));
        }
        if self.affinity_factors.is_empty() {
            return bad("affinity_factors is empty".into());
        }
        for (label, &f) in &self.affinity_factors {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("affinity factor for `{label}` must be positive, got {f}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct RawPlatform {
    host: SideModel,
    device: SideModel,
    #[serde(default)]
    noise_rel_stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPlatform")]
pub struct PlatformModel {
    pub host: SideModel,
    pub device: SideModel,
    /// Relative standard deviation of multiplicative lognormal noise.
    pub noise_rel_stddev: f64,
}

impl TryFrom<RawPlatform> for PlatformModel {
    type Error = Error;

    fn try_from(raw: RawPlatform) -> Result<Self> {
        PlatformModel::new(raw.host, raw.device, raw.noise_rel_stddev)
    }
}

const REFERENCE_PLATFORM: &str = include_str!("../data/reference_platform.json");

impl PlatformModel {
    pub fn new(host: SideModel, device: SideModel, noise_rel_stddev: f64) -> Result<Self> {
        host.validate(Side::Host)?;
        device.validate(Side::Device)?;
        if !(noise_rel_stddev >= 0.0 && noise_rel_stddev.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "noise_rel_stddev must be >= 0, got {noise_rel_stddev}"
            )));
        }
        Ok(PlatformModel {
            host,
            device,
            noise_rel_stddev,
        })
    }

    /// The shipped reference platform (`data/reference_platform.json`).
    pub fn reference() -> Self {
        Self::from_json(REFERENCE_PLATFORM).expect("shipped reference platform parses")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("platform serializes")
    }

    pub fn side(&self, side: Side) -> &SideModel {
        match side {
            Side::Host => &self.host,
            Side::Device => &self.device,
        }
    }

    /// Copy of the model with a different noise level.
    pub fn with_noise(&self, noise_rel_stddev: f64) -> Result<Self> {
        PlatformModel::new(self.host.clone(), self.device.clone(), noise_rel_stddev)
    }

    pub fn is_deterministic(&self) -> bool {
        self.noise_rel_stddev == 0.0
    }

    /// Time for one side to process `fraction` percent of `workload`.
    ///
    /// Noise is applied only when the model has a nonzero noise level and an
    /// `rng` is supplied.
    pub fn side_time<R: Rng + ?Sized>(
        &self,
        side: Side,
        threads: u32,
        affinity: &str,
        fraction: u32,
        workload: Workload,
        rng: Option<&mut R>,
    ) -> Result<f64> {
        let m = self.side(side);
        let factor = *m.affinity_factors.get(affinity).ok_or_else(|| Error::UnknownAffinity {
            side,
            label: affinity.to_string(),
        })?;
        if fraction > 100 {
            return Err(Error::FractionOutOfRange(fraction));
        }
        if fraction == 0 {
            return Ok(0.0);
        }
        let work = fraction as f64 / 100.0 * workload.size_units();
        let t = m.fixed_overhead_s + work / (m.base_throughput * m.scaling(threads) * factor);
        match rng {
            Some(rng) if self.noise_rel_stddev > 0.0 => Ok(t * self.noise_factor(rng)),
            _ => Ok(t),
        }
    }

    fn noise_factor<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // median 1, relative stddev sqrt(exp(sigma^2) - 1) = noise_rel_stddev
        let sigma = (1.0 + self.noise_rel_stddev.powi(2)).ln().sqrt();
        LogNormal::new(0.0, sigma)
            .expect("sigma is finite and non-negative")
            .sample(rng)
    }

    /// Simulated run of a full configuration.
    pub fn evaluate<R: Rng + ?Sized>(
        &self,
        config: &Configuration,
        workload: Workload,
        mut rng: Option<&mut R>,
    ) -> Result<Evaluation> {
        if config.host_fraction > 100 {
            return Err(Error::FractionOutOfRange(config.host_fraction));
        }
        let t_host = self.side_time(
            Side::Host,
            config.host_threads,
            config.host_affinity.as_str(),
            config.host_fraction,
            workload,
            rng.as_deref_mut(),
        )?;
        let t_device = self.side_time(
            Side::Device,
            config.device_threads,
            config.device_affinity.as_str(),
            config.device_fraction(),
            workload,
            rng,
        )?;
        Ok(Evaluation::new(t_host, t_device, Source::Simulated))
    }

    /// Noise-free evaluation.
    pub fn evaluate_exact(&self, config: &Configuration, workload: Workload) -> Result<Evaluation> {
        self.evaluate::<crate::rng::SeededRng>(config, workload, None)
    }

    /// Exhaustive scan of `space`; the first minimum in enumeration order wins.
    pub fn brute_force_optimum(
        &self,
        space: &ParameterSpace,
        workload: Workload,
    ) -> Result<(Configuration, Evaluation)> {
        if !self.is_deterministic() {
            return Err(Error::NoisyModel(self.noise_rel_stddev));
        }
        let mut best: Option<(Configuration, Evaluation)> = None;
        for config in space.enumerate() {
            let eval = self.evaluate_exact(&config, workload)?;
            if best.as_ref().is_none_or(|(_, b)| eval.energy_s < b.energy_s) {
                best = Some((config, eval));
            }
        }
        Ok(best.expect("spaces are non-empty"))
    }

    /// One sample per side and per (workload, threads, affinity, fraction)
    /// combination of `space`. Zero fractions are skipped since they carry no
    /// work and therefore no positive time to learn from.
    pub fn generate_training_data<R: Rng + ?Sized>(
        &self,
        space: &ParameterSpace,
        workloads: &[Workload],
        rng: &mut R,
    ) -> Result<Vec<TrainingSample>> {
        if workloads.is_empty() {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        let mut out = Vec::new();
        for side in Side::BOTH {
            let (threads, affinities): (&[u32], &[Affinity]) = match side {
                Side::Host => (space.host_threads(), space.host_affinities()),
                Side::Device => (space.device_threads(), space.device_affinities()),
            };
            for &workload in workloads {
                for &t in threads {
                    for aff in affinities {
                        for &fraction in space.fractions().iter().filter(|&&f| f > 0) {
                            let time_s = self.side_time(side, t, aff.as_str(), fraction, workload, Some(&mut *rng))?;
                            out.push(TrainingSample {
                                side,
                                threads: t,
                                affinity: aff.clone(),
                                fraction,
                                input_size: workload.size_units(),
                                time_s,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Abstract amount of work, e.g. megabytes of input.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Workload(f64);

impl Workload {
    pub fn new(size_units: f64) -> Result<Self> {
        if size_units > 0.0 && size_units.is_finite() {
            Ok(Workload(size_units))
        } else {
            Err(Error::InvalidModel(format!(
                "workload size must be positive, got {size_units}"
            )))
        }
    }

    pub fn size_units(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Workload {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Workload::new(v)
    }
}

impl From<Workload> for f64 {
    fn from(w: Workload) -> f64 {
        w.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Simulated,
    Predicted,
}

/// Per-side times and the objective `max(t_host, t_device)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub t_host_s: f64,
    pub t_device_s: f64,
    pub energy_s: f64,
    pub source: Source,
}

impl Evaluation {
    pub fn new(t_host_s: f64, t_device_s: f64, source: Source) -> Self {
        Evaluation {
            t_host_s,
            t_device_s,
            energy_s: t_host_s.max(t_device_s),
            source,
        }
    }
}

/// Canonical training-data protocol: host threads {2,6,12,24,36,48}, the
/// device thread list of the default space, and 40 fractions from 2.5% to
/// 100% in 2.5% steps (rounded up to whole percent). Four workloads give
/// 2880 host and 4320 device samples.
pub fn training_protocol_space() -> ParameterSpace {
    let d = ParameterSpace::default_space();
    ParameterSpace::new(
        vec![2, 6, 12, 24, 36, 48],
        d.host_affinities().to_vec(),
        d.device_threads().to_vec(),
        d.device_affinities().to_vec(),
        (1..=40u32).map(|k| (5 * k).div_ceil(2)).collect(),
    )
    .expect("protocol space is valid")
}

/// Four workload sizes, in megabytes, of the sequences used for training.
pub const PROTOCOL_WORKLOADS: [f64; 4] = [3170.0, 2770.0, 2430.0, 2380.0];

pub fn protocol_workloads() -> Vec<Workload> {
    PROTOCOL_WORKLOADS.iter().map(|&w| Workload(w)).collect()
}
