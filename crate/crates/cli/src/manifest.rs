//! Experiment manifest: which inputs to load and how to run the protocol.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use hetpart::predictor::{read_samples_csv, TrainingSample};
use hetpart::sim::{protocol_workloads, training_protocol_space};
use hetpart::{ParameterSpace, PlatformModel, TreeEnsemble, Workload};

/// Default annealing budgets, one comparison row each.
pub const DEFAULT_BUDGETS: [usize; 8] = [250, 500, 750, 1000, 1250, 1500, 1750, 2000];
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SEEDS: usize = 20;
pub const DEFAULT_WORKLOAD: f64 = 3170.0;
pub const DEFAULT_NOISE: f64 = 0.03;

/// Everything a command may need, as written in a manifest file. Relative
/// paths resolve against the manifest's directory. Absent entries fall back
/// to built-in defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub space: Option<PathBuf>,
    pub platform: Option<PathBuf>,
    pub training_space: Option<PathBuf>,
    pub training_data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub budgets: Option<Vec<usize>>,
    pub workloads: Option<Vec<f64>>,
    pub workload: Option<f64>,
    pub noise: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: RunManifest =
            serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut m.space,
            &mut m.platform,
            &mut m.training_space,
            &mut m.training_data,
            &mut m.model,
            &mut m.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(m)
    }
}

/// Inputs parsed and validated up front, before any command runs.
#[derive(Debug)]
pub struct Inputs {
    pub space: ParameterSpace,
    pub platform: PlatformModel,
    pub training_space: ParameterSpace,
    pub seed: u64,
    pub seeds: usize,
    pub budgets: Vec<usize>,
    pub workloads: Vec<Workload>,
    pub workload: Workload,
    pub noise: f64,
    pub out: PathBuf,
    pub training_data: Option<PathBuf>,
    pub model: Option<PathBuf>,
}

pub fn load_space(path: &Path) -> Result<ParameterSpace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading space {}", path.display()))?;
    ParameterSpace::from_json(&text).with_context(|| format!("parsing space {}", path.display()))
}

pub fn load_platform(path: &Path) -> Result<PlatformModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading platform {}", path.display()))?;
    PlatformModel::from_json(&text).with_context(|| format!("parsing platform {}", path.display()))
}

pub fn load_samples(path: &Path) -> Result<Vec<TrainingSample>> {
    let file = fs::File::open(path).with_context(|| format!("opening training data {}", path.display()))?;
    read_samples_csv(file).with_context(|| format!("parsing training data {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<TreeEnsemble> {
    let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    TreeEnsemble::from_json(&text).with_context(|| format!("parsing model {}", path.display()))
}

impl Inputs {
    pub fn resolve(m: &RunManifest) -> Result<Self> {
        let space = match &m.space {
            Some(p) => load_space(p)?,
            None => ParameterSpace::default_space(),
        };
        let platform = match &m.platform {
            Some(p) => load_platform(p)?,
            None => PlatformModel::reference(),
        };
        let training_space = match &m.training_space {
            Some(p) => load_space(p)?,
            None => training_protocol_space(),
        };
        let workloads = match &m.workloads {
            Some(ws) if ws.is_empty() => bail!("`workloads` is empty"),
            Some(ws) => ws
                .iter()
                .map(|&w| Workload::new(w))
                .collect::<hetpart::Result<Vec<_>>>()?,
            None => protocol_workloads(),
        };
        let workload = Workload::new(m.workload.unwrap_or(DEFAULT_WORKLOAD))?;
        let budgets = m.budgets.clone().unwrap_or_else(|| DEFAULT_BUDGETS.to_vec());
        if budgets.is_empty() || budgets.contains(&0) {
            bail!("budgets must be a non-empty list of positive iteration counts");
        }
        let seeds = m.seeds.unwrap_or(DEFAULT_SEEDS);
        if seeds == 0 {
            bail!("`seeds` must be at least 1");
        }
        let noise = m.noise.unwrap_or(DEFAULT_NOISE);
        platform.with_noise(noise).context("invalid `noise`")?;
        for p in [&m.training_data, &m.model].into_iter().flatten() {
            if !p.exists() {
                bail!("input {} does not exist", p.display());
            }
        }
        Ok(Inputs {
            space,
            platform,
            training_space,
            seed: m.seed.unwrap_or(DEFAULT_SEED),
            seeds,
            budgets,
            workloads,
            workload,
            noise,
            out: m.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            training_data: m.training_data.clone(),
            model: m.model.clone(),
        })
    }
}
