//! Command layer behind the `hetpart` binary.
//!
//! Every command reads its inputs through a [`manifest::RunManifest`]
//! (optionally overridden by flags), writes results atomically under the
//! output directory (`data/`, `models/`, `traces/`, `reports/`), and removes
//! what it wrote if a later stage fails.

pub mod commands;
pub mod manifest;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hetpart", version, about = "Host/accelerator work-partitioning search")]
pub struct Cli {
    /// JSON run manifest; flags below override its entries.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Parameter space JSON (default: built-in space).
    #[arg(long, global = true)]
    pub space: Option<PathBuf>,
    /// Platform model JSON (default: built-in reference platform).
    #[arg(long, global = true)]
    pub platform: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy over host fractions 0, 10, ..., 100 at fixed thread settings.
    Sweep(SweepArgs),
    /// Simulate training samples for the predictor.
    Generate(GenerateArgs),
    /// Split samples into halves and fit the boosted-tree model.
    Train(TrainArgs),
    /// Prediction error of a model on held-out samples.
    EvalModel(EvalModelArgs),
    /// Run one search strategy.
    Run(RunArgs),
    /// Run all strategies over the budget grid and seeds.
    Compare(CompareArgs),
    /// Full pipeline: generate, train, eval-model, compare and sweeps.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Initial temperature (default: energy of the initial configuration).
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub cooling_rate: Option<f64>,
    /// Stop temperature (default: 1e-3 * T0).
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Iteration budget; overrides the cooling rate.
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 3250.0)]
    pub workload: f64,
    /// Default: largest host thread count in the space.
    #[arg(long)]
    pub host_threads: Option<u32>,
    /// Default: largest device thread count in the space.
    #[arg(long)]
    pub device_threads: Option<u32>,
    /// Default: first host affinity in the space.
    #[arg(long)]
    pub host_affinity: Option<String>,
    /// Default: first device affinity in the space.
    #[arg(long)]
    pub device_affinity: Option<String>,
    /// File name under `reports/`.
    #[arg(long, default_value = "sweep.csv")]
    pub name: String,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GenerateArgs {
    /// Relative noise of the simulated measurements (default 0.03).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Comma-separated workload sizes.
    #[arg(long, value_delimiter = ',')]
    pub workloads: Option<Vec<f64>>,
    /// Space whose thread, affinity and fraction lists are sampled.
    #[arg(long)]
    pub training_space: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainArgs {
    /// Sample CSV (default: <out>/data/training.csv).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub shrinkage: Option<f64>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvalModelArgs {
    /// Held-out CSV (default: <out>/data/eval.csv).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Model document (default: <out>/models/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// side, threads, affinity or side-threads.
    #[arg(long, default_value = "side-threads")]
    pub group_by: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Em,
    Eml,
    Sam,
    Saml,
}

impl From<MethodArg> for hetpart::Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Em => hetpart::Method::Em,
            MethodArg::Eml => hetpart::Method::Eml,
            MethodArg::Sam => hetpart::Method::Sam,
            MethodArg::Saml => hetpart::Method::Saml,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(value_enum)]
    pub method: MethodArg,
    #[arg(long)]
    pub workload: Option<f64>,
    /// Model document for EML/SAML (default: <out>/models/model.json).
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CompareArgs {
    /// Comma-separated iteration budgets.
    #[arg(long, value_delimiter = ',')]
    pub budgets: Option<Vec<usize>>,
    /// Number of seeded runs per budget.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub workload: Option<f64>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Skip EML and SAML.
    #[arg(long)]
    pub no_ml: bool,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub budgets: Option<Vec<usize>>,
}
