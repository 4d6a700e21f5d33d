//! Search for host/accelerator work-partitioning configurations.
//!
//! The crate combines a discrete [`space::ParameterSpace`], a parametric
//! platform simulator ([`sim`]), a boosted-tree execution-time predictor
//! ([`predictor`]) and a simulated-annealing engine ([`anneal`]) into four
//! search strategies ([`strategies`]): exhaustive or annealed exploration,
//! each scored by simulated measurement or by prediction.

pub mod anneal;
pub mod error;
pub mod evaluator;
pub mod metrics;
pub mod predictor;
pub mod rng;
pub mod sim;
pub mod space;
pub mod strategies;
pub mod sweep;

pub use anneal::{anneal, AnnealOutcome, AnnealSchedule, SearchTrace};
pub use error::{Error, Result};
pub use evaluator::{Evaluator, Memoized, Predictor, Simulator};
pub use predictor::{Hyperparameters, TrainingSample, TreeEnsemble};
pub use sim::{Evaluation, PlatformModel, Side, Source, Workload};
pub use space::{Affinity, Configuration, ParameterSpace};
pub use strategies::{ComparisonReport, Method, StrategyResult};
