//! The four search strategies and their comparison against the exhaustive
//! optimum.
//!
//! | method | exploration          | evaluation  |
//! |--------|----------------------|-------------|
//! | EM     | enumeration          | measurement |
//! | EML    | enumeration          | prediction  |
//! | SAM    | simulated annealing  | measurement |
//! | SAML   | simulated annealing  | prediction  |
//!
//! Measurements come from the noise-free simulator. Every method is scored by
//! the simulated ("true") energy of the configuration it picks, never by its
//! own predicted energy.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anneal::{anneal, AnnealSchedule, SearchTrace};
use crate::error::{Error, Result};
use crate::evaluator::{Evaluator, Predictor, Simulator};
use crate::metrics::{absolute_difference, mean, median, percent_difference, speedup};
use crate::predictor::TreeEnsemble;
use crate::sim::{Evaluation, PlatformModel, Side, Workload};
use crate::space::{Configuration, ParameterSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "EM")]
    Em,
    #[serde(rename = "EML")]
    Eml,
    #[serde(rename = "SAM")]
    Sam,
    #[serde(rename = "SAML")]
    Saml,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Em, Method::Eml, Method::Sam, Method::Saml];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Em => "EM",
            Method::Eml => "EML",
            Method::Sam => "SAM",
            Method::Saml => "SAML",
        }
    }

    pub fn uses_annealing(self) -> bool {
        matches!(self, Method::Sam | Method::Saml)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EM" => Ok(Method::Em),
            "EML" => Ok(Method::Eml),
            "SAM" => Ok(Method::Sam),
            "SAML" => Ok(Method::Saml),
            _ => Err(Error::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub method: Method,
    /// Annealing iteration budget; `None` for the enumeration methods.
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub chosen: Configuration,
    pub evaluations_used: u64,
    /// Energy according to the method's own evaluator.
    pub reported_energy_s: f64,
    /// Noise-free simulated energy of `chosen`.
    pub true_energy_s: f64,
    #[serde(skip)]
    pub trace: Option<SearchTrace>,
}

fn true_energy(model: &PlatformModel, config: &Configuration, workload: Workload) -> Result<f64> {
    Ok(model.evaluate_exact(config, workload)?.energy_s)
}

/// Enumeration and measurement: the exhaustive optimum.
pub fn run_em(space: &ParameterSpace, model: &PlatformModel, workload: Workload) -> Result<StrategyResult> {
    let (chosen, eval) = model.brute_force_optimum(space, workload)?;
    Ok(StrategyResult {
        method: Method::Em,
        budget: None,
        seed: None,
        chosen,
        evaluations_used: space.cardinality(),
        reported_energy_s: eval.energy_s,
        true_energy_s: eval.energy_s,
        trace: None,
    })
}

/// Enumeration scored by the predictor; first minimum in enumeration order wins.
pub fn run_eml(
    space: &ParameterSpace,
    ensemble: &TreeEnsemble,
    model: &PlatformModel,
    workload: Workload,
) -> Result<StrategyResult> {
    let predictor = Predictor::new(ensemble, workload);
    let mut best: Option<(Configuration, Evaluation)> = None;
    for config in space.enumerate() {
        let e = predictor.evaluate(&config)?;
        if best.as_ref().is_none_or(|(_, b)| e.energy_s < b.energy_s) {
            best = Some((config, e));
        }
    }
    let (chosen, eval) = best.expect("spaces are non-empty");
    Ok(StrategyResult {
        method: Method::Eml,
        budget: None,
        seed: None,
        true_energy_s: true_energy(model, &chosen, workload)?,
        chosen,
        evaluations_used: space.cardinality(),
        reported_energy_s: eval.energy_s,
        trace: None,
    })
}

fn annealed<E: Evaluator, R: Rng + ?Sized>(
    method: Method,
    space: &ParameterSpace,
    evaluator: &E,
    model: &PlatformModel,
    workload: Workload,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<StrategyResult> {
    let out = anneal(space, evaluator, schedule, rng)?;
    Ok(StrategyResult {
        method,
        budget: schedule.iteration_budget,
        seed: None,
        true_energy_s: true_energy(model, &out.best, workload)?,
        evaluations_used: out.evaluations() as u64,
        reported_energy_s: out.best_eval.energy_s,
        chosen: out.best,
        trace: Some(out.trace),
    })
}

/// Simulated annealing on simulated measurements.
pub fn run_sam<R: Rng + ?Sized>(
    space: &ParameterSpace,
    model: &PlatformModel,
    workload: Workload,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<StrategyResult> {
    let sim = Simulator::exact(model, workload);
    annealed(Method::Sam, space, &sim, model, workload, schedule, rng)
}

/// Simulated annealing on predicted energies.
pub fn run_saml<R: Rng + ?Sized>(
    space: &ParameterSpace,
    ensemble: &TreeEnsemble,
    model: &PlatformModel,
    workload: Workload,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<StrategyResult> {
    let predictor = Predictor::new(ensemble, workload);
    annealed(Method::Saml, space, &predictor, model, workload, schedule, rng)
}

/// Single-side run using the largest thread count of that side, with the
/// best affinity.
pub fn baseline(
    space: &ParameterSpace,
    model: &PlatformModel,
    workload: Workload,
    side: Side,
) -> Result<(Configuration, Evaluation)> {
    let max = |v: &[u32]| *v.iter().max().expect("non-empty");
    let mut best: Option<(Configuration, Evaluation)> = None;
    let affinities = match side {
        Side::Host => space.host_affinities(),
        Side::Device => space.device_affinities(),
    };
    for aff in affinities {
        let config = match side {
            Side::Host => Configuration {
                host_threads: max(space.host_threads()),
                host_affinity: aff.clone(),
                device_threads: space.device_threads()[0],
                device_affinity: space.device_affinities()[0].clone(),
                host_fraction: 100,
            },
            Side::Device => Configuration {
                host_threads: space.host_threads()[0],
                host_affinity: space.host_affinities()[0].clone(),
                device_threads: max(space.device_threads()),
                device_affinity: aff.clone(),
                host_fraction: 0,
            },
        };
        let e = model.evaluate_exact(&config, workload)?;
        if best.as_ref().is_none_or(|(_, b)| e.energy_s < b.energy_s) {
            best = Some((config, e));
        }
    }
    Ok(best.expect("affinity lists are non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Baselines {
    pub host_only_s: f64,
    pub device_only_s: f64,
}

impl Baselines {
    pub fn compute(space: &ParameterSpace, model: &PlatformModel, workload: Workload) -> Result<Self> {
        Ok(Baselines {
            host_only_s: baseline(space, model, workload, Side::Host)?.1.energy_s,
            device_only_s: baseline(space, model, workload, Side::Device)?.1.energy_s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: Method,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub true_energy_s: f64,
    pub abs_diff_s: f64,
    pub pct_diff: f64,
    pub speedup_host: f64,
    pub speedup_device: f64,
    pub evals: u64,
}

impl ComparisonRow {
    fn new(
        method: Method,
        budget: Option<usize>,
        seed: Option<u64>,
        energy: f64,
        evals: u64,
        em: f64,
        b: &Baselines,
    ) -> Self {
        ComparisonRow {
            method,
            budget,
            seed,
            true_energy_s: energy,
            abs_diff_s: absolute_difference(em, energy),
            pct_diff: percent_difference(em, energy),
            speedup_host: speedup(b.host_only_s, energy),
            speedup_device: speedup(b.device_only_s, energy),
            evals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub em_energy_s: f64,
    pub baselines: Baselines,
    /// One row per input result, in input order.
    pub rows: Vec<ComparisonRow>,
}

/// Scores every result against the EM optimum contained in `results`.
pub fn compare(results: &[StrategyResult], baselines: Baselines) -> Result<ComparisonReport> {
    let em = results
        .iter()
        .find(|r| r.method == Method::Em)
        .ok_or(Error::MissingEnumeration)?
        .true_energy_s;
    let rows = results
        .iter()
        .map(|r| {
            ComparisonRow::new(
                r.method,
                r.budget,
                r.seed,
                r.true_energy_s,
                r.evaluations_used,
                em,
                &baselines,
            )
        })
        .collect();
    Ok(ComparisonReport {
        em_energy_s: em,
        baselines,
        rows,
    })
}

/// Seed-aggregated row: energies are means over seeds and the difference and
/// speedup columns are recomputed from that mean.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub row: ComparisonRow,
    pub runs: usize,
    pub pct_diff_min: f64,
    pub pct_diff_median: f64,
    pub pct_diff_max: f64,
}

pub const REPORT_HEADER: &str = "method,budget,true_energy_s,abs_diff_s,pct_diff,speedup_host,speedup_device,evals";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ComparisonReport {
    pub fn summarize(&self) -> Vec<SummaryRow> {
        let mut groups: BTreeMap<(Method, Option<usize>), Vec<&ComparisonRow>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((r.method, r.budget)).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|((method, budget), rows)| {
                let energy = mean(rows.iter().map(|r| r.true_energy_s));
                let evals = rows.iter().map(|r| r.evals).sum::<u64>() / rows.len() as u64;
                let pct: Vec<f64> = rows.iter().map(|r| r.pct_diff).collect();
                SummaryRow {
                    row: ComparisonRow::new(method, budget, None, energy, evals, self.em_energy_s, &self.baselines),
                    runs: rows.len(),
                    pct_diff_min: pct.iter().copied().fold(f64::INFINITY, f64::min),
                    pct_diff_median: median(&pct),
                    pct_diff_max: pct.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect()
    }

    /// Summary CSV, one row per method and budget.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER}\n");
        for s in self.summarize() {
            push_row(&mut out, &s.row, None);
        }
        out
    }

    /// Per-run CSV; adds a trailing `seed` column.
    pub fn runs_to_csv(&self) -> String {
        let mut out = format!("{REPORT_HEADER},seed\n");
        for r in &self.rows {
            push_row(&mut out, r, Some(opt(r.seed)));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "EM optimum {:.4} s, host-only {:.4} s, device-only {:.4} s\n\n",
            self.em_energy_s, self.baselines.host_only_s, self.baselines.device_only_s
        );
        let _ = writeln!(
            out,
            "{:<6} {:>6} {:>5} {:>12} {:>11} {:>9} {:>9} {:>9} {:>9} {:>9} {:>8}",
            "method",
            "budget",
            "runs",
            "energy [s]",
            "abs [s]",
            "pct [%]",
            "pct min",
            "pct max",
            "vs host",
            "vs dev",
            "evals"
        );
        for s in self.summarize() {
            let r = &s.row;
            let _ = writeln!(
                out,
                "{:<6} {:>6} {:>5} {:>12.4} {:>11.4} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>8}",
                r.method.as_str(),
                r.budget.map_or("-".to_string(), |b| b.to_string()),
                s.runs,
                r.true_energy_s,
                r.abs_diff_s,
                r.pct_diff,
                s.pct_diff_min,
                s.pct_diff_max,
                r.speedup_host,
                r.speedup_device,
                r.evals
            );
        }
        out
    }
}

fn push_row(out: &mut String, r: &ComparisonRow, extra: Option<String>) {
    let _ = write!(
        out,
        "{},{},{},{},{},{},{},{}",
        r.method,
        opt(r.budget),
        r.true_energy_s,
        r.abs_diff_s,
        r.pct_diff,
        r.speedup_host,
        r.speedup_device,
        r.evals
    );
    if let Some(e) = extra {
        let _ = write!(out, ",{e}");
    }
    out.push('\n');
}
