//! Simulated annealing over a [`ParameterSpace`].
//!
//! Starts from a random configuration and repeatedly proposes a single-field
//! neighbor. Better proposals are always taken; worse ones with probability
//! `exp((E - E') / T)`. The temperature decays geometrically each iteration.
//! The best configuration ever seen is returned, not the final one.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::Evaluator;
use crate::sim::Evaluation;
use crate::space::{Configuration, ParameterSpace};

/// Default ratio `T_min / T0` when no minimum temperature is given.
pub const DEFAULT_MIN_TEMPERATURE_RATIO: f64 = 1e-3;
pub const DEFAULT_COOLING_RATE: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    /// `None` uses the energy of the initial configuration.
    pub initial_temperature: Option<f64>,
    pub cooling_rate: f64,
    /// `None` uses `T0 * DEFAULT_MIN_TEMPERATURE_RATIO`.
    pub min_temperature: Option<f64>,
    /// When set, exactly this many proposals are made and the cooling rate is
    /// derived so that the temperature reaches `T_min` on the last one.
    pub iteration_budget: Option<usize>,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            initial_temperature: None,
            cooling_rate: DEFAULT_COOLING_RATE,
            min_temperature: None,
            iteration_budget: None,
        }
    }
}

impl AnnealSchedule {
    pub fn with_budget(iterations: usize) -> Self {
        AnnealSchedule {
            iteration_budget: Some(iterations),
            ..Default::default()
        }
    }

    /// Fills in the defaults that depend on the initial energy.
    pub fn resolve(&self, initial_energy: f64) -> Result<ResolvedSchedule> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        let t0 = self.initial_temperature.unwrap_or(initial_energy);
        if !(t0 > 0.0 && t0.is_finite()) {
            return bad(format!("initial temperature must be positive, got {t0}"));
        }
        let t_min = self.min_temperature.unwrap_or(t0 * DEFAULT_MIN_TEMPERATURE_RATIO);
        if !(t_min > 0.0 && t_min < t0) {
            return bad(format!("minimum temperature must lie in (0, {t0}), got {t_min}"));
        }
        let cooling_rate = match self.iteration_budget {
            Some(0) => return bad("iteration budget must be positive".into()),
            Some(n) => derived_cooling_rate(t0, t_min, n),
            None => self.cooling_rate,
        };
        if !(cooling_rate > 0.0 && cooling_rate < 1.0) {
            return bad(format!("cooling rate must lie in (0, 1), got {cooling_rate}"));
        }
        Ok(ResolvedSchedule {
            initial_temperature: t0,
            min_temperature: t_min,
            cooling_rate,
            iteration_budget: self.iteration_budget,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedSchedule {
    pub initial_temperature: f64,
    pub min_temperature: f64,
    pub cooling_rate: f64,
    pub iteration_budget: Option<usize>,
}

/// `min(1, exp((E - E') / T))`.
pub fn acceptance_probability(current: f64, proposed: f64, temperature: f64) -> Result<f64> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::NonPositiveTemperature(temperature));
    }
    if proposed <= current {
        return Ok(1.0);
    }
    Ok(((current - proposed) / temperature).exp())
}

/// One geometric cooling step.
pub fn cool(temperature: f64, cooling_rate: f64) -> f64 {
    temperature * (1.0 - cooling_rate)
}

/// Rate that takes `t0` to `t_min` in exactly `iterations` cooling steps.
pub fn derived_cooling_rate(t0: f64, t_min: f64, iterations: usize) -> f64 {
    1.0 - (t_min / t0).powf(1.0 / iterations as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    /// 0 is the initial configuration.
    pub iteration: usize,
    pub proposed: Configuration,
    pub proposed_energy_s: f64,
    /// Energy of the current configuration before this step's decision.
    pub current_energy_s: f64,
    pub temperature: f64,
    pub accepted: bool,
    pub best: Configuration,
    pub best_energy_s: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SearchTrace {
    pub records: Vec<TraceRecord>,
}

pub const TRACE_HEADER: &str =
    "iteration,h_threads,h_aff,d_threads,d_aff,fraction,energy_s,temperature,accepted,best_energy_s";

impl SearchTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The current configuration after each record, reconstructed from the
    /// accept flags.
    pub fn current_path(&self) -> Vec<Configuration> {
        let mut out: Vec<Configuration> = Vec::with_capacity(self.records.len());
        for r in &self.records {
            let next = match out.last() {
                Some(prev) if !r.accepted => prev.clone(),
                _ => r.proposed.clone(),
            };
            out.push(next);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            let c = &r.proposed;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.iteration,
                c.host_threads,
                c.host_affinity,
                c.device_threads,
                c.device_affinity,
                c.host_fraction,
                r.proposed_energy_s,
                r.temperature,
                r.accepted,
                r.best_energy_s
            );
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub best: Configuration,
    pub best_eval: Evaluation,
    pub schedule: ResolvedSchedule,
    pub trace: SearchTrace,
}

impl AnnealOutcome {
    /// One evaluator call per trace record.
    pub fn evaluations(&self) -> usize {
        self.trace.len()
    }
}

fn eval_at<E: Evaluator + ?Sized>(evaluator: &E, config: &Configuration) -> Result<Evaluation> {
    evaluator.evaluate(config).map_err(|e| Error::Evaluation {
        config: config.to_string(),
        source: Box::new(e),
    })
}

pub fn anneal<E, R>(
    space: &ParameterSpace,
    evaluator: &E,
    schedule: &AnnealSchedule,
    rng: &mut R,
) -> Result<AnnealOutcome>
where
    E: Evaluator + ?Sized,
    R: Rng + ?Sized,
{
    let mut current = space.random_configuration(rng);
    let mut current_eval = eval_at(evaluator, &current)?;
    let resolved = schedule.resolve(current_eval.energy_s)?;

    let mut best = current.clone();
    let mut best_eval = current_eval;
    let mut temperature = resolved.initial_temperature;
    let mut records = vec![TraceRecord {
        iteration: 0,
        proposed: current.clone(),
        proposed_energy_s: current_eval.energy_s,
        current_energy_s: current_eval.energy_s,
        temperature,
        accepted: true,
        best: best.clone(),
        best_energy_s: best_eval.energy_s,
    }];

    let mut iteration = 0;
    loop {
        let go_on = match resolved.iteration_budget {
            Some(n) => iteration < n,
            None => temperature > resolved.min_temperature,
        };
        if !go_on {
            break;
        }
        iteration += 1;

        let proposal = space.neighbor(&current, rng)?;
        let proposal_eval = eval_at(evaluator, &proposal)?;
        let e = current_eval.energy_s;
        let e_new = proposal_eval.energy_s;
        let accepted = e_new < e || rng.random::<f64>() < acceptance_probability(e, e_new, temperature)?;

        if accepted {
            current = proposal.clone();
            current_eval = proposal_eval;
            if current_eval.energy_s < best_eval.energy_s {
                best = current.clone();
                best_eval = current_eval;
            }
        }
        records.push(TraceRecord {
            iteration,
            proposed: proposal,
            proposed_energy_s: e_new,
            current_energy_s: e,
            temperature,
            accepted,
            best: best.clone(),
            best_energy_s: best_eval.energy_s,
        });
        temperature = cool(temperature, resolved.cooling_rate);
    }

    Ok(AnnealOutcome {
        best,
        best_eval,
        schedule: resolved,
        trace: SearchTrace { records },
    })
}
