//! Sources of configuration energy: simulated measurements or predictions.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::Result;
use crate::predictor::TreeEnsemble;
use crate::rng::{seeded, SeededRng};
use crate::sim::{Evaluation, PlatformModel, Side, Source, Workload};
use crate::space::Configuration;

pub trait Evaluator {
    fn evaluate(&self, config: &Configuration) -> Result<Evaluation>;
}

impl<F> Evaluator for F
where
    F: Fn(&Configuration) -> Result<Evaluation>,
{
    fn evaluate(&self, config: &Configuration) -> Result<Evaluation> {
        self(config)
    }
}

/// "Measures" configurations on a [`PlatformModel`].
pub struct Simulator<'a> {
    model: &'a PlatformModel,
    workload: Workload,
    noise: Option<Mutex<SeededRng>>,
}

impl<'a> Simulator<'a> {
    /// Noise-free measurements regardless of the model's noise level.
    pub fn exact(model: &'a PlatformModel, workload: Workload) -> Self {
        Simulator {
            model,
            workload,
            noise: None,
        }
    }

    /// Measurements perturbed by the model's noise, drawn from `seed`.
    pub fn noisy(model: &'a PlatformModel, workload: Workload, seed: u64) -> Self {
        Simulator {
            model,
            workload,
            noise: Some(Mutex::new(seeded(seed))),
        }
    }

    pub fn workload(&self) -> Workload {
        self.workload
    }
}

impl Evaluator for Simulator<'_> {
    fn evaluate(&self, config: &Configuration) -> Result<Evaluation> {
        match &self.noise {
            None => self.model.evaluate_exact(config, self.workload),
            Some(rng) => {
                let mut rng = rng.lock().expect("rng lock");
                self.model.evaluate(config, self.workload, Some(&mut *rng))
            }
        }
    }
}

/// Scores configurations with a trained model: the energy is the larger of
/// the two predicted side times.
pub struct Predictor<'a> {
    model: &'a TreeEnsemble,
    workload: Workload,
}

impl<'a> Predictor<'a> {
    pub fn new(model: &'a TreeEnsemble, workload: Workload) -> Self {
        Predictor { model, workload }
    }
}

impl Evaluator for Predictor<'_> {
    fn evaluate(&self, c: &Configuration) -> Result<Evaluation> {
        let size = self.workload.size_units();
        // trees can extrapolate below zero; a time cannot
        let host = self
            .model
            .predict(
                Side::Host,
                c.host_threads,
                c.host_affinity.as_str(),
                c.host_fraction,
                size,
            )?
            .max(0.0);
        let device = self
            .model
            .predict(
                Side::Device,
                c.device_threads,
                c.device_affinity.as_str(),
                c.device_fraction(),
                size,
            )?
            .max(0.0);
        Ok(Evaluation::new(host, device, Source::Predicted))
    }
}

/// Caches results by configuration. Only meaningful for deterministic
/// evaluators.
pub struct Memoized<E> {
    inner: E,
    cache: Mutex<HashMap<Configuration, Evaluation>>,
}

impl<E: Evaluator> Memoized<E> {
    pub fn new(inner: E) -> Self {
        Memoized {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Distinct configurations evaluated so far.
    pub fn distinct(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

impl<E: Evaluator> Evaluator for Memoized<E> {
    fn evaluate(&self, config: &Configuration) -> Result<Evaluation> {
        if let Some(e) = self.cache.lock().expect("cache lock").get(config) {
            return Ok(*e);
        }
        let e = self.inner.evaluate(config)?;
        self.cache.lock().expect("cache lock").insert(config.clone(), e);
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    #[test]
    fn memo_hits_cache() {
        let calls = Cell::new(0);
        let f = |_: &Configuration| {
            calls.set(calls.get() + 1);
            Ok(Evaluation::new(1.0, 2.0, Source::Simulated))
        };
        let m = Memoized::new(f);
        let c = crate::space::ParameterSpace::default_space().config_at(7).unwrap();
        m.evaluate(&c).unwrap();
        m.evaluate(&c).unwrap();
        assert_eq!(calls.get(), 1);
        assert_eq!(m.distinct(), 1);
    }

    #[test]
    fn noisy_simulator_is_seeded() {
        let model = PlatformModel::reference().with_noise(0.05).unwrap();
        let w = Workload::new(1000.0).unwrap();
        let c = crate::space::ParameterSpace::default_space().config_at(40000).unwrap();
        let a = Simulator::noisy(&model, w, 3).evaluate(&c).unwrap();
        let b = Simulator::noisy(&model, w, 3).evaluate(&c).unwrap();
        let exact = Simulator::exact(&model, w).evaluate(&c).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.energy_s, exact.energy_s);
    }
}
