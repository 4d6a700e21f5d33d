use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Side;

use super::encoding::FeatureEncoding;
use super::tree::{self, Presorted, RegressionTree, TreeParams};
use super::TrainingSample;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub n_trees: usize,
    /// Use a large value (e.g. `u32::MAX`) for unlimited depth.
    pub max_depth: u32,
    pub min_samples_leaf: usize,
    pub shrinkage: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            n_trees: 200,
            max_depth: 4,
            min_samples_leaf: 5,
            shrinkage: 0.1,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidHyperparameters(m.to_string()));
        if self.n_trees == 0 {
            return bad("tree count must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max depth must be at least 1");
        }
        if self.min_samples_leaf == 0 {
            return bad("min samples per leaf must be at least 1");
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return bad("shrinkage must lie in (0, 1]");
        }
        Ok(())
    }
}

pub const MODEL_FORMAT: &str = "hetpart-gbrt";
pub const MODEL_VERSIONS: &[u32] = &[1];

/// Boosted regression trees predicting one side's execution time.
///
/// `predict = base_prediction + shrinkage * sum(tree leaves)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub base_prediction: f64,
    pub shrinkage: f64,
    pub hyperparameters: Hyperparameters,
    pub encoding: FeatureEncoding,
    pub trees: Vec<RegressionTree>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    version: u32,
    #[serde(flatten)]
    model: serde_json::Value,
}

impl TreeEnsemble {
    /// Least-squares gradient boosting.
    ///
    /// Rows are put into a canonical order first, so the fitted model does not
    /// depend on the order of `samples`.
    pub fn train(samples: &[TrainingSample], hp: Hyperparameters) -> Result<Self> {
        hp.validate()?;
        if samples.is_empty() {
            return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
        }
        let encoding = FeatureEncoding::fit(samples);
        let mut rows: Vec<(Vec<f64>, f64)> = samples
            .iter()
            .map(|s| Ok((encoding.encode_sample(s)?, s.time_s)))
            .collect::<Result<_>>()?;
        rows.sort_by(canonical_cmp);

        let n = rows.len();
        let columns: Vec<Vec<f64>> = (0..encoding.width())
            .map(|f| rows.iter().map(|(x, _)| x[f]).collect())
            .collect();
        let targets: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
        let data = Presorted::new(&columns);
        let params = TreeParams {
            max_depth: hp.max_depth,
            min_samples_leaf: hp.min_samples_leaf,
        };

        let base = targets.iter().sum::<f64>() / n as f64;
        let mut fitted = vec![base; n];
        let mut residuals = vec![0.0; n];
        let mut trees = Vec::with_capacity(hp.n_trees);
        let mut x = vec![0.0; encoding.width()];
        for _ in 0..hp.n_trees {
            for i in 0..n {
                residuals[i] = targets[i] - fitted[i];
            }
            let t = tree::fit(&data, &residuals, &params);
            for (i, f) in fitted.iter_mut().enumerate() {
                for (j, xj) in x.iter_mut().enumerate() {
                    *xj = columns[j][i];
                }
                *f += hp.shrinkage * t.predict(&x);
            }
            trees.push(t);
        }
        Ok(TreeEnsemble {
            base_prediction: base,
            shrinkage: hp.shrinkage,
            hyperparameters: hp,
            encoding,
            trees,
        })
    }

    /// Model with no trees; predicts `base_prediction` everywhere.
    pub fn constant(base_prediction: f64, encoding: FeatureEncoding) -> Self {
        TreeEnsemble {
            base_prediction,
            shrinkage: 1.0,
            hyperparameters: Hyperparameters {
                n_trees: 0,
                ..Hyperparameters::default()
            },
            encoding,
            trees: Vec::new(),
        }
    }

    /// Prediction from an already encoded feature vector.
    pub fn predict_encoded(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.base_prediction + self.shrinkage * sum
    }

    /// Predicted time for one side running `fraction` percent of the input.
    /// A zero fraction is zero work and returns 0 without consulting the trees.
    pub fn predict(&self, side: Side, threads: u32, affinity: &str, fraction: u32, input_size: f64) -> Result<f64> {
        if fraction > 100 {
            return Err(Error::FractionOutOfRange(fraction));
        }
        let x = self.encoding.encode(side, threads, affinity, fraction, input_size)?;
        if fraction == 0 {
            return Ok(0.0);
        }
        Ok(self.predict_encoded(&x))
    }

    pub fn predict_sample(&self, s: &TrainingSample) -> Result<f64> {
        self.predict(s.side, s.threads, s.affinity.as_str(), s.fraction, s.input_size)
    }

    /// Versioned JSON document.
    pub fn to_json(&self) -> String {
        let doc = Document {
            format: MODEL_FORMAT.to_string(),
            version: 1,
            model: serde_json::to_value(self).expect("model serializes"),
        };
        serde_json::to_string_pretty(&doc).expect("document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::Document(format!(
                "document format `{}` is not `{MODEL_FORMAT}`",
                doc.format
            )));
        }
        if !MODEL_VERSIONS.contains(&doc.version) {
            return Err(Error::UnsupportedVersion {
                found: doc.version,
                supported: MODEL_VERSIONS,
            });
        }
        let model: TreeEnsemble = serde_json::from_value(doc.model)?;
        let width = model.encoding.width();
        if let Some(i) = model.trees.iter().position(|t| !t.is_well_formed(width)) {
            return Err(Error::Document(format!("tree {i} is malformed")));
        }
        Ok(model)
    }
}

fn canonical_cmp(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> Ordering {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.1.total_cmp(&b.1))
}
