use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Side;

use super::TrainingSample;

/// Maps a sample onto the numeric feature vector seen by the trees.
///
/// Layout: `threads, fraction, input_size`, then one indicator column per
/// side label, then one per affinity label. Label lists are sorted, so the
/// encoding depends only on the set of labels in the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoding {
    pub sides: Vec<Side>,
    pub affinities: Vec<String>,
}

pub(crate) const NUMERIC_FEATURES: [&str; 3] = ["threads", "fraction", "input_size"];

impl FeatureEncoding {
    pub fn fit(samples: &[TrainingSample]) -> Self {
        let mut sides: Vec<Side> = samples.iter().map(|s| s.side).collect();
        sides.sort();
        sides.dedup();
        let mut affinities: Vec<String> = samples.iter().map(|s| s.affinity.to_string()).collect();
        affinities.sort();
        affinities.dedup();
        FeatureEncoding { sides, affinities }
    }

    pub fn width(&self) -> usize {
        NUMERIC_FEATURES.len() + self.sides.len() + self.affinities.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        NUMERIC_FEATURES
            .iter()
            .map(|s| s.to_string())
            .chain(self.sides.iter().map(|s| format!("side={s}")))
            .chain(self.affinities.iter().map(|a| format!("affinity={a}")))
            .collect()
    }

    pub fn encode(&self, side: Side, threads: u32, affinity: &str, fraction: u32, input_size: f64) -> Result<Vec<f64>> {
        let side_col = self
            .sides
            .iter()
            .position(|&s| s == side)
            .ok_or_else(|| Error::UnknownLabel(side.to_string()))?;
        let aff_col = self
            .affinities
            .iter()
            .position(|a| a == affinity)
            .ok_or_else(|| Error::UnknownLabel(affinity.to_string()))?;
        let mut x = vec![0.0; self.width()];
        x[0] = threads as f64;
        x[1] = fraction as f64;
        x[2] = input_size;
        x[NUMERIC_FEATURES.len() + side_col] = 1.0;
        x[NUMERIC_FEATURES.len() + self.sides.len() + aff_col] = 1.0;
        Ok(x)
    }

    pub fn encode_sample(&self, s: &TrainingSample) -> Result<Vec<f64>> {
        self.encode(s.side, s.threads, s.affinity.as_str(), s.fraction, s.input_size)
    }
}
