//! Execution-time prediction with gradient-boosted regression trees.
//!
//! Samples are encoded into a fixed feature vector (see [`FeatureEncoding`]),
//! a [`TreeEnsemble`] is fit by least-squares boosting, and
//! [`evaluate_model`] reports absolute and percent errors on held-out data.

mod encoding;
mod ensemble;
mod report;
mod tree;

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Side;
use crate::space::Affinity;

pub use encoding::FeatureEncoding;
pub use ensemble::{Hyperparameters, TreeEnsemble, MODEL_FORMAT, MODEL_VERSIONS};
pub use report::{evaluate_model, ErrorReport, GroupBy, GroupKey, GroupRow, PredictionRecord};
pub use tree::{Node, RegressionTree};

/// One measured run of one side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub side: Side,
    pub threads: u32,
    pub affinity: Affinity,
    /// Share of the workload given to `side`, in percent.
    pub fraction: u32,
    pub input_size: f64,
    pub time_s: f64,
}

pub const SAMPLE_COLUMNS: [&str; 6] = ["side", "threads", "affinity", "fraction", "input_size", "time_s"];

impl TrainingSample {
    fn validate(&self, row: usize) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidSample { row, reason });
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        if self.fraction > 100 {
            return bad(format!("fraction {} outside [0, 100]", self.fraction));
        }
        if !(self.input_size > 0.0 && self.input_size.is_finite()) {
            return bad(format!("input_size must be positive, got {}", self.input_size));
        }
        if !(self.time_s > 0.0 && self.time_s.is_finite()) {
            return bad(format!("time_s must be positive, got {}", self.time_s));
        }
        Ok(())
    }
}

/// Writes samples as CSV with a header row. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_samples_csv<W: Write>(samples: &[TrainingSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLE_COLUMNS)?;
    for s in samples {
        w.write_record([
            s.side.as_str().to_string(),
            s.threads.to_string(),
            s.affinity.to_string(),
            s.fraction.to_string(),
            s.input_size.to_string(),
            s.time_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<TrainingSample>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != SAMPLE_COLUMNS {
        return Err(Error::InvalidSample {
            row: 0,
            reason: format!("expected header {:?}, got {header:?}", SAMPLE_COLUMNS.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.deserialize::<TrainingSample>().enumerate() {
        let s = rec?;
        s.validate(i + 1)?;
        out.push(s);
    }
    Ok(out)
}

/// Random half/half split. With an odd count the training half gets the
/// extra sample.
pub fn split_train_eval<R: Rng + ?Sized>(
    samples: &[TrainingSample],
    rng: &mut R,
) -> Result<(Vec<TrainingSample>, Vec<TrainingSample>)> {
    if samples.len() < 2 {
        return Err(Error::NotEnoughSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(rng);
    let n_train = samples.len().div_ceil(2);
    let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect();
    Ok((pick(&order[..n_train]), pick(&order[n_train..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    pub(crate) fn sample(side: Side, threads: u32, aff: &str, fraction: u32, size: f64, t: f64) -> TrainingSample {
        TrainingSample {
            side,
            threads,
            affinity: aff.into(),
            fraction,
            input_size: size,
            time_s: t,
        }
    }

    fn many(n: usize) -> Vec<TrainingSample> {
        (0..n)
            .map(|i| sample(Side::Host, 1 + i as u32, "none", 50, 10.0, 1.0 + i as f64))
            .collect()
    }

    #[test]
    fn split_halves() {
        let (a, b) = split_train_eval(&many(7200), &mut seeded(0)).unwrap();
        assert_eq!((a.len(), b.len()), (3600, 3600));
        let (a, b) = split_train_eval(&many(2), &mut seeded(0)).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
        let (a, b) = split_train_eval(&many(5), &mut seeded(0)).unwrap();
        assert_eq!((a.len(), b.len()), (3, 2));
    }

    #[test]
    fn split_is_a_seeded_partition() {
        let all = many(101);
        let (a1, b1) = split_train_eval(&all, &mut seeded(9)).unwrap();
        let (a2, b2) = split_train_eval(&all, &mut seeded(9)).unwrap();
        assert_eq!((&a1, &b1), (&a2, &b2));
        let mut threads: Vec<u32> = a1.iter().chain(&b1).map(|s| s.threads).collect();
        threads.sort();
        assert_eq!(threads, (1..=101).collect::<Vec<_>>());
    }

    #[test]
    fn split_needs_two_samples() {
        assert!(matches!(
            split_train_eval(&many(1), &mut seeded(0)),
            Err(Error::NotEnoughSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            sample(Side::Host, 48, "scatter", 3, 3170.0, 0.7724301919178219),
            sample(Side::Device, 240, "balanced", 100, 2380.5, 12.000000000000002),
        ];
        let mut buf = Vec::new();
        write_samples_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("side,threads,affinity,fraction,input_size,time_s\n"));
        assert!(text.contains("host,48,scatter,3,3170,0.7724301919178219"));
        assert_eq!(read_samples_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn csv_rejects_bad_rows() {
        let wrong_header = "side,threads,affinity,input_size,fraction,time_s\nhost,1,a,2,3,4\n";
        assert!(read_samples_csv(wrong_header.as_bytes()).is_err());
        let zero_time = "side,threads,affinity,fraction,input_size,time_s\nhost,1,a,2,3,0\n";
        assert!(matches!(
            read_samples_csv(zero_time.as_bytes()),
            Err(Error::InvalidSample { row: 1, .. })
        ));
        let bad_side = "side,threads,affinity,fraction,input_size,time_s\ngpu,1,a,2,3,1\n";
        assert!(read_samples_csv(bad_side.as_bytes()).is_err());
    }
}
