use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{absolute_error, mean, percent_error};
use crate::sim::Side;

use super::{TrainingSample, TreeEnsemble};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    Side,
    Threads,
    Affinity,
    /// One group per (side, thread count), the layout of per-side accuracy tables.
    SideThreads,
}

impl std::str::FromStr for GroupBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "side" => Ok(GroupBy::Side),
            "threads" => Ok(GroupBy::Threads),
            "affinity" => Ok(GroupBy::Affinity),
            "side-threads" => Ok(GroupBy::SideThreads),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GroupKey {
    pub side: Option<Side>,
    pub threads: Option<u32>,
    pub affinity: Option<String>,
}

impl GroupKey {
    fn of(s: &TrainingSample, by: GroupBy) -> Self {
        let (side, threads, affinity) = match by {
            GroupBy::Side => (Some(s.side), None, None),
            GroupBy::Threads => (None, Some(s.threads), None),
            GroupBy::Affinity => (None, None, Some(s.affinity.to_string())),
            GroupBy::SideThreads => (Some(s.side), Some(s.threads), None),
        };
        GroupKey {
            side,
            threads,
            affinity,
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [
            self.side.map(|s| s.to_string()),
            self.threads.map(|t| t.to_string()),
            self.affinity.clone(),
        ]
        .into_iter()
        .flatten()
        .collect();
        f.write_str(&parts.join("/"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub measured_s: f64,
    pub predicted_s: f64,
    pub absolute_error_s: f64,
    pub percent_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub key: GroupKey,
    pub count: usize,
    pub mean_absolute_error_s: f64,
    pub mean_percent_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub groups: Vec<GroupRow>,
    pub overall: GroupRow,
    /// Per-sample errors in the order of the evaluation set.
    pub records: Vec<PredictionRecord>,
}

fn row(key: GroupKey, recs: &[&PredictionRecord]) -> GroupRow {
    GroupRow {
        key,
        count: recs.len(),
        mean_absolute_error_s: mean(recs.iter().map(|r| r.absolute_error_s)),
        mean_percent_error: mean(recs.iter().map(|r| r.percent_error)),
    }
}

/// Scores `model` on held-out samples; groups are ordered by key.
pub fn evaluate_model(model: &TreeEnsemble, eval: &[TrainingSample], by: GroupBy) -> Result<ErrorReport> {
    if eval.is_empty() {
        return Err(Error::NotEnoughSamples { needed: 1, got: 0 });
    }
    let records: Vec<PredictionRecord> = eval
        .iter()
        .map(|s| {
            let predicted = model.predict_sample(s)?;
            Ok(PredictionRecord {
                measured_s: s.time_s,
                predicted_s: predicted,
                absolute_error_s: absolute_error(s.time_s, predicted),
                percent_error: percent_error(s.time_s, predicted),
            })
        })
        .collect::<Result<_>>()?;
    let mut grouped: BTreeMap<GroupKey, Vec<&PredictionRecord>> = BTreeMap::new();
    for (s, r) in eval.iter().zip(&records) {
        grouped.entry(GroupKey::of(s, by)).or_default().push(r);
    }
    let groups = grouped.into_iter().map(|(k, rs)| row(k, &rs)).collect();
    let all: Vec<&PredictionRecord> = records.iter().collect();
    let overall = row(
        GroupKey {
            side: None,
            threads: None,
            affinity: None,
        },
        &all,
    );
    Ok(ErrorReport {
        groups,
        overall,
        records,
    })
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,count,mean_abs_error_s,mean_pct_error\n");
        for r in self.groups.iter().chain(std::iter::once(&self.overall)) {
            let key = if r.key.to_string().is_empty() {
                "all".to_string()
            } else {
                r.key.to_string()
            };
            out.push_str(&format!(
                "{key},{},{},{}\n",
                r.count, r.mean_absolute_error_s, r.mean_percent_error
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<20} {:>7} {:>14} {:>12}\n",
            "group", "count", "abs error [s]", "error [%]"
        );
        for r in self.groups.iter().chain(std::iter::once(&self.overall)) {
            let key = if r.key.to_string().is_empty() {
                "avg".to_string()
            } else {
                r.key.to_string()
            };
            out.push_str(&format!(
                "{key:<20} {:>7} {:>14.4} {:>12.3}\n",
                r.count, r.mean_absolute_error_s, r.mean_percent_error
            ));
        }
        out
    }
}
