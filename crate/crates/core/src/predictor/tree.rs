use serde::{Deserialize, Serialize};

/// Tree node. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        leaf: f64,
    },
}

/// Regression tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { leaf } => return leaf,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Checks that child indices point forward and inside the array, so
    /// routing always terminates.
    pub(crate) fn is_well_formed(&self, width: usize) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().enumerate().all(|(i, n)| match *n {
                Node::Leaf { leaf } => leaf.is_finite(),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    feature < width
                        && !threshold.is_nan()
                        && left > i
                        && right > i
                        && left < self.nodes.len()
                        && right < self.nodes.len()
                }
            })
    }
}

pub(crate) struct TreeParams {
    pub max_depth: u32,
    pub min_samples_leaf: usize,
}

/// Column-major training matrix with per-feature presorted row orders.
pub(crate) struct Presorted<'a> {
    pub columns: &'a [Vec<f64>],
    pub order: Vec<Vec<u32>>,
}

impl<'a> Presorted<'a> {
    /// Rows are sorted by value; equal values keep row order, and the caller
    /// guarantees rows themselves are in a canonical order.
    pub fn new(columns: &'a [Vec<f64>]) -> Self {
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Presorted { columns, order }
    }
}

const GAIN_TIE: f64 = 1e-9;

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Greedy least-squares tree on `targets`.
///
/// A node splits while it is impure, shallower than `max_depth` and some
/// threshold leaves `min_samples_leaf` rows on both sides. Among candidate
/// splits the largest variance reduction wins; gains within a relative
/// `GAIN_TIE` of the node's sum of squares count as ties, which go to the
/// lowest feature index, then the lowest threshold. The tolerance keeps
/// exact ties in the residuals (common after a first tree) from being broken
/// by rounding noise.
pub(crate) fn fit(data: &Presorted<'_>, targets: &[f64], params: &TreeParams) -> RegressionTree {
    let mut nodes = Vec::new();
    let mut goes_left = vec![false; targets.len()];
    grow(data, targets, data.order.clone(), 0, params, &mut nodes, &mut goes_left);
    RegressionTree { nodes }
}

fn grow(
    data: &Presorted<'_>,
    y: &[f64],
    order: Vec<Vec<u32>>,
    depth: u32,
    params: &TreeParams,
    nodes: &mut Vec<Node>,
    goes_left: &mut [bool],
) -> usize {
    let id = nodes.len();
    let rows = &order[0];
    let n = rows.len();
    let sum: f64 = rows.iter().map(|&r| y[r as usize]).sum();
    let mean = sum / n as f64;
    nodes.push(Node::Leaf { leaf: mean });

    let first = y[rows[0] as usize];
    let pure = rows.iter().all(|&r| y[r as usize] == first);
    if pure || depth >= params.max_depth || n < 2 * params.min_samples_leaf.max(1) {
        return id;
    }
    let sst: f64 = rows.iter().map(|&r| (y[r as usize] - mean).powi(2)).sum();
    let tie = GAIN_TIE * sst;
    let Some(best) = best_split(data, y, &order, sum, tie, params.min_samples_leaf.max(1)) else {
        return id;
    };

    let col = &data.columns[best.feature];
    for &r in rows {
        goes_left[r as usize] = col[r as usize] <= best.threshold;
    }
    let (left_order, right_order): (Vec<Vec<u32>>, Vec<Vec<u32>>) = order
        .into_iter()
        .map(|idx| idx.into_iter().partition(|&r| goes_left[r as usize]))
        .unzip();

    let left = grow(data, y, left_order, depth + 1, params, nodes, goes_left);
    let right = grow(data, y, right_order, depth + 1, params, nodes, goes_left);
    nodes[id] = Node::Split {
        feature: best.feature,
        threshold: best.threshold,
        left,
        right,
    };
    id
}

fn best_split(
    data: &Presorted<'_>,
    y: &[f64],
    order: &[Vec<u32>],
    total: f64,
    tie: f64,
    min_leaf: usize,
) -> Option<BestSplit> {
    let n = order[0].len();
    let mut best: Option<BestSplit> = None;
    for (feature, idx) in order.iter().enumerate() {
        let col = &data.columns[feature];
        let mut left_sum = 0.0;
        for i in 0..n - 1 {
            left_sum += y[idx[i] as usize];
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_leaf {
                continue;
            }
            if n_right < min_leaf {
                break;
            }
            let a = col[idx[i] as usize];
            let b = col[idx[i + 1] as usize];
            if a >= b {
                continue;
            }
            let right_sum = total - left_sum;
            // sl^2/nl + sr^2/nr - s^2/n, written without the cancelling terms
            let diff = left_sum / n_left as f64 - right_sum / n_right as f64;
            let gain = (n_left * n_right) as f64 / n as f64 * diff * diff;
            if best.as_ref().is_none_or(|s| gain > s.gain + tie) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some(BestSplit {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}
