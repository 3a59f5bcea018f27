//! Weighted CART trees shared by the forests, AdaBoost and boosting.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Splitter {
    /// Best threshold among the sampled features.
    Best,
    /// One uniform random threshold per sampled feature (extremely randomized).
    Random,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Number of non-constant features examined per split.
    pub max_features: usize,
    pub splitter: Splitter,
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Response<'a> {
    /// Class indices in `0..k`; impurity is Gini.
    Classes { y: &'a [usize], k: usize },
    /// Real targets; impurity is the weighted squared error.
    Values(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class frequencies, or a one-element mean for regression.
    Leaf { value: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(&self, x: ArrayView2<f64>, row: usize) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[[row, *feature]] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone)]
struct Stats {
    w: f64,
    sums: Vec<f64>,
    sq: f64,
}

impl Stats {
    fn empty(resp: Response) -> Self {
        let width = match resp {
            Response::Classes { k, .. } => k,
            Response::Values(_) => 1,
        };
        Self {
            w: 0.0,
            sums: vec![0.0; width],
            sq: 0.0,
        }
    }

    fn add(&mut self, resp: Response, i: usize, wi: f64, sign: f64) {
        self.w += sign * wi;
        match resp {
            Response::Classes { y, .. } => self.sums[y[i]] += sign * wi,
            Response::Values(y) => {
                self.sums[0] += sign * wi * y[i];
                self.sq += sign * wi * y[i] * y[i];
            }
        }
    }

    /// Weighted impurity times node weight.
    fn cost(&self, resp: Response) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        match resp {
            Response::Classes { .. } => {
                (self.w - self.sums.iter().map(|s| s * s).sum::<f64>() / self.w).max(0.0)
            }
            Response::Values(_) => (self.sq - self.sums[0] * self.sums[0] / self.w).max(0.0),
        }
    }

    fn value(&self) -> Vec<f64> {
        self.sums.iter().map(|s| s / self.w).collect()
    }
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Relative gain below which a split is not worth making.
const MIN_GAIN: f64 = 1e-12;

struct Builder<'a> {
    x: ArrayView2<'a, f64>,
    resp: Response<'a>,
    weights: &'a [f64],
    params: TreeParams,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node>,
    importance: Vec<f64>,
    features: Vec<usize>,
}

impl Builder<'_> {
    fn stats(&self, rows: &[usize]) -> Stats {
        let mut s = Stats::empty(self.resp);
        for &i in rows {
            s.add(self.resp, i, self.weights[i], 1.0);
        }
        s
    }

    fn best_threshold(&self, rows: &[usize], f: usize, total: &Stats) -> Option<Candidate> {
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]));
        let parent = total.cost(self.resp);
        let mut left = Stats::empty(self.resp);
        let mut right = total.clone();
        let mut best: Option<Candidate> = None;
        let m = order.len();
        for p in 0..m - 1 {
            let i = order[p];
            left.add(self.resp, i, self.weights[i], 1.0);
            right.add(self.resp, i, self.weights[i], -1.0);
            let (v, next) = (self.x[[i, f]], self.x[[order[p + 1], f]]);
            if v == next || p + 1 < self.params.min_leaf || m - p - 1 < self.params.min_leaf {
                continue;
            }
            let gain = parent - left.cost(self.resp) - right.cost(self.resp);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Candidate {
                    feature: f,
                    threshold: v,
                    gain,
                });
            }
        }
        best
    }

    fn random_threshold(
        &mut self,
        rows: &[usize],
        f: usize,
        (lo, hi): (f64, f64),
        parent: f64,
    ) -> Option<Candidate> {
        let mut threshold = self.rng.random_range(lo..hi);
        if threshold >= hi {
            // float rounding can land on the open end
            threshold = lo;
        }
        let mut left = Stats::empty(self.resp);
        let mut right = Stats::empty(self.resp);
        let mut n_left = 0;
        for &i in rows {
            if self.x[[i, f]] <= threshold {
                left.add(self.resp, i, self.weights[i], 1.0);
                n_left += 1;
            } else {
                right.add(self.resp, i, self.weights[i], 1.0);
            }
        }
        if n_left < self.params.min_leaf || rows.len() - n_left < self.params.min_leaf {
            return None;
        }
        Some(Candidate {
            feature: f,
            threshold,
            gain: parent - left.cost(self.resp) - right.cost(self.resp),
        })
    }

    fn find_split(&mut self, rows: &[usize], total: &Stats) -> Option<Candidate> {
        let mut features = std::mem::take(&mut self.features);
        features.shuffle(self.rng);
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for &f in &features {
            if visited == self.params.max_features {
                break;
            }
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                (lo.min(self.x[[i, f]]), hi.max(self.x[[i, f]]))
            });
            if lo == hi {
                continue;
            }
            visited += 1;
            let cand = match self.params.splitter {
                Splitter::Best => self.best_threshold(rows, f, total),
                Splitter::Random => {
                    self.random_threshold(rows, f, (lo, hi), total.cost(self.resp))
                }
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        self.features = features;
        best.filter(|b| b.gain > MIN_GAIN * total.w.max(f64::MIN_POSITIVE))
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let total = self.stats(&rows);
        self.nodes.push(Node::Leaf {
            value: total.value(),
        });
        let stop = rows.len() < 2 * self.params.min_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || total.cost(self.resp) <= MIN_GAIN * total.w;
        if stop {
            return id;
        }
        let Some(split) = self.find_split(&rows, &total) else {
            return id;
        };
        self.importance[split.feature] += split.gain;
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x[[i, split.feature]] <= split.threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Grows one tree on the rows with positive weight. Returns the tree and the
/// unnormalised impurity decrease per feature.
pub(crate) fn fit_tree(
    x: ArrayView2<f64>,
    resp: Response,
    weights: &[f64],
    params: TreeParams,
    rng: &mut ChaCha8Rng,
) -> (Tree, Vec<f64>) {
    let rows: Vec<usize> = (0..x.nrows()).filter(|&i| weights[i] > 0.0).collect();
    let mut b = Builder {
        x,
        resp,
        weights,
        params: TreeParams {
            max_features: params.max_features.clamp(1, x.ncols()),
            min_leaf: params.min_leaf.max(1),
            ..params
        },
        rng,
        nodes: Vec::new(),
        importance: vec![0.0; x.ncols()],
        features: (0..x.ncols()).collect(),
    };
    b.build(rows, 0);
    (Tree { nodes: b.nodes }, b.importance)
}
