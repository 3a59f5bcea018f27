//! Newton gradient boosting on quantile-binned features.
//!
//! Leaf value `-G / (H + lambda)` and split gain
//! `0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda))`, with `G`, `H`
//! the gradient and hessian sums of the node. Multiclass problems use one
//! binary booster per class.

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::data::{check_regression, check_x, encode_classes, sigmoid, Target};
use crate::error::{LearnError, Result};
use crate::hyper::GbtParams;
use crate::model::{Diagnostics, Family, Output, Params, TrainedModel};
use crate::tree::{Node, Tree};

/// Features mapped to bin codes. Bin edges are training values, so a split
/// `code <= b` is the same as `x <= edges[b]`.
struct Binned {
    codes: Vec<u16>,
    n_features: usize,
    edges: Vec<Vec<f64>>,
}

fn bin_features(x: ArrayView2<f64>, max_bins: usize) -> Binned {
    let (n, d) = x.dim();
    let max_bins = max_bins.clamp(2, u16::MAX as usize);
    let mut edges = Vec::with_capacity(d);
    let mut codes = vec![0u16; n * d];
    for f in 0..d {
        let mut u: Vec<f64> = x.column(f).to_vec();
        u.sort_by(f64::total_cmp);
        u.dedup();
        let e: Vec<f64> = if u.len() <= max_bins {
            u
        } else {
            (1..=max_bins).map(|b| u[b * u.len() / max_bins - 1]).collect()
        };
        for i in 0..n {
            codes[i * d + f] = e.partition_point(|&v| v < x[[i, f]]) as u16;
        }
        edges.push(e);
    }
    Binned {
        codes,
        n_features: d,
        edges,
    }
}

#[derive(Clone, Copy)]
enum Loss {
    Squared,
    Logistic,
}

impl Loss {
    fn grad_hess(self, margin: f64, y: f64) -> (f64, f64) {
        match self {
            Loss::Squared => (margin - y, 1.0),
            Loss::Logistic => {
                let p = sigmoid(margin);
                (p - y, (p * (1.0 - p)).max(1e-16))
            }
        }
    }

    fn value(self, margin: f64, y: f64) -> f64 {
        match self {
            Loss::Squared => 0.5 * (margin - y) * (margin - y),
            // log(1 + e^m) - y m, computed without overflow
            Loss::Logistic => margin.max(0.0) + (-margin.abs()).exp().ln_1p() - y * margin,
        }
    }
}

struct Grower<'a> {
    binned: &'a Binned,
    g: &'a [f64],
    h: &'a [f64],
    params: &'a GbtParams,
    nodes: Vec<Node>,
    /// Shrunk leaf value per training row.
    update: Vec<f64>,
}

struct Best {
    feature: usize,
    bin: usize,
    gain: f64,
}

impl Grower<'_> {
    fn split(&self, rows: &[usize], g_sum: f64, h_sum: f64) -> Option<Best> {
        let lambda = self.params.l2_leaf_lambda;
        let d = self.binned.n_features;
        let parent = g_sum * g_sum / (h_sum + lambda);
        let mut best: Option<Best> = None;
        for f in 0..d {
            let nb = self.binned.edges[f].len();
            if nb < 2 {
                continue;
            }
            let mut gh = vec![(0.0f64, 0.0f64, 0usize); nb];
            for &i in rows {
                let c = &mut gh[self.binned.codes[i * d + f] as usize];
                c.0 += self.g[i];
                c.1 += self.h[i];
                c.2 += 1;
            }
            let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0);
            for (b, &(gb, hb, cb)) in gh.iter().enumerate().take(nb - 1) {
                gl += gb;
                hl += hb;
                nl += cb;
                if cb == 0 || nl == rows.len() {
                    continue;
                }
                let (gr, hr) = (g_sum - gl, h_sum - hl);
                if hl < self.params.min_child_weight || hr < self.params.min_child_weight {
                    continue;
                }
                let gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
                if gain > 1e-12 && best.as_ref().is_none_or(|bst| gain > bst.gain) {
                    best = Some(Best {
                        feature: f,
                        bin: b,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let g_sum: f64 = rows.iter().map(|&i| self.g[i]).sum();
        let h_sum: f64 = rows.iter().map(|&i| self.h[i]).sum();
        let value = -g_sum / (h_sum + self.params.l2_leaf_lambda) * self.params.learning_rate;
        self.nodes.push(Node::Leaf { value: vec![value] });
        let split = if depth < self.params.max_depth && rows.len() >= 2 {
            self.split(&rows, g_sum, h_sum)
        } else {
            None
        };
        let Some(s) = split else {
            for &i in &rows {
                self.update[i] = value;
            }
            return id;
        };
        let d = self.binned.n_features;
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.binned.codes[i * d + s.feature] as usize <= s.bin);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: s.feature,
            threshold: self.binned.edges[s.feature][s.bin],
            left,
            right,
        };
        id
    }
}

struct Booster {
    base: f64,
    trees: Vec<Tree>,
    /// Mean training loss before the first round and after each round.
    history: Vec<f64>,
}

fn boost(binned: &Binned, y: &[f64], loss: Loss, params: &GbtParams) -> Result<Booster> {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let base = match loss {
        Loss::Squared => mean,
        Loss::Logistic => {
            let p = mean.clamp(1e-6, 1.0 - 1e-6);
            (p / (1.0 - p)).ln()
        }
    };
    let mut margin = vec![base; n];
    let mean_loss = |m: &[f64]| m.iter().zip(y).map(|(&mi, &yi)| loss.value(mi, yi)).sum::<f64>() / n as f64;
    let mut history = vec![mean_loss(&margin)];
    let mut trees = Vec::with_capacity(params.n_rounds);
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    for round in 0..params.n_rounds {
        for i in 0..n {
            (g[i], h[i]) = loss.grad_hess(margin[i], y[i]);
        }
        let mut grower = Grower {
            binned,
            g: &g,
            h: &h,
            params,
            nodes: Vec::new(),
            update: vec![0.0; n],
        };
        grower.build((0..n).collect(), 0);
        for (m, u) in margin.iter_mut().zip(&grower.update) {
            *m += u;
        }
        let l = mean_loss(&margin);
        if !l.is_finite() {
            return Err(LearnError::TrainingDiverged(format!(
                "non-finite training loss at round {}",
                round + 1
            )));
        }
        history.push(l);
        trees.push(Tree {
            nodes: grower.nodes,
        });
    }
    Ok(Booster {
        base,
        trees,
        history,
    })
}

fn check(params: &GbtParams) -> Result<()> {
    if params.n_rounds == 0
        || !(params.learning_rate > 0.0)
        || params.l2_leaf_lambda < 0.0
        || params.min_child_weight < 0.0
    {
        return Err(LearnError::InvalidHyperparameter(
            "need n_rounds >= 1, learning_rate > 0, l2_leaf_lambda >= 0, min_child_weight >= 0".into(),
        ));
    }
    Ok(())
}

/// Gradient-boosted trees: logistic loss for class labels (one-vs-rest above
/// two classes), squared loss for real targets.
pub fn fit_gbt(x: ArrayView2<f64>, target: Target, params: &GbtParams, seed: u64) -> Result<TrainedModel> {
    check_x(x)?;
    check(params)?;
    let binned = bin_features(x, params.max_bins);
    let (family, output, boosters) = match target {
        Target::Classes(y) => {
            let (classes, yi) = encode_classes(x, y)?;
            let positives: Vec<usize> = if classes.len() == 2 {
                vec![1]
            } else {
                (0..classes.len()).collect()
            };
            let boosters = positives
                .par_iter()
                .map(|&c| {
                    let t: Vec<f64> = yi.iter().map(|&v| f64::from(u8::from(v == c))).collect();
                    boost(&binned, &t, Loss::Logistic, params)
                })
                .collect::<Result<Vec<_>>>()?;
            (Family::Gbt, Output::Classes(classes), boosters)
        }
        Target::Values(y) => {
            check_regression(x, y)?;
            let b = boost(&binned, y, Loss::Squared, params)?;
            (Family::GbtReg, Output::Regression, vec![b])
        }
    };
    let rounds = params.n_rounds + 1;
    let history = (0..rounds)
        .map(|r| boosters.iter().map(|b| b.history[r]).sum())
        .collect();
    let diag = Diagnostics {
        iterations: params.n_rounds,
        loss_history: history,
        ..Default::default()
    };
    let (base, trees) = boosters.into_iter().map(|b| (b.base, b.trees)).unzip();
    Ok(TrainedModel::new(
        family,
        params.to_hyper(),
        seed,
        x.ncols(),
        output,
        Params::Boosted { base, trees },
        diag,
    ))
}
