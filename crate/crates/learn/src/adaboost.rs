//! SAMME for classification and AdaBoost.R2 for regression. Weak learners
//! are fitted on the weighted sample directly rather than on a weighted
//! resample.

use ndarray::ArrayView2;

use crate::data::{argmax, check_regression, encode_classes};
use crate::error::{LearnError, Result};
use crate::forest::tree_rng;
use crate::hyper::AdaBoostParams;
use crate::model::{Diagnostics, Family, Output, Params, TrainedModel};
use crate::tree::{fit_tree, Node, Response, Splitter, Tree, TreeParams};

/// Weighted error at or below this counts as a perfect weak learner.
const PERFECT: f64 = 1e-10;

fn weak(max_depth: usize, n_features: usize) -> TreeParams {
    TreeParams {
        max_depth: Some(max_depth),
        min_leaf: 1,
        max_features: n_features,
        splitter: Splitter::Best,
    }
}

fn check(params: &AdaBoostParams) -> Result<()> {
    if params.n_rounds == 0 || !(params.learning_rate > 0.0) {
        return Err(LearnError::InvalidHyperparameter(
            "n_rounds must be >= 1 and learning_rate > 0".into(),
        ));
    }
    Ok(())
}

fn normalise(w: &mut [f64]) -> f64 {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w.iter().sum()
}

/// Multiclass AdaBoost (SAMME) over depth-limited trees, stumps by default.
pub fn fit_adaboost(x: ArrayView2<f64>, y: &[usize], params: &AdaBoostParams, seed: u64) -> Result<TrainedModel> {
    let (classes, yi) = encode_classes(x, y)?;
    check(params)?;
    let n = x.nrows();
    let k = classes.len();
    let depth = if params.max_depth == 0 { 1 } else { params.max_depth };
    let resp = Response::Classes { y: &yi, k };
    let mut w = vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut alphas = Vec::new();
    let mut diag = Diagnostics::default();
    let chance = 1.0 - 1.0 / k as f64;
    for round in 0..params.n_rounds {
        let mut rng = tree_rng(seed, round);
        let (tree, _) = fit_tree(x, resp, &w, weak(depth, x.ncols()), &mut rng);
        let miss: Vec<bool> = (0..n).map(|i| argmax(tree.leaf(x, i)) != yi[i]).collect();
        let err: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(v, _)| v).sum();
        diag.iterations = round + 1;
        if err >= chance {
            // the same weights would give the same learner again
            if trees.is_empty() {
                diag.warnings
                    .push("weak learner cannot beat chance; predicting class priors".into());
                let mut prior = vec![0.0; k];
                yi.iter().for_each(|&c| prior[c] += 1.0 / n as f64);
                trees.push(Tree {
                    nodes: vec![Node::Leaf { value: prior }],
                });
                alphas.push(1.0);
            }
            break;
        }
        let e = err.max(PERFECT);
        let alpha = params.learning_rate * (((1.0 - e) / e).ln() + ((k - 1) as f64).ln());
        trees.push(tree);
        alphas.push(alpha);
        if err <= PERFECT {
            diag.weight_sums.push(w.iter().sum());
            break;
        }
        for (wi, &m) in w.iter_mut().zip(&miss) {
            if m {
                *wi *= alpha.exp();
            }
        }
        diag.weight_sums.push(normalise(&mut w));
    }
    Ok(TrainedModel::new(
        Family::Adaboost,
        params.to_hyper(),
        seed,
        x.ncols(),
        Output::Classes(classes),
        Params::AdaBoost { trees, alphas },
        diag,
    ))
}

/// AdaBoost.R2 with linear loss; predictions are the weighted median.
pub fn fit_adaboost_reg(x: ArrayView2<f64>, y: &[f64], params: &AdaBoostParams, seed: u64) -> Result<TrainedModel> {
    check_regression(x, y)?;
    check(params)?;
    let n = x.nrows();
    let depth = if params.max_depth == 0 { 3 } else { params.max_depth };
    let mut w = vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut alphas = Vec::new();
    let mut diag = Diagnostics::default();
    for round in 0..params.n_rounds {
        let mut rng = tree_rng(seed, round);
        let (tree, _) = fit_tree(x, Response::Values(y), &w, weak(depth, x.ncols()), &mut rng);
        let err: Vec<f64> = (0..n).map(|i| (tree.leaf(x, i)[0] - y[i]).abs()).collect();
        let worst = err.iter().copied().fold(0.0, f64::max);
        diag.iterations = round + 1;
        if worst <= 0.0 {
            trees.push(tree);
            alphas.push(1.0);
            diag.weight_sums.push(w.iter().sum());
            break;
        }
        let avg_loss: f64 = w.iter().zip(&err).map(|(wi, e)| wi * e / worst).sum();
        if avg_loss >= 0.5 {
            if trees.is_empty() {
                diag.warnings
                    .push("weak learner average loss >= 0.5; predicting the mean".into());
                let mean = y.iter().sum::<f64>() / n as f64;
                trees.push(Tree {
                    nodes: vec![Node::Leaf { value: vec![mean] }],
                });
                alphas.push(1.0);
            }
            break;
        }
        let beta = avg_loss.max(PERFECT) / (1.0 - avg_loss);
        alphas.push(params.learning_rate * (1.0 / beta).ln());
        trees.push(tree);
        for (wi, e) in w.iter_mut().zip(&err) {
            *wi *= beta.powf(params.learning_rate * (1.0 - e / worst));
        }
        diag.weight_sums.push(normalise(&mut w));
    }
    Ok(TrainedModel::new(
        Family::AdaboostReg,
        params.to_hyper(),
        seed,
        x.ncols(),
        Output::Regression,
        Params::AdaBoost { trees, alphas },
        diag,
    ))
}
