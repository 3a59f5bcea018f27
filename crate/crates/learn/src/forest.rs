//! Random forests and extremely randomized trees.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{check_regression, encode_classes};
use crate::error::Result;
use crate::hyper::ForestParams;
use crate::model::{Diagnostics, Family, Output, Params, TrainedModel};
use crate::tree::{fit_tree, Response, Splitter, Tree, TreeParams};

/// Per-tree generator: the master seed with the tree index as stream, so
/// results do not depend on scheduling.
pub(crate) fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn grow(
    x: ArrayView2<f64>,
    resp: Response,
    n_trees: usize,
    params: TreeParams,
    bootstrap: bool,
    seed: u64,
) -> (Vec<Tree>, Vec<f64>) {
    let n = x.nrows();
    let fitted: Vec<(Tree, Vec<f64>)> = (0..n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(seed, t);
            let weights = if bootstrap {
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[rng.random_range(0..n)] += 1.0;
                }
                w
            } else {
                vec![1.0; n]
            };
            fit_tree(x, resp, &weights, params, &mut rng)
        })
        .collect();
    let mut importance = vec![0.0; x.ncols()];
    let mut trees = Vec::with_capacity(n_trees);
    for (tree, imp) in fitted {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            for (a, v) in importance.iter_mut().zip(&imp) {
                *a += v / total;
            }
        }
        trees.push(tree);
    }
    let total: f64 = importance.iter().sum();
    if total > 0.0 {
        importance.iter_mut().for_each(|v| *v /= total);
    }
    (trees, importance)
}

fn tree_params(p: &ForestParams, n_features: usize, regression: bool, splitter: Splitter) -> TreeParams {
    TreeParams {
        max_depth: p.depth(),
        min_leaf: p.min_leaf.max(1),
        max_features: p.resolved_features(n_features, regression),
        splitter,
    }
}

fn classifier(
    family: Family,
    x: ArrayView2<f64>,
    y: &[usize],
    params: &ForestParams,
    seed: u64,
    splitter: Splitter,
    bootstrap: bool,
) -> Result<TrainedModel> {
    let (classes, yi) = encode_classes(x, y)?;
    params.validate()?;
    let resp = Response::Classes {
        y: &yi,
        k: classes.len(),
    };
    let tp = tree_params(params, x.ncols(), false, splitter);
    let (trees, importances) = grow(x, resp, params.n_trees, tp, bootstrap, seed);
    Ok(TrainedModel::new(
        family,
        params.to_hyper(),
        seed,
        x.ncols(),
        Output::Classes(classes),
        Params::Forest { trees, importances },
        Diagnostics::default(),
    ))
}

/// Bagged CART trees with Gini splits over a random feature subset.
pub fn fit_random_forest(x: ArrayView2<f64>, y: &[usize], params: &ForestParams, seed: u64) -> Result<TrainedModel> {
    classifier(Family::Rforest, x, y, params, seed, Splitter::Best, true)
}

/// Extremely randomized trees: full sample, one random threshold per
/// candidate feature.
pub fn fit_extra_trees(x: ArrayView2<f64>, y: &[usize], params: &ForestParams, seed: u64) -> Result<TrainedModel> {
    classifier(Family::Extratrees, x, y, params, seed, Splitter::Random, false)
}

/// Bagged regression trees.
pub fn fit_rf_reg(x: ArrayView2<f64>, y: &[f64], params: &ForestParams, seed: u64) -> Result<TrainedModel> {
    check_regression(x, y)?;
    params.validate()?;
    let tp = tree_params(params, x.ncols(), true, Splitter::Best);
    let (trees, importances) = grow(x, Response::Values(y), params.n_trees, tp, true, seed);
    Ok(TrainedModel::new(
        Family::RforestReg,
        params.to_hyper(),
        seed,
        x.ncols(),
        Output::Regression,
        Params::Forest { trees, importances },
        Diagnostics::default(),
    ))
}

/// Normalised Gini importance of an extra-trees forest with default
/// settings. Sums to 1 unless no tree could split at all (then all zeros).
pub fn extra_trees_importance(x: ArrayView2<f64>, y: &[usize], n_trees: usize, seed: u64) -> Result<Vec<f64>> {
    let params = ForestParams {
        n_trees,
        ..Default::default()
    };
    let model = fit_extra_trees(x, y, &params, seed)?;
    Ok(model.feature_importances().expect("forest").to_vec())
}
