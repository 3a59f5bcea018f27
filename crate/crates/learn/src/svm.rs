//! Linear SVM and SVR by projected stochastic subgradient descent
//! (Pegasos step sizes, suffix-averaged over the last epoch).

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{check_regression, encode_classes};
use crate::error::{LearnError, Result};
use crate::hyper::{SvmParams, SvrParams};
use crate::model::{Diagnostics, Family, Link, Output, Params, TrainedModel};

#[derive(Clone, Copy)]
enum Loss {
    Hinge,
    EpsilonInsensitive(f64),
}

impl Loss {
    fn value(self, score: f64, target: f64) -> f64 {
        match self {
            Loss::Hinge => (1.0 - target * score).max(0.0),
            Loss::EpsilonInsensitive(eps) => ((score - target).abs() - eps).max(0.0),
        }
    }

    /// Subgradient with respect to the score.
    fn slope(self, score: f64, target: f64) -> f64 {
        match self {
            Loss::Hinge if target * score < 1.0 => -target,
            Loss::EpsilonInsensitive(eps) if (score - target).abs() > eps => (score - target).signum(),
            _ => 0.0,
        }
    }
}

struct Fit {
    /// Weights followed by the bias, which is penalised like a weight on a
    /// constant feature.
    w: Vec<f64>,
    history: Vec<f64>,
}

fn score(w: &[f64], x: ArrayView2<f64>, i: usize) -> f64 {
    let d = x.ncols();
    w[d] + w[..d].iter().zip(x.row(i)).map(|(a, v)| a * v).sum::<f64>()
}

/// `lambda/2 * ||w||^2 + mean loss`.
fn objective(w: &[f64], x: ArrayView2<f64>, t: &[f64], lambda: f64, loss: Loss) -> f64 {
    let reg = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    reg + (0..x.nrows()).map(|i| loss.value(score(w, x, i), t[i])).sum::<f64>() / x.nrows() as f64
}

fn pegasos(x: ArrayView2<f64>, t: &[f64], c: f64, epochs: usize, loss: Loss, rng: &mut ChaCha8Rng) -> Fit {
    let (n, d) = x.dim();
    let lambda = 1.0 / (c * n as f64);
    let zero_obj = (0..n).map(|i| loss.value(0.0, t[i])).sum::<f64>() / n as f64;
    // the optimum satisfies lambda/2 ||w||^2 <= objective(0)
    let radius = (2.0 * zero_obj / lambda).sqrt();
    let mut w = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(epochs);
    let mut step = 0usize;
    for _ in 0..epochs {
        order.shuffle(rng);
        avg.fill(0.0);
        for &i in &order {
            step += 1;
            let eta = 1.0 / (lambda * step as f64);
            let g = loss.slope(score(&w, x, i), t[i]);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if g != 0.0 {
                for (wj, v) in w[..d].iter_mut().zip(x.row(i)) {
                    *wj -= eta * g * v;
                }
                w[d] -= eta * g;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
            for (a, v) in avg.iter_mut().zip(&w) {
                *a += v;
            }
        }
        avg.iter_mut().for_each(|a| *a /= n as f64);
        history.push(objective(&avg, x, t, lambda, loss));
    }
    Fit { w: avg, history }
}

fn check_c(c: f64, epochs: usize) -> Result<()> {
    if !(c > 0.0) || epochs == 0 {
        return Err(LearnError::InvalidHyperparameter(
            "C must be > 0 and epochs >= 1".into(),
        ));
    }
    Ok(())
}

/// One-vs-rest linear SVM; a single hyperplane for two classes.
pub fn fit_linear_svm(x: ArrayView2<f64>, y: &[usize], params: &SvmParams, seed: u64) -> Result<TrainedModel> {
    let (classes, yi) = encode_classes(x, y)?;
    check_c(params.c, params.epochs)?;
    let d = x.ncols();
    let k = classes.len();
    let positives: Vec<usize> = if k == 2 { vec![1] } else { (0..k).collect() };
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    let mut history = vec![0.0; params.epochs];
    for &pos in &positives {
        let t: Vec<f64> = yi.iter().map(|&c| if c == pos { 1.0 } else { -1.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(pos as u64);
        let fit = pegasos(x, &t, params.c, params.epochs, Loss::Hinge, &mut rng);
        for (h, v) in history.iter_mut().zip(&fit.history) {
            *h += v;
        }
        weights.push(fit.w[..d].to_vec());
        bias.push(fit.w[d]);
    }
    let diag = Diagnostics {
        iterations: params.epochs,
        loss_history: history,
        ..Default::default()
    };
    Ok(TrainedModel::new(
        Family::Linsvm,
        params.to_hyper(),
        seed,
        d,
        Output::Classes(classes),
        Params::Linear {
            weights,
            bias,
            link: Link::Margin,
        },
        diag,
    ))
}

/// Linear epsilon-insensitive regression on mean-centred targets.
pub fn fit_svr_linear(x: ArrayView2<f64>, y: &[f64], params: &SvrParams, seed: u64) -> Result<TrainedModel> {
    check_regression(x, y)?;
    check_c(params.c, params.epochs)?;
    if params.epsilon < 0.0 {
        return Err(LearnError::InvalidHyperparameter("epsilon must be >= 0".into()));
    }
    let d = x.ncols();
    let centre = y.iter().sum::<f64>() / y.len() as f64;
    let t: Vec<f64> = y.iter().map(|v| v - centre).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fit = pegasos(x, &t, params.c, params.epochs, Loss::EpsilonInsensitive(params.epsilon), &mut rng);
    let diag = Diagnostics {
        iterations: params.epochs,
        loss_history: fit.history,
        ..Default::default()
    };
    Ok(TrainedModel::new(
        Family::SvrLinear,
        params.to_hyper(),
        seed,
        d,
        Output::Regression,
        Params::Linear {
            weights: vec![fit.w[..d].to_vec()],
            bias: vec![fit.w[d] + centre],
            link: Link::Identity,
        },
        diag,
    ))
}
