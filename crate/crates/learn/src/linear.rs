//! Logistic and ridge regression fitted with L-BFGS.

use ndarray::ArrayView2;

use crate::data::{check_regression, encode_classes};
use crate::error::{LearnError, Result};
use crate::hyper::{LinregParams, LogisticParams};
use crate::model::{Diagnostics, Family, Link, Output, Params, TrainedModel};

pub(crate) struct LbfgsResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory BFGS with Armijo backtracking. Stops when the largest
/// gradient component drops below `tol`.
pub(crate) fn lbfgs<F>(mut f: F, x0: Vec<f64>, max_iter: usize, tol: f64) -> Result<LbfgsResult>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    const MEMORY: usize = 10;
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    if !fx.is_finite() {
        return Err(LearnError::TrainingDiverged("non-finite initial loss".into()));
    }
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut history = vec![fx];
    let gmax = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for it in 0..max_iter {
        if gmax(&g) <= tol {
            return Ok(LbfgsResult {
                x,
                iterations: it,
                converged: true,
                history,
            });
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = vec![0.0; s_hist.len()];
        for j in (0..s_hist.len()).rev() {
            let rho = 1.0 / dot(&y_hist[j], &s_hist[j]);
            alphas[j] = rho * dot(&s_hist[j], &q);
            for (qi, yi) in q.iter_mut().zip(&y_hist[j]) {
                *qi -= alphas[j] * yi;
            }
        }
        let gamma = match (s_hist.last(), y_hist.last()) {
            (Some(s), Some(y)) => dot(s, y) / dot(y, y),
            _ => 1.0 / dot(&g, &g).sqrt().max(1.0),
        };
        q.iter_mut().for_each(|v| *v *= gamma);
        for j in 0..s_hist.len() {
            let rho = 1.0 / dot(&y_hist[j], &s_hist[j]);
            let beta = rho * dot(&y_hist[j], &q);
            for (qi, si) in q.iter_mut().zip(&s_hist[j]) {
                *qi += (alphas[j] - beta) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            // not a descent direction: restart from steepest descent
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let (x_new, f_new, g_new) = loop {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let (fc, gc) = f(&cand);
            if fc.is_finite() && fc <= fx + 1e-4 * step * slope {
                break (cand, fc, gc);
            }
            step *= 0.5;
            if step < 1e-20 {
                return Ok(LbfgsResult {
                    x,
                    iterations: it,
                    converged: gmax(&g) <= tol.sqrt(),
                    history,
                });
            }
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &y) > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if s_hist.len() == MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(fx);
    }
    Ok(LbfgsResult {
        converged: gmax(&g) <= tol,
        x,
        iterations: max_iter,
        history,
    })
}

/// Mean multinomial cross-entropy plus `l2_lambda * ||W||^2` and its gradient.
///
/// `theta` holds `n_classes` blocks of `[w_0 .. w_{d-1}, b]`; intercepts are
/// not penalised. `y` holds class indices in `0..n_classes`.
pub fn logistic_loss_and_grad(
    x: ArrayView2<f64>,
    y: &[usize],
    n_classes: usize,
    l2_lambda: f64,
    theta: &[f64],
) -> (f64, Vec<f64>) {
    let (n, d) = x.dim();
    let stride = d + 1;
    debug_assert_eq!(theta.len(), n_classes * stride);
    let mut grad = vec![0.0; theta.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for i in 0..n {
        let row = x.row(i);
        for (c, zc) in z.iter_mut().enumerate() {
            let w = &theta[c * stride..c * stride + d];
            *zc = theta[c * stride + d] + w.iter().zip(row.iter()).map(|(a, v)| a * v).sum::<f64>();
        }
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[y[i]];
        for c in 0..n_classes {
            let r = (z[c] - lse).exp() - f64::from(u8::from(c == y[i]));
            let block = &mut grad[c * stride..(c + 1) * stride];
            for (gj, v) in block[..d].iter_mut().zip(row.iter()) {
                *gj += r * v;
            }
            block[d] += r;
        }
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    grad.iter_mut().for_each(|g| *g *= inv_n);
    for c in 0..n_classes {
        for j in 0..d {
            let w = theta[c * stride + j];
            loss += l2_lambda * w * w;
            grad[c * stride + j] += 2.0 * l2_lambda * w;
        }
    }
    (loss, grad)
}

/// Multinomial logistic regression with an L2 penalty on the weights.
pub fn fit_logistic(x: ArrayView2<f64>, y: &[usize], params: &LogisticParams) -> Result<TrainedModel> {
    let (classes, yi) = encode_classes(x, y)?;
    if params.l2_lambda < 0.0 || params.tol <= 0.0 {
        return Err(LearnError::InvalidHyperparameter(
            "l2_lambda must be >= 0 and tol > 0".into(),
        ));
    }
    let k = classes.len();
    let d = x.ncols();
    let res = lbfgs(
        |th| logistic_loss_and_grad(x, &yi, k, params.l2_lambda, th),
        vec![0.0; k * (d + 1)],
        params.max_iter,
        params.tol,
    )?;
    let mut diag = Diagnostics {
        converged: Some(res.converged),
        iterations: res.iterations,
        loss_history: res.history,
        ..Default::default()
    };
    if !res.converged {
        diag.warnings
            .push(format!("did not converge in {} iterations", params.max_iter));
    }
    let weights = (0..k)
        .map(|c| res.x[c * (d + 1)..c * (d + 1) + d].to_vec())
        .collect();
    let bias = (0..k).map(|c| res.x[c * (d + 1) + d]).collect();
    Ok(TrainedModel::new(
        Family::Logreg,
        params.to_hyper(),
        0,
        d,
        Output::Classes(classes),
        Params::Linear {
            weights,
            bias,
            link: Link::Softmax,
        },
        diag,
    ))
}

/// `(1/2n) * sum r^2 + l2_lambda * ||w||^2` and its gradient; the last entry
/// of `theta` is the unpenalised intercept.
pub(crate) fn ridge_loss_and_grad(x: ArrayView2<f64>, y: &[f64], l2_lambda: f64, theta: &[f64]) -> (f64, Vec<f64>) {
    let (n, d) = x.dim();
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    for i in 0..n {
        let row = x.row(i);
        let r = theta[d] + theta[..d].iter().zip(row.iter()).map(|(a, v)| a * v).sum::<f64>() - y[i];
        loss += 0.5 * r * r;
        for (gj, v) in grad[..d].iter_mut().zip(row.iter()) {
            *gj += r * v;
        }
        grad[d] += r;
    }
    let inv_n = 1.0 / n as f64;
    loss *= inv_n;
    grad.iter_mut().for_each(|g| *g *= inv_n);
    for j in 0..d {
        loss += l2_lambda * theta[j] * theta[j];
        grad[j] += 2.0 * l2_lambda * theta[j];
    }
    (loss, grad)
}

/// Ridge regression.
pub fn fit_linreg(x: ArrayView2<f64>, y: &[f64], params: &LinregParams) -> Result<TrainedModel> {
    check_regression(x, y)?;
    if params.l2_lambda < 0.0 || params.tol <= 0.0 {
        return Err(LearnError::InvalidHyperparameter(
            "l2_lambda must be >= 0 and tol > 0".into(),
        ));
    }
    let d = x.ncols();
    let mut theta0 = vec![0.0; d + 1];
    theta0[d] = y.iter().sum::<f64>() / y.len() as f64;
    let res = lbfgs(
        |th| ridge_loss_and_grad(x, y, params.l2_lambda, th),
        theta0,
        params.max_iter,
        params.tol,
    )?;
    let diag = Diagnostics {
        converged: Some(res.converged),
        iterations: res.iterations,
        loss_history: res.history,
        ..Default::default()
    };
    Ok(TrainedModel::new(
        Family::Linreg,
        params.to_hyper(),
        0,
        d,
        Output::Regression,
        Params::Linear {
            weights: vec![res.x[..d].to_vec()],
            bias: vec![res.x[d]],
            link: Link::Identity,
        },
        diag,
    ))
}
