#![allow(dead_code)]

use bvpain_oracle::SplitMix;
use ndarray::Array2;

pub fn blobs(rng: &mut SplitMix, centres: &[[f64; 2]], n_per: usize, sd: f64) -> (Array2<f64>, Vec<usize>) {
    let mut x = Array2::zeros((centres.len() * n_per, 2));
    let mut y = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for k in 0..n_per {
            let i = c * n_per + k;
            x[[i, 0]] = centre[0] + sd * rng.normal();
            x[[i, 1]] = centre[1] + sd * rng.normal();
            y.push(c);
        }
    }
    (x, y)
}

pub fn xor(rng: &mut SplitMix, n: usize) -> (Array2<f64>, Vec<usize>) {
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::new();
    for i in 0..n {
        let (a, b) = (2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        x[[i, 0]] = a;
        x[[i, 1]] = b;
        y.push(usize::from((a > 0.0) != (b > 0.0)));
    }
    (x, y)
}

pub fn uniform_matrix(rng: &mut SplitMix, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.uniform())
}

pub fn accuracy(pred: &[usize], y: &[usize]) -> f64 {
    pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
}

pub fn rows_sum_to_one(p: &Array2<f64>) -> bool {
    p.rows().into_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-9)
}
