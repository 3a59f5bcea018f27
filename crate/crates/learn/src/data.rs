use ndarray::ArrayView2;

use crate::error::{LearnError, Result};

/// Training targets: class labels or real values.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Classes(&'a [usize]),
    Values(&'a [f64]),
}

impl Target<'_> {
    pub fn len(&self) -> usize {
        match self {
            Target::Classes(y) => y.len(),
            Target::Values(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn check_x(x: ArrayView2<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(LearnError::InvalidInput("empty feature matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::InvalidInput("feature matrix contains non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn check_len(x: ArrayView2<f64>, n: usize) -> Result<()> {
    if x.nrows() != n {
        return Err(LearnError::InvalidInput(format!(
            "{} rows but {} targets",
            x.nrows(),
            n
        )));
    }
    Ok(())
}

/// Sorted distinct labels and the index of each sample's label among them.
pub(crate) fn encode_classes(x: ArrayView2<f64>, y: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    check_x(x)?;
    check_len(x, y.len())?;
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(LearnError::InvalidInput(format!(
            "need at least 2 classes, found {}",
            classes.len()
        )));
    }
    let idx = y
        .iter()
        .map(|c| classes.binary_search(c).expect("label in class list"))
        .collect();
    Ok((classes, idx))
}

pub(crate) fn check_regression(x: ArrayView2<f64>, y: &[f64]) -> Result<()> {
    check_x(x)?;
    check_len(x, y.len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::InvalidInput("non-finite regression target".into()));
    }
    Ok(())
}

/// Numerically stable softmax of one row, in place.
pub(crate) fn softmax(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        s += *v;
    }
    for v in z.iter_mut() {
        *v /= s;
    }
}

pub(crate) fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + (-m).exp())
    } else {
        let e = m.exp();
        e / (1.0 + e)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
