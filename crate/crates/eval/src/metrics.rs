//! Classification and regression metrics.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: Vec<String>) -> Self {
        let k = classes.len();
        Self {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    /// `y_true` and `y_pred` hold indices into `classes`.
    pub fn from_indices(classes: Vec<String>, y_true: &[usize], y_pred: &[usize]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(EvalError::InvalidInput(format!(
                "{} true labels but {} predictions",
                y_true.len(),
                y_pred.len()
            )));
        }
        let mut cm = Self::zeros(classes);
        let k = cm.classes.len();
        for (&t, &p) in y_true.iter().zip(y_pred) {
            if t >= k || p >= k {
                return Err(EvalError::InvalidInput(format!(
                    "label index out of range for {k} classes"
                )));
            }
            cm.counts[t][p] += 1;
        }
        Ok(cm)
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let correct: u64 = (0..self.len()).map(|i| self.counts[i][i]).sum();
        ratio(correct, self.total(), "accuracy")
    }

    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.classes != other.classes {
            return Err(EvalError::InvalidInput("confusion matrices have different classes".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    /// Delimited table: a `true\predicted` header of class names, then one
    /// row per true class.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\predicted");
        for c in &self.classes {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.counts) {
            s.push_str(c);
            for v in row {
                s.push(',');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }
}

fn ratio(num: u64, den: u64, what: &str) -> f64 {
    if den == 0 {
        log::debug!("{what}: 0/0 taken as 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 of one class; each 0/0 is taken as 0.
pub fn precision_recall_f1(cm: &ConfusionMatrix, class: usize) -> Prf {
    let k = cm.len();
    let tp = cm.counts[class][class];
    let predicted: u64 = (0..k).map(|r| cm.counts[r][class]).sum();
    let actual: u64 = cm.counts[class].iter().sum();
    let precision = ratio(tp, predicted, "precision");
    let recall = ratio(tp, actual, "recall");
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        log::debug!("F1 of class {}: 0/0 taken as 0", cm.classes[class]);
        0.0
    };
    Prf {
        precision,
        recall,
        f1,
    }
}

/// Unweighted mean over classes of precision, recall and F1.
pub fn macro_prf(cm: &ConfusionMatrix) -> Prf {
    let k = cm.len() as f64;
    let all: Vec<Prf> = (0..cm.len()).map(|c| precision_recall_f1(cm, c)).collect();
    Prf {
        precision: all.iter().map(|p| p.precision).sum::<f64>() / k,
        recall: all.iter().map(|p| p.recall).sum::<f64>() / k,
        f1: all.iter().map(|p| p.f1).sum::<f64>() / k,
    }
}

/// Mean per-class recall.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let mut sum = 0.0;
    for (c, row) in cm.counts.iter().enumerate() {
        let actual: u64 = row.iter().sum();
        if actual == 0 {
            return Err(EvalError::UndefinedClass(cm.classes[c].clone()));
        }
        sum += row[c] as f64 / actual as f64;
    }
    Ok(sum / cm.len() as f64)
}

/// Area under the ROC curve from midranks: the probability that a random
/// positive scores above a random negative, ties counting half.
pub fn roc_auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(EvalError::InvalidInput(format!(
            "{} scores but {} labels",
            scores.len(),
            positive.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(EvalError::InvalidInput("NaN score".into()));
    }
    let n1 = positive.iter().filter(|&&p| p).count();
    let n0 = positive.len() - n1;
    if n1 == 0 || n0 == 0 {
        return Err(EvalError::UndefinedMetric(
            "ROC-AUC needs both positive and negative samples".into(),
        ));
    }
    let ranks = bvpain_stats::midranks(scores);
    let r1: f64 = ranks.iter().zip(positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let n1f = n1 as f64;
    Ok((r1 - n1f * (n1f + 1.0) / 2.0) / (n1f * n0 as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrAuc {
    pub macro_auc: f64,
    /// `None` for classes skipped because they are absent (or are the only
    /// class present).
    pub per_class: Vec<Option<f64>>,
    pub skipped: Vec<usize>,
}

/// Unweighted one-vs-rest mean of per-class AUCs. `labels` are column
/// indices of `proba`.
pub fn macro_ovr_auc(proba: ArrayView2<f64>, labels: &[usize]) -> Result<OvrAuc> {
    let (n, k) = proba.dim();
    if n != labels.len() {
        return Err(EvalError::InvalidInput(format!(
            "{n} probability rows but {} labels",
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l >= k) {
        return Err(EvalError::InvalidInput(format!("label index out of range for {k} columns")));
    }
    let mut per_class = Vec::with_capacity(k);
    let mut skipped = Vec::new();
    for c in 0..k {
        let pos: Vec<bool> = labels.iter().map(|&l| l == c).collect();
        let scores: Vec<f64> = proba.column(c).to_vec();
        match roc_auc(&scores, &pos) {
            Ok(a) => per_class.push(Some(a)),
            Err(EvalError::UndefinedMetric(_)) => {
                log::warn!("class column {c} absent or alone in evaluation set, skipped in macro AUC");
                per_class.push(None);
                skipped.push(c);
            }
            Err(e) => return Err(e),
        }
    }
    let present: Vec<f64> = per_class.iter().flatten().copied().collect();
    if present.len() < 2 {
        return Err(EvalError::UndefinedMetric(
            "macro AUC needs at least 2 classes present".into(),
        ));
    }
    Ok(OvrAuc {
        macro_auc: present.iter().sum::<f64>() / present.len() as f64,
        per_class,
        skipped,
    })
}

/// Mean absolute error and root mean squared error.
pub fn mae_rmse(y_true: &[f64], y_pred: &[f64]) -> Result<(f64, f64)> {
    if y_true.len() != y_pred.len() || y_true.is_empty() {
        return Err(EvalError::InvalidInput(format!(
            "need equal non-zero lengths, got {} and {}",
            y_true.len(),
            y_pred.len()
        )));
    }
    let n = y_true.len() as f64;
    let (abs, sq) = y_true
        .iter()
        .zip(y_pred)
        .fold((0.0, 0.0), |(a, s), (t, p)| (a + (t - p).abs(), s + (t - p) * (t - p)));
    let mae = abs / n;
    // RMSE >= MAE holds exactly; rounding can break it by an ulp when all
    // errors are equal
    Ok((mae, (sq / n).sqrt().max(mae)))
}
