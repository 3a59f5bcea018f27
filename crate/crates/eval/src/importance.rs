//! Extra-trees feature importance averaged over cross-validation folds.

use bvpain_learn::extra_trees_importance;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cv::{prepare_fold, CvConfig, TaskData, TrainTarget};
use crate::error::{EvalError, Result};

/// Features above this mean importance are flagged as top features.
pub const TOP_THRESHOLD: f64 = 0.025;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRow {
    pub feature: String,
    pub mean: f64,
    /// Population std across folds.
    pub std: f64,
    pub top: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub threshold: f64,
    pub n_trees: usize,
    /// Importances per fold in column order.
    pub per_fold: Vec<Vec<f64>>,
    /// Sorted by decreasing mean importance.
    pub rows: Vec<ImportanceRow>,
}

impl ImportanceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rank,feature,importance,std,top\n");
        for (i, r) in self.rows.iter().enumerate() {
            s.push_str(&format!("{},{},{},{},{}\n", i + 1, r.feature, r.mean, r.std, r.top));
        }
        s
    }

    pub fn top_features(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| r.top).map(|r| r.feature.as_str()).collect()
    }
}

/// Fits an extra-trees forest on the training part of every fold (after
/// oversampling) and averages the importances.
pub fn fold_importance(data: &TaskData, cfg: &CvConfig, n_trees: usize, seed: u64) -> Result<ImportanceReport> {
    if data.class_names().is_none() {
        return Err(EvalError::InvalidInput("importance needs a classification task".into()));
    }
    let folds = data.folds(cfg)?;
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let prep = prepare_fold(data, test, cfg, f)?;
            let TrainTarget::Classes(y) = &prep.y_train else {
                unreachable!("classification task")
            };
            Ok(extra_trees_importance(prep.x_train.view(), y, n_trees, seed)?)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let k = per_fold.len() as f64;
    let mut rows: Vec<ImportanceRow> = data
        .feature_names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mean = per_fold.iter().map(|v| v[j]).sum::<f64>() / k;
            let var = per_fold.iter().map(|v| (v[j] - mean) * (v[j] - mean)).sum::<f64>() / k;
            ImportanceRow {
                feature: name.clone(),
                mean,
                std: var.sqrt(),
                top: mean > TOP_THRESHOLD,
            }
        })
        .collect();
    // stable: equal importances keep column order
    rows.sort_by(|a, b| b.mean.total_cmp(&a.mean));
    Ok(ImportanceReport {
        threshold: TOP_THRESHOLD,
        n_trees,
        per_fold,
        rows,
    })
}
