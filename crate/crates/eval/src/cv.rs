//! K-fold cross-validation with oversampling confined to the training part
//! of each fold.

use std::collections::BTreeMap;

use bvpain_core::dataset::{grouped_kfold, smote, stratified_kfold, SyntheticOrigin};
use bvpain_learn::{ModelSpec, Target, TrainedModel};
use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{EvalError, Result};
use crate::metrics::{balanced_accuracy, macro_ovr_auc, macro_prf, mae_rmse, roc_auc, ConfusionMatrix};

/// How folds are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvMode {
    /// Windows stratified by class; a subject's windows may span folds.
    #[default]
    Window,
    /// All windows of a subject stay in one fold.
    Subject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    pub smote_k: usize,
    /// Oversample minority classes of each training part (classification only).
    pub oversample: bool,
    pub mode: CvMode,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            k: 5,
            smote_k: 5,
            oversample: true,
            mode: CvMode::Window,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskTarget {
    /// Class indices into `names`.
    Classes { labels: Vec<usize>, names: Vec<String> },
    Values(Vec<f64>),
}

/// Model-ready rows of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub feature_names: Vec<String>,
    pub x: Array2<f64>,
    pub target: TaskTarget,
    /// Labels used for stratified splitting, indices into `strata_names`.
    pub strata: Vec<usize>,
    pub strata_names: Vec<String>,
    /// Subject id per row.
    pub groups: Vec<String>,
}

impl TaskData {
    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn class_names(&self) -> Option<&[String]> {
        match &self.target {
            TaskTarget::Classes { names, .. } => Some(names),
            TaskTarget::Values(_) => None,
        }
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let target = match &self.target {
            TaskTarget::Classes { labels, names } => TaskTarget::Classes {
                labels: idx.iter().map(|&i| labels[i]).collect(),
                names: names.clone(),
            },
            TaskTarget::Values(v) => TaskTarget::Values(idx.iter().map(|&i| v[i]).collect()),
        };
        Self {
            feature_names: self.feature_names.clone(),
            x: self.x.select(Axis(0), idx),
            target,
            strata: idx.iter().map(|&i| self.strata[i]).collect(),
            strata_names: self.strata_names.clone(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }

    /// Rows per stratum.
    pub fn strata_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.strata_names.len()];
        self.strata.iter().for_each(|&s| c[s] += 1);
        c
    }

    /// Test-index sets of the k folds.
    pub fn folds(&self, cfg: &CvConfig) -> Result<Vec<Vec<usize>>> {
        Ok(match cfg.mode {
            CvMode::Window => stratified_kfold(&self.strata, cfg.k, cfg.seed)?,
            CvMode::Subject => grouped_kfold(&self.groups, cfg.k, cfg.seed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainTarget {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

impl TrainTarget {
    pub fn view(&self) -> Target<'_> {
        match self {
            TrainTarget::Classes(y) => Target::Classes(y),
            TrainTarget::Values(y) => Target::Values(y),
        }
    }
}

/// Training matrix of one fold (original rows first, then synthetic rows)
/// and the untouched test indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedFold {
    pub x_train: Array2<f64>,
    pub y_train: TrainTarget,
    /// Row indices of `data` behind the original training rows.
    pub train: Vec<usize>,
    /// `Some` for synthetic training rows.
    pub origin: Vec<Option<SyntheticOrigin>>,
    pub test: Vec<usize>,
}

impl PreparedFold {
    pub fn synthetic_count(&self) -> usize {
        self.origin.iter().filter(|o| o.is_some()).count()
    }
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn rows_of(x: &Array2<f64>, idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| x.row(i).to_vec()).collect()
}

/// Builds the training part from every row not in `test`, oversampling it
/// when configured. The test rows are never touched.
pub fn prepare_fold(data: &TaskData, test: &[usize], cfg: &CvConfig, fold: usize) -> Result<PreparedFold> {
    let mut in_test = vec![false; data.len()];
    test.iter().for_each(|&i| in_test[i] = true);
    let train: Vec<usize> = (0..data.len()).filter(|&i| !in_test[i]).collect();
    match &data.target {
        TaskTarget::Classes { labels, .. } if cfg.oversample => {
            let y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
            let out = smote(&rows_of(&data.x, &train), &y, cfg.smote_k, fold_seed(cfg.seed, fold))?;
            let width = data.x.ncols();
            let flat: Vec<f64> = out.x.into_iter().flatten().collect();
            let x_train = Array2::from_shape_vec((flat.len() / width.max(1), width), flat)
                .map_err(|e| EvalError::InvalidInput(e.to_string()))?;
            Ok(PreparedFold {
                x_train,
                y_train: TrainTarget::Classes(out.y),
                train,
                origin: out.origin,
                test: test.to_vec(),
            })
        }
        target => {
            let y_train = match target {
                TaskTarget::Classes { labels, .. } => TrainTarget::Classes(train.iter().map(|&i| labels[i]).collect()),
                TaskTarget::Values(v) => TrainTarget::Values(train.iter().map(|&i| v[i]).collect()),
            };
            Ok(PreparedFold {
                x_train: data.x.select(Axis(0), &train),
                origin: vec![None; train.len()],
                y_train,
                train,
                test: test.to_vec(),
            })
        }
    }
}

/// Predictions on a test fold.
#[derive(Debug, Clone, PartialEq)]
pub enum FoldPrediction {
    /// Predicted class indices and one probability column per task class.
    Classes { predicted: Vec<usize>, proba: Array2<f64> },
    Values(Vec<f64>),
}

/// Reference predictors reported next to the trained models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// Most frequent original training class, with a one-hot probability.
    Majority,
    /// The same value for every row.
    Constant(f64),
}

impl Baseline {
    pub fn name(&self) -> String {
        match self {
            Baseline::Majority => "majority class".into(),
            Baseline::Constant(v) => format!("constant P={v}"),
        }
    }

    fn predict(&self, fold: &PreparedFold, n_test: usize, n_classes: usize) -> Result<FoldPrediction> {
        match (self, &fold.y_train) {
            (Baseline::Majority, TrainTarget::Classes(y)) => {
                // counted before oversampling, which would balance them all
                let mut counts = vec![0usize; n_classes];
                y.iter()
                    .zip(&fold.origin)
                    .filter(|(_, o)| o.is_none())
                    .for_each(|(&c, _)| counts[c] += 1);
                // ties go to the lowest class index
                let best = (0..n_classes).fold(0, |b, c| if counts[c] > counts[b] { c } else { b });
                let mut proba = Array2::zeros((n_test, n_classes));
                proba.column_mut(best).fill(1.0);
                Ok(FoldPrediction::Classes {
                    predicted: vec![best; n_test],
                    proba,
                })
            }
            (Baseline::Constant(v), TrainTarget::Values(_)) => Ok(FoldPrediction::Values(vec![*v; n_test])),
            _ => Err(EvalError::InvalidInput(format!(
                "baseline '{}' does not fit this task type",
                self.name()
            ))),
        }
    }
}

/// Probability columns aligned to all `k` task classes; classes missing
/// from the model's training data get zero.
fn full_proba(model: &TrainedModel, x: ArrayView2<f64>, k: usize) -> Result<Array2<f64>> {
    let p = model.predict_proba(x)?;
    let classes = model.classes().unwrap_or(&[]);
    if classes.len() == k && classes.iter().enumerate().all(|(i, &c)| i == c) {
        return Ok(p);
    }
    let mut out = Array2::zeros((x.nrows(), k));
    for (j, &c) in classes.iter().enumerate() {
        out.column_mut(c).assign(&p.column(j));
    }
    Ok(out)
}

fn model_predict(model: &TrainedModel, x: ArrayView2<f64>, n_classes: Option<usize>) -> Result<FoldPrediction> {
    match n_classes {
        Some(k) => Ok(FoldPrediction::Classes {
            predicted: model.predict(x)?,
            proba: full_proba(model, x, k)?,
        }),
        None => Ok(FoldPrediction::Values(model.predict_value(x)?)),
    }
}

/// Names of the metrics reported for classification tasks.
pub const CLASSIFICATION_METRICS: [&str; 6] = [
    "accuracy",
    "balanced_accuracy",
    "f1_macro",
    "precision_macro",
    "recall_macro",
    "roc_auc",
];
/// Names of the metrics reported for regression tasks.
pub const REGRESSION_METRICS: [&str; 2] = ["mae", "rmse"];

/// Metric values of one test fold, plus its confusion matrix for
/// classification.
pub fn score_fold(
    data: &TaskData,
    test: &[usize],
    pred: &FoldPrediction,
) -> Result<(BTreeMap<String, f64>, Option<ConfusionMatrix>)> {
    let mut m = BTreeMap::new();
    match (&data.target, pred) {
        (TaskTarget::Classes { labels, names }, FoldPrediction::Classes { predicted, proba }) => {
            let truth: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
            let cm = ConfusionMatrix::from_indices(names.clone(), &truth, predicted)?;
            let prf = macro_prf(&cm);
            let auc = if names.len() == 2 {
                let pos: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
                roc_auc(&proba.column(1).to_vec(), &pos)?
            } else {
                macro_ovr_auc(proba.view(), &truth)?.macro_auc
            };
            m.insert("accuracy".into(), cm.accuracy());
            m.insert("balanced_accuracy".into(), balanced_accuracy(&cm)?);
            m.insert("f1_macro".into(), prf.f1);
            m.insert("precision_macro".into(), prf.precision);
            m.insert("recall_macro".into(), prf.recall);
            m.insert("roc_auc".into(), auc);
            Ok((m, Some(cm)))
        }
        (TaskTarget::Values(v), FoldPrediction::Values(p)) => {
            let truth: Vec<f64> = test.iter().map(|&i| v[i]).collect();
            let (mae, rmse) = mae_rmse(&truth, p)?;
            m.insert("mae".into(), mae);
            m.insert("rmse".into(), rmse);
            Ok((m, None))
        }
        _ => Err(EvalError::InvalidInput("prediction type does not match the task".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_synthetic: usize,
    pub n_test: usize,
    pub metrics: BTreeMap<String, f64>,
    pub confusion: Option<ConfusionMatrix>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// `None` for failed folds.
    pub per_fold: Vec<Option<f64>>,
    pub mean: f64,
    /// Population standard deviation over the successful folds.
    pub std: f64,
    /// `mean ± std`, in percent for classification metrics.
    pub formatted: String,
}

impl MetricSummary {
    pub fn from_folds(name: &str, per_fold: Vec<Option<f64>>) -> Self {
        let ok: Vec<f64> = per_fold.iter().flatten().copied().collect();
        let n = ok.len().max(1) as f64;
        let mean = ok.iter().sum::<f64>() / n;
        let std = (ok.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        let scale = if REGRESSION_METRICS.contains(&name) { 1.0 } else { 100.0 };
        Self {
            formatted: format!("{:.2} ± {:.2}", mean * scale, std * scale),
            per_fold,
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub mode: CvMode,
    pub folds: Vec<FoldResult>,
    pub metrics: BTreeMap<String, MetricSummary>,
    /// Sum of the per-fold confusion matrices.
    pub confusion: Option<ConfusionMatrix>,
    pub failed_folds: Vec<usize>,
}

fn run_cv<F>(data: &TaskData, cfg: &CvConfig, predict: F) -> Result<CvReport>
where
    F: Fn(&PreparedFold, ArrayView2<f64>) -> Result<FoldPrediction> + Sync,
{
    if data.is_empty() {
        return Err(EvalError::InvalidInput("no rows to cross-validate".into()));
    }
    let folds = data.folds(cfg)?;
    let results: Vec<FoldResult> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut res = FoldResult {
                fold: f,
                n_train: data.len() - test.len(),
                n_synthetic: 0,
                n_test: test.len(),
                metrics: BTreeMap::new(),
                confusion: None,
                error: None,
            };
            let outcome = prepare_fold(data, test, cfg, f).and_then(|prep| {
                res.n_synthetic = prep.synthetic_count();
                let x_test = data.x.select(Axis(0), test);
                let pred = predict(&prep, x_test.view())?;
                score_fold(data, test, &pred)
            });
            match outcome {
                Ok((m, cm)) => {
                    res.metrics = m;
                    res.confusion = cm;
                }
                Err(e) => {
                    log::warn!("fold {f} failed: {e}");
                    res.error = Some(e.to_string());
                }
            }
            res
        })
        .collect();
    let failed: Vec<usize> = results.iter().filter(|r| r.error.is_some()).map(|r| r.fold).collect();
    if failed.len() >= 2 || failed.len() == results.len() {
        return Err(EvalError::RunFailed {
            failed: failed.len(),
            folds: results.len(),
            first_error: results[failed[0]].error.clone().unwrap_or_default(),
        });
    }
    let names: &[&str] = match data.target {
        TaskTarget::Classes { .. } => &CLASSIFICATION_METRICS,
        TaskTarget::Values(_) => &REGRESSION_METRICS,
    };
    let metrics = names
        .iter()
        .map(|&n| {
            let per_fold = results.iter().map(|r| r.metrics.get(n).copied()).collect();
            (n.to_string(), MetricSummary::from_folds(n, per_fold))
        })
        .collect();
    let mut confusion: Option<ConfusionMatrix> = data.class_names().map(|c| ConfusionMatrix::zeros(c.to_vec()));
    if let Some(total) = confusion.as_mut() {
        for cm in results.iter().filter_map(|r| r.confusion.as_ref()) {
            total.add(cm)?;
        }
    }
    Ok(CvReport {
        k: folds.len(),
        mode: cfg.mode,
        folds: results,
        metrics,
        confusion,
        failed_folds: failed,
    })
}

/// Fits `spec` on the (oversampled) training part of each fold and scores
/// it on the untouched test fold. Folds run in parallel; the report does
/// not depend on scheduling.
pub fn cross_validate(spec: &ModelSpec, data: &TaskData, cfg: &CvConfig) -> Result<CvReport> {
    spec.validate()?;
    let n_classes = data.class_names().map(<[String]>::len);
    run_cv(data, cfg, |prep, x_test| {
        let model = spec.fit(prep.x_train.view(), prep.y_train.view())?;
        model_predict(&model, x_test, n_classes)
    })
}

/// Cross-validates a reference predictor on the same folds.
pub fn cross_validate_baseline(baseline: Baseline, data: &TaskData, cfg: &CvConfig) -> Result<CvReport> {
    let n_classes = data.class_names().map_or(0, <[String]>::len);
    run_cv(data, cfg, |prep, x_test| baseline.predict(prep, x_test.nrows(), n_classes))
}
