//! Evaluation of pain classifiers and regressors: metrics, cross-validation
//! with in-fold oversampling, the tuning and reporting pipeline, and
//! fold-averaged feature importance.

pub mod cv;
pub mod error;
pub mod importance;
pub mod metrics;
pub mod study;

pub use cv::{
    cross_validate, cross_validate_baseline, prepare_fold, score_fold, Baseline, CvConfig, CvMode, CvReport,
    FoldPrediction, FoldResult, MetricSummary, PreparedFold, TaskData, TaskTarget, TrainTarget,
    CLASSIFICATION_METRICS, REGRESSION_METRICS,
};
pub use error::{EvalError, Result};
pub use importance::{fold_importance, ImportanceReport, ImportanceRow, TOP_THRESHOLD};
pub use metrics::{
    balanced_accuracy, macro_ovr_auc, macro_prf, mae_rmse, precision_recall_f1, roc_auc, ConfusionMatrix, OvrAuc, Prf,
};
pub use study::{
    family_for_task, run_study, task_data, tuning_score, BenchmarkReport, EvalReport, StudyConfig, Task,
    TuningSummary, NAIVE_SCORE,
};
