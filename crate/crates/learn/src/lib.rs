//! Classifiers and regressors for windowed feature tables: logistic and
//! ridge regression, linear SVM/SVR, random forests, extra-trees, AdaBoost
//! and Newton gradient boosting, plus exhaustive grid search.
//!
//! Inputs are `n x d` matrices of `f64`; class labels are arbitrary `usize`
//! values.

mod adaboost;
mod data;
mod error;
mod forest;
mod gbt;
mod grid;
mod hyper;
mod linear;
mod model;
mod svm;
mod tree;

pub use adaboost::{fit_adaboost, fit_adaboost_reg};
pub use data::Target;
pub use error::{LearnError, Result};
pub use forest::{extra_trees_importance, fit_extra_trees, fit_random_forest, fit_rf_reg};
pub use gbt::fit_gbt;
pub use grid::{grid_search, GridPoint, GridSearchResult, HyperGrid, ModelSpec, Scorer};
pub use hyper::{
    AdaBoostParams, ForestParams, GbtParams, HyperMap, LinregParams, LogisticParams, SvmParams,
    SvrParams,
};
pub use linear::{fit_linreg, fit_logistic, logistic_loss_and_grad};
pub use model::{Diagnostics, Family, Output, TrainedModel, MODEL_FORMAT_VERSION};
pub use svm::{fit_linear_svm, fit_svr_linear};

/// Feature matrices used throughout.
pub type Matrix = ndarray::Array2<f64>;
pub type MatrixView<'a> = ndarray::ArrayView2<'a, f64>;
