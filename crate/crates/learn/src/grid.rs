//! Model specifications and exhaustive grid search.

use std::collections::BTreeMap;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaboost::{fit_adaboost, fit_adaboost_reg};
use crate::data::Target;
use crate::error::{LearnError, Result};
use crate::forest::{fit_extra_trees, fit_random_forest, fit_rf_reg};
use crate::gbt::fit_gbt;
use crate::hyper::*;
use crate::linear::{fit_linreg, fit_logistic};
use crate::model::{Family, TrainedModel};
use crate::svm::{fit_linear_svm, fit_svr_linear};

/// A family plus hyperparameter overrides; missing keys take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(default)]
    pub hyper: HyperMap,
    #[serde(default)]
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self {
            family,
            hyper: HyperMap::new(),
            seed,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.hyper.insert(key.to_string(), value);
        self
    }

    /// Rejects unknown or malformed hyperparameters without training.
    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        match self.family {
            Family::Logreg => LogisticParams::from_hyper(h).map(drop),
            Family::Linreg => LinregParams::from_hyper(h).map(drop),
            Family::Linsvm => SvmParams::from_hyper(h).map(drop),
            Family::SvrLinear => SvrParams::from_hyper(h).map(drop),
            Family::Rforest | Family::Extratrees | Family::RforestReg => {
                ForestParams::from_hyper(h)?.validate()
            }
            Family::Adaboost | Family::AdaboostReg => AdaBoostParams::from_hyper(h).map(drop),
            Family::Gbt | Family::GbtReg => GbtParams::from_hyper(h).map(drop),
        }
    }

    pub fn fit(&self, x: ArrayView2<f64>, target: Target) -> Result<TrainedModel> {
        let h = &self.hyper;
        let seed = self.seed;
        let classes = || match target {
            Target::Classes(y) => Ok(y),
            Target::Values(_) => Err(LearnError::InvalidInput(format!(
                "{} needs class labels",
                self.family
            ))),
        };
        let values = || match target {
            Target::Values(y) => Ok(y),
            Target::Classes(_) => Err(LearnError::InvalidInput(format!(
                "{} needs real-valued targets",
                self.family
            ))),
        };
        let mut model = match self.family {
            Family::Logreg => fit_logistic(x, classes()?, &LogisticParams::from_hyper(h)?)?,
            Family::Linreg => fit_linreg(x, values()?, &LinregParams::from_hyper(h)?)?,
            Family::Linsvm => fit_linear_svm(x, classes()?, &SvmParams::from_hyper(h)?, seed)?,
            Family::SvrLinear => fit_svr_linear(x, values()?, &SvrParams::from_hyper(h)?, seed)?,
            Family::Rforest => fit_random_forest(x, classes()?, &ForestParams::from_hyper(h)?, seed)?,
            Family::Extratrees => fit_extra_trees(x, classes()?, &ForestParams::from_hyper(h)?, seed)?,
            Family::RforestReg => fit_rf_reg(x, values()?, &ForestParams::from_hyper(h)?, seed)?,
            Family::Adaboost => fit_adaboost(x, classes()?, &AdaBoostParams::from_hyper(h)?, seed)?,
            Family::AdaboostReg => {
                fit_adaboost_reg(x, values()?, &AdaBoostParams::from_hyper(h)?, seed)?
            }
            Family::Gbt => fit_gbt(x, Target::Classes(classes()?), &GbtParams::from_hyper(h)?, seed)?,
            Family::GbtReg => fit_gbt(x, Target::Values(values()?), &GbtParams::from_hyper(h)?, seed)?,
        };
        model.seed = seed;
        Ok(model)
    }
}

/// Parameter name to candidate values; points are the Cartesian product in
/// key order with the last key varying fastest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperGrid(pub BTreeMap<String, Vec<f64>>);

impl HyperGrid {
    pub fn single(point: &HyperMap) -> Self {
        Self(point.iter().map(|(k, &v)| (k.clone(), vec![v])).collect())
    }

    pub fn with(mut self, key: &str, values: &[f64]) -> Self {
        self.0.insert(key.to_string(), values.to_vec());
        self
    }

    pub fn len(&self) -> usize {
        self.0.values().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<HyperMap> {
        let mut out = vec![HyperMap::new()];
        for (k, vals) in &self.0 {
            out = out
                .into_iter()
                .flat_map(|p| {
                    vals.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.insert(k.clone(), v);
                        q
                    })
                })
                .collect();
        }
        out
    }
}

impl Family {
    /// Built-in search ranges. An empty grid means "defaults only".
    pub fn default_grid(self) -> HyperGrid {
        let g = HyperGrid::default();
        match self {
            Family::Logreg => g.with("l2_lambda", &[1e-3, 1e-2, 1e-1, 1.0]),
            Family::Linreg => g.with("l2_lambda", &[1e-3, 1e-2, 1e-1, 1.0]),
            Family::Linsvm => g.with("c", &[0.1, 1.0, 10.0]),
            Family::SvrLinear => g.with("c", &[0.1, 1.0, 10.0]).with("epsilon", &[0.1, 0.5]),
            Family::Rforest | Family::RforestReg | Family::Extratrees => g
                .with("n_trees", &[100.0, 300.0])
                .with("max_depth", &[6.0, 0.0]),
            Family::Adaboost | Family::AdaboostReg => g
                .with("n_rounds", &[100.0, 300.0])
                .with("learning_rate", &[0.1, 0.3, 1.0]),
            Family::Gbt | Family::GbtReg => g
                .with("n_rounds", &[100.0, 300.0])
                .with("max_depth", &[2.0, 3.0, 4.0, 6.0])
                .with("learning_rate", &[0.05, 0.1, 0.3])
                .with("l2_leaf_lambda", &[0.1, 1.0, 10.0]),
        }
    }
}

/// Scores a model on held-out data; larger is better.
pub type Scorer<'a> = dyn Fn(&TrainedModel, ArrayView2<f64>, Target) -> Result<f64> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub hyper: HyperMap,
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: HyperMap,
    pub best_score: f64,
    pub points: Vec<GridPoint>,
}

/// Trains every grid point on `train` and scores it on `tuning`. Ties keep
/// the earlier point; failed points are logged and skipped.
pub fn grid_search(
    family: Family,
    grid: &HyperGrid,
    seed: u64,
    train: (ArrayView2<f64>, Target),
    tuning: (ArrayView2<f64>, Target),
    scorer: &Scorer,
) -> Result<GridSearchResult> {
    let points = grid.points();
    if grid.0.values().any(Vec::is_empty) {
        return Err(LearnError::InvalidInput("grid has a parameter with no values".into()));
    }
    let evaluated: Vec<GridPoint> = points
        .into_par_iter()
        .map(|hyper| {
            let spec = ModelSpec {
                family,
                hyper: hyper.clone(),
                seed,
            };
            let scored = spec
                .fit(train.0, train.1)
                .and_then(|m| scorer(&m, tuning.0, tuning.1));
            match scored {
                Ok(s) if s.is_finite() => GridPoint {
                    hyper,
                    score: Some(s),
                    error: None,
                },
                Ok(s) => GridPoint {
                    hyper,
                    score: None,
                    error: Some(format!("non-finite score {s}")),
                },
                Err(e) => GridPoint {
                    hyper,
                    score: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in evaluated.iter().enumerate() {
        match (p.score, &p.error) {
            (Some(s), _) if best.is_none_or(|(_, b)| s > b) => best = Some((i, s)),
            (_, Some(e)) => log::warn!("{family} grid point {:?} skipped: {e}", p.hyper),
            _ => {}
        }
    }
    let (i, best_score) = best.ok_or(LearnError::SearchFailed)?;
    Ok(GridSearchResult {
        best: evaluated[i].hyper.clone(),
        best_score,
        points: evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_order() {
        let g = HyperGrid::default().with("a", &[1.0, 2.0]).with("b", &[10.0, 20.0, 30.0]);
        let p = g.points();
        assert_eq!(p.len(), 6);
        assert_eq!(g.len(), 6);
        assert_eq!(p[0]["a"], 1.0);
        assert_eq!(p[0]["b"], 10.0);
        assert_eq!(p[1]["b"], 20.0);
        assert_eq!(p[3]["a"], 2.0);
        assert_eq!(HyperGrid::default().points(), vec![HyperMap::new()]);
    }

    #[test]
    fn default_grids_are_valid() {
        for f in Family::ALL {
            for p in f.default_grid().points() {
                ModelSpec {
                    family: f,
                    hyper: p,
                    seed: 0,
                }
                .validate()
                .unwrap();
            }
        }
        assert_eq!(Family::Gbt.default_grid().len(), 72);
    }
}
