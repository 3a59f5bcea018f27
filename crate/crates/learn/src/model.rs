use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{argmax, sigmoid, softmax};
use crate::error::{LearnError, Result};
use crate::hyper::HyperMap;
use crate::tree::Tree;

/// Bumped whenever the serialized layout changes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Logreg,
    Linsvm,
    Rforest,
    Extratrees,
    Adaboost,
    Gbt,
    Linreg,
    SvrLinear,
    RforestReg,
    AdaboostReg,
    GbtReg,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Logreg,
        Family::Linsvm,
        Family::Rforest,
        Family::Extratrees,
        Family::Adaboost,
        Family::Gbt,
        Family::Linreg,
        Family::SvrLinear,
        Family::RforestReg,
        Family::AdaboostReg,
        Family::GbtReg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Logreg => "LOGREG",
            Family::Linsvm => "LINSVM",
            Family::Rforest => "RFOREST",
            Family::Extratrees => "EXTRATREES",
            Family::Adaboost => "ADABOOST",
            Family::Gbt => "GBT",
            Family::Linreg => "LINREG",
            Family::SvrLinear => "SVR_LINEAR",
            Family::RforestReg => "RFOREST_REG",
            Family::AdaboostReg => "ADABOOST_REG",
            Family::GbtReg => "GBT_REG",
        }
    }

    pub fn is_regression(self) -> bool {
        matches!(
            self,
            Family::Linreg
                | Family::SvrLinear
                | Family::RforestReg
                | Family::AdaboostReg
                | Family::GbtReg
        )
    }

    /// Regression counterpart of a classifier family (identity for
    /// regression families). Extra-trees has none.
    pub fn regression_variant(self) -> Option<Family> {
        match self {
            Family::Logreg => Some(Family::Linreg),
            Family::Linsvm => Some(Family::SvrLinear),
            Family::Rforest => Some(Family::RforestReg),
            Family::Adaboost => Some(Family::AdaboostReg),
            Family::Gbt => Some(Family::GbtReg),
            Family::Extratrees => None,
            f => Some(f),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = LearnError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| LearnError::InvalidInput(format!("unknown model family {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// Original labels, sorted; probability columns follow this order.
    Classes(Vec<usize>),
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum Link {
    /// Multinomial logits.
    Softmax,
    /// One-vs-rest margins; a single row for two classes.
    Margin,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub(crate) enum Params {
    Linear {
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
        link: Link,
    },
    Forest {
        trees: Vec<Tree>,
        importances: Vec<f64>,
    },
    AdaBoost {
        trees: Vec<Tree>,
        alphas: Vec<f64>,
    },
    /// One additive model per output; a single one for binary and
    /// regression, one per class (one-vs-rest) otherwise.
    Boosted {
        base: Vec<f64>,
        trees: Vec<Vec<Tree>>,
    },
}

/// Training traces kept with the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Diagnostics {
    pub converged: Option<bool>,
    pub iterations: usize,
    /// Training objective after each iteration, round or epoch.
    pub loss_history: Vec<f64>,
    /// AdaBoost instance-weight totals after each round.
    pub weight_sums: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub family: Family,
    pub hyper: HyperMap,
    pub seed: u64,
    pub n_features: usize,
    pub output: Output,
    pub diagnostics: Diagnostics,
    params: Params,
}

impl TrainedModel {
    pub(crate) fn new(
        family: Family,
        hyper: HyperMap,
        seed: u64,
        n_features: usize,
        output: Output,
        params: Params,
        diagnostics: Diagnostics,
    ) -> Self {
        for w in &diagnostics.warnings {
            log::warn!("{family}: {w}");
        }
        Self {
            format_version: MODEL_FORMAT_VERSION,
            family,
            hyper,
            seed,
            n_features,
            output,
            diagnostics,
            params,
        }
    }

    pub fn classes(&self) -> Option<&[usize]> {
        match &self.output {
            Output::Classes(c) => Some(c),
            Output::Regression => None,
        }
    }

    pub fn is_regression(&self) -> bool {
        self.output == Output::Regression
    }

    /// Normalised impurity importances of forest models.
    pub fn feature_importances(&self) -> Option<&[f64]> {
        match &self.params {
            Params::Forest { importances, .. } => Some(importances),
            _ => None,
        }
    }

    /// Total number of fitted trees, zero for linear models.
    pub fn tree_count(&self) -> usize {
        match &self.params {
            Params::Linear { .. } => 0,
            Params::Forest { trees, .. } | Params::AdaBoost { trees, .. } => trees.len(),
            Params::Boosted { trees, .. } => trees.iter().map(Vec::len).sum(),
        }
    }

    /// Depth of the deepest fitted tree, zero for linear models.
    pub fn max_tree_depth(&self) -> usize {
        let trees: Vec<&Tree> = match &self.params {
            Params::Linear { .. } => Vec::new(),
            Params::Forest { trees, .. } | Params::AdaBoost { trees, .. } => trees.iter().collect(),
            Params::Boosted { trees, .. } => trees.iter().flatten().collect(),
        };
        trees.iter().map(|t| t.depth()).max().unwrap_or(0)
    }

    /// Leaf values of the boosted trees (already shrunk).
    pub fn boosted_leaf_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Params::Boosted { trees, .. } = &self.params {
            for t in trees.iter().flatten() {
                for n in &t.nodes {
                    if let crate::tree::Node::Leaf { value } = n {
                        out.extend(value);
                    }
                }
            }
        }
        out
    }

    /// Raw linear weights, one row per output.
    pub fn linear_weights(&self) -> Option<&[Vec<f64>]> {
        match &self.params {
            Params::Linear { weights, .. } => Some(weights),
            _ => None,
        }
    }

    fn check_width(&self, x: ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.n_features {
            return Err(LearnError::InvalidInput(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Class probabilities, one column per entry of [`Self::classes`].
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_width(x)?;
        let k = match &self.output {
            Output::Classes(c) => c.len(),
            Output::Regression => {
                return Err(LearnError::InvalidInput(
                    "predict_proba called on a regression model".into(),
                ))
            }
        };
        let mut out = Array2::zeros((x.nrows(), k));
        let mut row = vec![0.0; k];
        for i in 0..x.nrows() {
            self.proba_row(x, i, &mut row);
            for (c, &p) in row.iter().enumerate() {
                out[[i, c]] = p;
            }
        }
        Ok(out)
    }

    fn proba_row(&self, x: ArrayView2<f64>, i: usize, row: &mut [f64]) {
        let k = row.len();
        match &self.params {
            Params::Linear {
                weights,
                bias,
                link,
            } => {
                let z: Vec<f64> = weights
                    .iter()
                    .zip(bias)
                    .map(|(w, b)| b + w.iter().zip(x.row(i)).map(|(a, v)| a * v).sum::<f64>())
                    .collect();
                if z.len() == 1 {
                    let p = sigmoid(z[0]);
                    row[0] = 1.0 - p;
                    row[1] = p;
                } else {
                    row.copy_from_slice(&z);
                    debug_assert!(*link != Link::Identity);
                    softmax(row);
                }
            }
            Params::Forest { trees, .. } => {
                row.fill(0.0);
                for t in trees {
                    for (r, v) in row.iter_mut().zip(t.leaf(x, i)) {
                        *r += v;
                    }
                }
                let n = trees.len() as f64;
                row.iter_mut().for_each(|r| *r /= n);
            }
            Params::AdaBoost { trees, alphas } => {
                row.fill(0.0);
                for (t, a) in trees.iter().zip(alphas) {
                    row[argmax(t.leaf(x, i))] += a;
                }
                let scale = (k - 1) as f64;
                row.iter_mut().for_each(|r| *r /= scale);
                softmax(row);
            }
            Params::Boosted { base, trees } => {
                let margins: Vec<f64> = base
                    .iter()
                    .zip(trees)
                    .map(|(b, ts)| b + ts.iter().map(|t| t.leaf(x, i)[0]).sum::<f64>())
                    .collect();
                if margins.len() == 1 {
                    let p = sigmoid(margins[0]);
                    row[0] = 1.0 - p;
                    row[1] = p;
                } else {
                    for (r, m) in row.iter_mut().zip(&margins) {
                        *r = sigmoid(*m);
                    }
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|r| *r /= s);
                }
            }
        }
    }

    /// Most probable label per row; ties go to the smaller label.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        let p = self.predict_proba(x)?;
        let classes = self.classes().expect("classifier");
        Ok(p.rows()
            .into_iter()
            .map(|r| classes[argmax(r.as_slice().expect("standard layout"))])
            .collect())
    }

    /// Real-valued predictions of a regression model.
    pub fn predict_value(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        self.check_width(x)?;
        if !self.is_regression() {
            return Err(LearnError::InvalidInput(
                "predict_value called on a classifier".into(),
            ));
        }
        Ok((0..x.nrows()).map(|i| self.value_row(x, i)).collect())
    }

    fn value_row(&self, x: ArrayView2<f64>, i: usize) -> f64 {
        match &self.params {
            Params::Linear { weights, bias, .. } => {
                bias[0] + weights[0].iter().zip(x.row(i)).map(|(a, v)| a * v).sum::<f64>()
            }
            Params::Forest { trees, .. } => {
                trees.iter().map(|t| t.leaf(x, i)[0]).sum::<f64>() / trees.len() as f64
            }
            Params::AdaBoost { trees, alphas } => {
                let mut preds: Vec<(f64, f64)> = trees
                    .iter()
                    .zip(alphas)
                    .map(|(t, &a)| (t.leaf(x, i)[0], a))
                    .collect();
                weighted_median(&mut preds)
            }
            Params::Boosted { base, trees } => {
                base[0] + trees[0].iter().map(|t| t.leaf(x, i)[0]).sum::<f64>()
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| LearnError::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| LearnError::Serialization(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(LearnError::Serialization(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }
}

/// Smallest value whose cumulative weight reaches half the total.
pub(crate) fn weighted_median(pairs: &mut [(f64, f64)]) -> f64 {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(v, w) in pairs.iter() {
        acc += w;
        if acc >= 0.5 * total {
            return v;
        }
    }
    pairs.last().map_or(f64::NAN, |p| p.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
            assert_eq!(
                serde_json::to_string(&f).unwrap(),
                format!("\"{}\"", f.name())
            );
        }
        assert_eq!("gbt-reg".parse::<Family>().unwrap(), Family::GbtReg);
        assert!("xgb".parse::<Family>().is_err());
    }

    #[test]
    fn median_by_weight() {
        assert_eq!(weighted_median(&mut [(3.0, 1.0), (1.0, 1.0), (2.0, 1.0)]), 2.0);
        assert_eq!(weighted_median(&mut [(3.0, 5.0), (1.0, 1.0), (2.0, 1.0)]), 3.0);
    }
}
