//! Typed hyperparameter structs that convert to and from name/value maps.

use std::collections::BTreeMap;

use crate::error::{LearnError, Result};

/// Hyperparameters as stored in grids, reports and serialized models.
pub type HyperMap = BTreeMap<String, f64>;

pub(crate) trait HyperValue: Sized + Copy {
    fn from_f64(name: &str, v: f64) -> Result<Self>;
    fn to_f64(self) -> f64;
}

impl HyperValue for f64 {
    fn from_f64(name: &str, v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(LearnError::InvalidHyperparameter(format!("{name} = {v}")))
        }
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl HyperValue for usize {
    fn from_f64(name: &str, v: f64) -> Result<Self> {
        if v >= 0.0 && v.fract() == 0.0 && v < 1e15 {
            Ok(v as usize)
        } else {
            Err(LearnError::InvalidHyperparameter(format!(
                "{name} must be a non-negative integer, got {v}"
            )))
        }
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

macro_rules! hyper_struct {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name {
            $($(#[$fmeta])* pub $field: $ty,)*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { $($field: $default,)* }
            }
        }

        impl $name {
            /// Starts from the defaults and overrides every key in `map`.
            pub fn from_hyper(map: &$crate::hyper::HyperMap) -> $crate::error::Result<Self> {
                let mut out = Self::default();
                for (k, &v) in map {
                    match k.as_str() {
                        $(stringify!($field) => {
                            out.$field = <$ty as $crate::hyper::HyperValue>::from_f64(k, v)?
                        })*
                        other => {
                            return Err($crate::error::LearnError::InvalidHyperparameter(format!(
                                "unknown key {other:?} for {}",
                                stringify!($name)
                            )))
                        }
                    }
                }
                Ok(out)
            }

            pub fn to_hyper(&self) -> $crate::hyper::HyperMap {
                let mut m = $crate::hyper::HyperMap::new();
                $(m.insert(
                    stringify!($field).to_string(),
                    $crate::hyper::HyperValue::to_f64(self.$field),
                );)*
                m
            }
        }
    };
}

hyper_struct!(
    /// L2-penalised multinomial logistic regression.
    LogisticParams {
        l2_lambda: f64 = 1e-2,
        max_iter: usize = 500,
        tol: f64 = 1e-6,
    }
);

hyper_struct!(
    /// Ridge regression.
    LinregParams {
        l2_lambda: f64 = 1e-3,
        max_iter: usize = 500,
        tol: f64 = 1e-8,
    }
);

hyper_struct!(
    /// Linear hinge-loss SVM trained by projected stochastic subgradient.
    SvmParams {
        c: f64 = 1.0,
        epochs: usize = 30,
    }
);

hyper_struct!(
    /// Linear epsilon-insensitive support vector regression.
    SvrParams {
        c: f64 = 1.0,
        epochs: usize = 30,
        epsilon: f64 = 0.1,
    }
);

hyper_struct!(
    /// Bagged or extremely randomized trees.
    ForestParams {
        n_trees: usize = 100,
        /// 0 = unlimited.
        max_depth: usize = 0,
        /// 0 = sqrt(n_features) for classification, n_features/3 for
        /// regression; values below 1 are a fraction of the features.
        max_features: f64 = 0.0,
        min_leaf: usize = 1,
    }
);

hyper_struct!(
    /// SAMME (classification) or AdaBoost.R2 (regression).
    AdaBoostParams {
        n_rounds: usize = 50,
        learning_rate: f64 = 1.0,
        /// Depth of the weak learners; 0 picks 1 for classification and 3
        /// for regression.
        max_depth: usize = 0,
    }
);

hyper_struct!(
    /// Second-order gradient boosting on histogram-binned features.
    GbtParams {
        n_rounds: usize = 100,
        learning_rate: f64 = 0.1,
        max_depth: usize = 3,
        l2_leaf_lambda: f64 = 1.0,
        min_child_weight: f64 = 1.0,
        max_bins: usize = 256,
    }
);

impl ForestParams {
    pub(crate) fn resolved_features(&self, n_features: usize, regression: bool) -> usize {
        let m = self.max_features;
        let k = if m <= 0.0 {
            if regression {
                n_features / 3
            } else {
                (n_features as f64).sqrt().round() as usize
            }
        } else if m < 1.0 {
            (m * n_features as f64).round() as usize
        } else {
            m as usize
        };
        k.clamp(1, n_features)
    }

    pub(crate) fn depth(&self) -> Option<usize> {
        (self.max_depth > 0).then_some(self.max_depth)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(LearnError::InvalidHyperparameter("n_trees must be at least 1".into()));
        }
        if self.max_features < 0.0 {
            return Err(LearnError::InvalidHyperparameter("max_features must be >= 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_unknown_keys() {
        let p = GbtParams {
            max_depth: 6,
            ..Default::default()
        };
        assert_eq!(GbtParams::from_hyper(&p.to_hyper()).unwrap(), p);
        let mut m = HyperMap::new();
        m.insert("depth".into(), 3.0);
        assert!(GbtParams::from_hyper(&m).is_err());
        m.clear();
        m.insert("max_depth".into(), 2.5);
        assert!(GbtParams::from_hyper(&m).is_err());
    }

    #[test]
    fn feature_count_rules() {
        let p = ForestParams::default();
        assert_eq!(p.resolved_features(44, false), 7);
        assert_eq!(p.resolved_features(44, true), 14);
        let p = ForestParams {
            max_features: 0.5,
            ..Default::default()
        };
        assert_eq!(p.resolved_features(10, false), 5);
    }
}
