//! Per-feature comparison of pain states.

use std::fmt::Write;

use bvpain_core::dataset::{Dataset, PainState};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StatsError};
use crate::kruskal::{dunn_test, kruskal_wallis, DunnResult, KruskalResult};
use crate::ks::{ks_normality, KsResult, KS_MIN_N};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub a: PainState,
    pub b: PainState,
    #[serde(flatten)]
    pub dunn: DunnResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAnalysis {
    pub feature: String,
    /// States with at least two windows, in NP, LP, MP, HP order.
    pub states: Vec<PainState>,
    pub counts: Vec<usize>,
    /// Normality of the pooled feature values; `None` if the test does not apply.
    pub normality: Option<KsResult>,
    pub kruskal: KruskalResult,
    pub pairs: Vec<StatePair>,
    pub correction: String,
}

/// Kruskal-Wallis and Dunn's test of one feature across the pain states
/// present in `dataset`. Synthetic (oversampled) rows are ignored.
pub fn feature_pain_analysis(dataset: &Dataset, feature: &str) -> Result<FeatureAnalysis> {
    let j = dataset
        .column_index(feature)
        .ok_or_else(|| StatsError::UnknownFeature(feature.to_string()))?;
    let mut by_state: Vec<Vec<f64>> = vec![Vec::new(); PainState::ALL.len()];
    for r in dataset.rows.iter().filter(|r| r.synthetic.is_none()) {
        by_state[r.pain_state.index()].push(r.features[j]);
    }
    let (states, groups): (Vec<PainState>, Vec<Vec<f64>>) = PainState::ALL
        .into_iter()
        .zip(by_state)
        .filter(|(_, g)| g.len() >= 2)
        .unzip();
    if states.len() < 2 {
        return Err(StatsError::InvalidInput(format!(
            "feature '{feature}': fewer than 2 pain states with at least 2 windows"
        )));
    }
    let refs: Vec<&[f64]> = groups.iter().map(Vec::as_slice).collect();
    let kruskal = kruskal_wallis(&refs)?;
    let pairs = dunn_test(&refs)?
        .into_iter()
        .map(|d| StatePair {
            a: states[d.pair.0],
            b: states[d.pair.1],
            dunn: d,
        })
        .collect();
    let pooled: Vec<f64> = groups.concat();
    let normality = if pooled.len() >= KS_MIN_N {
        ks_normality(&pooled).ok()
    } else {
        None
    };
    Ok(FeatureAnalysis {
        feature: feature.to_string(),
        counts: groups.iter().map(Vec::len).collect(),
        states,
        normality,
        kruskal,
        pairs,
        correction: "bonferroni".into(),
    })
}

pub const DUNN_TABLE_HEADER: &str = "feature,pair,z,p,p_adj,significant";

/// Delimited table with one row per state pair.
pub fn dunn_table_csv(analyses: &[FeatureAnalysis]) -> String {
    let mut s = String::from(DUNN_TABLE_HEADER);
    s.push('\n');
    for a in analyses {
        for p in &a.pairs {
            let _ = writeln!(
                s,
                "{},{}-{},{},{},{},{}",
                a.feature, p.a, p.b, p.dunn.z_statistic, p.dunn.p_value, p.dunn.p_adjusted, p.dunn.significant_at_0_05
            );
        }
    }
    s
}
