//! Kruskal-Wallis omnibus test and Dunn's pairwise post-hoc test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Result, StatsError};
use crate::rank::{midranks, tie_sum};

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalResult {
    pub h: f64,
    pub df: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DunnResult {
    /// Group indices `(i, j)`; `z` is positive when group `i` ranks higher.
    pub pair: (usize, usize),
    pub mean_rank_i: f64,
    pub mean_rank_j: f64,
    pub z_statistic: f64,
    pub p_value: f64,
    /// Bonferroni: `min(1, m * p)` over the `m` pairs.
    pub p_adjusted: f64,
    /// Judged on the unadjusted p-value.
    pub significant_at_0_05: bool,
}

struct Pooled {
    n: usize,
    sizes: Vec<usize>,
    mean_ranks: Vec<f64>,
    ties: f64,
}

fn pool(groups: &[&[f64]]) -> Result<Pooled> {
    if groups.len() < 2 {
        return Err(StatsError::InvalidInput(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    if let Some(i) = groups.iter().position(|g| g.len() < 2) {
        return Err(StatsError::InvalidInput(format!(
            "group {i} has {} values, need at least 2",
            groups[i].len()
        )));
    }
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    if all.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("non-finite value in groups".into()));
    }
    let ranks = midranks(&all);
    let mut mean_ranks = Vec::with_capacity(groups.len());
    let mut at = 0;
    for g in groups {
        mean_ranks.push(ranks[at..at + g.len()].iter().sum::<f64>() / g.len() as f64);
        at += g.len();
    }
    Ok(Pooled {
        n: all.len(),
        sizes: groups.iter().map(|g| g.len()).collect(),
        mean_ranks,
        ties: tie_sum(&all),
    })
}

fn all_tied(p: &Pooled) -> bool {
    let n = p.n as f64;
    p.ties >= n * n * n - n
}

/// H statistic with tie correction; p from chi-square with k - 1 df.
pub fn kruskal_wallis(groups: &[&[f64]]) -> Result<KruskalResult> {
    let p = pool(groups)?;
    if all_tied(&p) {
        return Err(StatsError::DegenerateInput("all values are identical".into()));
    }
    let n = p.n as f64;
    let mid = (n + 1.0) / 2.0;
    let ss: f64 = p
        .sizes
        .iter()
        .zip(&p.mean_ranks)
        .map(|(&ni, &r)| ni as f64 * (r - mid) * (r - mid))
        .sum();
    let h = 12.0 / (n * (n + 1.0)) * ss / (1.0 - p.ties / (n * n * n - n));
    let df = groups.len() - 1;
    let chi = ChiSquared::new(df as f64).map_err(|e| StatsError::InvalidInput(e.to_string()))?;
    Ok(KruskalResult {
        h,
        df,
        p_value: chi.sf(h).clamp(0.0, 1.0),
    })
}

/// All pairs `i < j` in index order.
pub fn dunn_test(groups: &[&[f64]]) -> Result<Vec<DunnResult>> {
    let p = pool(groups)?;
    if all_tied(&p) {
        return Err(StatsError::UndefinedStatistic(
            "all values are tied, rank variance is zero".into(),
        ));
    }
    let n = p.n as f64;
    let tie_term = p.ties / (12.0 * (n - 1.0));
    let base = n * (n + 1.0) / 12.0 - tie_term;
    let k = groups.len();
    let m = (k * (k - 1) / 2) as f64;
    let normal = Normal::standard();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let se = (base * (1.0 / p.sizes[i] as f64 + 1.0 / p.sizes[j] as f64)).sqrt();
            let z = (p.mean_ranks[i] - p.mean_ranks[j]) / se;
            let pv = (2.0 * normal.sf(z.abs())).min(1.0);
            out.push(DunnResult {
                pair: (i, j),
                mean_rank_i: p.mean_ranks[i],
                mean_rank_j: p.mean_ranks[j],
                z_statistic: z,
                p_value: pv,
                p_adjusted: (m * pv).min(1.0),
                significant_at_0_05: pv < SIGNIFICANCE,
            });
        }
    }
    Ok(out)
}
