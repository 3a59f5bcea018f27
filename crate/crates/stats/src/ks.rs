//! One-sample Kolmogorov-Smirnov test against a fitted normal.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, StatsError};

pub const KS_MIN_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// Mean and std were estimated from the sample, which makes the
    /// asymptotic p-value conservative.
    pub parameters_estimated: bool,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        // Jacobi theta form, fast for small lambda
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * c).exp()
            })
            .sum();
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        2.0 * s
    };
    p.clamp(0.0, 1.0)
}

/// KS statistic of `sample` against N(mean, sd) with the sample mean and
/// sample (n - 1) standard deviation. The p-value uses the asymptotic
/// distribution with Stephens' small-sample scaling of the statistic.
pub fn ks_normality(sample: &[f64]) -> Result<KsResult> {
    let n = sample.len();
    if n < KS_MIN_N {
        return Err(StatsError::InvalidInput(format!(
            "KS test needs at least {KS_MIN_N} values, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidInput("sample has non-finite values".into()));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(StatsError::DegenerateInput("sample has zero variance".into()));
    }
    let normal = Normal::new(mean, var.sqrt()).map_err(|e| StatsError::InvalidInput(e.to_string()))?;
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let d = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let sq = nf.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok(KsResult {
        statistic: d.clamp(0.0, 1.0),
        p_value: p,
        n,
        parameters_estimated: true,
    })
}
