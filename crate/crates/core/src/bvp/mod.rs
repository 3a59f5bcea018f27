//! Shape features computed directly on a BVP window.
//!
//! Apart from `mean` and `std`, every feature sees the z-scored window, so
//! the shape block is unchanged by `a * x + b` with `a > 0`.

mod correlation;
mod distribution;
mod fluctuation;
mod symbolic;

use serde::{Deserialize, Serialize};

pub use correlation::{
    acf_first_1e_crossing, acf_first_min, acf_first_zero, acf_timescales, ami_first_min_lag,
    auto_mutual_information, embed2_expfit, periodicity_wang, tau_resrat,
};
pub use distribution::{
    below_mean_event_interval, histogram_mode, histogram_modes, rollmean3_err, spectral_summaries,
    time_reversibility,
};
pub use fluctuation::{dfa_prop, fluctuation_prop, fluctuation_props, rs_prop, FluctuationKind};
pub use symbolic::{longest_decrease_run, md_pnn40, motif3_entropy, transmat3_trace_cov};

use crate::scalar::{from_usize, Scalar};
use crate::signal::{self, zscore, SampledSignal};

/// Exported BVP columns in table order. The two `_dup` columns repeat their
/// twins so the block has 24 columns.
pub const BVP_FEATURE_NAMES: [&str; 24] = [
    "mean",
    "std",
    "dn_hist_mode5",
    "dn_hist_mode10",
    "acf_first_1e_crossing",
    "ami2_tau5",
    "below_mean_event_interval",
    "acf_first_1e_crossing_dup",
    "acf_first_min",
    "spow_lowest_fifth",
    "spow_centroid",
    "fc_rollmean3_err",
    "co_trev",
    "ami2_tau5_dup",
    "ami_first_min_lag",
    "md_pnn40",
    "sb_longest_decrease_run",
    "sb_motif3_entropy",
    "sb_transmat3_trace_cov",
    "sb_periodicity_wang",
    "fc_tau_resrat",
    "co_embed2_expfit",
    "sc_dfa_prop",
    "sc_rs_prop",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BvpConfig {
    pub ami_tau: usize,
    /// Bins per axis of the mutual-information histogram.
    pub ami_bins: usize,
    /// Renyi order of the mutual information; 1 gives the Shannon value.
    pub ami_order: f64,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self {
            ami_tau: 5,
            ami_bins: 10,
            ami_order: 1.0,
        }
    }
}

/// The 22 distinct BVP features; `None` marks a value undefined on this window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BvpFeatures<T> {
    pub mean: T,
    pub std: T,
    pub dn_hist_mode5: Option<T>,
    pub dn_hist_mode10: Option<T>,
    pub acf_first_1e_crossing: Option<T>,
    pub acf_first_min: Option<T>,
    pub ami2_tau5: Option<T>,
    pub below_mean_event_interval: Option<T>,
    pub spow_lowest_fifth: Option<T>,
    pub spow_centroid: Option<T>,
    pub fc_rollmean3_err: Option<T>,
    pub co_trev: Option<T>,
    pub ami_first_min_lag: Option<T>,
    pub md_pnn40: Option<T>,
    pub sb_longest_decrease_run: Option<T>,
    pub sb_motif3_entropy: Option<T>,
    pub sb_transmat3_trace_cov: Option<T>,
    pub sb_periodicity_wang: Option<T>,
    pub fc_tau_resrat: Option<T>,
    pub co_embed2_expfit: Option<T>,
    pub sc_dfa_prop: Option<T>,
    pub sc_rs_prop: Option<T>,
}

impl<T: Scalar> BvpFeatures<T> {
    /// Values in [`BVP_FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [Option<T>; 24] {
        [
            Some(self.mean),
            Some(self.std),
            self.dn_hist_mode5,
            self.dn_hist_mode10,
            self.acf_first_1e_crossing,
            self.ami2_tau5,
            self.below_mean_event_interval,
            self.acf_first_1e_crossing,
            self.acf_first_min,
            self.spow_lowest_fifth,
            self.spow_centroid,
            self.fc_rollmean3_err,
            self.co_trev,
            self.ami2_tau5,
            self.ami_first_min_lag,
            self.md_pnn40,
            self.sb_longest_decrease_run,
            self.sb_motif3_entropy,
            self.sb_transmat3_trace_cov,
            self.sb_periodicity_wang,
            self.fc_tau_resrat,
            self.co_embed2_expfit,
            self.sc_dfa_prop,
            self.sc_rs_prop,
        ]
    }

    pub fn all_defined(&self) -> bool {
        self.to_array().iter().all(|v| v.is_some_and(|x| x.is_finite()))
    }
}

/// All BVP features of one window.
pub fn bvp_feature_vector<T: Scalar>(window: &SampledSignal<T>, cfg: &BvpConfig) -> BvpFeatures<T> {
    let raw = window.samples();
    let mut f = BvpFeatures {
        mean: if raw.is_empty() { T::nan() } else { signal::mean(raw) },
        std: if raw.len() < 2 { T::nan() } else { signal::sample_std(raw) },
        ..Default::default()
    };
    let Ok(z) = zscore(raw) else {
        return f;
    };
    let x = z.as_slice();
    let count = |v: usize| from_usize::<T>(v);

    f.dn_hist_mode5 = histogram_mode(x, 5).ok();
    f.dn_hist_mode10 = histogram_mode(x, 10).ok();
    f.acf_first_1e_crossing = acf_first_1e_crossing(x).ok().map(count);
    f.acf_first_min = acf_first_min(x).ok().map(count);
    f.ami2_tau5 = auto_mutual_information(x, cfg.ami_tau, cfg.ami_bins, cfg.ami_order).ok();
    f.below_mean_event_interval = below_mean_event_interval(x).ok();
    if let Ok((low, centroid)) = spectral_summaries(x, window.sample_rate_hz()) {
        f.spow_lowest_fifth = Some(low);
        f.spow_centroid = Some(centroid);
    }
    f.fc_rollmean3_err = rollmean3_err(x).ok();
    f.co_trev = time_reversibility(x).ok();
    f.ami_first_min_lag = ami_first_min_lag(x).ok().map(count);
    f.md_pnn40 = md_pnn40(x).ok();
    f.sb_longest_decrease_run = Some(count(longest_decrease_run(x)));
    f.sb_motif3_entropy = motif3_entropy(x).ok();
    f.sb_transmat3_trace_cov = transmat3_trace_cov(x).ok();
    f.sb_periodicity_wang = (x.len() >= 64).then(|| count(periodicity_wang(x)));
    f.fc_tau_resrat = tau_resrat(x).ok();
    f.co_embed2_expfit = embed2_expfit(x).ok();
    f.sc_dfa_prop = dfa_prop(x).ok();
    f.sc_rs_prop = rs_prop(x).ok();
    f
}
