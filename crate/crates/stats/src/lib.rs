//! Rank-based tests of feature differences between pain states:
//! Kolmogorov-Smirnov normality, Kruskal-Wallis and Dunn's post-hoc test.
//!
//! Everything here is plain `f64`.

pub mod analysis;
pub mod error;
pub mod kruskal;
pub mod ks;
pub mod rank;

pub use analysis::{dunn_table_csv, feature_pain_analysis, FeatureAnalysis, StatePair, DUNN_TABLE_HEADER};
pub use error::{Result, StatsError};
pub use kruskal::{dunn_test, kruskal_wallis, DunnResult, KruskalResult, SIGNIFICANCE};
pub use ks::{kolmogorov_sf, ks_normality, KsResult, KS_MIN_N};
pub use rank::{midranks, tie_sum};
