//! Recordings, labelled windows and the operations that turn them into
//! training data: segmentation, labelling, normalisation, oversampling and
//! splitting.

mod smote;
mod split;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::signal::SampledSignal;

pub use smote::{smote, SmoteOutput, SyntheticOrigin};
pub use split::{grouped_kfold, stratified_kfold, tuning_split};

/// Self-reported pain at the start of one reporting epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochReport {
    pub start_s: f64,
    pub pain_score: u8,
}

/// One subject's BVP recording with its epoch-wise pain reports.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecording {
    pub subject_id: String,
    pub bvp: SampledSignal<f64>,
    pub epochs: Vec<EpochReport>,
}

impl SubjectRecording {
    /// Checks the protocol invariants: ascending epochs `epoch_len_s` apart,
    /// a zero baseline and scores within 0..=10.
    pub fn validate(&self, epoch_len_s: f64) -> Result<()> {
        let id = &self.subject_id;
        if id.is_empty() {
            return Err(CoreError::InvalidInput("empty subject id".into()));
        }
        let first = self
            .epochs
            .first()
            .ok_or_else(|| CoreError::InvalidInput(format!("{id}: no pain reports")))?;
        if first.pain_score != 0 {
            return Err(CoreError::InvalidInput(format!(
                "{id}: baseline epoch must have pain score 0, got {}",
                first.pain_score
            )));
        }
        for e in &self.epochs {
            if e.pain_score > 10 {
                return Err(CoreError::InvalidInput(format!(
                    "{id}: pain score {} outside 0-10",
                    e.pain_score
                )));
            }
        }
        for w in self.epochs.windows(2) {
            if ((w[1].start_s - w[0].start_s) - epoch_len_s).abs() > 1e-6 {
                return Err(CoreError::InvalidInput(format!(
                    "{id}: epochs at {} s and {} s are not {epoch_len_s} s apart",
                    w[0].start_s, w[1].start_s
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PainState {
    #[serde(rename = "NP")]
    NoPain,
    #[serde(rename = "LP")]
    Low,
    #[serde(rename = "MP")]
    Medium,
    #[serde(rename = "HP")]
    High,
}

impl PainState {
    pub const ALL: [PainState; 4] = [Self::NoPain, Self::Low, Self::Medium, Self::High];

    pub fn code(self) -> &'static str {
        match self {
            Self::NoPain => "NP",
            Self::Low => "LP",
            Self::Medium => "MP",
            Self::High => "HP",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for PainState {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NP" => Ok(Self::NoPain),
            "LP" => Ok(Self::Low),
            "MP" => Ok(Self::Medium),
            "HP" => Ok(Self::High),
            other => Err(CoreError::InvalidInput(format!("unknown pain state {other:?}"))),
        }
    }
}

/// Maps a 0-10 score to its state: 0, (0, 3], (3, 6], (6, 10].
pub fn bin_pain(score: u8) -> Result<PainState> {
    match score {
        0 => Ok(PainState::NoPain),
        1..=3 => Ok(PainState::Low),
        4..=6 => Ok(PainState::Medium),
        7..=10 => Ok(PainState::High),
        _ => Err(CoreError::InvalidInput(format!(
            "pain score {score} outside 0-10"
        ))),
    }
}

/// Start times of the fully contained windows of a recording.
pub fn segment_windows(duration_s: f64, len_s: f64, overlap: f64) -> Result<Vec<f64>> {
    if !(len_s > 0.0) || !(0.0..1.0).contains(&overlap) {
        return Err(CoreError::InvalidParameter(format!(
            "window length must be positive and overlap in [0, 1) (got {len_s}, {overlap})"
        )));
    }
    let stride = len_s * (1.0 - overlap);
    let mut starts = Vec::new();
    // the tolerance admits a last window that ends on the final sample
    let mut k = 0usize;
    loop {
        let start = k as f64 * stride;
        if start + len_s > duration_s + 1e-9 {
            break;
        }
        starts.push(start);
        k += 1;
    }
    Ok(starts)
}

/// Score of the epoch holding the window centre; a centre on a boundary
/// belongs to the later epoch.
pub fn label_window(
    window_start_s: f64,
    len_s: f64,
    epochs: &[EpochReport],
    epoch_len_s: f64,
) -> Result<u8> {
    let centre = window_start_s + len_s / 2.0;
    let k = epochs
        .iter()
        .rposition(|e| e.start_s <= centre)
        .ok_or_else(|| {
            CoreError::InvalidInput(format!("window centre {centre} s precedes the first epoch"))
        })?;
    let epoch = &epochs[k];
    if k + 1 == epochs.len() && centre >= epoch.start_s + epoch_len_s {
        return Err(CoreError::InvalidInput(format!(
            "window centre {centre} s lies beyond the last epoch"
        )));
    }
    Ok(epoch.pain_score)
}

/// Feature values of one window in dataset column order.
pub type FeatureRow = Vec<f64>;

/// One labelled feature window.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub subject_id: String,
    pub window_start_s: f64,
    pub features: FeatureRow,
    pub pain_score: u8,
    pub pain_state: PainState,
    /// Set on rows produced by oversampling.
    pub synthetic: Option<SyntheticOrigin>,
}

/// Labelled windows with a fixed column order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub column_names: Vec<String>,
    pub rows: Vec<LabeledWindow>,
}

impl Dataset {
    /// Builds a dataset, requiring every row to be complete and finite.
    pub fn new(column_names: Vec<String>, rows: Vec<LabeledWindow>) -> Result<Self> {
        let width = column_names.len();
        for (i, r) in rows.iter().enumerate() {
            if r.features.len() != width {
                return Err(CoreError::InvalidInput(format!(
                    "row {i} has {} features, expected {width}",
                    r.features.len()
                )));
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::InvalidInput(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(Self { column_names, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn features(&self) -> Vec<FeatureRow> {
        self.rows.iter().map(|r| r.features.clone()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.features[j]).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            column_names: self.column_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    /// Keeps only the listed columns, in the listed order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            column_names: columns.iter().map(|&j| self.column_names[j].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| LabeledWindow {
                    features: columns.iter().map(|&j| r.features[j]).collect(),
                    ..r.clone()
                })
                .collect(),
        }
    }

    /// Row indices grouped by subject, subjects in sorted order.
    pub fn rows_by_subject(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            groups.entry(r.subject_id.as_str()).or_default().push(i);
        }
        groups
    }
}

/// Outcome of [`normalize_per_subject`].
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub dataset: Dataset,
    /// Number of (subject, column) pairs that were constant and set to zero.
    pub constant_columns: usize,
}

/// Z-scores every column within each subject (population std). A column
/// that is constant within a subject becomes zero for that subject.
pub fn normalize_per_subject(ds: &Dataset) -> Normalized {
    let mut out = ds.clone();
    let mut constant_columns = 0;
    for (subject, idx) in ds.rows_by_subject() {
        for j in 0..ds.width() {
            let col: Vec<f64> = idx.iter().map(|&i| ds.rows[i].features[j]).collect();
            let m = crate::signal::mean(&col);
            let sd = crate::signal::population_std(&col);
            let constant = crate::signal::is_constant(&col) || !(sd > 0.0);
            if constant {
                constant_columns += 1;
                log::debug!(
                    "subject {subject}: column {} is constant, set to zero",
                    ds.column_names[j]
                );
            }
            for &i in &idx {
                out.rows[i].features[j] = if constant {
                    0.0
                } else {
                    (ds.rows[i].features[j] - m) / sd
                };
            }
        }
    }
    Normalized {
        dataset: out,
        constant_columns,
    }
}
