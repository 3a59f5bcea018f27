//! The 44-column window features of a recording (20 HRV + 24 BVP).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beat::{detect_beats, extract_ibi, BeatConfig, IbiSeries};
use crate::bvp::{bvp_feature_vector, BvpConfig, BVP_FEATURE_NAMES};
use crate::dataset::{
    bin_pain, label_window, segment_windows, Dataset, LabeledWindow, SubjectRecording,
};
use crate::error::{CoreError, Result};
use crate::hrv::{hrv_feature_vector, HrvConfig, HRV_FEATURE_NAMES};
use crate::signal::{butterworth_lowpass, SampledSignal};

pub const FEATURE_COUNT: usize = 44;

/// The 44 canonical column names, HRV block first.
pub fn feature_names() -> Vec<String> {
    HRV_FEATURE_NAMES
        .iter()
        .chain(BVP_FEATURE_NAMES.iter())
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub filter_cutoff_hz: f64,
    pub filter_order: usize,
    pub window_s: f64,
    pub overlap: f64,
    /// Span of beats, centred on each window, that feeds the HRV block.
    pub hrv_context_s: f64,
    pub epoch_len_s: f64,
    pub beat: BeatConfig,
    pub hrv: HrvConfig,
    pub bvp: BvpConfig,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            filter_cutoff_hz: 8.0,
            filter_order: 2,
            window_s: 5.0,
            overlap: 0.5,
            hrv_context_s: 30.0,
            epoch_len_s: 20.0,
            beat: BeatConfig::default(),
            hrv: HrvConfig::default(),
            bvp: BvpConfig::default(),
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::InvalidConfiguration(m.to_string()));
        if !(self.filter_cutoff_hz > 0.0) || !(1..=8).contains(&self.filter_order) {
            return bad("filter needs a positive cutoff and an order in 1..=8");
        }
        if !(self.window_s > 0.0) || !(0.0..1.0).contains(&self.overlap) {
            return bad("window length must be positive and overlap in [0, 1)");
        }
        if !(self.hrv_context_s >= self.window_s) {
            return bad("hrv_context_s must be at least the window length");
        }
        if !(self.epoch_len_s > 0.0) {
            return bad("epoch length must be positive");
        }
        if self.beat.min_interval_ms >= self.beat.max_interval_ms {
            return bad("beat interval gate is empty");
        }
        if !(self.beat.edge_guard_s >= 0.0) {
            return bad("beat edge guard must be non-negative");
        }
        Ok(())
    }
}

/// Windows of one subject plus how many were dropped for undefined features.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectFeatures {
    pub subject_id: String,
    pub windows: Vec<LabeledWindow>,
    pub dropped: usize,
}

/// Filters, detects beats once over the whole recording, then computes the
/// 44 features of each window. Windows with an undefined feature are dropped.
pub fn extract_subject(rec: &SubjectRecording, cfg: &FeatureConfig) -> Result<SubjectFeatures> {
    cfg.validate()?;
    let filtered = butterworth_lowpass(&rec.bvp, cfg.filter_cutoff_hz, cfg.filter_order)?;
    let beats = detect_beats(&filtered, &cfg.beat)?;
    let ibi = extract_ibi(&beats, &cfg.beat)?;
    let fs = filtered.sample_rate_hz();
    let t0 = filtered.start_time_s();
    let duration = filtered.duration_s();
    let win_len = (cfg.window_s * fs).round() as usize;

    let starts = segment_windows(duration, cfg.window_s, cfg.overlap)?;
    let computed: Vec<Result<Option<LabeledWindow>>> = starts
        .par_iter()
        .map(|&start| {
            let offset = (start * fs).round() as usize;
            let len = win_len.min(filtered.len() - offset);
            let window = filtered.slice(offset, len)?;
            let score = label_window(start, cfg.window_s, &rec.epochs, cfg.epoch_len_s)?;
            let (lo, hi) =
                context_span(t0 + start, cfg.window_s, cfg.hrv_context_s, t0, t0 + duration);
            let features = window_features(&window, &ibi.within(lo, hi), cfg);
            Ok(features.map(|features| LabeledWindow {
                subject_id: rec.subject_id.clone(),
                window_start_s: start,
                features,
                pain_score: score,
                pain_state: bin_pain(score).expect("validated score"),
                synthetic: None,
            }))
        })
        .collect();
    let mut windows = Vec::new();
    let mut dropped = 0;
    for c in computed {
        match c? {
            Some(w) => windows.push(w),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        log::info!("subject {}: dropped {dropped} window(s) with undefined features", rec.subject_id);
    }
    Ok(SubjectFeatures {
        subject_id: rec.subject_id.clone(),
        windows,
        dropped,
    })
}

/// HRV span: `hrv_context_s` centred on the window, shifted to lie inside
/// the recording.
fn context_span(
    window_start: f64,
    window_s: f64,
    context_s: f64,
    rec_start: f64,
    rec_end: f64,
) -> (f64, f64) {
    let centre = window_start + window_s / 2.0;
    let span = context_s.min(rec_end - rec_start);
    let lo = (centre - span / 2.0).clamp(rec_start, rec_end - span);
    (lo, lo + span)
}

/// The 44 features of one window given the beats of its HRV span, or `None`
/// when any feature is undefined.
pub fn window_features(
    window: &SampledSignal<f64>,
    hrv_span: &IbiSeries<f64>,
    cfg: &FeatureConfig,
) -> Option<Vec<f64>> {
    let hrv = hrv_feature_vector(hrv_span, &cfg.hrv);
    let bvp = bvp_feature_vector(window, &cfg.bvp);
    hrv.to_array()
        .into_iter()
        .chain(bvp.to_array())
        .map(|v| v.filter(|x| x.is_finite()))
        .collect()
}

/// Features of every subject, subjects in input order. Subjects whose
/// windows were all dropped are left out with a warning.
pub fn extract_dataset(
    recordings: &[SubjectRecording],
    cfg: &FeatureConfig,
) -> Result<(Dataset, Vec<SubjectFeatures>)> {
    let per_subject: Vec<SubjectFeatures> = recordings
        .par_iter()
        .map(|r| extract_subject(r, cfg))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for s in &per_subject {
        if s.windows.is_empty() {
            log::warn!("subject {}: every window was dropped, subject excluded", s.subject_id);
        }
        rows.extend(s.windows.iter().cloned());
    }
    Ok((Dataset::new(feature_names(), rows)?, per_subject))
}
