//! Systolic peak detection and inter-beat-interval extraction.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scalar::{from_usize, lit, to_f64, Scalar};
use crate::signal::SampledSignal;

/// Peak-detector and interval-cleaning settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeatConfig {
    /// Length of the centred window for the adaptive threshold.
    pub threshold_window_s: f64,
    /// Threshold = rolling mean + `threshold_std_factor` * rolling std.
    pub threshold_std_factor: f64,
    pub refractory_s: f64,
    /// Peaks closer than this to either end of the record are ignored: the
    /// filtered pulse there is distorted by the truncation.
    pub edge_guard_s: f64,
    /// Intervals outside `[min_interval_ms, max_interval_ms]` are dropped.
    pub min_interval_ms: f64,
    pub max_interval_ms: f64,
    /// Disables the interval gate entirely.
    pub clean_intervals: bool,
}

impl Default for BeatConfig {
    fn default() -> Self {
        Self {
            threshold_window_s: 2.0,
            threshold_std_factor: 0.5,
            refractory_s: 0.25,
            edge_guard_s: 0.1,
            min_interval_ms: 300.0,
            max_interval_ms: 2000.0,
            clean_intervals: true,
        }
    }
}

/// Retained inter-beat intervals, each stamped with the time of the beat
/// that closes it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IbiSeries<T> {
    pub beat_times_s: Vec<T>,
    pub interval_times_s: Vec<T>,
    pub intervals_ms: Vec<T>,
}

impl<T: Scalar> IbiSeries<T> {
    /// Contiguous series starting at t = 0 from raw intervals (no cleaning).
    pub fn from_intervals_ms(intervals_ms: &[T]) -> Self {
        let mut beat_times_s = vec![T::zero()];
        let mut t = T::zero();
        for &iv in intervals_ms {
            t = t + iv / lit(1000.0);
            beat_times_s.push(t);
        }
        Self {
            interval_times_s: beat_times_s[1..].to_vec(),
            beat_times_s,
            intervals_ms: intervals_ms.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.intervals_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals_ms.is_empty()
    }

    /// Intervals whose closing beat falls in `[start_s, end_s]`.
    pub fn within(&self, start_s: T, end_s: T) -> Self {
        let mut out = Self::default();
        for (&t, &iv) in self.interval_times_s.iter().zip(&self.intervals_ms) {
            if t >= start_s && t <= end_s {
                out.interval_times_s.push(t);
                out.intervals_ms.push(iv);
            }
        }
        out.beat_times_s = self
            .beat_times_s
            .iter()
            .copied()
            .filter(|&t| t >= start_s && t <= end_s)
            .collect();
        out
    }

    /// Shifts every time stamp by `offset_s`; intervals are unchanged.
    pub fn shifted(&self, offset_s: T) -> Self {
        Self {
            beat_times_s: self.beat_times_s.iter().map(|&t| t + offset_s).collect(),
            interval_times_s: self.interval_times_s.iter().map(|&t| t + offset_s).collect(),
            intervals_ms: self.intervals_ms.clone(),
        }
    }
}

/// Rolling mean and population std over a centred window, accumulated in f64.
fn rolling_threshold<T: Scalar>(x: &[T], half: usize, k: f64) -> Vec<f64> {
    let n = x.len();
    let mut s1 = vec![0.0f64; n + 1];
    let mut s2 = vec![0.0f64; n + 1];
    for (i, &v) in x.iter().enumerate() {
        let v = to_f64(v);
        s1[i + 1] = s1[i] + v;
        s2[i + 1] = s2[i] + v * v;
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            let m = (hi - lo) as f64;
            let mean = (s1[hi] - s1[lo]) / m;
            let var = ((s2[hi] - s2[lo]) / m - mean * mean).max(0.0);
            mean + k * var.sqrt()
        })
        .collect()
}

/// Sample indices of detected systolic peaks.
pub fn detect_peak_indices<T: Scalar>(bvp: &SampledSignal<T>, cfg: &BeatConfig) -> Vec<usize> {
    let x = bvp.samples();
    let n = x.len();
    if n < 3 {
        return Vec::new();
    }
    let fs = to_f64(bvp.sample_rate_hz());
    let half = ((cfg.threshold_window_s * fs) / 2.0).round() as usize;
    let threshold = rolling_threshold(x, half, cfg.threshold_std_factor);
    let guard = ((cfg.edge_guard_s * fs).round() as usize).max(1);
    if n <= 2 * guard {
        return Vec::new();
    }

    let mut candidates: Vec<usize> = (guard..n - guard)
        .filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1] && to_f64(x[i]) > threshold[i])
        .collect();
    // tallest first; equal heights resolve to the earlier sample
    candidates.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap().then(a.cmp(&b)));

    let refractory = (cfg.refractory_s * fs).round() as usize;
    let mut accepted = std::collections::BTreeSet::new();
    for i in candidates {
        let lo = i.saturating_sub(refractory.saturating_sub(1));
        let blocked = accepted.range(lo..i + refractory).next().is_some();
        if !blocked {
            accepted.insert(i);
        }
    }
    accepted.into_iter().collect()
}

/// Beat times (seconds) of a low-pass filtered BVP signal.
pub fn detect_beats<T: Scalar>(bvp: &SampledSignal<T>, cfg: &BeatConfig) -> Result<Vec<T>> {
    if bvp.samples().iter().any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("signal contains non-finite samples".into()));
    }
    Ok(detect_peak_indices(bvp, cfg)
        .into_iter()
        .map(|i| bvp.time_of(i))
        .collect())
}

/// Successive differences of beat times in milliseconds, with intervals
/// outside the physiological gate removed.
pub fn extract_ibi<T: Scalar>(beat_times_s: &[T], cfg: &BeatConfig) -> Result<IbiSeries<T>> {
    if beat_times_s.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CoreError::InvalidInput(
            "beat times must be strictly ascending".into(),
        ));
    }
    let mut out = IbiSeries {
        beat_times_s: beat_times_s.to_vec(),
        ..Default::default()
    };
    let (lo, hi) = (lit::<T>(cfg.min_interval_ms), lit::<T>(cfg.max_interval_ms));
    for w in beat_times_s.windows(2) {
        let iv = (w[1] - w[0]) * lit(1000.0);
        if !cfg.clean_intervals || (iv >= lo && iv <= hi) {
            out.interval_times_s.push(w[1]);
            out.intervals_ms.push(iv);
        }
    }
    Ok(out)
}

/// Mean heart rate (bpm) implied by an interval series.
pub fn mean_heart_rate_bpm<T: Scalar>(ibi: &IbiSeries<T>) -> Option<T> {
    if ibi.is_empty() {
        return None;
    }
    let m = ibi.intervals_ms.iter().copied().sum::<T>() / from_usize(ibi.len());
    Some(lit::<T>(60_000.0) / m)
}
