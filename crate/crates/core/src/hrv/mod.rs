//! The 20 heart-rate-variability features computed from an interval series.
//!
//! Every feature is an `Option`; `None` marks a value that cannot be
//! computed from the intervals at hand (too few beats, zero spread, ...).

mod spline;

use serde::{Deserialize, Serialize};

use crate::beat::IbiSeries;
use crate::scalar::{from_usize, lit, Scalar};
use crate::signal::{self, band_power, median, power_spectrum, SampledSignal};

pub use spline_api::resample_tachogram;

/// Names of the exported HRV columns, in table order.
pub const HRV_FEATURE_NAMES: [&str; 20] = [
    "rmssd_ms",
    "sdsd_ms",
    "pnn50_pct",
    "pnn25_pct",
    "pnn10_pct",
    "rr_mean_ms",
    "rr_std_ms",
    "rr_med_ms",
    "rr_min_ms",
    "rr_max_ms",
    "vlf_pow",
    "lf_pow",
    "hf_pow",
    "total_pow",
    "sd1_ms",
    "sd2_ms",
    "sd12_ratio",
    "sdell_ms2",
    "dfa_alpha1",
    "apen",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HrvConfig {
    /// Uniform resampling rate of the tachogram.
    pub resample_hz: f64,
    pub vlf_band_hz: (f64, f64),
    pub lf_band_hz: (f64, f64),
    pub hf_band_hz: (f64, f64),
    pub apen_m: usize,
    /// ApEn tolerance as a multiple of the sample std.
    pub apen_r_factor: f64,
}

impl Default for HrvConfig {
    fn default() -> Self {
        Self {
            resample_hz: 4.0,
            vlf_band_hz: (0.003, 0.04),
            lf_band_hz: (0.04, 0.15),
            hf_band_hz: (0.15, 0.4),
            apen_m: 2,
            apen_r_factor: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeDomain<T> {
    pub rmssd: T,
    pub sdsd: T,
    pub pnn50: T,
    pub pnn25: T,
    pub pnn10: T,
    pub rr_mean: T,
    pub rr_std: T,
    pub rr_med: T,
    pub rr_min: T,
    pub rr_max: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrequencyDomain<T> {
    pub vlf: T,
    pub lf: T,
    pub hf: T,
    pub total: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Poincare<T> {
    pub sd1: T,
    pub sd2: T,
    pub sd12_ratio: Option<T>,
    pub sdell: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HrvFeatures<T> {
    pub rmssd_ms: Option<T>,
    pub sdsd_ms: Option<T>,
    pub pnn50_pct: Option<T>,
    pub pnn25_pct: Option<T>,
    pub pnn10_pct: Option<T>,
    pub rr_mean_ms: Option<T>,
    pub rr_std_ms: Option<T>,
    pub rr_med_ms: Option<T>,
    pub rr_min_ms: Option<T>,
    pub rr_max_ms: Option<T>,
    pub vlf_pow: Option<T>,
    pub lf_pow: Option<T>,
    pub hf_pow: Option<T>,
    pub total_pow: Option<T>,
    pub sd1_ms: Option<T>,
    pub sd2_ms: Option<T>,
    pub sd12_ratio: Option<T>,
    pub sdell_ms2: Option<T>,
    pub dfa_alpha1: Option<T>,
    pub apen: Option<T>,
}

impl<T: Scalar> HrvFeatures<T> {
    /// Values in [`HRV_FEATURE_NAMES`] order.
    pub fn to_array(&self) -> [Option<T>; 20] {
        [
            self.rmssd_ms,
            self.sdsd_ms,
            self.pnn50_pct,
            self.pnn25_pct,
            self.pnn10_pct,
            self.rr_mean_ms,
            self.rr_std_ms,
            self.rr_med_ms,
            self.rr_min_ms,
            self.rr_max_ms,
            self.vlf_pow,
            self.lf_pow,
            self.hf_pow,
            self.total_pow,
            self.sd1_ms,
            self.sd2_ms,
            self.sd12_ratio,
            self.sdell_ms2,
            self.dfa_alpha1,
            self.apen,
        ]
    }

    pub fn all_defined(&self) -> bool {
        self.to_array().iter().all(|v| v.is_some_and(|x| x.is_finite()))
    }
}

fn successive_diffs<T: Scalar>(x: &[T]) -> Vec<T> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Percentage of |diff| strictly greater than `threshold_ms`.
fn pnn<T: Scalar>(diffs: &[T], threshold_ms: f64) -> T {
    let thr = lit::<T>(threshold_ms);
    let count = diffs.iter().filter(|d| d.abs() > thr).count();
    lit::<T>(100.0) * from_usize::<T>(count) / from_usize(diffs.len())
}

/// RMSSD, SDSD, pNNx and RR summary statistics; `None` below 3 intervals.
pub fn time_domain_hrv<T: Scalar>(ibi: &IbiSeries<T>) -> Option<TimeDomain<T>> {
    let rr = &ibi.intervals_ms;
    if rr.len() < 3 {
        return None;
    }
    let d = successive_diffs(rr);
    let msd = d.iter().map(|&v| v * v).sum::<T>() / from_usize(d.len());
    Some(TimeDomain {
        rmssd: msd.sqrt(),
        sdsd: signal::sample_std(&d),
        pnn50: pnn(&d, 50.0),
        pnn25: pnn(&d, 25.0),
        pnn10: pnn(&d, 10.0),
        rr_mean: signal::mean(rr),
        rr_std: signal::sample_std(rr),
        rr_med: median(rr),
        rr_min: rr.iter().copied().fold(T::infinity(), T::min),
        rr_max: rr.iter().copied().fold(T::neg_infinity(), T::max),
    })
}

mod spline_api {
    use super::spline::CubicSpline;
    use crate::beat::IbiSeries;
    use crate::scalar::{from_usize, lit, Scalar};

    /// Cubic interpolation of the tachogram (interval vs. closing-beat time)
    /// onto a uniform grid starting at the first interval.
    pub fn resample_tachogram<T: Scalar>(ibi: &IbiSeries<T>, rate_hz: f64) -> Vec<T> {
        let t = &ibi.interval_times_s;
        if t.len() < 2 {
            return ibi.intervals_ms.clone();
        }
        let spline = CubicSpline::new(t, &ibi.intervals_ms);
        let span = t[t.len() - 1] - t[0];
        let step = T::one() / lit::<T>(rate_hz);
        let count = (span / step).floor().to_usize().unwrap_or(0) + 1;
        let grid: Vec<T> = (0..count).map(|i| t[0] + from_usize::<T>(i) * step).collect();
        spline.eval_sorted(&grid)
    }
}

/// VLF, LF, HF and total power of the resampled tachogram (ms^2).
///
/// Needs at least 4 intervals spanning 2.5 s.
pub fn frequency_domain_hrv<T: Scalar>(
    ibi: &IbiSeries<T>,
    cfg: &HrvConfig,
) -> Option<FrequencyDomain<T>> {
    let t = &ibi.interval_times_s;
    if ibi.len() < 4 || t[t.len() - 1] - t[0] < lit(2.5) {
        return None;
    }
    let mut tach = resample_tachogram(ibi, cfg.resample_hz);
    let m = signal::mean(&tach);
    for v in tach.iter_mut() {
        *v = *v - m;
    }
    let sig = SampledSignal::new(lit(cfg.resample_hz), tach, T::zero()).ok()?;
    let spec = power_spectrum(&sig).ok()?;
    let band = |(lo, hi): (f64, f64)| band_power(&spec, lit(lo), lit(hi)).ok();
    Some(FrequencyDomain {
        vlf: band(cfg.vlf_band_hz)?,
        lf: band(cfg.lf_band_hz)?,
        hf: band(cfg.hf_band_hz)?,
        total: band((cfg.vlf_band_hz.0, cfg.hf_band_hz.1))?,
    })
}

/// SD1, SD2, their ratio and the ellipse area `pi * SD1 * SD2`.
pub fn poincare<T: Scalar>(ibi: &IbiSeries<T>) -> Option<Poincare<T>> {
    let rr = &ibi.intervals_ms;
    if rr.len() < 3 {
        return None;
    }
    let var_diff = signal::population_variance(&successive_diffs(rr));
    let var_rr = signal::population_variance(rr);
    let half_var_diff = var_diff / lit(2.0);
    let sd1 = half_var_diff.sqrt();
    let sd2 = (lit::<T>(2.0) * var_rr - half_var_diff).max(T::zero()).sqrt();
    Some(Poincare {
        sd1,
        sd2,
        sd12_ratio: (sd2 > T::zero()).then(|| sd1 / sd2),
        sdell: T::PI() * sd1 * sd2,
    })
}

/// Least-squares slope and intercept of `y` against `x`.
pub(crate) fn linear_fit<T: Scalar>(x: &[T], y: &[T]) -> (T, T) {
    let n = from_usize::<T>(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    (slope, my - slope * mx)
}

/// Short-term DFA exponent over box sizes 4..=min(16, N/4).
///
/// Needs at least 16 intervals and at least two usable box sizes.
pub fn dfa_alpha1<T: Scalar>(ibi: &IbiSeries<T>) -> Option<T> {
    let rr = &ibi.intervals_ms;
    let n = rr.len();
    if n < 16 {
        return None;
    }
    let max_box = 16.min(n / 4);
    if max_box < 5 {
        return None;
    }
    let m = signal::mean(rr);
    let mut profile = Vec::with_capacity(n);
    let mut acc = T::zero();
    for &v in rr {
        acc = acc + (v - m);
        profile.push(acc);
    }
    let mut log_n = Vec::new();
    let mut log_f = Vec::new();
    for size in 4..=max_box {
        let boxes = n / size;
        let xs: Vec<T> = (0..size).map(from_usize::<T>).collect();
        let mut ss = T::zero();
        for b in 0..boxes {
            let seg = &profile[b * size..(b + 1) * size];
            let (slope, icept) = linear_fit(&xs, seg);
            for (x, &y) in xs.iter().zip(seg) {
                let r = y - (slope * *x + icept);
                ss = ss + r * r;
            }
        }
        let f = (ss / from_usize(boxes * size)).sqrt();
        if !(f > T::zero()) {
            return None;
        }
        log_n.push(from_usize::<T>(size).ln());
        log_f.push(f.ln());
    }
    Some(linear_fit(&log_n, &log_f).0)
}

fn phi<T: Scalar>(x: &[T], m: usize, r: T) -> T {
    let count = x.len() - m + 1;
    let mut total = T::zero();
    for i in 0..count {
        let mut matches = 0usize;
        for j in 0..count {
            if (0..m).all(|k| (x[i + k] - x[j + k]).abs() <= r) {
                matches += 1;
            }
        }
        total = total + (from_usize::<T>(matches) / from_usize(count)).ln();
    }
    total / from_usize(count)
}

/// Approximate entropy with embedding `m` and tolerance `r_factor * sample std`.
///
/// Zero-variance input yields 0.
pub fn approx_entropy<T: Scalar>(ibi: &IbiSeries<T>, m: usize, r_factor: f64) -> Option<T> {
    let x = &ibi.intervals_ms;
    if x.len() < m + 2 {
        return None;
    }
    let sd = signal::sample_std(x);
    if signal::is_constant(x) || sd == T::zero() {
        return Some(T::zero());
    }
    let r = lit::<T>(r_factor) * sd;
    Some(phi(x, m, r) - phi(x, m + 1, r))
}

/// All 20 HRV features of an interval series.
pub fn hrv_feature_vector<T: Scalar>(ibi: &IbiSeries<T>, cfg: &HrvConfig) -> HrvFeatures<T> {
    let mut f = HrvFeatures::default();
    if let Some(t) = time_domain_hrv(ibi) {
        f.rmssd_ms = Some(t.rmssd);
        f.sdsd_ms = Some(t.sdsd);
        f.pnn50_pct = Some(t.pnn50);
        f.pnn25_pct = Some(t.pnn25);
        f.pnn10_pct = Some(t.pnn10);
        f.rr_mean_ms = Some(t.rr_mean);
        f.rr_std_ms = Some(t.rr_std);
        f.rr_med_ms = Some(t.rr_med);
        f.rr_min_ms = Some(t.rr_min);
        f.rr_max_ms = Some(t.rr_max);
    }
    if let Some(p) = frequency_domain_hrv(ibi, cfg) {
        f.vlf_pow = Some(p.vlf);
        f.lf_pow = Some(p.lf);
        f.hf_pow = Some(p.hf);
        f.total_pow = Some(p.total);
    }
    if let Some(p) = poincare(ibi) {
        f.sd1_ms = Some(p.sd1);
        f.sd2_ms = Some(p.sd2);
        f.sd12_ratio = p.sd12_ratio;
        f.sdell_ms2 = Some(p.sdell);
    }
    f.dfa_alpha1 = dfa_alpha1(ibi);
    f.apen = approx_entropy(ibi, cfg.apen_m, cfg.apen_r_factor);
    f
}
