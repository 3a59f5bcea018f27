use super::distribution::{require_len, require_varying};
use crate::error::{CoreError, Result};
use crate::hrv::linear_fit;
use crate::scalar::{from_usize, lit, Scalar};
use crate::signal::{self, autocorrelation};

fn full_acf<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    autocorrelation(x, x.len() - 1)
}

/// First lag at which the autocorrelation drops below `1/e`, or `len`.
pub fn acf_first_1e_crossing<T: Scalar>(x: &[T]) -> Result<usize> {
    require_len(x, 16, "autocorrelation timescale")?;
    let r = full_acf(x)?;
    let thr = T::one() / T::E();
    Ok(r.iter().position(|&v| v < thr).unwrap_or(x.len()))
}

/// First lag at which the autocorrelation is non-positive, or `len`.
pub fn acf_first_zero<T: Scalar>(x: &[T]) -> Result<usize> {
    require_len(x, 2, "autocorrelation zero crossing")?;
    let r = full_acf(x)?;
    Ok(r.iter().position(|&v| v <= T::zero()).unwrap_or(x.len()))
}

/// First local minimum of the autocorrelation within `len/2` lags, or `len/2`.
pub fn acf_first_min<T: Scalar>(x: &[T]) -> Result<usize> {
    require_len(x, 16, "autocorrelation minimum")?;
    let half = x.len() / 2;
    let r = autocorrelation(x, half + 1)?;
    Ok((1..=half)
        .find(|&k| r[k] < r[k - 1] && r[k] < r[k + 1])
        .unwrap_or(half))
}

/// Both autocorrelation timescales: (first 1/e crossing, first minimum).
pub fn acf_timescales<T: Scalar>(x: &[T]) -> Result<(usize, usize)> {
    Ok((acf_first_1e_crossing(x)?, acf_first_min(x)?))
}

/// Ratio of the 1/e autocorrelation timescale of the first difference to
/// that of the series itself.
pub fn tau_resrat<T: Scalar>(x: &[T]) -> Result<T> {
    let before = acf_first_1e_crossing(x)?;
    let diffs: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let after = acf_first_1e_crossing(&diffs)?;
    Ok(from_usize::<T>(after) / from_usize(before))
}

/// Histogram estimate of the mutual information (bits) between `x_t` and
/// `x_{t+tau}` using `bins` shared equal-width bins per axis.
///
/// `order` selects the Renyi generalisation; 1 is the Shannon limit.
pub fn auto_mutual_information<T: Scalar>(
    x: &[T],
    tau: usize,
    bins: usize,
    order: f64,
) -> Result<T> {
    if tau == 0 || bins < 2 || !(order > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "mutual information needs tau >= 1, bins >= 2, order > 0 (got {tau}, {bins}, {order})"
        )));
    }
    require_len(x, tau + 11, "mutual information")?;
    require_varying(x, "mutual information")?;
    let lo = x.iter().copied().fold(T::infinity(), T::min);
    let hi = x.iter().copied().fold(T::neg_infinity(), T::max);
    let width = (hi - lo) / from_usize(bins);
    let bin_of = |v: T| ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
    let labels: Vec<usize> = x.iter().map(|&v| bin_of(v)).collect();

    let pairs = x.len() - tau;
    let mut joint = vec![0usize; bins * bins];
    let mut left = vec![0usize; bins];
    let mut right = vec![0usize; bins];
    for t in 0..pairs {
        let (a, b) = (labels[t], labels[t + tau]);
        joint[a * bins + b] += 1;
        left[a] += 1;
        right[b] += 1;
    }
    let total = pairs as f64;
    let mut acc = 0.0f64;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c == 0 {
                continue;
            }
            let p = c as f64 / total;
            let pa = left[a] as f64 / total;
            let pb = right[b] as f64 / total;
            acc += if (order - 1.0).abs() < 1e-12 {
                p * (p / (pa * pb)).log2()
            } else {
                p.powf(order) / (pa * pb).powf(order - 1.0)
            };
        }
    }
    let mi = if (order - 1.0).abs() < 1e-12 {
        acc
    } else {
        acc.log2() / (order - 1.0)
    };
    Ok(lit(mi.max(0.0)))
}

fn pearson<T: Scalar>(a: &[T], b: &[T]) -> T {
    let ma = signal::mean(a);
    let mb = signal::mean(b);
    let mut sab = T::zero();
    let mut saa = T::zero();
    let mut sbb = T::zero();
    for (&u, &v) in a.iter().zip(b) {
        sab = sab + (u - ma) * (v - mb);
        saa = saa + (u - ma) * (u - ma);
        sbb = sbb + (v - mb) * (v - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// First local minimum of the Gaussian-approximation auto-mutual information
/// over lags `1..=min(40, ceil(len/2))`; the last lag when there is none.
pub fn ami_first_min_lag<T: Scalar>(x: &[T]) -> Result<usize> {
    require_len(x, 16, "mutual information minimum")?;
    require_varying(x, "mutual information minimum")?;
    let n = x.len();
    let max_lag = 40.min(n.div_ceil(2));
    let half = lit::<T>(-0.5);
    let ami: Vec<T> = (1..=max_lag)
        .map(|lag| {
            let r = pearson(&x[..n - lag], &x[lag..]);
            half * (T::one() - r * r).ln()
        })
        .collect();
    // ami[i] belongs to lag i + 1
    Ok((1..max_lag.saturating_sub(1))
        .find(|&i| ami[i] < ami[i - 1] && ami[i] < ami[i + 1])
        .map_or(max_lag, |i| i + 1))
}

/// Residual of a least-squares line through `x` against sample index.
pub(crate) fn linear_detrend<T: Scalar>(x: &[T]) -> Vec<T> {
    let t: Vec<T> = (0..x.len()).map(from_usize::<T>).collect();
    let (slope, icept) = linear_fit(&t, x);
    t.iter().zip(x).map(|(&ti, &v)| v - (slope * ti + icept)).collect()
}

/// Lag of the first autocorrelation peak that follows a trough and clears
/// both 0.01 and the white-noise band `4/sqrt(n)`; 0 when there is none.
pub fn periodicity_wang<T: Scalar>(x: &[T]) -> usize {
    let n = x.len();
    if n < 64 || signal::is_constant(x) {
        return 0;
    }
    let detrended = linear_detrend(x);
    let max_lag = n.div_ceil(3);
    let Ok(r) = autocorrelation(&detrended, max_lag) else {
        return 0;
    };
    let floor = lit::<T>(0.01).max(lit::<T>(4.0) / from_usize::<T>(n).sqrt());
    let mut seen_trough = false;
    for lag in 1..max_lag {
        let slope_in = r[lag] - r[lag - 1];
        let slope_out = r[lag + 1] - r[lag];
        if slope_in < T::zero() && slope_out > T::zero() {
            seen_trough = true;
        } else if slope_in > T::zero() && slope_out < T::zero() && seen_trough && r[lag] > floor {
            return lag;
        }
    }
    0
}

/// Mean absolute gap between the empirical distribution of successive
/// distances in the delay embedding `(x_t, x_{t+tau})` and an exponential
/// fit with the same mean. `tau` is the 1/e timescale capped at `len/10`.
pub fn embed2_expfit<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 64, "embedding distance fit")?;
    require_varying(x, "embedding distance fit")?;
    let n = x.len();
    let tau = acf_first_1e_crossing(x)?.min(n / 10).max(1);
    let mut d: Vec<T> = (0..n - tau - 1)
        .map(|t| {
            let a = x[t + 1] - x[t];
            let b = x[t + tau + 1] - x[t + tau];
            (a * a + b * b).sqrt()
        })
        .collect();
    let scale = signal::mean(&d);
    if !(scale > T::zero()) {
        return Err(CoreError::DegenerateInput("embedding does not move".into()));
    }
    d.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let m = from_usize::<T>(d.len());
    let gap: T = d
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let empirical = from_usize::<T>(i + 1) / m;
            let fitted = T::one() - (-v / scale).exp();
            (empirical - fitted).abs()
        })
        .sum();
    Ok(gap / m)
}
