use super::correlation::acf_first_zero;
use super::distribution::{require_len, require_varying};
use crate::error::{CoreError, Result};
use crate::scalar::{from_usize, lit, Scalar};
use crate::signal;

/// Fraction of successive differences larger in magnitude than 0.04 std.
pub fn md_pnn40<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 2, "pnn40")?;
    let thr = lit::<T>(0.04) * signal::population_std(x);
    let count = x.windows(2).filter(|w| (w[1] - w[0]).abs() > thr).count();
    Ok(from_usize::<T>(count) / from_usize(x.len() - 1))
}

/// Longest run of consecutive strictly decreasing steps.
pub fn longest_decrease_run<T: Scalar>(x: &[T]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for w in x.windows(2) {
        if w[1] < w[0] {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Quantile with linear interpolation between `(i + 0.5) / n` plotting
/// positions, clamped to the extremes.
fn quantile<T: Scalar>(sorted: &[T], q: f64) -> T {
    let n = sorted.len();
    let edge = 0.5 / n as f64;
    if q < edge {
        return sorted[0];
    }
    if q > 1.0 - edge {
        return sorted[n - 1];
    }
    let pos = n as f64 * q - 0.5;
    let left = pos.floor() as usize;
    let right = pos.ceil() as usize;
    if left == right {
        return sorted[left];
    }
    sorted[left] + lit::<T>(pos - left as f64) * (sorted[right] - sorted[left])
}

/// Codes each sample by the quantile group it falls in (0-based).
pub(crate) fn coarse_grain<T: Scalar>(x: &[T], groups: usize) -> Vec<usize> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let mut edges: Vec<T> = (0..=groups)
        .map(|i| quantile(&sorted, i as f64 / groups as f64))
        .collect();
    edges[0] = edges[0] - T::one();
    x.iter()
        .map(|&v| {
            (0..groups)
                .find(|&g| v > edges[g] && v <= edges[g + 1])
                .unwrap_or(groups - 1)
        })
        .collect()
}

/// Shannon entropy (bits) of successive letter pairs after tercile coding.
pub fn motif3_entropy<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 32, "motif entropy")?;
    require_varying(x, "motif entropy")?;
    let letters = coarse_grain(x, 3);
    let mut counts = [0usize; 9];
    for w in letters.windows(2) {
        counts[w[0] * 3 + w[1]] += 1;
    }
    let total = (letters.len() - 1) as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(lit(h))
}

/// Sum of the sample variances of the columns of the 3-letter transition
/// matrix, after downsampling by the first autocorrelation zero crossing.
pub fn transmat3_trace_cov<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 32, "transition matrix")?;
    require_varying(x, "transition matrix")?;
    let tau = acf_first_zero(x)?.max(1);
    let down: Vec<T> = x.iter().copied().step_by(tau).collect();
    if down.len() < 3 {
        return Err(CoreError::InsufficientData(format!(
            "only {} samples left after downsampling by {tau}",
            down.len()
        )));
    }
    let letters = coarse_grain(&down, 3);
    let mut t = [[0.0f64; 3]; 3];
    for w in letters.windows(2) {
        t[w[0]][w[1]] += 1.0;
    }
    let steps = (letters.len() - 1) as f64;
    let mut trace = 0.0;
    for col in 0..3 {
        let c: Vec<f64> = (0..3).map(|row| t[row][col] / steps).collect();
        let m = c.iter().sum::<f64>() / 3.0;
        trace += c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 2.0;
    }
    Ok(lit(trace))
}
