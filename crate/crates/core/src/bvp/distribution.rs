use crate::error::{CoreError, Result};
use crate::scalar::{from_usize, lit, Scalar};
use crate::signal::{self, zscore, PowerSpectrum};

pub(crate) fn require_len<T>(x: &[T], min: usize, what: &str) -> Result<()> {
    if x.len() < min {
        return Err(CoreError::InsufficientData(format!(
            "{what} needs at least {min} samples, got {}",
            x.len()
        )));
    }
    Ok(())
}

pub(crate) fn require_varying<T: Scalar>(x: &[T], what: &str) -> Result<()> {
    if signal::is_constant(x) {
        return Err(CoreError::DegenerateInput(format!("{what} of a constant series")));
    }
    Ok(())
}

/// Centre of the most populated of `bins` equal-width bins over `[min, max]`
/// of the z-scored series. Ties resolve to the lowest bin.
pub fn histogram_mode<T: Scalar>(x: &[T], bins: usize) -> Result<T> {
    require_len(x, 10, "histogram mode")?;
    if bins == 0 {
        return Err(CoreError::InvalidParameter("histogram needs at least one bin".into()));
    }
    let z = zscore(x)?;
    let lo = z.iter().copied().fold(T::infinity(), T::min);
    let hi = z.iter().copied().fold(T::neg_infinity(), T::max);
    let width = (hi - lo) / from_usize(bins);
    let mut counts = vec![0usize; bins];
    for &v in &z {
        let k = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bins - 1);
        counts[k] += 1;
    }
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    Ok(lo + width * (from_usize::<T>(best) + lit(0.5)))
}

/// The 5- and 10-bin histogram modes.
pub fn histogram_modes<T: Scalar>(x: &[T]) -> Result<(T, T)> {
    Ok((histogram_mode(x, 5)?, histogram_mode(x, 10)?))
}

/// Mean spacing, in samples, between the onsets of excursions below
/// `mean - std`. Fewer than two onsets give `len`.
pub fn below_mean_event_interval<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 16, "event interval")?;
    let threshold = signal::mean(x) - signal::population_std(x);
    let mut onsets = Vec::new();
    let mut inside = false;
    for (i, &v) in x.iter().enumerate() {
        let below = v < threshold;
        if below && !inside {
            onsets.push(i);
        }
        inside = below;
    }
    if onsets.len() < 2 {
        return Ok(from_usize(x.len()));
    }
    let span = onsets[onsets.len() - 1] - onsets[0];
    Ok(from_usize::<T>(span) / from_usize(onsets.len() - 1))
}

/// Share of non-DC power below Nyquist/5 and the spectral centroid in Hz.
pub fn spectral_summaries<T: Scalar>(x: &[T], sample_rate_hz: T) -> Result<(T, T)> {
    require_len(x, 32, "spectral summaries")?;
    let sig = signal::SampledSignal::new(sample_rate_hz, x.to_vec(), T::zero())?;
    let spec: PowerSpectrum<T> = signal::power_spectrum(&sig)?;
    // the relative margin keeps a bin sitting exactly on the edge out of the band
    let cutoff = sample_rate_hz / lit(10.0) * (T::one() - lit(1e-9));
    let mut total = T::zero();
    let mut low = T::zero();
    let mut moment = T::zero();
    for (&f, &p) in spec.freqs_hz().iter().zip(spec.power()).skip(1) {
        total = total + p;
        moment = moment + f * p;
        if f < cutoff {
            low = low + p;
        }
    }
    if !(total > T::zero()) {
        return Err(CoreError::DegenerateInput("zero spectral power".into()));
    }
    Ok((low / total, moment / total))
}

/// Mean absolute error of forecasting each sample by the mean of the three
/// before it.
pub fn rollmean3_err<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 16, "rolling-mean forecast")?;
    let three = lit::<T>(3.0);
    let total: T = x
        .windows(4)
        .map(|w| (w[3] - (w[0] + w[1] + w[2]) / three).abs())
        .sum();
    Ok(total / from_usize(x.len() - 3))
}

/// Normalised third moment of the increments; negative when rises are slow
/// and falls are fast.
pub fn time_reversibility<T: Scalar>(x: &[T]) -> Result<T> {
    require_len(x, 16, "time reversibility")?;
    require_varying(x, "time reversibility")?;
    let n = from_usize::<T>(x.len() - 1);
    let mut m2 = T::zero();
    let mut m3 = T::zero();
    for w in x.windows(2) {
        let d = w[1] - w[0];
        m2 = m2 + d * d;
        m3 = m3 + d * d * d;
    }
    m2 = m2 / n;
    m3 = m3 / n;
    Ok(m3 / m2.powf(lit(1.5)))
}
