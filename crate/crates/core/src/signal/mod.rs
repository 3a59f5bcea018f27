//! Uniformly sampled signals and the filtering, spectral and correlation
//! primitives the feature extractors build on.

mod filter;
mod spectrum;
mod stats;

pub use filter::{butterworth_lowpass, Butterworth, SecondOrderSection};
pub use spectrum::{band_power, power_spectrum, PowerSpectrum};
pub use stats::{
    autocorrelation, is_constant, mean, median, population_std, population_variance, sample_std,
    zscore,
};

use crate::error::{CoreError, Result};
use crate::scalar::{from_usize, Scalar};

/// A uniformly sampled real waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    sample_rate_hz: T,
    samples: Vec<T>,
    start_time_s: T,
}

impl<T: Scalar> SampledSignal<T> {
    /// Builds a signal, rejecting non-positive rates and non-finite samples.
    pub fn new(sample_rate_hz: T, samples: Vec<T>, start_time_s: T) -> Result<Self> {
        if !(sample_rate_hz > T::zero()) || !sample_rate_hz.is_finite() {
            return Err(CoreError::InvalidParameter(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if !start_time_s.is_finite() {
            return Err(CoreError::InvalidParameter("start time must be finite".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
            start_time_s,
        })
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn start_time_s(&self) -> T {
        self.start_time_s
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> T {
        from_usize::<T>(self.samples.len()) / self.sample_rate_hz
    }

    /// Time stamp of sample `i`.
    pub fn time_of(&self, i: usize) -> T {
        self.start_time_s + from_usize::<T>(i) / self.sample_rate_hz
    }

    /// Same samples, shifted to a new start time.
    pub fn with_start_time(mut self, start_time_s: T) -> Self {
        self.start_time_s = start_time_s;
        self
    }

    /// Copies `len` samples starting at sample `offset` into a new signal
    /// whose start time is the time of the first copied sample.
    pub fn slice(&self, offset: usize, len: usize) -> Result<Self> {
        if offset + len > self.samples.len() {
            return Err(CoreError::InvalidParameter(format!(
                "slice {offset}..{} exceeds signal length {}",
                offset + len,
                self.samples.len()
            )));
        }
        Ok(Self {
            sample_rate_hz: self.sample_rate_hz,
            samples: self.samples[offset..offset + len].to_vec(),
            start_time_s: self.time_of(offset),
        })
    }

    pub(crate) fn with_samples(&self, samples: Vec<T>) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            samples,
            start_time_s: self.start_time_s,
        }
    }
}
