//! Butterworth low-pass design (bilinear transform, cascaded second-order
//! sections) and forward-backward zero-phase application.

use super::SampledSignal;
use crate::error::{CoreError, Result};
use crate::scalar::{lit, Scalar};

/// One biquad in transposed direct form II, normalised so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderSection<T> {
    pub b: [T; 3],
    pub a: [T; 3],
}

impl<T: Scalar> SecondOrderSection<T> {
    fn dc_normalised(mut self) -> Self {
        let gain = (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2]);
        for b in self.b.iter_mut() {
            *b = *b / gain;
        }
        self
    }

    /// Filter state that yields a constant output `u` for constant input `u`.
    fn steady_state(&self, u: T) -> [T; 2] {
        let s2 = (self.b[2] - self.a[2]) * u;
        let s1 = (self.b[1] - self.a[1]) * u + s2;
        [s1, s2]
    }

    fn run(&self, x: &mut [T]) {
        let Some(&first) = x.first() else { return };
        let [mut s1, mut s2] = self.steady_state(first);
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + s1;
            s1 = b1 * input - a1 * y + s2;
            s2 = b2 * input - a2 * y;
            *v = y;
        }
    }
}

/// Low-pass Butterworth filter as a cascade of sections, each with unit DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterworth<T> {
    order: usize,
    sections: Vec<SecondOrderSection<T>>,
}

impl<T: Scalar> Butterworth<T> {
    pub fn lowpass(order: usize, cutoff_hz: T, sample_rate_hz: T) -> Result<Self> {
        if !(1..=8).contains(&order) {
            return Err(CoreError::InvalidParameter(format!(
                "filter order must be in 1..=8, got {order}"
            )));
        }
        let nyquist = sample_rate_hz / lit(2.0);
        if !(cutoff_hz > T::zero() && cutoff_hz < nyquist) {
            return Err(CoreError::InvalidParameter(format!(
                "cutoff {cutoff_hz} Hz must lie in (0, {nyquist}) Hz"
            )));
        }
        // prewarped analogue cutoff
        let k = (T::PI() * cutoff_hz / sample_rate_hz).tan();
        let k2 = k * k;
        let two = lit::<T>(2.0);
        let mut sections = Vec::with_capacity(order.div_ceil(2));
        for p in 0..order / 2 {
            let angle = T::PI() * lit((2 * p + 1) as f64) / lit((2 * order) as f64);
            let q = T::one() / (two * angle.sin());
            let norm = T::one() / (T::one() + k / q + k2);
            let b0 = k2 * norm;
            sections.push(
                SecondOrderSection {
                    b: [b0, two * b0, b0],
                    a: [T::one(), two * (k2 - T::one()) * norm, (T::one() - k / q + k2) * norm],
                }
                .dc_normalised(),
            );
        }
        if order % 2 == 1 {
            let b0 = k / (T::one() + k);
            sections.push(
                SecondOrderSection {
                    b: [b0, b0, T::zero()],
                    a: [T::one(), (k - T::one()) / (k + T::one()), T::zero()],
                }
                .dc_normalised(),
            );
        }
        Ok(Self { order, sections })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sections(&self) -> &[SecondOrderSection<T>] {
        &self.sections
    }

    /// Length of the odd-reflection padding used by [`Self::filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * (2 * self.order)
    }

    /// Single causal pass through all sections.
    pub fn filter_in_place(&self, x: &mut [T]) {
        for s in &self.sections {
            s.run(x);
        }
    }

    /// Forward-backward application with odd-reflection edge padding.
    pub fn filtfilt(&self, x: &[T]) -> Result<Vec<T>> {
        let pad = self.pad_len();
        let n = x.len();
        if n <= pad {
            return Err(CoreError::InsufficientData(format!(
                "zero-phase filtering needs more than {pad} samples, got {n}"
            )));
        }
        let two = lit::<T>(2.0);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| two * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| two * x[n - 1] - x[n - 1 - i]));

        self.filter_in_place(&mut ext);
        ext.reverse();
        self.filter_in_place(&mut ext);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }
}

/// Zero-phase Butterworth low-pass of a sampled signal.
pub fn butterworth_lowpass<T: Scalar>(
    signal: &SampledSignal<T>,
    cutoff_hz: T,
    order: usize,
) -> Result<SampledSignal<T>> {
    let filter = Butterworth::lowpass(order, cutoff_hz, signal.sample_rate_hz())?;
    Ok(signal.with_samples(filter.filtfilt(signal.samples())?))
}
