//! One-sided power spectra.
//!
//! The mean is carried exactly in the DC bin. The fluctuating part is
//! Hann-windowed (a single periodogram below 60 s of data, otherwise a
//! 4-segment Welch average with 50% overlap) and scaled so that
//! `sum(power) * df` equals the mean square of the input.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::stats::{mean, population_variance};
use super::SampledSignal;
use crate::error::{CoreError, Result};
use crate::scalar::{from_usize, lit, Scalar};

const WELCH_MIN_DURATION_S: f64 = 60.0;
const WELCH_SEGMENTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum<T> {
    freqs_hz: Vec<T>,
    power: Vec<T>,
}

impl<T: Scalar> PowerSpectrum<T> {
    pub fn freqs_hz(&self) -> &[T] {
        &self.freqs_hz
    }

    pub fn power(&self) -> &[T] {
        &self.power
    }

    /// Bin spacing.
    pub fn df(&self) -> T {
        if self.freqs_hz.len() > 1 {
            self.freqs_hz[1] - self.freqs_hz[0]
        } else {
            T::zero()
        }
    }

    /// Rectangle-rule integral `sum(power) * df`; equals the input mean square.
    pub fn integrated_power(&self) -> T {
        self.power.iter().copied().sum::<T>() * self.df()
    }

    /// Trapezoidal integral over every bin, i.e. the full band.
    pub fn total_power(&self) -> T {
        trapezoid(&self.power, self.df())
    }

    /// Frequency of the largest bin.
    pub fn peak_frequency(&self) -> T {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        self.freqs_hz[best]
    }
}

fn trapezoid<T: Scalar>(p: &[T], df: T) -> T {
    let half = lit::<T>(0.5);
    // adding zero turns the -0.0 of an empty sum into +0.0
    p.windows(2).map(|w| (w[0] + w[1]) * half).sum::<T>() * df + T::zero()
}

fn hann<T: Scalar>(n: usize) -> Vec<T> {
    let two_pi = T::PI() + T::PI();
    (0..n)
        .map(|i| {
            lit::<T>(0.5) * (T::one() - (two_pi * from_usize::<T>(i) / from_usize::<T>(n)).cos())
        })
        .collect()
}

/// Unscaled one-sided Hann periodogram of the mean-removed segment.
fn raw_periodogram<T: Scalar>(seg: &[T], window: &[T], planner: &mut FftPlanner<T>) -> Vec<T> {
    let n = seg.len();
    let m = mean(seg);
    let mut buf: Vec<Complex<T>> = seg
        .iter()
        .zip(window)
        .map(|(&v, &w)| Complex::new((v - m) * w, T::zero()))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let two = lit::<T>(2.0);
    (0..=n / 2)
        .map(|k| {
            let p = buf[k].norm_sqr();
            if k == 0 || (n % 2 == 0 && k == n / 2) {
                p
            } else {
                two * p
            }
        })
        .collect()
}

/// One-sided power spectrum of a signal (at least 8 samples).
pub fn power_spectrum<T: Scalar>(signal: &SampledSignal<T>) -> Result<PowerSpectrum<T>> {
    let x = signal.samples();
    let n = x.len();
    if n < 8 {
        return Err(CoreError::InsufficientData(format!(
            "power spectrum needs at least 8 samples, got {n}"
        )));
    }
    let fs = signal.sample_rate_hz();
    let mut planner = FftPlanner::<T>::new();
    let use_welch = signal.duration_s() >= lit(WELCH_MIN_DURATION_S);
    let (seg_len, mut raw) = if use_welch {
        let seg_len = 2 * n / (WELCH_SEGMENTS + 1);
        let step = seg_len / 2;
        let window = hann::<T>(seg_len);
        let mut acc = vec![T::zero(); seg_len / 2 + 1];
        for s in 0..WELCH_SEGMENTS {
            let seg = &x[s * step..s * step + seg_len];
            for (a, p) in acc.iter_mut().zip(raw_periodogram(seg, &window, &mut planner)) {
                *a = *a + p;
            }
        }
        (seg_len, acc)
    } else {
        (n, raw_periodogram(x, &hann::<T>(n), &mut planner))
    };

    let df = fs / from_usize(seg_len);
    let freqs_hz: Vec<T> = (0..raw.len()).map(|k| from_usize::<T>(k) * df).collect();

    // fluctuation bins scaled to the variance, DC bin carries the mean
    let variance = population_variance(x);
    let ac_sum: T = raw[1..].iter().copied().sum();
    let scale = if ac_sum > T::zero() {
        variance / (ac_sum * df)
    } else {
        T::zero()
    };
    for p in raw[1..].iter_mut() {
        *p = *p * scale;
    }
    let m = mean(x);
    raw[0] = m * m / df;

    Ok(PowerSpectrum {
        freqs_hz,
        power: raw,
    })
}

/// Power in `[lo_hz, hi_hz)` by the trapezoid rule over the bins inside the
/// band; zero when fewer than two bins fall in it.
pub fn band_power<T: Scalar>(spec: &PowerSpectrum<T>, lo_hz: T, hi_hz: T) -> Result<T> {
    if !(lo_hz >= T::zero()) || !(lo_hz < hi_hz) {
        return Err(CoreError::InvalidParameter(format!(
            "band [{lo_hz}, {hi_hz}) must satisfy 0 <= lo < hi"
        )));
    }
    let inside: Vec<T> = spec
        .freqs_hz
        .iter()
        .zip(&spec.power)
        .filter(|(&f, _)| f >= lo_hz && f < hi_hz)
        .map(|(_, &p)| p)
        .collect();
    Ok(trapezoid(&inside, spec.df()))
}
