use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{CoreError, Result};
use crate::scalar::{from_usize, Scalar};

pub fn mean<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::nan();
    }
    // shifting by the first sample keeps constant input exact
    let shift = x[0];
    shift + x.iter().map(|&v| v - shift).sum::<T>() / from_usize(x.len())
}

/// Variance with a 1/N denominator.
pub fn population_variance<T: Scalar>(x: &[T]) -> T {
    let m = mean(x);
    x.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / from_usize(x.len())
}

pub fn population_std<T: Scalar>(x: &[T]) -> T {
    population_variance(x).sqrt()
}

/// Standard deviation with a 1/(N-1) denominator; NaN below two samples.
pub fn sample_std<T: Scalar>(x: &[T]) -> T {
    if x.len() < 2 {
        return T::nan();
    }
    let m = mean(x);
    let ss = x.iter().map(|&v| (v - m) * (v - m)).sum::<T>();
    (ss / from_usize(x.len() - 1)).sqrt()
}

/// Midpoint-averaged median; NaN for empty input.
pub fn median<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::nan();
    }
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / (T::one() + T::one())
    }
}

/// True when every element equals the first one.
pub fn is_constant<T: Scalar>(x: &[T]) -> bool {
    x.first().is_none_or(|&first| x.iter().all(|&v| v == first))
}

/// Subtracts the mean and divides by the population standard deviation.
pub fn zscore<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    if x.len() < 2 {
        return Err(CoreError::InsufficientData(
            "z-scoring needs at least 2 samples".into(),
        ));
    }
    let sd = population_std(x);
    if is_constant(x) || sd == T::zero() {
        return Err(CoreError::DegenerateInput("zero variance".into()));
    }
    let m = mean(x);
    Ok(x.iter().map(|&v| (v - m) / sd).collect())
}

/// Normalised sample autocorrelation `r[0..=max_lag]` with `r[0] = 1`.
///
/// `r[tau] = sum_t (x_t - m)(x_{t+tau} - m) / sum_t (x_t - m)^2`, computed
/// through a zero-padded FFT.
pub fn autocorrelation<T: Scalar>(x: &[T], max_lag: usize) -> Result<Vec<T>> {
    let n = x.len();
    if max_lag < 1 || n <= max_lag {
        return Err(CoreError::InvalidParameter(format!(
            "autocorrelation needs len > max_lag >= 1 (len {n}, max_lag {max_lag})"
        )));
    }
    if is_constant(x) {
        return Err(CoreError::DegenerateInput(
            "autocorrelation of a constant series".into(),
        ));
    }
    let m = mean(x);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<T>> = x
        .iter()
        .map(|&v| Complex::new(v - m, T::zero()))
        .chain(std::iter::repeat(Complex::new(T::zero(), T::zero())))
        .take(size)
        .collect();
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let r0 = buf[0].re;
    if r0 <= T::zero() {
        return Err(CoreError::DegenerateInput("zero variance".into()));
    }
    let mut r: Vec<T> = buf[..=max_lag].iter().map(|c| c.re / r0).collect();
    r[0] = T::one();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let den: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
        (0..=max_lag)
            .map(|lag| {
                let mut s = 0.0;
                for t in 0..x.len() - lag {
                    s += (x[t] - m) * (x[t + lag] - m);
                }
                s / den
            })
            .collect()
    }

    #[test]
    fn zscore_small_example() {
        let z = zscore(&[1.0f64, 2.0, 3.0]).unwrap();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zscore_is_idempotent() {
        let z = zscore(&[0.3f64, -1.2, 4.0, 2.5, 0.0, 7.5]).unwrap();
        let zz = zscore(&z).unwrap();
        for (a, b) in z.iter().zip(&zz) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(mean(&z).abs() < 1e-9);
        assert!((population_std(&z) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zscore_rejects_constant() {
        assert!(matches!(
            zscore(&[5.0, 5.0, 5.0]),
            Err(CoreError::DegenerateInput(_))
        ));
        assert!(zscore(&[1.0]).is_err());
    }

    #[test]
    fn acf_of_alternating_series() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = autocorrelation(&x, 5).unwrap();
        assert_eq!(r[0], 1.0);
        assert!((r[1] + 1.0).abs() < 0.05);
    }

    #[test]
    fn acf_matches_double_loop() {
        let x: Vec<f64> = (0..257).map(|i| ((i * 37 % 101) as f64).sin() + 0.01 * i as f64).collect();
        let r = autocorrelation(&x, 100).unwrap();
        let b = brute_acf(&x, 100);
        for (a, e) in r.iter().zip(&b) {
            assert!((a - e).abs() < 1e-9);
        }
    }

    #[test]
    fn acf_errors() {
        assert!(matches!(
            autocorrelation(&[2.0; 10], 3),
            Err(CoreError::DegenerateInput(_))
        ));
        assert!(autocorrelation(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(autocorrelation(&[1.0, 2.0, 3.0], 0).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn works_in_single_precision() {
        let z = zscore(&[1.0f32, 2.0, 3.0, 4.0]).unwrap();
        assert!(mean(&z).abs() < 1e-6);
        let r = autocorrelation(&[1.0f32, -1.0, 1.0, -1.0, 1.0, -1.0], 2).unwrap();
        assert!((r[1] + 5.0 / 6.0).abs() < 1e-5);
    }
}
