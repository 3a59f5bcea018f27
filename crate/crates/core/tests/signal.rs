use bvpain_core::signal::{
    autocorrelation, butterworth_lowpass, power_spectrum, population_variance, SampledSignal,
};
use bvpain_oracle::{bvp::acf, SplitMix};
use proptest::prelude::*;
use std::f64::consts::PI;

fn sine(f: f64, fs: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
}

/// Amplitude of the `f` component over `x[from..to]` by projection.
fn amplitude(x: &[f64], fs: f64, f: f64, from: usize, to: usize) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate().take(to).skip(from) {
        let ph = 2.0 * PI * f * i as f64 / fs;
        s += v * ph.sin();
        c += v * ph.cos();
    }
    2.0 * (s * s + c * c).sqrt() / (to - from) as f64
}

#[test]
fn forward_backward_gain_follows_butterworth_curve() {
    let (fs, fc, order) = (2048.0, 8.0, 2);
    for f in [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 24.0] {
        let n = (20.0 * fs) as usize;
        let sig = SampledSignal::new(fs, sine(f, fs, n), 0.0).unwrap();
        let y = butterworth_lowpass(&sig, fc, order).unwrap();
        // whole periods in the middle half
        let period = fs / f;
        let from = n / 4;
        let cycles = ((n / 2) as f64 / period).floor();
        let to = from + (cycles * period).round() as usize;
        let got = amplitude(y.samples(), fs, f, from, to);
        let want = 1.0 / (1.0 + (f / fc).powi(2 * order as i32));
        assert!((got / want - 1.0).abs() < 0.01, "{f} Hz: {got} vs {want}");
    }
}

#[test]
fn filtering_is_zero_phase() {
    let fs = 256.0;
    let x = sine(1.0, fs, 2560);
    let y = butterworth_lowpass(&SampledSignal::new(fs, x.clone(), 0.0).unwrap(), 8.0, 2).unwrap();
    let y = y.samples();
    let xc = |lag: i64| -> f64 {
        (512..1792)
            .map(|i| x[i] * y[(i as i64 + lag) as usize])
            .sum()
    };
    let best = (-40..=40).max_by(|&a, &b| xc(a).partial_cmp(&xc(b)).unwrap()).unwrap();
    assert_eq!(best, 0);
}

#[test]
fn autocorrelation_matches_double_loop() {
    let mut rng = SplitMix(41);
    for _ in 0..200 {
        let n = 10 + (rng.next_u64() % 300) as usize;
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let max_lag = 1 + (rng.next_u64() as usize % (n - 1));
        let r = autocorrelation(&x, max_lag).unwrap();
        assert_eq!(r[0], 1.0);
        for (lag, v) in r.iter().enumerate() {
            assert!((v - acf(&x, lag)).abs() < 1e-9);
        }
    }
}

#[test]
fn parseval_on_random_inputs() {
    let mut rng = SplitMix(42);
    for _ in 0..50 {
        let n = 256 + (rng.next_u64() % 4000) as usize;
        let fs = 4.0 + 100.0 * rng.uniform();
        let x: Vec<f64> = (0..n).map(|_| 2.0 + rng.normal()).collect();
        let spec = power_spectrum(&SampledSignal::new(fs, x.clone(), 0.0).unwrap()).unwrap();
        let ac: f64 = spec.power()[1..].iter().sum::<f64>() * spec.df();
        let var = population_variance(&x);
        assert!((ac / var - 1.0).abs() < 0.01);
        assert!(spec.power().iter().all(|&p| p >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filtering_is_linear(
        x in prop::collection::vec(-10.0f64..10.0, 64..256),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let n = x.len();
        let y: Vec<f64> = (0..n).map(|i| ((i * 7919) % 31) as f64 - 15.0).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let f = |v: Vec<f64>| {
            butterworth_lowpass(&SampledSignal::new(100.0, v, 0.0).unwrap(), 8.0, 2)
                .unwrap()
                .into_samples()
        };
        let (fx, fy, fm) = (f(x.clone()), f(y), f(mix));
        for i in 0..n {
            prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
        }
    }
}
