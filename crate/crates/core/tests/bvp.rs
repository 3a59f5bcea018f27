use bvpain_core::bvp::*;
use bvpain_core::signal::SampledSignal;
use bvpain_core::CoreError;
use bvpain_oracle::{bvp as naive, SplitMix};
use std::f64::consts::PI;

fn noise(rng: &mut SplitMix, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

/// AR(1) plus a random sinusoid: smooth enough to give varied lags.
fn random_series(rng: &mut SplitMix, n: usize) -> Vec<f64> {
    let phi = 0.3 + 0.65 * rng.uniform();
    let period = 8.0 + 40.0 * rng.uniform();
    let amp = 2.0 * rng.uniform();
    let mut prev = 0.0;
    (0..n)
        .map(|t| {
            prev = phi * prev + rng.normal();
            prev + amp * (2.0 * PI * t as f64 / period).sin() + 3.0
        })
        .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn histogram_mode_examples() {
    let mut rng = SplitMix(1);
    let x = noise(&mut rng, 10_000);
    let m5 = histogram_mode(&x, 5).unwrap();
    assert!((-0.5..=0.5).contains(&m5), "{m5}");

    let bimodal: Vec<f64> = (0..1000)
        .map(|i| if i % 10 == 0 { -3.0 } else { 3.0 } + 0.1 * rng.normal())
        .collect();
    assert!(histogram_mode(&bimodal, 5).unwrap() > 0.0);

    assert!(matches!(
        histogram_modes(&[2.0; 50]),
        Err(CoreError::DegenerateInput(_))
    ));
}

#[test]
fn acf_timescale_examples() {
    let sine: Vec<f64> = (0..400).map(|t| (2.0 * PI * t as f64 / 40.0).sin()).collect();
    let first_min = acf_first_min(&sine).unwrap();
    assert!((19..=21).contains(&first_min), "{first_min}");

    let mut rng = SplitMix(2);
    let x = noise(&mut rng, 1000);
    assert_eq!(acf_first_1e_crossing(&x).unwrap(), naive::first_1e(&x));
    assert_eq!(acf_first_1e_crossing(&x).unwrap(), 1);

    let alt: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    assert_eq!(acf_first_min(&alt).unwrap(), 1);
    assert!(acf_timescales(&[0.0; 40]).is_err());
}

#[test]
fn ami_of_exact_periodic_copy_is_the_binned_entropy() {
    let mut rng = SplitMix(3);
    let pattern = noise(&mut rng, 5);
    let x: Vec<f64> = (0..2000).map(|t| pattern[t % 5]).collect();
    let ami = auto_mutual_information(&x, 5, 10, 1.0).unwrap();

    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = [0usize; 10];
    for &v in &x[..x.len() - 5] {
        counts[(((v - lo) / (hi - lo) * 10.0) as usize).min(9)] += 1;
    }
    let n = (x.len() - 5) as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| -(c as f64 / n) * (c as f64 / n).log2())
        .sum();
    assert!(ami > 0.0);
    assert!((ami - h).abs() < 1e-9, "{ami} vs {h}");
    for tau in 1..=10 {
        assert!(auto_mutual_information(&x, tau, 10, 1.0).unwrap() <= ami + 1e-12);
    }
}

#[test]
fn ami_of_independent_noise_is_small() {
    let mut rng = SplitMix(4);
    let x = noise(&mut rng, 10_000);
    let ami = auto_mutual_information(&x, 5, 10, 1.0).unwrap();
    assert!(ami <= 0.05, "{ami}");
    assert!(close(ami, naive::ami_shannon(&x, 5, 10), 1e-9));
}

#[test]
fn shuffling_destroys_mutual_information() {
    let mut rng = SplitMix(5);
    let mut prev = 0.0;
    let x: Vec<f64> = (0..3000)
        .map(|_| {
            prev = 0.95 * prev + rng.normal();
            prev
        })
        .collect();
    let mut shuffled = x.clone();
    for i in (1..shuffled.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        shuffled.swap(i, j);
    }
    let a = auto_mutual_information(&x, 5, 10, 1.0).unwrap();
    let b = auto_mutual_information(&shuffled, 5, 10, 1.0).unwrap();
    assert!(b <= a, "{b} vs {a}");
}

#[test]
fn renyi_order_approaches_shannon() {
    let mut rng = SplitMix(6);
    let x = random_series(&mut rng, 2000);
    let shannon = auto_mutual_information(&x, 5, 10, 1.0).unwrap();
    let near = auto_mutual_information(&x, 5, 10, 1.0 + 1e-6).unwrap();
    assert!((shannon - near).abs() < 1e-4);
}

#[test]
fn below_mean_event_examples() {
    let x: Vec<f64> = (0..1000).map(|i| if i % 50 == 7 { -10.0 } else { 0.0 }).collect();
    assert!((below_mean_event_interval(&x).unwrap() - 50.0).abs() < 1e-12);
    assert_eq!(below_mean_event_interval(&[1.0; 64]).unwrap(), 64.0);

    let mut rng = SplitMix(7);
    for _ in 0..200 {
        let n = 16 + (rng.next_u64() % 500) as usize;
        let x = random_series(&mut rng, n);
        let got = below_mean_event_interval(&x).unwrap();
        assert!(close(got, naive::below_mean_events(&x), 1e-6));
    }
}

#[test]
fn spectral_summary_examples() {
    let fs = 128.0;
    let n = 1024;
    let low: Vec<f64> = (0..n).map(|i| (2.0 * PI * 6.4 * i as f64 / fs).sin()).collect();
    let (fifth, _) = spectral_summaries(&low, fs).unwrap();
    assert!(fifth >= 0.95, "{fifth}");

    let f0 = 20.0 * fs / n as f64;
    let on_bin: Vec<f64> = (0..n).map(|i| (2.0 * PI * f0 * i as f64 / fs).sin()).collect();
    let (_, centroid) = spectral_summaries(&on_bin, fs).unwrap();
    assert!((centroid - f0).abs() <= fs / n as f64, "{centroid}");

    let mut rng = SplitMix(8);
    let x = noise(&mut rng, 4096);
    let (_, centroid) = spectral_summaries(&x, fs).unwrap();
    let target = fs / 4.0;
    assert!((centroid - target).abs() <= 0.1 * target, "{centroid}");

    let y = random_series(&mut rng, 300);
    let (a, b) = spectral_summaries(&y, 50.0).unwrap();
    let (c, d) = naive::spectral(&y, 50.0);
    assert!(close(a, c, 1e-9) && close(b, d, 1e-9));
}

#[test]
fn forecast_and_reversibility_examples() {
    let ramp: Vec<f64> = (0..100).map(|t| t as f64).collect();
    assert_eq!(rollmean3_err(&ramp).unwrap(), 2.0);

    let mut rng = SplitMix(9);
    let x = noise(&mut rng, 10_000);
    assert!(time_reversibility(&x).unwrap().abs() <= 0.05);

    let saw: Vec<f64> = (0..1000).map(|t| (t % 20) as f64).collect();
    assert!(time_reversibility(&saw).unwrap() < 0.0);

    let y = random_series(&mut rng, 400);
    let rev: Vec<f64> = y.iter().rev().copied().collect();
    let a = time_reversibility(&y).unwrap();
    assert!((time_reversibility(&rev).unwrap() + a).abs() < 1e-9);
    assert!(time_reversibility(&[1.0; 20]).is_err());

    let ratio = tau_resrat(&y).unwrap();
    let expect = naive::first_1e(&y[1..].iter().zip(&y).map(|(b, a)| b - a).collect::<Vec<_>>())
        as f64
        / naive::first_1e(&y) as f64;
    assert!(close(ratio, expect, 1e-12));
}

#[test]
fn symbolic_examples() {
    let up: Vec<f64> = (0..50).map(|t| t as f64).collect();
    let down: Vec<f64> = up.iter().rev().copied().collect();
    assert_eq!(longest_decrease_run(&up), 0);
    assert_eq!(longest_decrease_run(&down), 49);

    let mut rng = SplitMix(10);
    let u: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
    let h = motif3_entropy(&u).unwrap();
    assert!((h - 9f64.log2()).abs() < 0.1, "{h}");
    assert!(h <= 9f64.log2() + 1e-12);

    let x = random_series(&mut rng, 500);
    let p = md_pnn40(&x).unwrap();
    assert!((0.0..=1.0).contains(&p));
    assert!(motif3_entropy(&[1.0; 40]).is_err());
}

#[test]
fn periodicity_examples() {
    let mut rng = SplitMix(11);
    let x: Vec<f64> = (0..1000)
        .map(|t| (2.0 * PI * t as f64 / 25.0).sin() + 0.1 * rng.normal())
        .collect();
    let p = periodicity_wang(&x);
    assert!((23..=27).contains(&p), "{p}");

    let zeros = (0..100)
        .filter(|_| periodicity_wang(&noise(&mut rng, 1000)) == 0)
        .count();
    assert!(zeros >= 95, "{zeros}");
    assert_eq!(periodicity_wang(&[3.0; 200]), 0);
}

#[test]
fn embedding_fit_examples() {
    let mut rng = SplitMix(12);
    let x = noise(&mut rng, 5000);
    let noise_stat = embed2_expfit(&x).unwrap();
    // Successive distances of Gaussian noise are Rayleigh distributed, so
    // the gap to an exponential does not vanish.
    assert!(noise_stat < 0.15, "{noise_stat}");

    let sine: Vec<f64> = (0..5000).map(|t| (2.0 * PI * t as f64 / 50.0).sin()).collect();
    assert!(embed2_expfit(&sine).unwrap() > noise_stat);

    for _ in 0..200 {
        let n = 64 + (rng.next_u64() % 400) as usize;
        let y = random_series(&mut rng, n);
        assert!(close(embed2_expfit(&y).unwrap(), naive::embed_expfit(&y), 1e-6));
    }
    assert!(embed2_expfit(&[0.0; 100]).is_err());
}

#[test]
fn fluctuation_examples() {
    let mut rng = SplitMix(13);
    for _ in 0..200 {
        let n = 64 + (rng.next_u64() % 900) as usize;
        let y = random_series(&mut rng, n);
        assert!(close(dfa_prop(&y).unwrap(), naive::fluct_prop(&y, 2, false), 1e-6));
        assert!(close(rs_prop(&y).unwrap(), naive::fluct_prop(&y, 1, true), 1e-6));
    }

    let w = noise(&mut rng, 2000);
    let mut acc = 0.0;
    let walk: Vec<f64> = w
        .iter()
        .map(|v| {
            acc += v;
            acc
        })
        .collect();
    assert_ne!(fluctuation_props(&w).unwrap(), fluctuation_props(&walk).unwrap());
    assert!(matches!(
        fluctuation_props(&w[..32]),
        Err(CoreError::InsufficientData(_))
    ));
}

fn window(x: Vec<f64>, fs: f64) -> SampledSignal<f64> {
    SampledSignal::new(fs, x, 0.0).unwrap()
}

#[test]
fn constant_window_keeps_only_location_and_spread() {
    let f = bvp_feature_vector(&window(vec![0.7; 320], 64.0), &BvpConfig::default());
    let v = f.to_array();
    assert!((v[0].unwrap() - 0.7).abs() < 1e-12);
    assert_eq!(v[1], Some(0.0));
    assert!(v[2..].iter().all(Option::is_none));
}

#[test]
fn full_vector_matches_oracle() {
    let mut rng = SplitMix(14);
    for _ in 0..100 {
        let n = 128 + (rng.next_u64() % 384) as usize;
        let x = random_series(&mut rng, n);
        let got = bvp_feature_vector(&window(x.clone(), 64.0), &BvpConfig::default()).to_array();
        let want = naive::feature_vector(&x, 64.0);
        assert_eq!(got.len(), 24);
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            match (g, w) {
                (Some(g), Some(w)) => {
                    assert!(close(*g, *w, 1e-6), "{}: {g} vs {w}", BVP_FEATURE_NAMES[k])
                }
                (None, None) => {}
                _ => panic!("{}: {g:?} vs {w:?}", BVP_FEATURE_NAMES[k]),
            }
        }
    }
}

#[test]
fn shape_block_is_affine_invariant() {
    let mut rng = SplitMix(15);
    for _ in 0..20 {
        let x = random_series(&mut rng, 400);
        let y: Vec<f64> = x.iter().map(|v| 3.5 * v - 12.0).collect();
        let a = bvp_feature_vector(&window(x, 64.0), &BvpConfig::default()).to_array();
        let b = bvp_feature_vector(&window(y, 64.0), &BvpConfig::default()).to_array();
        for k in 2..24 {
            let (p, q) = (a[k].unwrap(), b[k].unwrap());
            assert!(close(p, q, 1e-9), "{}: {p} vs {q}", BVP_FEATURE_NAMES[k]);
        }
    }
}

#[test]
fn vector_invariants() {
    let mut rng = SplitMix(16);
    for _ in 0..50 {
        let x = random_series(&mut rng, 320);
        let f = bvp_feature_vector(&window(x, 64.0), &BvpConfig::default());
        assert!(f.std >= 0.0);
        assert!(f.acf_first_1e_crossing.unwrap() >= 1.0);
        let p = f.md_pnn40.unwrap();
        assert!((0.0..=1.0).contains(&p));
        let run = f.sb_longest_decrease_run.unwrap();
        assert!(run.fract() == 0.0 && (0.0..=319.0).contains(&run));
        let h = f.sb_motif3_entropy.unwrap();
        assert!((0.0..=9f64.log2() + 1e-12).contains(&h));
        let v = f.to_array();
        assert_eq!(v[4], v[7]);
        assert_eq!(v[5], v[13]);
    }
}

#[test]
fn single_precision_tracks_double() {
    let mut rng = SplitMix(17);
    let x = random_series(&mut rng, 320);
    let x32: Vec<f32> = x.iter().map(|&v| v as f32).collect();
    let a = bvp_feature_vector(&window(x, 64.0), &BvpConfig::default());
    let b = bvp_feature_vector(
        &SampledSignal::new(64.0f32, x32, 0.0).unwrap(),
        &BvpConfig::default(),
    );
    assert!((a.mean - b.mean as f64).abs() < 1e-4);
    assert!((a.std - b.std as f64).abs() < 1e-4);
    let (p, q) = (a.co_trev.unwrap(), b.co_trev.unwrap() as f64);
    assert!((p - q).abs() < 1e-3);
}

