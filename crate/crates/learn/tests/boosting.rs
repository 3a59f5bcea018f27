mod common;

use bvpain_learn::*;
use bvpain_oracle::SplitMix;
use common::*;
use ndarray::Array2;

fn grid_1d(n: usize) -> (Array2<f64>, Vec<f64>) {
    let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64 / (n - 1) as f64);
    let y = x.column(0).to_vec();
    (x, y)
}

fn mae(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).sum::<f64>() / a.len() as f64
}

fn non_increasing(h: &[f64]) -> bool {
    h.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

#[test]
fn gbt_approximates_identity() {
    let (x, y) = grid_1d(101);
    let p = GbtParams {
        n_rounds: 200,
        learning_rate: 0.1,
        max_depth: 3,
        ..Default::default()
    };
    let m = fit_gbt(x.view(), Target::Values(&y), &p, 0).unwrap();
    assert_eq!(m.family, Family::GbtReg);
    let err = mae(&m.predict_value(x.view()).unwrap(), &y);
    assert!(err < 0.02, "train MAE {err}");
    assert!(non_increasing(&m.diagnostics.loss_history));
}

#[test]
fn huge_leaf_penalty_returns_base_score() {
    let (x, y) = grid_1d(50);
    let p = GbtParams {
        n_rounds: 20,
        l2_leaf_lambda: 1e9,
        ..Default::default()
    };
    let m = fit_gbt(x.view(), Target::Values(&y), &p, 0).unwrap();
    assert!(m.boosted_leaf_values().iter().all(|v| v.abs() < 1e-8));
    let base = y.iter().sum::<f64>() / y.len() as f64;
    assert!(m.predict_value(x.view()).unwrap().iter().all(|v| (v - base).abs() < 1e-6));
}

#[test]
fn gbt_learns_xor() {
    let mut rng = SplitMix(20);
    let (x, y) = xor(&mut rng, 400);
    let p = GbtParams {
        n_rounds: 100,
        max_depth: 2,
        learning_rate: 0.3,
        ..Default::default()
    };
    let m = fit_gbt(x.view(), Target::Classes(&y), &p, 0).unwrap();
    let acc = accuracy(&m.predict(x.view()).unwrap(), &y);
    assert!(acc >= 0.95, "{acc}");
    assert!(non_increasing(&m.diagnostics.loss_history));
}

#[test]
fn gbt_multiclass_probabilities() {
    let mut rng = SplitMix(21);
    let (x, y) = blobs(&mut rng, &[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], 50, 0.7);
    for lr in [0.05, 0.1, 0.3] {
        let p = GbtParams {
            n_rounds: 40,
            learning_rate: lr,
            ..Default::default()
        };
        let m = fit_gbt(x.view(), Target::Classes(&y), &p, 0).unwrap();
        assert!(rows_sum_to_one(&m.predict_proba(x.view()).unwrap()));
        assert!(non_increasing(&m.diagnostics.loss_history));
        assert!(accuracy(&m.predict(x.view()).unwrap(), &y) > 0.9);
    }
}

#[test]
fn adaboost_separates_a_threshold_quickly() {
    let x = Array2::from_shape_fn((40, 1), |(i, _)| i as f64);
    let y: Vec<usize> = (0..40).map(|i| usize::from(i >= 17)).collect();
    let p = AdaBoostParams {
        n_rounds: 10,
        ..Default::default()
    };
    let m = fit_adaboost(x.view(), &y, &p, 0).unwrap();
    assert_eq!(accuracy(&m.predict(x.view()).unwrap(), &y), 1.0);
    assert!(m.tree_count() <= 10);
    assert!(rows_sum_to_one(&m.predict_proba(x.view()).unwrap()));
}

#[test]
fn adaboost_weights_stay_normalised_and_stumps_miss_xor() {
    let mut rng = SplitMix(22);
    let (x, y) = xor(&mut rng, 200);
    let p = AdaBoostParams {
        n_rounds: 50,
        ..Default::default()
    };
    let m = fit_adaboost(x.view(), &y, &p, 1).unwrap();
    assert!(!m.diagnostics.weight_sums.is_empty());
    assert!(m.diagnostics.weight_sums.iter().all(|s| (s - 1.0).abs() <= 1e-9));
    assert!(accuracy(&m.predict(x.view()).unwrap(), &y) < 1.0);
    assert_eq!(m.max_tree_depth(), 1);
}

#[test]
fn adaboost_falls_back_to_priors() {
    let x = Array2::from_elem((6, 2), 0.0);
    let y = [0, 1, 0, 1, 0, 1];
    let m = fit_adaboost(x.view(), &y, &AdaBoostParams::default(), 0).unwrap();
    assert_eq!(m.diagnostics.warnings.len(), 1);
    let p = m.predict_proba(x.view()).unwrap();
    assert!(rows_sum_to_one(&p));
}

#[test]
fn adaboost_regression_fits_a_noisy_curve() {
    let mut rng = SplitMix(24);
    let (x, clean) = grid_1d(201);
    let truth: Vec<f64> = clean.iter().map(|v| v * v).collect();
    let y: Vec<f64> = truth.iter().map(|v| v + 0.05 * rng.normal()).collect();
    let m = fit_adaboost_reg(x.view(), &y, &AdaBoostParams::default(), 0).unwrap();
    assert!(m.tree_count() > 1);
    let err = mae(&m.predict_value(x.view()).unwrap(), &truth);
    assert!(err < 0.05, "{err}");
    assert!(m.diagnostics.weight_sums.iter().all(|s| (s - 1.0).abs() <= 1e-9));
}

#[test]
fn boosting_is_deterministic() {
    let mut rng = SplitMix(23);
    let (x, y) = blobs(&mut rng, &[[0.0, 0.0], [1.0, 0.5]], 60, 1.0);
    let p = GbtParams::default();
    let a = fit_gbt(x.view(), Target::Classes(&y), &p, 5).unwrap();
    let b = fit_gbt(x.view(), Target::Classes(&y), &p, 5).unwrap();
    assert_eq!(a, b);
    let a = fit_adaboost(x.view(), &y, &AdaBoostParams::default(), 5).unwrap();
    let b = fit_adaboost(x.view(), &y, &AdaBoostParams::default(), 5).unwrap();
    assert_eq!(a, b);
}
