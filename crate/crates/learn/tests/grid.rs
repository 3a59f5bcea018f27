mod common;

use bvpain_learn::*;
use bvpain_oracle::SplitMix;
use common::*;
use ndarray::{s, ArrayView2};

fn accuracy_scorer(m: &TrainedModel, x: ArrayView2<f64>, t: Target) -> Result<f64> {
    let Target::Classes(y) = t else {
        return Err(LearnError::InvalidInput("classes expected".into()));
    };
    Ok(accuracy(&m.predict(x)?, y))
}

#[test]
fn singleton_grid_returns_its_point() {
    let mut rng = SplitMix(30);
    let (x, y) = blobs(&mut rng, &[[0.0, 0.0], [3.0, 3.0]], 30, 1.0);
    let grid = HyperGrid::default().with("l2_lambda", &[0.5]);
    let r = grid_search(
        Family::Logreg,
        &grid,
        0,
        (x.view(), Target::Classes(&y)),
        (x.view(), Target::Classes(&y)),
        &accuracy_scorer,
    )
    .unwrap();
    assert_eq!(r.best["l2_lambda"], 0.5);
    assert_eq!(r.points.len(), 1);
}

#[test]
fn planted_depth_is_selected() {
    let mut rng = SplitMix(31);
    let (x, y) = xor(&mut rng, 600);
    let (xt, xv) = (x.slice(s![..400, ..]), x.slice(s![400.., ..]));
    let grid = HyperGrid::default()
        .with("max_depth", &[1.0, 3.0])
        .with("n_rounds", &[30.0]);
    let run = || {
        grid_search(
            Family::Gbt,
            &grid,
            7,
            (xt, Target::Classes(&y[..400])),
            (xv, Target::Classes(&y[400..])),
            &accuracy_scorer,
        )
        .unwrap()
    };
    let r = run();
    assert_eq!(r.best["max_depth"], 3.0);
    assert!(r.best_score > 0.9);
    // additive stumps cannot express the interaction
    assert!(r.points[0].score.unwrap() < 0.7);
    assert_eq!(r, run());
}

#[test]
fn ties_keep_the_first_point_and_failures_are_skipped() {
    let mut rng = SplitMix(32);
    let (x, y) = blobs(&mut rng, &[[0.0, 0.0], [9.0, 9.0]], 20, 0.5);
    let grid = HyperGrid::default().with("c", &[-1.0, 1.0, 10.0]);
    let r = grid_search(
        Family::Linsvm,
        &grid,
        0,
        (x.view(), Target::Classes(&y)),
        (x.view(), Target::Classes(&y)),
        &accuracy_scorer,
    )
    .unwrap();
    assert!(r.points[0].error.is_some());
    assert_eq!(r.best["c"], 1.0);

    let bad = HyperGrid::default().with("c", &[-1.0, 0.0]);
    assert!(matches!(
        grid_search(
            Family::Linsvm,
            &bad,
            0,
            (x.view(), Target::Classes(&y)),
            (x.view(), Target::Classes(&y)),
            &accuracy_scorer,
        ),
        Err(LearnError::SearchFailed)
    ));
}

#[test]
fn spec_dispatch_checks_target_kind() {
    let mut rng = SplitMix(33);
    let (x, y) = blobs(&mut rng, &[[0.0, 0.0], [3.0, 3.0]], 10, 1.0);
    let values: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    assert!(ModelSpec::new(Family::Gbt, 0).fit(x.view(), Target::Values(&values)).is_err());
    assert!(ModelSpec::new(Family::GbtReg, 0).fit(x.view(), Target::Classes(&y)).is_err());
    let m = ModelSpec::new(Family::Rforest, 4)
        .with("n_trees", 7.0)
        .fit(x.view(), Target::Classes(&y))
        .unwrap();
    assert_eq!(m.tree_count(), 7);
    assert_eq!(m.seed, 4);
    assert!(ModelSpec::new(Family::Rforest, 0).with("trees", 7.0).validate().is_err());
}
