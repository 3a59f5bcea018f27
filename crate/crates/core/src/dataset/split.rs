use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

fn class_members(labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    members
}

/// Test-index sets of a stratified k-fold partition.
///
/// Each class is shuffled and dealt round-robin, continuing where the
/// previous class stopped, so both per-class and total fold sizes differ by
/// at most one.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(CoreError::InvalidConfiguration(format!("k-fold needs k >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (class, mut idx) in class_members(labels) {
        if idx.len() < k {
            return Err(CoreError::InvalidConfiguration(format!(
                "class {class} has {} rows, fewer than the {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Test-index sets that keep every group (subject) inside one fold.
///
/// Groups are shuffled and then assigned greedily to the currently smallest
/// fold.
pub fn grouped_kfold(groups: &[String], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut by_group: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        by_group.entry(g.as_str()).or_default().push(i);
    }
    if k < 2 || by_group.len() < k {
        return Err(CoreError::InvalidConfiguration(format!(
            "grouped k-fold needs 2 <= k <= number of groups ({} groups, k = {k})",
            by_group.len()
        )));
    }
    let mut order: Vec<Vec<usize>> = by_group.into_values().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for members in order {
        let smallest = (0..k).min_by_key(|&f| (folds[f].len(), f)).expect("k >= 2");
        folds[smallest].extend(members);
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Class-stratified `(main, tuning)` index split with `frac` of each class
/// (rounded, at least one row when `frac > 0`) in the tuning part.
pub fn tuning_split(labels: &[usize], frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&frac) {
        return Err(CoreError::InvalidConfiguration(format!(
            "tuning fraction must lie in [0, 1), got {frac}"
        )));
    }
    if frac == 0.0 {
        return Ok(((0..labels.len()).collect(), Vec::new()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut main = Vec::new();
    let mut tuning = Vec::new();
    for (class, mut idx) in class_members(labels) {
        let take = ((frac * idx.len() as f64).round() as usize).max(1);
        if take >= idx.len() {
            return Err(CoreError::InvalidConfiguration(format!(
                "class {class} has {} rows, too few to hold out a tuning share",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        tuning.extend_from_slice(&idx[..take]);
        main.extend_from_slice(&idx[take..]);
    }
    main.sort_unstable();
    tuning.sort_unstable();
    Ok((main, tuning))
}
