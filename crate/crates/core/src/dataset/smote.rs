use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};

/// Where an oversampled row came from: `base + lambda * (neighbor - base)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOrigin {
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

/// Input rows followed by the synthetic ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoteOutput {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    /// `None` for original rows.
    pub origin: Vec<Option<SyntheticOrigin>>,
}

impl SmoteOutput {
    pub fn synthetic_count(&self) -> usize {
        self.origin.iter().filter(|o| o.is_some()).count()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Oversamples every class up to the majority count by interpolating
/// between a random member and one of its `k` nearest same-class
/// neighbours. `k` is reduced when a class has too few members.
pub fn smote(x: &[Vec<f64>], y: &[usize], k: usize, seed: u64) -> Result<SmoteOutput> {
    if x.len() != y.len() {
        return Err(CoreError::InvalidInput(format!(
            "{} rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    if k == 0 {
        return Err(CoreError::InvalidParameter("SMOTE needs k >= 1".into()));
    }
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in y.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    let target = members.values().map(Vec::len).max().unwrap_or(0);
    let mut out = SmoteOutput {
        x: x.to_vec(),
        y: y.to_vec(),
        origin: vec![None; x.len()],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (&class, idx) in &members {
        let need = target - idx.len();
        if need == 0 {
            continue;
        }
        if idx.len() < 2 {
            return Err(CoreError::CannotOversample(format!(
                "class {class} has {} member(s), at least 2 are needed",
                idx.len()
            )));
        }
        let k_eff = k.min(idx.len() - 1);
        if k_eff < k {
            log::info!("class {class}: SMOTE k reduced from {k} to {k_eff}");
        }
        let neighbours: Vec<Vec<usize>> = idx
            .iter()
            .map(|&i| {
                let mut others: Vec<(f64, usize)> = idx
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (squared_distance(&x[i], &x[j]), j))
                    .collect();
                others.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                others.truncate(k_eff);
                others.into_iter().map(|(_, j)| j).collect()
            })
            .collect();
        for _ in 0..need {
            let pick = rng.random_range(0..idx.len());
            let base = idx[pick];
            let neighbor = *neighbours[pick].choose(&mut rng).expect("k_eff >= 1");
            let lambda: f64 = rng.random();
            let row = x[base]
                .iter()
                .zip(&x[neighbor])
                .map(|(a, b)| a + lambda * (b - a))
                .collect();
            out.x.push(row);
            out.y.push(class);
            out.origin.push(Some(SyntheticOrigin {
                base,
                neighbor,
                lambda,
            }));
        }
    }
    Ok(out)
}
