#![allow(dead_code)]

use bvpain_core::dataset::{Dataset, LabeledWindow, PainState};
use bvpain_oracle::SplitMix;

pub const COLUMNS: [&str; 4] = ["rr_mean_ms", "noise_a", "noise_b", "noise_c"];

fn score_for(state: PainState, rng: &mut SplitMix) -> u8 {
    let r = rng.next_u64();
    match state {
        PainState::NoPain => 0,
        PainState::Low => 1 + (r % 3) as u8,
        PainState::Medium => 4 + (r % 3) as u8,
        PainState::High => 7 + (r % 4) as u8,
    }
}

/// Eight subjects; `rr_mean_ms` drops with the pain state by `effect` ms per
/// level (plus unit-sd noise scaled by `sd`), the other columns are noise.
pub fn planted(per_state_per_subject: usize, effect: f64, sd: f64, seed: u64) -> Dataset {
    let mut rng = SplitMix(seed);
    let mut rows = Vec::new();
    for s in 0..8 {
        let subject_rr = 850.0 + 40.0 * rng.normal();
        for (level, state) in PainState::ALL.into_iter().enumerate() {
            for w in 0..per_state_per_subject {
                let score = score_for(state, &mut rng);
                let rr = subject_rr - effect * level as f64 + sd * rng.normal();
                rows.push(LabeledWindow {
                    subject_id: format!("S{:02}", s + 1),
                    window_start_s: (level * per_state_per_subject + w) as f64 * 2.5,
                    features: vec![rr, rng.normal(), rng.normal(), rng.normal()],
                    pain_score: score,
                    pain_state: state,
                    synthetic: None,
                });
            }
        }
    }
    Dataset::new(COLUMNS.iter().map(|c| c.to_string()).collect(), rows).unwrap()
}

/// Pure noise features with states drawn independently of them.
pub fn random_labels(n: usize, seed: u64) -> Dataset {
    let mut rng = SplitMix(seed);
    let rows = (0..n)
        .map(|i| {
            let state = PainState::ALL[(rng.next_u64() % 4) as usize];
            LabeledWindow {
                subject_id: format!("S{:02}", i % 8 + 1),
                window_start_s: (i / 8) as f64 * 2.5,
                features: (0..4).map(|_| rng.normal()).collect(),
                pain_score: score_for(state, &mut rng),
                pain_state: state,
                synthetic: None,
            }
        })
        .collect();
    Dataset::new(COLUMNS.iter().map(|c| c.to_string()).collect(), rows).unwrap()
}
