//! Cold-pressor-like synthetic BVP recordings with known beats.
//!
//! The RR process shortens and the pulse shrinks with the planted pain
//! state; everything else (modulation, jitter, noise) is state independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{bin_pain, EpochReport, PainState, SubjectRecording};
use crate::error::{CoreError, Result};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub epoch_len_s: f64,
    /// Score reported at the start of each epoch; the first is the baseline.
    pub epoch_scores: Vec<u8>,
    /// Mean RR per state, indexed NP, LP, MP, HP.
    pub mean_rr_ms: [f64; 4],
    /// Pulse amplitude per state, indexed NP, LP, MP, HP.
    pub amplitude: [f64; 4],
    /// Depth of the 0.1 Hz RR modulation.
    pub lf_depth_ms: f64,
    /// Depth of the 0.25 Hz RR modulation.
    pub hf_depth_ms: f64,
    pub rr_jitter_sd_ms: f64,
    pub noise_sd: f64,
    /// Width of the systolic Gaussian.
    pub systolic_width_s: f64,
    /// Delay, relative height and width of the dicrotic Gaussian.
    pub dicrotic_delay_s: f64,
    pub dicrotic_ratio: f64,
    pub dicrotic_width_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            duration_s: 220.0,
            sample_rate_hz: 2048.0,
            epoch_len_s: 20.0,
            epoch_scores: vec![0, 2, 3, 5, 5, 6, 8, 8, 9, 9, 9],
            mean_rr_ms: [850.0, 780.0, 715.0, 655.0],
            amplitude: [1.0, 0.88, 0.77, 0.68],
            lf_depth_ms: 25.0,
            hf_depth_ms: 15.0,
            rr_jitter_sd_ms: 8.0,
            noise_sd: 0.02,
            systolic_width_s: 0.08,
            dicrotic_delay_s: 0.25,
            dicrotic_ratio: 0.35,
            dicrotic_width_s: 0.08,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidConfiguration(m));
        if !(self.sample_rate_hz > 0.0) || !(self.duration_s > 0.0) || !(self.epoch_len_s > 0.0) {
            return bad("duration, sample rate and epoch length must be positive".into());
        }
        if self.epoch_scores.first() != Some(&0) {
            return bad("the first epoch score must be 0".into());
        }
        if let Some(s) = self.epoch_scores.iter().find(|&&s| s > 10) {
            return bad(format!("epoch score {s} outside 0-10"));
        }
        if let Some(rr) = self.mean_rr_ms.iter().find(|rr| !(300.0..=2000.0).contains(*rr)) {
            return bad(format!("mean RR {rr} ms outside 300-2000 ms"));
        }
        if self.amplitude.iter().any(|a| !(*a > 0.0)) {
            return bad("pulse amplitudes must be positive".into());
        }
        let sds = [self.rr_jitter_sd_ms, self.noise_sd, self.lf_depth_ms, self.hf_depth_ms];
        if sds.iter().any(|v| !(*v >= 0.0)) {
            return bad("noise, jitter and modulation depths must be non-negative".into());
        }
        if !(self.systolic_width_s > 0.0) || !(self.dicrotic_width_s > 0.0) {
            return bad("pulse widths must be positive".into());
        }
        let min_rr = self.mean_rr_ms.iter().copied().fold(f64::INFINITY, f64::min);
        if min_rr - self.lf_depth_ms - self.hf_depth_ms - 4.0 * self.rr_jitter_sd_ms < 300.0 {
            return bad("modulation and jitter can push RR below 300 ms".into());
        }
        Ok(())
    }

    fn epochs(&self) -> Vec<EpochReport> {
        self.epoch_scores
            .iter()
            .enumerate()
            .map(|(i, &pain_score)| EpochReport {
                start_s: i as f64 * self.epoch_len_s,
                pain_score,
            })
            .collect()
    }
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beat_times_s: Vec<f64>,
    pub epochs: Vec<EpochReport>,
    pub epoch_len_s: f64,
    pub sample_rate_hz: f64,
}

impl GroundTruth {
    /// State of the epoch containing time `t`.
    pub fn state_at(&self, t: f64) -> PainState {
        let k = ((t / self.epoch_len_s).floor().max(0.0) as usize).min(self.epochs.len() - 1);
        bin_pain(self.epochs[k].pain_score).expect("validated scores")
    }

    pub fn state_of_sample(&self, i: usize) -> PainState {
        self.state_at(i as f64 / self.sample_rate_hz)
    }
}

/// One recording and the beats planted in it. Deterministic in `cfg.seed`.
pub fn generate_recording(
    subject_id: &str,
    cfg: &SynthConfig,
) -> Result<(SubjectRecording, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let truth_epochs = cfg.epochs();
    let mut truth = GroundTruth {
        beat_times_s: Vec::new(),
        epochs: truth_epochs.clone(),
        epoch_len_s: cfg.epoch_len_s,
        sample_rate_hz: cfg.sample_rate_hz,
    };
    let jitter = Normal::new(0.0, cfg.rr_jitter_sd_ms.max(f64::MIN_POSITIVE))
        .expect("non-negative sd");
    let hf_phase = rng.random::<f64>() * std::f64::consts::TAU;
    let lf_phase = rng.random::<f64>() * std::f64::consts::TAU;

    let rr_at = |t: f64, rng: &mut ChaCha8Rng| {
        let state = truth.state_at(t).index();
        let j = if cfg.rr_jitter_sd_ms > 0.0 { jitter.sample(rng) } else { 0.0 };
        cfg.mean_rr_ms[state]
            + cfg.lf_depth_ms * (std::f64::consts::TAU * 0.1 * t + lf_phase).sin()
            + cfg.hf_depth_ms * (std::f64::consts::TAU * 0.25 * t + hf_phase).sin()
            + j
    };
    let mut beats = Vec::new();
    let mut t = rr_at(0.0, &mut rng) / 2000.0;
    while t < cfg.duration_s {
        beats.push(t);
        t += rr_at(t, &mut rng) / 1000.0;
    }

    let n = (cfg.duration_s * cfg.sample_rate_hz).round() as usize;
    let fs = cfg.sample_rate_hz;
    let mut x = vec![0.0; n];
    let reach = 6.0 * cfg.systolic_width_s.max(cfg.dicrotic_width_s);
    let mut add_gaussian = |centre: f64, height: f64, width: f64| {
        let lo = ((centre - reach) * fs).floor().max(0.0) as usize;
        let hi = (((centre + reach) * fs).ceil().max(0.0) as usize).min(n);
        for (i, v) in x.iter_mut().enumerate().take(hi).skip(lo) {
            let d = i as f64 / fs - centre;
            *v += height * (-d * d / (2.0 * width * width)).exp();
        }
    };
    for &b in &beats {
        let amp = cfg.amplitude[truth.state_at(b).index()];
        add_gaussian(b, amp, cfg.systolic_width_s);
        add_gaussian(
            b + cfg.dicrotic_delay_s,
            amp * cfg.dicrotic_ratio,
            cfg.dicrotic_width_s,
        );
    }
    if cfg.noise_sd > 0.0 {
        let noise = Normal::new(0.0, cfg.noise_sd).expect("positive sd");
        for v in x.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    truth.beat_times_s = beats;
    let recording = SubjectRecording {
        subject_id: subject_id.to_string(),
        bvp: SampledSignal::new(fs, x, 0.0)?,
        epochs: truth_epochs,
    };
    Ok((recording, truth))
}

/// `n_subjects` recordings with per-subject RR (+-10 %) and amplitude
/// (+-20 %) scale factors. Subject ids are `S01`, `S02`, ...
pub fn generate_cohort(
    n_subjects: usize,
    base: &SynthConfig,
    seed: u64,
) -> Result<Vec<(SubjectRecording, GroundTruth)>> {
    if n_subjects == 0 {
        return Err(CoreError::InvalidConfiguration("cohort needs at least one subject".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n_subjects.to_string().len().max(2);
    let configs: Vec<(String, SynthConfig)> = (0..n_subjects)
        .map(|i| {
            let rr_scale = rng.random_range(0.9..=1.1);
            let amp_scale = rng.random_range(0.8..=1.2);
            let cfg = SynthConfig {
                seed: rng.random(),
                mean_rr_ms: base.mean_rr_ms.map(|v| v * rr_scale),
                amplitude: base.amplitude.map(|v| v * amp_scale),
                ..base.clone()
            };
            (format!("S{:0width$}", i + 1), cfg)
        })
        .collect();
    use rayon::prelude::*;
    configs
        .par_iter()
        .map(|(id, cfg)| generate_recording(id, cfg))
        .collect()
}
