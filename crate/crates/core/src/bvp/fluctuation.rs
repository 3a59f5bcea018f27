use crate::error::{CoreError, Result};
use crate::hrv::linear_fit;
use crate::scalar::{from_usize, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluctuationKind {
    /// Root-mean-square residual of each detrended box.
    Dfa,
    /// Range of each detrended box.
    RescaledRange,
}

const MIN_POINTS: usize = 6;

fn box_sizes(n: usize) -> Vec<usize> {
    let lo = 5f64.ln();
    let hi = ((n / 2) as f64).ln();
    let step = (hi - lo) / 49.0;
    let mut taus: Vec<usize> = (0..50)
        .map(|i| (lo + i as f64 * step).exp().round() as usize)
        .collect();
    taus.dedup();
    taus
}

fn norm<T: Scalar>(r: impl Iterator<Item = T>) -> T {
    r.map(|v| v * v).sum::<T>().sqrt()
}

/// Position of the best two-segment linear fit to the log-log fluctuation
/// curve, as a fraction of the number of scales.
///
/// The series is subsampled by `lag` and integrated; box sizes are 50
/// log-spaced values from 5 to `len/2`. Fewer than 12 distinct sizes gives 0.
pub fn fluctuation_prop<T: Scalar>(x: &[T], lag: usize, kind: FluctuationKind) -> Result<T> {
    if x.len() < 64 {
        return Err(CoreError::InsufficientData(format!(
            "fluctuation analysis needs at least 64 samples, got {}",
            x.len()
        )));
    }
    if lag == 0 {
        return Err(CoreError::InvalidParameter("lag must be at least 1".into()));
    }
    let taus = box_sizes(x.len());
    if taus.len() < 12 {
        return Ok(T::zero());
    }
    let mut profile = Vec::with_capacity(x.len() / lag);
    let mut acc = T::zero();
    for &v in x.iter().step_by(lag).take(x.len() / lag) {
        acc = acc + v;
        profile.push(acc);
    }

    let mut log_tau = Vec::with_capacity(taus.len());
    let mut log_f = Vec::with_capacity(taus.len());
    for &tau in &taus {
        let boxes = profile.len() / tau;
        let xs: Vec<T> = (1..=tau).map(from_usize::<T>).collect();
        let mut f = T::zero();
        for b in 0..boxes {
            let seg = &profile[b * tau..(b + 1) * tau];
            let (m, c) = linear_fit(&xs, seg);
            let resid = seg.iter().zip(&xs).map(|(&y, &t)| y - (m * t + c));
            f = f + match kind {
                FluctuationKind::Dfa => resid.map(|r| r * r).sum(),
                FluctuationKind::RescaledRange => {
                    let (lo, hi) = resid.fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| {
                        (lo.min(r), hi.max(r))
                    });
                    (hi - lo) * (hi - lo)
                }
            };
        }
        let f = match kind {
            FluctuationKind::Dfa => (f / from_usize(boxes * tau)).sqrt(),
            FluctuationKind::RescaledRange => (f / from_usize(boxes)).sqrt(),
        };
        log_tau.push(from_usize::<T>(tau).ln());
        log_f.push(f.ln());
    }

    let ntt = taus.len();
    let mut best: Option<(usize, T)> = None;
    for split in MIN_POINTS..=ntt - MIN_POINTS {
        let (m1, c1) = linear_fit(&log_tau[..split], &log_f[..split]);
        let (m2, c2) = linear_fit(&log_tau[split - 1..], &log_f[split - 1..]);
        let err1 = norm((0..split).map(|j| log_tau[j] * m1 + c1 - log_f[j]));
        let err2 = norm((split - 1..ntt).map(|j| log_tau[j] * m2 + c2 - log_f[j]));
        let err = err1 + err2;
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((split, err));
        }
    }
    let (split, _) = best.expect("at least one split");
    Ok(from_usize::<T>(split) / from_usize(ntt))
}

/// DFA variant on every second sample.
pub fn dfa_prop<T: Scalar>(x: &[T]) -> Result<T> {
    fluctuation_prop(x, 2, FluctuationKind::Dfa)
}

/// Rescaled-range variant on every sample.
pub fn rs_prop<T: Scalar>(x: &[T]) -> Result<T> {
    fluctuation_prop(x, 1, FluctuationKind::RescaledRange)
}

/// Both fluctuation statistics: (dfa, rescaled range).
pub fn fluctuation_props<T: Scalar>(x: &[T]) -> Result<(T, T)> {
    Ok((dfa_prop(x)?, rs_prop(x)?))
}
