//! Direct-definition BVP shape features on f64 slices.

use crate::hrv::{mean, sample_std};

fn pop_std(x: &[f64]) -> f64 {
    crate::hrv::population_variance(x).sqrt()
}

pub fn zscore(x: &[f64]) -> Vec<f64> {
    let m = mean(x);
    let s = pop_std(x);
    x.iter().map(|v| (v - m) / s).collect()
}

/// O(n * lag) autocorrelation at a single lag.
pub fn acf(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..x.len() {
        den += (x[i] - m) * (x[i] - m);
        if i + lag < x.len() {
            num += (x[i] - m) * (x[i + lag] - m);
        }
    }
    num / den
}

pub fn hist_mode(z: &[f64], bins: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in z {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0; bins];
    for &v in z {
        let mut k = ((v - lo) / w) as usize;
        if k >= bins {
            k = bins - 1;
        }
        counts[k] += 1;
    }
    let mut best = 0;
    for k in 1..bins {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    lo + w * (best as f64 + 0.5)
}

pub fn first_1e(x: &[f64]) -> usize {
    for lag in 0..x.len() {
        if acf(x, lag) < (-1.0f64).exp() {
            return lag;
        }
    }
    x.len()
}

pub fn first_zero(x: &[f64]) -> usize {
    for lag in 0..x.len() {
        if acf(x, lag) <= 0.0 {
            return lag;
        }
    }
    x.len()
}

pub fn first_min(x: &[f64]) -> usize {
    let half = x.len() / 2;
    for lag in 1..=half {
        let (a, b, c) = (acf(x, lag - 1), acf(x, lag), acf(x, lag + 1));
        if b < a && b < c {
            return lag;
        }
    }
    half
}

pub fn ami_shannon(x: &[f64], tau: usize, bins: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let w = (hi - lo) / bins as f64;
    let bin = |v: f64| (((v - lo) / w) as usize).min(bins - 1);
    let n = x.len() - tau;
    let mut joint = vec![vec![0.0; bins]; bins];
    for t in 0..n {
        joint[bin(x[t])][bin(x[t + tau])] += 1.0 / n as f64;
    }
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let p = joint[a][b];
            if p > 0.0 {
                let pa: f64 = joint[a].iter().sum();
                let pb: f64 = (0..bins).map(|r| joint[r][b]).sum();
                mi += p * (p / (pa * pb)).log2();
            }
        }
    }
    mi
}

pub fn below_mean_events(x: &[f64]) -> f64 {
    let thr = mean(x) - pop_std(x);
    let mut onsets = Vec::new();
    for i in 0..x.len() {
        if x[i] < thr && (i == 0 || x[i - 1] >= thr) {
            onsets.push(i as f64);
        }
    }
    if onsets.len() < 2 {
        return x.len() as f64;
    }
    let mut gaps = 0.0;
    for k in 1..onsets.len() {
        gaps += onsets[k] - onsets[k - 1];
    }
    gaps / (onsets.len() - 1) as f64
}

/// Spectral share below Nyquist/5 and centroid, from a direct Hann DFT.
pub fn spectral(x: &[f64], fs: f64) -> (f64, f64) {
    let n = x.len();
    let m = mean(x);
    let mut low = 0.0;
    let mut total = 0.0;
    let mut moment = 0.0;
    for k in 1..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
            let ang = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
            re += (v - m) * w * ang.cos();
            im += (v - m) * w * ang.sin();
        }
        let mut p = re * re + im * im;
        if !(n % 2 == 0 && k == n / 2) {
            p *= 2.0;
        }
        let f = k as f64 * fs / n as f64;
        total += p;
        moment += f * p;
        if 10 * k < n {
            low += p;
        }
    }
    (low / total, moment / total)
}

pub fn rollmean3(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for t in 3..x.len() {
        s += (x[t] - (x[t - 1] + x[t - 2] + x[t - 3]) / 3.0).abs();
    }
    s / (x.len() - 3) as f64
}

pub fn trev(x: &[f64]) -> f64 {
    let d: Vec<f64> = (1..x.len()).map(|i| x[i] - x[i - 1]).collect();
    let m3 = d.iter().map(|v| v.powi(3)).sum::<f64>() / d.len() as f64;
    let m2 = d.iter().map(|v| v.powi(2)).sum::<f64>() / d.len() as f64;
    m3 / m2.powf(1.5)
}

pub fn ami_gauss_first_min(x: &[f64]) -> usize {
    let n = x.len();
    let max_lag = 40.min((n + 1) / 2);
    let mut ami = vec![0.0; max_lag + 1];
    for lag in 1..=max_lag {
        let a = &x[..n - lag];
        let b = &x[lag..];
        let (ma, mb) = (mean(a), mean(b));
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for i in 0..a.len() {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma).powi(2);
            sbb += (b[i] - mb).powi(2);
        }
        let r = sab / (saa * sbb).sqrt();
        ami[lag] = -0.5 * (1.0 - r * r).ln();
    }
    for lag in 2..max_lag {
        if ami[lag] < ami[lag - 1] && ami[lag] < ami[lag + 1] {
            return lag;
        }
    }
    max_lag
}

pub fn pnn40(x: &[f64]) -> f64 {
    let s = pop_std(x);
    let mut c = 0.0;
    for i in 1..x.len() {
        if (x[i] - x[i - 1]).abs() > 0.04 * s {
            c += 1.0;
        }
    }
    c / (x.len() - 1) as f64
}

pub fn longest_decrease(x: &[f64]) -> usize {
    let mut best = 0;
    for start in 0..x.len() {
        let mut len = 0;
        while start + len + 1 < x.len() && x[start + len + 1] < x[start + len] {
            len += 1;
        }
        best = best.max(len);
    }
    best
}

fn tercile_codes(x: &[f64]) -> Vec<usize> {
    let mut s = x.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let q = |p: f64| {
        if p < 0.5 / n {
            return s[0];
        }
        if p > 1.0 - 0.5 / n {
            return s[s.len() - 1];
        }
        let pos = n * p - 0.5;
        let i = pos.floor() as usize;
        if pos == i as f64 {
            s[i]
        } else {
            s[i] + (pos - i as f64) * (s[i + 1] - s[i])
        }
    };
    let (a, b) = (q(1.0 / 3.0), q(2.0 / 3.0));
    x.iter()
        .map(|&v| if v <= a { 0 } else if v <= b { 1 } else { 2 })
        .collect()
}

pub fn motif3(x: &[f64]) -> f64 {
    let c = tercile_codes(x);
    let mut h = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let mut k = 0.0;
            for i in 1..c.len() {
                if c[i - 1] == a && c[i] == b {
                    k += 1.0;
                }
            }
            if k > 0.0 {
                let p = k / (c.len() - 1) as f64;
                h -= p * p.log2();
            }
        }
    }
    h
}

pub fn transmat(x: &[f64]) -> Option<f64> {
    let tau = first_zero(x).max(1);
    let down: Vec<f64> = (0..x.len()).filter(|i| i % tau == 0).map(|i| x[i]).collect();
    if down.len() < 3 {
        return None;
    }
    let c = tercile_codes(&down);
    let mut t = [[0.0; 3]; 3];
    for i in 1..c.len() {
        t[c[i - 1]][c[i]] += 1.0 / (c.len() - 1) as f64;
    }
    let mut out = 0.0;
    for col in 0..3 {
        let m = (t[0][col] + t[1][col] + t[2][col]) / 3.0;
        out += ((t[0][col] - m).powi(2) + (t[1][col] - m).powi(2) + (t[2][col] - m).powi(2)) / 2.0;
    }
    Some(out)
}

fn line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

pub fn periodicity(x: &[f64]) -> usize {
    let n = x.len();
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let (m, c) = line(&t, x);
    let y: Vec<f64> = (0..n).map(|i| x[i] - (m * i as f64 + c)).collect();
    let max_lag = (n + 2) / 3;
    let r: Vec<f64> = (0..=max_lag).map(|l| acf(&y, l)).collect();
    let floor = 0.01f64.max(4.0 / (n as f64).sqrt());
    let mut trough = false;
    for l in 1..max_lag {
        if r[l] < r[l - 1] && r[l] < r[l + 1] {
            trough = true;
        } else if r[l] > r[l - 1] && r[l] > r[l + 1] && trough && r[l] > floor {
            return l;
        }
    }
    0
}

pub fn embed_expfit(x: &[f64]) -> f64 {
    let n = x.len();
    let tau = first_1e(x).min(n / 10).max(1);
    let mut d = Vec::new();
    for t in 0..n - tau - 1 {
        d.push(((x[t + 1] - x[t]).powi(2) + (x[t + tau + 1] - x[t + tau]).powi(2)).sqrt());
    }
    let l = mean(&d);
    let mut gap = 0.0;
    for &v in &d {
        let below = d.iter().filter(|&&u| u <= v).count() as f64 / d.len() as f64;
        gap += (below - (1.0 - (-v / l).exp())).abs();
    }
    gap / d.len() as f64
}

/// Two-segment scaling break of the fluctuation function; `rs` selects the
/// range statistic instead of the RMS residual.
pub fn fluct_prop(x: &[f64], lag: usize, rs: bool) -> f64 {
    let lo = 5f64.ln();
    let hi = ((x.len() / 2) as f64).ln();
    let mut taus: Vec<usize> = Vec::new();
    for i in 0..50 {
        let v = (lo + i as f64 * (hi - lo) / 49.0).exp().round() as usize;
        if taus.last() != Some(&v) {
            taus.push(v);
        }
    }
    if taus.len() < 12 {
        return 0.0;
    }
    let m = x.len() / lag;
    let mut y = vec![0.0; m];
    y[0] = x[0];
    for i in 1..m {
        y[i] = y[i - 1] + x[i * lag];
    }
    let mut lt = Vec::new();
    let mut lf = Vec::new();
    for &tau in &taus {
        let boxes = m / tau;
        let xs: Vec<f64> = (1..=tau).map(|v| v as f64).collect();
        let mut f = 0.0;
        for b in 0..boxes {
            let seg = &y[b * tau..(b + 1) * tau];
            let (s, c) = line(&xs, seg);
            let r: Vec<f64> = (0..tau).map(|k| seg[k] - (s * xs[k] + c)).collect();
            if rs {
                let mx = r.iter().cloned().fold(f64::MIN, f64::max);
                let mn = r.iter().cloned().fold(f64::MAX, f64::min);
                f += (mx - mn).powi(2);
            } else {
                f += r.iter().map(|v| v * v).sum::<f64>();
            }
        }
        f = if rs {
            (f / boxes as f64).sqrt()
        } else {
            (f / (boxes * tau) as f64).sqrt()
        };
        lt.push((tau as f64).ln());
        lf.push(f.ln());
    }
    let k = lt.len();
    let mut errs = Vec::new();
    for split in 6..=k - 6 {
        let (m1, c1) = line(&lt[..split], &lf[..split]);
        let (m2, c2) = line(&lt[split - 1..], &lf[split - 1..]);
        let mut e1 = 0.0;
        for j in 0..split {
            e1 += (lt[j] * m1 + c1 - lf[j]).powi(2);
        }
        let mut e2 = 0.0;
        for j in split - 1..k {
            e2 += (lt[j] * m2 + c2 - lf[j]).powi(2);
        }
        errs.push(e1.sqrt() + e2.sqrt());
    }
    let min = errs.iter().cloned().fold(f64::INFINITY, f64::min);
    let idx = errs.iter().position(|&e| e == min).unwrap();
    (idx + 6) as f64 / k as f64
}

/// The 24 exported columns in table order; `None` where undefined.
pub fn feature_vector(raw: &[f64], fs: f64) -> Vec<Option<f64>> {
    let z = zscore(raw);
    let e1 = first_1e(&z) as f64;
    let ami = ami_shannon(&z, 5, 10);
    let (low, cent) = spectral(&z, fs);
    let dz: Vec<f64> = (1..z.len()).map(|i| z[i] - z[i - 1]).collect();
    vec![
        Some(mean(raw)),
        Some(sample_std(raw)),
        Some(hist_mode(&z, 5)),
        Some(hist_mode(&z, 10)),
        Some(e1),
        Some(ami),
        Some(below_mean_events(&z)),
        Some(e1),
        Some(first_min(&z) as f64),
        Some(low),
        Some(cent),
        Some(rollmean3(&z)),
        Some(trev(&z)),
        Some(ami),
        Some(ami_gauss_first_min(&z) as f64),
        Some(pnn40(&z)),
        Some(longest_decrease(&z) as f64),
        Some(motif3(&z)),
        transmat(&z),
        Some(periodicity(&z) as f64),
        Some(first_1e(&dz) as f64 / e1),
        Some(embed_expfit(&z)),
        Some(fluct_prop(&z, 2, false)),
        Some(fluct_prop(&z, 1, true)),
    ]
}
