//! Loop-by-loop HRV definitions.

pub struct TimeDomain {
    pub rmssd: f64,
    pub sdsd: f64,
    pub pnn50: f64,
    pub pnn25: f64,
    pub pnn10: f64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

pub fn time_domain(rr: &[f64]) -> TimeDomain {
    let n = rr.len();
    let mut diffs = Vec::new();
    for i in 1..n {
        diffs.push(rr[i] - rr[i - 1]);
    }
    let mut sq = 0.0;
    for d in &diffs {
        sq += d * d;
    }
    let rmssd = (sq / diffs.len() as f64).sqrt();
    let count_over = |thr: f64| {
        let mut c = 0;
        for d in &diffs {
            if d.abs() > thr {
                c += 1;
            }
        }
        100.0 * c as f64 / diffs.len() as f64
    };
    let mut sorted = rr.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    TimeDomain {
        rmssd,
        sdsd: sample_std(&diffs),
        pnn50: count_over(50.0),
        pnn25: count_over(25.0),
        pnn10: count_over(10.0),
        mean: mean(rr),
        std: sample_std(rr),
        median,
        min: sorted[0],
        max: sorted[n - 1],
    }
}

pub fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

pub fn sample_std(x: &[f64]) -> f64 {
    let m = mean(x);
    let mut s = 0.0;
    for v in x {
        s += (v - m) * (v - m);
    }
    (s / (x.len() as f64 - 1.0)).sqrt()
}

pub fn population_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    let mut s = 0.0;
    for v in x {
        s += (v - m) * (v - m);
    }
    s / x.len() as f64
}

/// Pincus ApEn with self-matches and Chebyshev distance.
pub fn approx_entropy(x: &[f64], m: usize, r: f64) -> f64 {
    fn phi(x: &[f64], m: usize, r: f64) -> f64 {
        let n = x.len() - m + 1;
        let mut total = 0.0;
        for i in 0..n {
            let mut c = 0.0;
            for j in 0..n {
                let mut dist: f64 = 0.0;
                for k in 0..m {
                    dist = dist.max((x[i + k] - x[j + k]).abs());
                }
                if dist <= r {
                    c += 1.0;
                }
            }
            total += (c / n as f64).ln();
        }
        total / n as f64
    }
    phi(x, m, r) - phi(x, m + 1, r)
}

/// DFA slope over box sizes `lo..=hi`, fitting each box by the normal equations.
pub fn dfa(x: &[f64], lo: usize, hi: usize) -> f64 {
    let m = mean(x);
    let mut y = vec![0.0; x.len()];
    let mut acc = 0.0;
    for i in 0..x.len() {
        acc += x[i] - m;
        y[i] = acc;
    }
    let mut pts = Vec::new();
    for n in lo..=hi {
        let boxes = x.len() / n;
        let mut ss = 0.0;
        for b in 0..boxes {
            let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..n {
                let t = k as f64;
                let v = y[b * n + k];
                sx += t;
                sy += v;
                sxx += t * t;
                sxy += t * v;
            }
            let nn = n as f64;
            let slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
            let icept = (sy - slope * sx) / nn;
            for k in 0..n {
                let r = y[b * n + k] - (icept + slope * k as f64);
                ss += r * r;
            }
        }
        pts.push(((n as f64).ln(), (ss / (boxes * n) as f64).sqrt().ln()));
    }
    let k = pts.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in &pts {
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    (k * sxy - sx * sy) / (k * sxx - sx * sx)
}

/// SD1, SD2 from population variances of the series and its differences.
pub fn poincare(rr: &[f64]) -> (f64, f64) {
    let mut d = Vec::new();
    for i in 1..rr.len() {
        d.push(rr[i] - rr[i - 1]);
    }
    let vd = population_variance(&d);
    let vr = population_variance(rr);
    let sd1 = (vd / 2.0).sqrt();
    let sd2 = (2.0 * vr - vd / 2.0).max(0.0).sqrt();
    (sd1, sd2)
}

/// Natural cubic spline through `(x, y)` evaluated at `t`, with the second
/// derivatives from a dense Gaussian elimination.
pub fn natural_spline(x: &[f64], y: &[f64], t: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    a[0][0] = 1.0;
    a[n - 1][n - 1] = 1.0;
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        a[i][i - 1] = h0;
        a[i][i] = 2.0 * (h0 + h1);
        a[i][i + 1] = h1;
        a[i][n] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
        a.swap(c, p);
        for r in 0..n {
            if r != c && a[r][c] != 0.0 {
                let f = a[r][c] / a[c][c];
                for k in c..=n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let m: Vec<f64> = (0..n).map(|i| a[i][n] / a[i][i]).collect();
    t.iter()
        .map(|&v| {
            let mut s = 0;
            while s + 2 < n && x[s + 1] <= v {
                s += 1;
            }
            let h = x[s + 1] - x[s];
            let (p, q) = ((x[s + 1] - v) / h, (v - x[s]) / h);
            p * y[s] + q * y[s + 1] + ((p * p * p - p) * m[s] + (q * q * q - q) * m[s + 1]) * h * h / 6.0
        })
        .collect()
}

/// One-sided power by a direct DFT of the Hann-windowed, mean-removed
/// segment; interior bins doubled.
fn periodogram(seg: &[f64]) -> Vec<f64> {
    let n = seg.len();
    let m = mean(seg);
    let mut out = Vec::new();
    for k in 0..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in seg.iter().enumerate() {
            let w = 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos());
            let ang = -2.0 * std::f64::consts::PI * (k * i) as f64 / n as f64;
            re += (v - m) * w * ang.cos();
            im += (v - m) * w * ang.sin();
        }
        let p = re * re + im * im;
        out.push(if k == 0 || (n % 2 == 0 && k == n / 2) { p } else { 2.0 * p });
    }
    out
}

/// Power spectrum (frequencies, power): a single periodogram below 60 s,
/// else 4 half-overlapping Welch segments; AC bins scaled so their sum
/// times df is the population variance, DC bin mean^2 / df.
pub fn spectrum(x: &[f64], fs: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let (len, mut p) = if n as f64 / fs >= 60.0 {
        let len = 2 * n / 5;
        let mut acc = vec![0.0; len / 2 + 1];
        for s in 0..4 {
            let part = periodogram(&x[s * (len / 2)..s * (len / 2) + len]);
            for (a, v) in acc.iter_mut().zip(part) {
                *a += v;
            }
        }
        (len, acc)
    } else {
        (n, periodogram(x))
    };
    let df = fs / len as f64;
    let ac: f64 = p[1..].iter().sum();
    let var = population_variance(x);
    for v in p[1..].iter_mut() {
        *v = if ac > 0.0 { *v * var / (ac * df) } else { 0.0 };
    }
    p[0] = mean(x) * mean(x) / df;
    ((0..p.len()).map(|k| k as f64 * df).collect(), p)
}

/// Trapezoid over the bins with `lo <= f < hi`.
pub fn band(freqs: &[f64], power: &[f64], lo: f64, hi: f64) -> f64 {
    let df = freqs[1] - freqs[0];
    let inside: Vec<f64> = freqs.iter().zip(power).filter(|(&f, _)| f >= lo && f < hi).map(|(_, &p)| p).collect();
    let mut s = 0.0;
    for i in 1..inside.len() {
        s += (inside[i - 1] + inside[i]) / 2.0 * df;
    }
    s
}

/// VLF, LF, HF and total power of the tachogram resampled at `fs` with a
/// natural cubic spline over the interval end times.
pub fn band_powers(rr: &[f64], fs: f64) -> [f64; 4] {
    let mut t = Vec::new();
    let mut acc = 0.0;
    for v in rr {
        acc += v / 1000.0;
        t.push(acc);
    }
    let span = t[t.len() - 1] - t[0];
    let count = (span / (1.0 / fs)).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| t[0] + i as f64 * (1.0 / fs)).collect();
    let mut tach = natural_spline(&t, rr, &grid);
    let m = mean(&tach);
    for v in tach.iter_mut() {
        *v -= m;
    }
    let (f, p) = spectrum(&tach, fs);
    [
        band(&f, &p, 0.003, 0.04),
        band(&f, &p, 0.04, 0.15),
        band(&f, &p, 0.15, 0.4),
        band(&f, &p, 0.003, 0.4),
    ]
}
