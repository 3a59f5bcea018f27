//! Brute-force rank statistics, quadratic in the sample size.

/// Rank of each value: one plus the number of smaller values plus half the
/// number of other equal values.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let less = x.iter().filter(|&&u| u < v).count() as f64;
            let equal = x.iter().filter(|&&u| u == v).count() as f64;
            1.0 + less + (equal - 1.0) / 2.0
        })
        .collect()
}

/// Mean pooled rank of each group.
pub fn group_mean_ranks(groups: &[Vec<f64>]) -> Vec<f64> {
    let all: Vec<f64> = groups.concat();
    let r = ranks(&all);
    let mut out = Vec::new();
    let mut at = 0;
    for g in groups {
        out.push(r[at..at + g.len()].iter().sum::<f64>() / g.len() as f64);
        at += g.len();
    }
    out
}

/// Dunn z for groups `i`, `j` with the tie-corrected rank variance.
pub fn dunn_z(groups: &[Vec<f64>], i: usize, j: usize) -> f64 {
    let all: Vec<f64> = groups.concat();
    let n = all.len() as f64;
    let mut ties = 0.0;
    for (a, &v) in all.iter().enumerate() {
        // count each tie group once, at its first member
        if all[..a].contains(&v) {
            continue;
        }
        let t = all.iter().filter(|&&u| u == v).count() as f64;
        ties += t * t * t - t;
    }
    let r = group_mean_ranks(groups);
    let var = n * (n + 1.0) / 12.0 - ties / (12.0 * (n - 1.0));
    let (ni, nj) = (groups[i].len() as f64, groups[j].len() as f64);
    (r[i] - r[j]) / (var * (1.0 / ni + 1.0 / nj)).sqrt()
}

/// Mann-Whitney U of `a` over `b`: pairs with a > b, ties counting half.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for &x in a {
        for &y in b {
            if x > y {
                u += 1.0;
            } else if x == y {
                u += 0.5;
            }
        }
    }
    u
}

/// Squared normal-approximation z of the Mann-Whitney test with the
/// tie-corrected variance. For two groups this equals Kruskal-Wallis H.
pub fn mann_whitney_z2(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let all: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut ties = 0.0;
    for (k, &v) in all.iter().enumerate() {
        if all[..k].contains(&v) {
            continue;
        }
        let t = all.iter().filter(|&&u| u == v).count() as f64;
        ties += t * t * t - t;
    }
    let u = mann_whitney_u(a, b);
    let mean = n1 * n2 / 2.0;
    let var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    (u - mean) * (u - mean) / var
}
