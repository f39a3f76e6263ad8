//! Sample statistics used by diagnostics and validation: KS tests, Kendall's tau,
//! autocorrelation, batch-means standard errors.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean and its batch-means standard error over `batches` contiguous blocks.
pub fn batch_means(xs: &[f64], batches: usize) -> (f64, f64) {
    let b = batches.max(2).min(xs.len());
    let len = xs.len() / b;
    let means: Vec<f64> = (0..b).map(|i| mean(&xs[i * len..(i + 1) * len])).collect();
    (mean(xs), (variance(&means) / b as f64).sqrt())
}

/// Sample autocorrelations at lags 0..=max_lag (biased denominator).
pub fn acf(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let g = autocov(xs, max_lag);
    g.iter().map(|v| v / g[0]).collect()
}

/// Full-sample autocorrelations at lags 1..=max_lag with standard errors from
/// the spread of per-batch estimates.
pub fn acf_batch_se(xs: &[f64], max_lag: usize, batches: usize) -> Vec<(f64, f64)> {
    let full = acf(xs, max_lag);
    let b = batches.max(2);
    let len = xs.len() / b;
    let per: Vec<Vec<f64>> = (0..b).map(|i| acf(&xs[i * len..(i + 1) * len], max_lag)).collect();
    (1..=max_lag)
        .map(|k| {
            let col: Vec<f64> = per.iter().map(|r| r[k]).collect();
            (full[k], (variance(&col) / b as f64).sqrt())
        })
        .collect()
}

/// Sample autocovariances at lags 0..=max_lag, divided by n.
pub fn autocov(xs: &[f64], max_lag: usize) -> Vec<f64> {
    let n = xs.len();
    let m = mean(xs);
    let c: Vec<f64> = xs.iter().map(|x| x - m).collect();
    (0..=max_lag)
        .map(|k| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect()
}

/// Asymptotic Kolmogorov survival function with the small-sample correction
/// of Stephens.
fn kolmogorov_sf(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test against U(0,1).
pub fn ks_uniform(xs: &[f64]) -> KsResult {
    ks_one_sample(xs, |x| x.clamp(0.0, 1.0))
}

pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in s.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    KsResult { statistic: d, p_value: kolmogorov_sf(d, n) }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let n_eff = (n * m) as f64 / (n + m) as f64;
    KsResult { statistic: d, p_value: kolmogorov_sf(d, n_eff) }
}

struct Fenwick(Vec<u32>);

impl Fenwick {
    fn add(&mut self, mut i: usize) {
        i += 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted indices strictly below `i`.
    fn below(&self, mut i: usize) -> u32 {
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

fn ranks(xs: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0; xs.len()];
    for (k, &i) in idx.iter().enumerate() {
        r[i] = k;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallEstimate {
    pub tau: f64,
    pub se: f64,
}

/// Kendall's tau for continuous data in O(n log n), with a standard error from
/// batch means of the per-observation concordance kernel (robust to serial
/// dependence between pairs).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> KendallEstimate {
    let n = x.len();
    assert_eq!(n, y.len());
    let rx = ranks(x);
    let ry = ranks(y);
    let mut by_x = vec![0usize; n];
    for i in 0..n {
        by_x[rx[i]] = i;
    }
    // concordant[i] = #{j : (x_j - x_i)(y_j - y_i) > 0}
    let mut concordant = vec![0u32; n];
    let mut fw = Fenwick(vec![0; n + 1]);
    for &i in &by_x {
        concordant[i] += fw.below(ry[i]);
        fw.add(ry[i]);
    }
    let mut fw = Fenwick(vec![0; n + 1]);
    for (k, &i) in by_x.iter().rev().enumerate() {
        concordant[i] += k as u32 - fw.below(ry[i] + 1);
        fw.add(ry[i]);
    }
    let m = (n - 1) as f64;
    let kernel: Vec<f64> = concordant.iter().map(|&c| (2.0 * c as f64 - m) / m).collect();
    let (tau, se) = batch_means(&kernel, 100);
    KendallEstimate { tau, se: 2.0 * se }
}

/// Plain O(n^2) Kendall's tau, used as a reference.
pub fn kendall_tau_naive(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += ((x[i] - x[j]) * (y[i] - y[j])).signum();
        }
    }
    2.0 * s / (n as f64 * (n as f64 - 1.0))
}

/// Spearman's rho of a sample with known uniform margins: 12 E[UV] - 3, with a
/// batch-means standard error.
pub fn spearman_uniform(u: &[f64], v: &[f64]) -> (f64, f64) {
    let prod: Vec<f64> = u.iter().zip(v).map(|(a, b)| 12.0 * a * b - 3.0).collect();
    batch_means(&prod, 100)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_kendall_matches_naive() {
        let x: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 + 0.001 * i as f64).collect();
        let y: Vec<f64> = (0..200).map(|i| ((i * 53) % 97) as f64 - 0.002 * i as f64).collect();
        let fast = kendall_tau(&x, &y).tau;
        assert!((fast - kendall_tau_naive(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn ks_exact_grid_has_small_statistic() {
        let xs: Vec<f64> = (1..=1000).map(|i| (i as f64 - 0.5) / 1000.0).collect();
        let r = ks_uniform(&xs);
        assert!((r.statistic - 0.0005).abs() < 1e-12);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn acf_of_alternating_sequence() {
        let xs: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&xs, 2);
        assert!((r[1] + 0.999).abs() < 1e-9);
        assert!((r[2] - 0.998).abs() < 1e-9);
    }
}
