//! Stationary margin models used to move between the data scale and the unit scale.

use std::fmt;
use std::str::FromStr;

use crate::copula::boundary_eps;
use crate::error::{CoarmaError, Result};
use crate::roots::brent;
use crate::special::{norm_cdf, norm_pdf, norm_ppf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginKind {
    Empirical,
    Kde,
    Normal,
    /// Data already on the unit scale.
    Uniform,
}

impl MarginKind {
    pub fn token(self) -> &'static str {
        match self {
            MarginKind::Empirical => "emp",
            MarginKind::Kde => "kde",
            MarginKind::Normal => "n",
            MarginKind::Uniform => "u",
        }
    }
}

impl fmt::Display for MarginKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MarginKind {
    type Err = CoarmaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "emp" | "empirical" | "pobs" => Ok(MarginKind::Empirical),
            "kde" => Ok(MarginKind::Kde),
            "n" | "normal" | "gaussian" => Ok(MarginKind::Normal),
            "u" | "unif" | "uniform" => Ok(MarginKind::Uniform),
            other => Err(CoarmaError::Parse { pos: 0, msg: format!("unknown margin '{other}'") }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarginModel {
    Empirical { sorted: Vec<f64> },
    Kde { sorted: Vec<f64>, bandwidth: f64 },
    Normal { mean: f64, sd: f64 },
    Uniform,
}

const KDE_WINDOW: f64 = 9.0;

fn mean_sd(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

/// Silverman's rule of thumb: 0.9 min(sd, IQR/1.34) n^(-1/5).
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let (_, sd) = mean_sd(sorted);
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (sorted.len() as f64).powf(-0.2)
}

/// Pseudo-observations: ranks divided by n + 1, ties receive their average rank.
pub fn pobs(data: &[f64]) -> Vec<f64> {
    let n = data.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| data[a].total_cmp(&data[b]));
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && data[idx[j + 1]] == data[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank / (n as f64 + 1.0);
        }
        i = j + 1;
    }
    out
}

/// Pseudo-observations for copula fitting: the data themselves for the
/// unit-scale margin, rescaled ranks otherwise.
pub fn unit_scale(kind: MarginKind, data: &[f64]) -> Result<Vec<f64>> {
    if kind == MarginKind::Uniform {
        if let Some(x) = data.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
            return Err(CoarmaError::domain(format!("unit-scale data must lie in (0, 1), got {x}")));
        }
        return Ok(data.to_vec());
    }
    Ok(pobs(data))
}

impl MarginModel {
    pub fn fit(kind: MarginKind, data: &[f64]) -> Result<Self> {
        if kind == MarginKind::Uniform {
            if data.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(CoarmaError::domain("unit-scale margin needs data in [0, 1]"));
            }
            return Ok(MarginModel::Uniform);
        }
        if data.len() < 10 {
            return Err(CoarmaError::domain(format!("margin fit needs at least 10 values, got {}", data.len())));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(CoarmaError::domain("margin fit needs finite values"));
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        if sorted[0] == sorted[sorted.len() - 1] {
            return Err(CoarmaError::domain("degenerate (constant) data"));
        }
        Ok(match kind {
            MarginKind::Empirical => MarginModel::Empirical { sorted },
            MarginKind::Kde => {
                let bandwidth = silverman_bandwidth(&sorted);
                MarginModel::Kde { sorted, bandwidth }
            }
            MarginKind::Normal => {
                let (mean, sd) = mean_sd(&sorted);
                MarginModel::Normal { mean, sd }
            }
            MarginKind::Uniform => unreachable!(),
        })
    }

    /// Kernel density estimate with a user-supplied bandwidth.
    pub fn kde_with_bandwidth(data: &[f64], bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(CoarmaError::domain("bandwidth must be positive"));
        }
        match Self::fit(MarginKind::Kde, data)? {
            MarginModel::Kde { sorted, .. } => Ok(MarginModel::Kde { sorted, bandwidth }),
            _ => unreachable!(),
        }
    }

    pub fn kind(&self) -> MarginKind {
        match self {
            MarginModel::Empirical { .. } => MarginKind::Empirical,
            MarginModel::Kde { .. } => MarginKind::Kde,
            MarginModel::Normal { .. } => MarginKind::Normal,
            MarginModel::Uniform => MarginKind::Uniform,
        }
    }

    fn kde_window(sorted: &[f64], h: f64, x: f64) -> (usize, usize) {
        let lo = sorted.partition_point(|&s| s < x - KDE_WINDOW * h);
        let hi = sorted.partition_point(|&s| s <= x + KDE_WINDOW * h);
        (lo, hi)
    }

    fn raw_cdf(&self, x: f64) -> f64 {
        match self {
            MarginModel::Empirical { sorted } => {
                let n = sorted.len() as f64;
                sorted.partition_point(|&s| s <= x) as f64 / (n + 1.0)
            }
            MarginModel::Kde { sorted, bandwidth } => {
                let (lo, hi) = Self::kde_window(sorted, *bandwidth, x);
                // Points below the window contribute Phi(>9) ~ 1.
                let mut s = lo as f64;
                for &xi in &sorted[lo..hi] {
                    s += norm_cdf((x - xi) / bandwidth);
                }
                s / sorted.len() as f64
            }
            MarginModel::Normal { mean, sd } => norm_cdf((x - mean) / sd),
            MarginModel::Uniform => x.clamp(0.0, 1.0),
        }
    }

    /// CDF value on the unit scale, kept strictly inside (0, 1), and whether it was clamped.
    pub fn cdf_checked(&self, x: f64) -> (f64, bool) {
        let raw = self.raw_cdf(x);
        let (lo, hi) = match self {
            MarginModel::Empirical { sorted } => {
                let n = sorted.len() as f64;
                (1.0 / (n + 1.0), n / (n + 1.0))
            }
            _ => (boundary_eps(), 1.0 - boundary_eps()),
        };
        let clamped = raw.clamp(lo, hi);
        let out_of_range = match self {
            MarginModel::Empirical { sorted } => x < sorted[0] || x > sorted[sorted.len() - 1],
            _ => clamped != raw,
        };
        (clamped, out_of_range)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_checked(x).0
    }

    /// Generalized inverse of the CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(CoarmaError::domain(format!("quantile level {p} outside (0, 1)")));
        }
        match self {
            MarginModel::Empirical { sorted } => {
                let n = sorted.len();
                let i = (p * (n as f64 + 1.0)).ceil() as usize;
                Ok(sorted[i.clamp(1, n) - 1])
            }
            MarginModel::Kde { sorted, bandwidth } => {
                let p = p.clamp(boundary_eps(), 1.0 - boundary_eps());
                let lo = sorted[0] - 10.0 * bandwidth;
                let hi = sorted[sorted.len() - 1] + 10.0 * bandwidth;
                let scale = (hi - lo).abs().max(1.0);
                brent(|x| self.raw_cdf(x) - p, lo, hi, 1e-13 * scale, 300)
            }
            MarginModel::Normal { mean, sd } => Ok(mean + sd * norm_ppf(p)),
            MarginModel::Uniform => Ok(p),
        }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        match self {
            MarginModel::Empirical { .. } => {
                Err(CoarmaError::Unsupported("empirical margin has no density".into()))
            }
            MarginModel::Kde { sorted, bandwidth } => {
                let (lo, hi) = Self::kde_window(sorted, *bandwidth, x);
                let s: f64 = sorted[lo..hi].iter().map(|&xi| norm_pdf((x - xi) / bandwidth)).sum();
                Ok(s / (sorted.len() as f64 * bandwidth))
            }
            MarginModel::Normal { mean, sd } => Ok(norm_pdf((x - mean) / sd) / sd),
            MarginModel::Uniform => Ok(if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pobs_averages_ties() {
        let r = pobs(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5 / 5.0, 1.0 / 5.0, 3.5 / 5.0, 2.0 / 5.0]);
    }

    #[test]
    fn margin_tokens() {
        assert_eq!("kde".parse::<MarginKind>().unwrap(), MarginKind::Kde);
        assert_eq!("n".parse::<MarginKind>().unwrap(), MarginKind::Normal);
        assert_eq!("emp".parse::<MarginKind>().unwrap(), MarginKind::Empirical);
        assert!("weibull".parse::<MarginKind>().is_err());
    }
}
