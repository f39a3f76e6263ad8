//! Stationary D-vines (latent AR part) and MAG D-vines (moving-aggregate part).
//!
//! Histories are passed most-recent-first. For a stationary vine of order p,
//! `pairs[j-1]` couples values j steps apart. For a MAG vine of order q the
//! conditioning vector is `(eps_{t-1}, ..., eps_{t-q+1}, W_{t-q})` and
//! `pairs[j-1]` couples the output with its j-th entry.

use std::fmt;
use std::str::FromStr;

use crate::copula::CopulaSpec;
use crate::error::{CoarmaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VineKind {
    StationaryDVine,
    MagDVine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VineSpec {
    kind: VineKind,
    pairs: Vec<CopulaSpec>,
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(CoarmaError::Shape { expected, got });
    }
    Ok(())
}

impl VineSpec {
    pub fn new(kind: VineKind, pairs: Vec<CopulaSpec>) -> Self {
        Self { kind, pairs }
    }

    pub fn stationary(pairs: Vec<CopulaSpec>) -> Self {
        Self::new(VineKind::StationaryDVine, pairs)
    }

    pub fn mag(pairs: Vec<CopulaSpec>) -> Self {
        Self::new(VineKind::MagDVine, pairs)
    }

    pub fn kind(&self) -> VineKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[CopulaSpec] {
        &self.pairs
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.pairs.iter().all(|c| c.is_absolutely_continuous())
    }

    fn require(&self, kind: VineKind) -> Result<()> {
        if self.kind != kind {
            return Err(CoarmaError::Unsupported(format!(
                "operation needs a {kind:?}, got a {:?}",
                self.kind
            )));
        }
        Ok(())
    }

    /// b_{k-1}(1) for k = 1..=p: the conditional CDF of history[k-1] given the
    /// more recent history values. These are the conditioning arguments of the
    /// top-down recursion for the new value.
    fn history_terms(&self, hist: &[f64]) -> Vec<f64> {
        let p = hist.len();
        let mut out = Vec::with_capacity(p);
        if p == 0 {
            return out;
        }
        let mut a: Vec<f64> = hist.to_vec();
        let mut b: Vec<f64> = hist.to_vec();
        out.push(b[0]);
        for k in 1..p {
            let c = &self.pairs[k - 1];
            let m = p - k;
            let mut na = Vec::with_capacity(m);
            let mut nb = Vec::with_capacity(m);
            for i in 0..m {
                na.push(c.h(a[i], b[i + 1]));
                nb.push(c.h(b[i + 1], a[i]));
            }
            a = na;
            b = nb;
            out.push(b[0]);
        }
        out
    }

    /// Conditional CDF of the current value given `hist` (most recent first).
    pub fn ar_cond_cdf(&self, x: f64, hist: &[f64]) -> Result<f64> {
        self.require(VineKind::StationaryDVine)?;
        check_len(self.order(), hist.len())?;
        let terms = self.history_terms(hist);
        let mut a = x;
        for (c, &t) in self.pairs.iter().zip(&terms) {
            a = c.h(a, t);
        }
        Ok(a)
    }

    /// Conditional quantile of the current value given `hist`.
    pub fn ar_cond_quantile(&self, e: f64, hist: &[f64]) -> Result<f64> {
        self.require(VineKind::StationaryDVine)?;
        check_len(self.order(), hist.len())?;
        let terms = self.history_terms(hist);
        let mut a = e;
        for (c, &t) in self.pairs.iter().zip(&terms).rev() {
            a = c.hinv(a, t)?;
        }
        Ok(a)
    }

    /// Conditional density of the current value given `hist`.
    pub fn ar_cond_density(&self, x: f64, hist: &[f64]) -> Result<f64> {
        self.require(VineKind::StationaryDVine)?;
        check_len(self.order(), hist.len())?;
        let terms = self.history_terms(hist);
        let mut a = x;
        let mut d = 1.0;
        for (c, &t) in self.pairs.iter().zip(&terms) {
            d *= c.pdf(a, t)?;
            a = c.h(a, t);
        }
        Ok(d)
    }

    /// Output value from innovation `e` and conditioning vector `cond`.
    pub fn mag_forward(&self, e: f64, cond: &[f64]) -> Result<f64> {
        self.require(VineKind::MagDVine)?;
        check_len(self.order(), cond.len())?;
        let mut x = e;
        for (c, &z) in self.pairs.iter().zip(cond).rev() {
            x = c.hinv(x, z)?;
        }
        Ok(x)
    }

    /// Innovation recovered from output `u` and conditioning vector `cond`.
    pub fn mag_backward(&self, u: f64, cond: &[f64]) -> Result<f64> {
        self.require(VineKind::MagDVine)?;
        check_len(self.order(), cond.len())?;
        let mut x = u;
        for (c, &z) in self.pairs.iter().zip(cond) {
            x = c.h(x, z);
        }
        Ok(x)
    }

    /// Innovation and conditional density of `u` in one pass.
    pub fn mag_backward_density(&self, u: f64, cond: &[f64]) -> Result<(f64, f64)> {
        self.require(VineKind::MagDVine)?;
        check_len(self.order(), cond.len())?;
        let mut x = u;
        let mut d = 1.0;
        for (c, &z) in self.pairs.iter().zip(cond) {
            d *= c.pdf(x, z)?;
            x = c.h(x, z);
        }
        Ok((x, d))
    }

    /// Joint vine copula density. `point` is ordered oldest first; for a MAG vine
    /// that is `(W_{t-q}, eps_{t-q+1}, ..., eps_{t-1}, x_t)`.
    pub fn density(&self, point: &[f64]) -> Result<f64> {
        check_len(self.order() + 1, point.len())?;
        if !self.is_absolutely_continuous() {
            return Err(CoarmaError::Unsupported("vine contains a singular pair copula".into()));
        }
        let n = point.len();
        let x = point[n - 1];
        let recent_first: Vec<f64> = point[..n - 1].iter().rev().copied().collect();
        match self.kind {
            VineKind::MagDVine => Ok(self.mag_backward_density(x, &recent_first)?.1),
            VineKind::StationaryDVine => {
                // Telescoping product of conditional densities along the sequence.
                let mut d = 1.0;
                for j in 1..n {
                    let sub = self.truncated(j);
                    let hist: Vec<f64> = point[..j].iter().rev().copied().collect();
                    d *= sub.ar_cond_density(point[j], &hist)?;
                }
                Ok(d)
            }
        }
    }

    fn truncated(&self, order: usize) -> VineSpec {
        VineSpec { kind: self.kind, pairs: self.pairs[..order].to_vec() }
    }

    /// Rosenblatt transform of a point ordered oldest first.
    pub fn rosenblatt(&self, point: &[f64]) -> Result<Vec<f64>> {
        check_len(self.order() + 1, point.len())?;
        let n = point.len();
        match self.kind {
            VineKind::MagDVine => {
                let mut out = point.to_vec();
                let cond: Vec<f64> = point[..n - 1].iter().rev().copied().collect();
                out[n - 1] = self.mag_backward(point[n - 1], &cond)?;
                Ok(out)
            }
            VineKind::StationaryDVine => {
                let mut out = Vec::with_capacity(n);
                out.push(point[0]);
                for j in 1..n {
                    let hist: Vec<f64> = point[..j].iter().rev().copied().collect();
                    out.push(self.truncated(j).ar_cond_cdf(point[j], &hist)?);
                }
                Ok(out)
            }
        }
    }

    /// Inverse Rosenblatt transform; maps independent uniforms to a draw from the vine.
    pub fn inverse_rosenblatt(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_len(self.order() + 1, w.len())?;
        let n = w.len();
        match self.kind {
            VineKind::MagDVine => {
                let mut out = w.to_vec();
                let cond: Vec<f64> = w[..n - 1].iter().rev().copied().collect();
                out[n - 1] = self.mag_forward(w[n - 1], &cond)?;
                Ok(out)
            }
            VineKind::StationaryDVine => {
                let mut out: Vec<f64> = Vec::with_capacity(n);
                out.push(w[0]);
                for j in 1..n {
                    let hist: Vec<f64> = out.iter().rev().copied().collect();
                    let x = self.truncated(j).ar_cond_quantile(w[j], &hist)?;
                    out.push(x);
                }
                Ok(out)
            }
        }
    }

    /// Latent AR update through the placeholder Rosenblatt route: transform the
    /// history with a 0.5 placeholder, swap in `e`, and invert.
    pub fn placeholder_ar_quantile(&self, e: f64, hist: &[f64]) -> Result<f64> {
        self.require(VineKind::StationaryDVine)?;
        check_len(self.order(), hist.len())?;
        let mut point: Vec<f64> = hist.iter().rev().copied().collect();
        point.push(0.5);
        let mut w = self.rosenblatt(&point)?;
        let last = w.len() - 1;
        w[last] = e;
        Ok(self.inverse_rosenblatt(&w)?[last])
    }

    /// Innovation recovery through the placeholder route of the likelihood
    /// recursion: inverse-transform the conditioning values with a 0.5
    /// placeholder, substitute the observation and transform forward.
    pub fn placeholder_mag_residual(&self, u: f64, cond: &[f64]) -> Result<f64> {
        self.require(VineKind::MagDVine)?;
        check_len(self.order(), cond.len())?;
        let mut w: Vec<f64> = cond.iter().rev().copied().collect();
        w.push(0.5);
        let mut point = self.inverse_rosenblatt(&w)?;
        let last = point.len() - 1;
        point[last] = u;
        Ok(self.rosenblatt(&point)?[last])
    }
}

impl fmt::Display for VineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            VineKind::StationaryDVine => "ar",
            VineKind::MagDVine => "mag",
        };
        write!(f, "{prefix}:(")?;
        for (i, c) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Splits a comma-joined list of pair tokens, attaching tokens that do not
/// start with a letter to the previous pair's parameter list.
pub fn split_pair_tokens(s: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let starts_alpha = tok.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        match out.last_mut() {
            Some(prev) if !starts_alpha => {
                prev.push(',');
                prev.push_str(tok);
            }
            _ => out.push(tok.to_string()),
        }
    }
    out
}

impl FromStr for VineSpec {
    type Err = CoarmaError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (prefix, body) = s
            .split_once(':')
            .ok_or_else(|| CoarmaError::Parse { pos: 0, msg: "expected 'ar:(...)' or 'mag:(...)'".into() })?;
        let kind = match prefix.trim() {
            "ar" => VineKind::StationaryDVine,
            "mag" | "ma" => VineKind::MagDVine,
            other => return Err(CoarmaError::Parse { pos: 0, msg: format!("unknown vine kind '{other}'") }),
        };
        let body = body.trim();
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| CoarmaError::Parse { pos: prefix.len() + 1, msg: "pair list must be parenthesized".into() })?;
        let pairs = split_pair_tokens(inner)
            .iter()
            .map(|t| t.parse::<CopulaSpec>())
            .collect::<Result<Vec<_>>>()?;
        Ok(VineSpec::new(kind, pairs))
    }
}
