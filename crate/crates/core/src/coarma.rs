//! The CoARMA(p,q) process: a latent copula-AR(p) series W driving a
//! q-dependent output U through a shared innovation sequence.
//!
//! W_t = ar_cond_quantile(eps_t | W_{t-1}, ..., W_{t-p})
//! U_t = mag_forward(eps_t | eps_{t-1}, ..., eps_{t-q+1}, W_{t-q})
//!
//! For q = 0 the output is the latent series itself.

use std::collections::VecDeque;
use std::fmt;

use crate::copula::clamp_unit;
use crate::error::{CoarmaError, Result};
use crate::margins::{unit_scale, MarginModel};
use crate::rng;
use crate::vine::{VineKind, VineSpec};

/// Densities below this value are replaced by it in likelihood sums.
pub const DENSITY_FLOOR: f64 = 1e-10;
pub const DEFAULT_BURN_IN: usize = 500;
pub const N_LEVELS: usize = 99;

#[derive(Debug, Clone, PartialEq)]
pub struct CoarmaSpec {
    ar: VineSpec,
    mag: VineSpec,
}

impl CoarmaSpec {
    pub fn new(ar: VineSpec, mag: VineSpec) -> Result<Self> {
        if ar.kind() != VineKind::StationaryDVine || mag.kind() != VineKind::MagDVine {
            return Err(CoarmaError::domain("expected a stationary vine and a MAG vine"));
        }
        Ok(Self { ar, mag })
    }

    pub fn from_pairs(ar: Vec<crate::CopulaSpec>, mag: Vec<crate::CopulaSpec>) -> Self {
        Self { ar: VineSpec::stationary(ar), mag: VineSpec::mag(mag) }
    }

    pub fn p(&self) -> usize {
        self.ar.order()
    }

    pub fn q(&self) -> usize {
        self.mag.order()
    }

    /// Number of leading observations treated as placeholders by the filter.
    pub fn r(&self) -> usize {
        self.p().max(self.q())
    }

    pub fn ar(&self) -> &VineSpec {
        &self.ar
    }

    pub fn mag(&self) -> &VineSpec {
        &self.mag
    }
}

impl fmt::Display for CoarmaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoARMA({},{}) {} {}", self.p(), self.q(), self.ar, self.mag)
    }
}

/// Recursion state: recent latent values and recovered innovations, most recent first.
#[derive(Debug, Clone)]
pub struct FilterState<'a> {
    spec: &'a CoarmaSpec,
    w_hist: VecDeque<f64>,
    eps_hist: VecDeque<f64>,
    t: usize,
    cond: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub eps: f64,
    pub w: f64,
    /// Conditional copula density of the observation, if requested.
    pub density: Option<f64>,
}

impl<'a> FilterState<'a> {
    /// Fresh state with every latent value and innovation set to 0.5.
    pub fn new(spec: &'a CoarmaSpec) -> Self {
        let r = spec.r();
        let q = spec.q();
        Self {
            spec,
            w_hist: std::iter::repeat_n(0.5, r).collect(),
            eps_hist: std::iter::repeat_n(0.5, q.saturating_sub(1)).collect(),
            t: 0,
            cond: Vec::with_capacity(q),
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn w_hist(&self) -> &VecDeque<f64> {
        &self.w_hist
    }

    pub fn eps_hist(&self) -> &VecDeque<f64> {
        &self.eps_hist
    }

    fn ar_hist(&self) -> Vec<f64> {
        self.w_hist.iter().take(self.spec.p()).copied().collect()
    }

    fn mag_cond(&mut self) -> &[f64] {
        let q = self.spec.q();
        self.cond.clear();
        self.cond.extend(self.eps_hist.iter().copied());
        self.cond.push(self.w_hist[q - 1]);
        &self.cond
    }

    fn wrap(&self, e: CoarmaError) -> CoarmaError {
        match e {
            CoarmaError::Unsupported(_) | CoarmaError::Numeric { .. } => e,
            other => CoarmaError::Numeric { t: self.t, detail: other.to_string() },
        }
    }

    fn push(&mut self, eps: f64, w: f64) {
        if !self.w_hist.is_empty() {
            self.w_hist.pop_back();
            self.w_hist.push_front(w);
        }
        if !self.eps_hist.is_empty() {
            self.eps_hist.pop_back();
            self.eps_hist.push_front(eps);
        }
        self.t += 1;
    }

    /// Advances with a placeholder step: innovation and latent value 0.5, or
    /// the observation itself as latent value when q = 0.
    pub fn skip(&mut self, u: f64) {
        let w = if self.spec.q() == 0 { clamp_unit(u) } else { 0.5 };
        self.push(0.5, w);
    }

    /// Latent value implied by innovation `eps` and the current latent history.
    fn latent(&self, eps: f64) -> Result<f64> {
        if self.spec.p() == 0 {
            return Ok(eps);
        }
        self.spec.ar.ar_cond_quantile(eps, &self.ar_hist())
    }

    /// Conditional CDF of the next observation; its value at the realized
    /// observation is the recovered innovation (the PIT).
    pub fn predictive_cdf(&mut self, u: f64) -> Result<f64> {
        let u = clamp_unit(u);
        let out = if self.spec.q() == 0 {
            if self.spec.p() == 0 {
                Ok(u)
            } else {
                self.spec.ar.ar_cond_cdf(u, &self.ar_hist())
            }
        } else {
            let spec: &'a CoarmaSpec = self.spec;
            spec.mag.mag_backward(u, self.mag_cond())
        };
        out.map_err(|e| self.wrap(e))
    }

    /// Conditional quantile of the next observation.
    pub fn predictive_quantile(&mut self, level: f64) -> Result<f64> {
        let out = if self.spec.q() == 0 {
            self.latent(level)
        } else {
            let spec: &'a CoarmaSpec = self.spec;
            spec.mag.mag_forward(level, self.mag_cond())
        };
        out.map_err(|e| self.wrap(e))
    }

    /// Conditional copula density of the next observation.
    pub fn predictive_density(&mut self, u: f64) -> Result<f64> {
        let u = clamp_unit(u);
        let out = if self.spec.q() == 0 {
            if self.spec.p() == 0 {
                Ok(1.0)
            } else {
                self.spec.ar.ar_cond_density(u, &self.ar_hist())
            }
        } else {
            let spec: &'a CoarmaSpec = self.spec;
            spec.mag.mag_backward_density(u, self.mag_cond()).map(|x| x.1)
        };
        out.map_err(|e| self.wrap(e))
    }

    /// Filters one observation: recovers the innovation, updates the latent
    /// state, optionally evaluates the conditional density.
    pub fn step(&mut self, u: f64, with_density: bool) -> Result<Step> {
        let u = clamp_unit(u);
        let (eps, density) = if !with_density {
            (self.predictive_cdf(u)?, None)
        } else if self.spec.q() == 0 {
            let d = self.predictive_density(u)?;
            (self.predictive_cdf(u)?, Some(d))
        } else {
            let spec: &'a CoarmaSpec = self.spec;
            let (e, d) = spec.mag.mag_backward_density(u, self.mag_cond()).map_err(|e| self.wrap(e))?;
            (e, Some(d))
        };
        let w = if self.spec.q() == 0 { u } else { self.latent(eps).map_err(|e| self.wrap(e))? };
        self.push(eps, w);
        Ok(Step { eps, w, density })
    }

    /// Advances with a known innovation (simulation direction); returns the output.
    pub fn advance(&mut self, eps: f64) -> Result<f64> {
        let w = self.latent(eps).map_err(|e| self.wrap(e))?;
        let u = if self.spec.q() == 0 {
            w
        } else {
            let spec: &'a CoarmaSpec = self.spec;
            spec.mag.mag_forward(eps, self.mag_cond()).map_err(|e| self.wrap(e))?
        };
        self.push(eps, w);
        Ok(u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    pub u: Vec<f64>,
    pub eps: Vec<f64>,
    pub w: Vec<f64>,
}

/// Simulates `n` observations after `burn_in` warm-up steps started from 0.5 states.
pub fn simulate_path(spec: &CoarmaSpec, n: usize, seed: u64, burn_in: usize) -> Result<SimPath> {
    if n == 0 {
        return Err(CoarmaError::domain("n must be at least 1"));
    }
    let mut r = rng::stream(seed, 0);
    let mut st = FilterState::new(spec);
    let mut path = SimPath { u: Vec::with_capacity(n), eps: Vec::with_capacity(n), w: Vec::with_capacity(n) };
    for i in 0..burn_in + n {
        let e = rng::open_unit(&mut r);
        let u = st.advance(e)?;
        if i >= burn_in {
            path.u.push(u);
            path.eps.push(e);
            path.w.push(st.w_hist.front().copied().unwrap_or(e));
        }
    }
    Ok(path)
}

pub fn simulate(spec: &CoarmaSpec, n: usize, seed: u64, burn_in: usize) -> Result<Vec<f64>> {
    Ok(simulate_path(spec, n, seed, burn_in)?.u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub eps: Vec<f64>,
    pub w: Vec<f64>,
}

/// Recovers innovations and latent states. The first max(p,q) entries are placeholders.
pub fn filter(spec: &CoarmaSpec, u: &[f64]) -> Result<Filtered> {
    let r = spec.r();
    let mut st = FilterState::new(spec);
    let mut out = Filtered { eps: Vec::with_capacity(u.len()), w: Vec::with_capacity(u.len()) };
    for (t, &x) in u.iter().enumerate() {
        if t < r {
            st.skip(x);
            out.eps.push(0.5);
            out.w.push(if spec.q() == 0 { clamp_unit(x) } else { 0.5 });
        } else {
            let s = st.step(x, false)?;
            out.eps.push(s.eps);
            out.w.push(s.w);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NllReport {
    pub nll: f64,
    /// Number of densities replaced by the floor.
    pub floored: usize,
    pub n_terms: usize,
}

/// Per-observation -log density; zero for the first max(p,q) placeholder steps.
pub fn nll_terms(spec: &CoarmaSpec, u: &[f64]) -> Result<(Vec<f64>, usize)> {
    let r = spec.r();
    if u.len() <= r {
        return Err(CoarmaError::domain(format!("need more than {r} observations, got {}", u.len())));
    }
    let mut st = FilterState::new(spec);
    let mut terms = Vec::with_capacity(u.len());
    let mut floored = 0;
    for (t, &x) in u.iter().enumerate() {
        if t < r {
            st.skip(x);
            terms.push(0.0);
            continue;
        }
        let d = st.step(x, true)?.density.unwrap_or(1.0);
        let d = if d.is_finite() && d >= DENSITY_FLOOR {
            d
        } else {
            floored += 1;
            DENSITY_FLOOR
        };
        terms.push(-d.ln());
    }
    Ok((terms, floored))
}

pub fn neg_log_likelihood(spec: &CoarmaSpec, u: &[f64]) -> Result<NllReport> {
    let (terms, floored) = nll_terms(spec, u)?;
    Ok(NllReport { nll: terms.iter().sum(), floored, n_terms: u.len() - spec.r() })
}

/// One-step-ahead percentile forecasts for each new observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastGrid {
    /// Rows of 99 values on the original scale, levels m/100.
    pub rows: Vec<[f64; N_LEVELS]>,
    /// Probability integral transform of each realized new value under its forecast.
    pub pit: Vec<f64>,
    /// Unit-scale value of each realized new observation.
    pub unit: Vec<f64>,
    /// New observations whose margin CDF had to be clamped.
    pub clamped: usize,
}

pub fn levels() -> [f64; N_LEVELS] {
    std::array::from_fn(|m| (m + 1) as f64 / 100.0)
}

impl ForecastGrid {
    pub fn mean(&self, t: usize) -> f64 {
        self.rows[t].iter().sum::<f64>() / N_LEVELS as f64
    }

    pub fn median(&self, t: usize) -> f64 {
        self.rows[t][49]
    }
}

/// Filters `old` on the pseudo-observation scale, then walks through `new`
/// (mapped by the margin CDF), forecasting each value before observing it.
pub fn forecast_percentiles(
    spec: &CoarmaSpec,
    margin: &MarginModel,
    old: &[f64],
    new: &[f64],
) -> Result<ForecastGrid> {
    let r = spec.r();
    let mut st = FilterState::new(spec);
    for (t, &x) in unit_scale(margin.kind(), old)?.iter().enumerate() {
        if t < r {
            st.skip(x);
        } else {
            st.step(x, false)?;
        }
    }
    let lv = levels();
    let mut grid = ForecastGrid { rows: Vec::with_capacity(new.len()), pit: Vec::new(), unit: Vec::new(), clamped: 0 };
    for &y in new {
        let mut row = [0.0; N_LEVELS];
        let mut prev = f64::NEG_INFINITY;
        for (slot, &a) in row.iter_mut().zip(&lv) {
            let uq = clamp_unit(st.predictive_quantile(a)?);
            let v = margin.quantile(uq)?.max(prev);
            *slot = v;
            prev = v;
        }
        let (x, clamped) = margin.cdf_checked(y);
        grid.clamped += clamped as usize;
        grid.rows.push(row);
        grid.unit.push(x);
        if st.t() < r {
            st.skip(x);
            grid.pit.push(x);
        } else {
            grid.pit.push(st.step(x, false)?.eps);
        }
    }
    Ok(grid)
}
