//! Copulas that make the latent-AR / MAG process reproduce Gaussian ARCH(1)
//! and GARCH(1,1) dynamics.
//!
//! The stationary marginals are not available in closed form, so both
//! Psi (the return marginal) and Gamma (the marginal of the auxiliary
//! volatility process `X_t = sqrt((a0 + X_{t-1}^2)(a1 eta^2 + b1))`) are
//! tabulated from long simulations.

use crate::error::{CoarmaError, Result};
use crate::quadrature::{integrate_adaptive, GaussLegendre};
use crate::rng::{open_unit, std_normal, stream};
use crate::special::{norm_cdf, norm_ppf};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
pub const DEFAULT_NSIM: usize = 1_000_000;
pub const GRID_POINTS: usize = 4096;
pub const TAIL_PROB: f64 = 0.001;
const BURN_IN: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchParams {
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl GarchParams {
    pub fn new(alpha0: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        if !(alpha0 > 0.0 && alpha0.is_finite()) {
            return Err(CoarmaError::domain(format!("alpha0 must be positive, got {alpha0}")));
        }
        if !(alpha1 >= 0.0 && alpha1.is_finite() && beta1 >= 0.0 && beta1.is_finite()) {
            return Err(CoarmaError::domain("alpha1 and beta1 must be nonnegative"));
        }
        Ok(Self { alpha0, alpha1, beta1 })
    }

    pub fn arch(alpha0: f64, alpha1: f64) -> Result<Self> {
        Self::new(alpha0, alpha1, 0.0)
    }

    pub fn is_arch(&self) -> bool {
        self.beta1 == 0.0
    }

    /// E[log(alpha1 eta^2 + beta1)] for standard normal eta.
    pub fn log_moment(&self) -> f64 {
        let (a, b) = (self.alpha1, self.beta1);
        if a == 0.0 {
            return b.ln();
        }
        if b == 0.0 {
            return a.ln() - EULER_GAMMA - std::f64::consts::LN_2;
        }
        let knee = (b / a).sqrt();
        let f = |x: f64| (a * x * x + b).ln() * crate::special::norm_pdf(x);
        let hi = 12.0f64.max(2.0 * knee);
        let mid = knee.min(hi);
        2.0 * (integrate_adaptive(0.0, mid, 1e-13, f) + integrate_adaptive(mid, hi, 1e-13, f))
    }

    /// Strict stationarity of the volatility recursion.
    pub fn is_stationary(&self) -> bool {
        self.log_moment() < 0.0
    }

    /// Requirement for tabulating Psi: second-order stationarity in ARCH
    /// mode, the log-moment condition otherwise.
    pub fn check_tabulable(&self) -> Result<()> {
        if self.is_arch() {
            if self.alpha1 >= 1.0 {
                return Err(CoarmaError::domain(format!(
                    "ARCH(1) needs alpha1 < 1 for a finite-variance marginal, got {}",
                    self.alpha1
                )));
            }
        } else if !self.is_stationary() {
            return Err(CoarmaError::domain(format!(
                "E[log(alpha1 eta^2 + beta1)] = {:.4} >= 0: not stationary",
                self.log_moment()
            )));
        }
        Ok(())
    }

    /// Stationary variance when it exists.
    pub fn variance(&self) -> Option<f64> {
        let s = self.alpha1 + self.beta1;
        (s < 1.0).then(|| self.alpha0 / (1.0 - s))
    }

    fn initial_sigma2(&self) -> f64 {
        self.variance().unwrap_or(self.alpha0)
    }
}

/// Generalized Pareto tail beyond a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdTail {
    pub threshold: f64,
    pub prob: f64,
    pub xi: f64,
    pub sigma: f64,
}

impl GpdTail {
    /// Probability-weighted-moment fit to positive exceedances.
    fn fit(threshold: f64, prob: f64, excess: &mut [f64]) -> Self {
        excess.sort_by(f64::total_cmp);
        let n = excess.len() as f64;
        let a0 = excess.iter().sum::<f64>() / n;
        let a1 = excess
            .iter()
            .enumerate()
            .map(|(i, y)| (1.0 - (i as f64 + 0.65) / n) * y)
            .sum::<f64>()
            / n;
        let d = a0 - 2.0 * a1;
        let (xi, sigma) = if d > 0.0 && a0 > 0.0 {
            ((a0 / d - 2.0).clamp(-0.9, 0.9), 2.0 * a0 * a1 / d)
        } else {
            (0.0, a0.max(f64::MIN_POSITIVE))
        };
        Self { threshold, prob, xi, sigma }
    }

    fn survival(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 1.0;
        }
        let z = self.xi * y / self.sigma;
        if self.xi.abs() < 1e-12 {
            (-y / self.sigma).exp()
        } else if 1.0 + z <= 0.0 {
            0.0
        } else {
            (1.0 + z).powf(-1.0 / self.xi)
        }
    }

    fn inverse_survival(&self, s: f64) -> f64 {
        if self.xi.abs() < 1e-12 {
            -self.sigma * s.ln()
        } else {
            self.sigma / self.xi * (s.powf(-self.xi) - 1.0)
        }
    }
}

/// Monotone piecewise-linear CDF on a quantile grid with GPD tails.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    grid: Vec<f64>,
    values: Vec<f64>,
    lower: GpdTail,
    upper: GpdTail,
    lower_bound: Option<f64>,
}

impl TabulatedCdf {
    /// Tabulate from samples. `lower_bound` truncates the left tail at a known
    /// support endpoint.
    pub fn from_samples(mut samples: Vec<f64>, lower_bound: Option<f64>) -> Result<Self> {
        if samples.len() < 10 * GRID_POINTS {
            return Err(CoarmaError::domain(format!(
                "need at least {} samples, got {}",
                10 * GRID_POINTS,
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(CoarmaError::domain("non-finite sample"));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let emp = |p: f64| {
            let pos = (p * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
            let i = pos.floor() as usize;
            let j = (i + 1).min(n - 1);
            samples[i] + (pos - i as f64) * (samples[j] - samples[i])
        };
        let (p_lo, p_hi) = (TAIL_PROB, 1.0 - TAIL_PROB);
        let values: Vec<f64> = (0..GRID_POINTS)
            .map(|k| p_lo + (p_hi - p_lo) * k as f64 / (GRID_POINTS - 1) as f64)
            .collect();
        let mut grid: Vec<f64> = values.iter().map(|&p| emp(p)).collect();
        for k in 1..grid.len() {
            if grid[k] <= grid[k - 1] {
                grid[k] = grid[k - 1] + f64::EPSILON * grid[k - 1].abs().max(1.0);
            }
        }
        let (x_lo, x_hi) = (grid[0], grid[GRID_POINTS - 1]);
        let mut up: Vec<f64> = samples.iter().rev().take_while(|&&x| x > x_hi).map(|x| x - x_hi).collect();
        let mut down: Vec<f64> = samples.iter().take_while(|&&x| x < x_lo).map(|x| x_lo - x).collect();
        if up.is_empty() || down.is_empty() {
            return Err(CoarmaError::domain("degenerate sample tails"));
        }
        let upper = GpdTail::fit(x_hi, 1.0 - p_hi, &mut up);
        let mut lower = GpdTail::fit(x_lo, p_lo, &mut down);
        if let Some(b) = lower_bound {
            if b >= x_lo {
                return Err(CoarmaError::domain("lower bound above the tabulated range"));
            }
            let max_excess = x_lo - b;
            if lower.xi >= 0.0 || -lower.sigma / lower.xi > max_excess {
                lower.xi = lower.xi.min(-1e-6);
                lower.sigma = lower.sigma.min(-lower.xi * max_excess);
            }
        }
        Ok(Self { grid, values, lower, upper, lower_bound })
    }

    /// Tabulate the symmetrized sample {x} ∪ {-x}.
    pub fn symmetric_from_samples(samples: &[f64]) -> Result<Self> {
        let mut all = Vec::with_capacity(2 * samples.len());
        all.extend_from_slice(samples);
        all.extend(samples.iter().map(|x| -x));
        Self::from_samples(all, None)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tails(&self) -> (GpdTail, GpdTail) {
        (self.lower, self.upper)
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x.is_nan() {
            return f64::NAN;
        }
        if x < g[0] {
            return self.lower.prob * self.lower.survival(g[0] - x);
        }
        if x > g[g.len() - 1] {
            return 1.0 - self.upper.prob * self.upper.survival(x - g[g.len() - 1]);
        }
        let k = g.partition_point(|&v| v <= x).clamp(1, g.len() - 1);
        let (x0, x1) = (g[k - 1], g[k]);
        let (p0, p1) = (self.values[k - 1], self.values[k]);
        p0 + (p1 - p0) * ((x - x0) / (x1 - x0)).clamp(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let (g, v) = (&self.grid, &self.values);
        if p <= 0.0 {
            return self.lower_bound.unwrap_or(f64::NEG_INFINITY);
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p < v[0] {
            let x = g[0] - self.lower.inverse_survival(p / self.lower.prob);
            return self.lower_bound.map_or(x, |b| x.max(b));
        }
        if p > v[v.len() - 1] {
            return g[g.len() - 1] + self.upper.inverse_survival((1.0 - p) / self.upper.prob);
        }
        let k = v.partition_point(|&q| q <= p).clamp(1, v.len() - 1);
        let (p0, p1) = (v[k - 1], v[k]);
        g[k - 1] + (g[k] - g[k - 1]) * ((p - p0) / (p1 - p0)).clamp(0.0, 1.0)
    }

    /// Largest spacing of the interior grid.
    pub fn max_step(&self) -> f64 {
        self.grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct GarchPath {
    pub y: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Direct Gaussian GARCH(1,1) simulation (ARCH(1) when beta1 = 0).
pub fn simulate_garch(params: &GarchParams, n: usize, seed: u64, burn_in: usize) -> GarchPath {
    let mut rng = stream(seed, 0);
    let mut s2 = params.initial_sigma2();
    let mut y_prev = 0.0;
    let mut path = GarchPath { y: Vec::with_capacity(n), sigma2: Vec::with_capacity(n), eta: Vec::with_capacity(n) };
    for t in 0..n + burn_in {
        s2 = params.alpha0 + params.alpha1 * y_prev * y_prev + params.beta1 * s2;
        let eta = std_normal(&mut rng);
        y_prev = s2.sqrt() * eta;
        if t >= burn_in {
            path.y.push(y_prev);
            path.sigma2.push(s2);
            path.eta.push(eta);
        }
    }
    path
}

/// The auxiliary process X_t = sqrt((a0 + X_{t-1}^2)(a1 eta_t^2 + b1)).
pub fn simulate_modified_arch(params: &GarchParams, n: usize, seed: u64, burn_in: usize) -> Vec<f64> {
    let mut rng = stream(seed, 0);
    let mut x2 = params.initial_sigma2() - params.alpha0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + burn_in {
        let eta = std_normal(&mut rng);
        x2 = (params.alpha0 + x2) * (params.alpha1 * eta * eta + params.beta1);
        if t >= burn_in {
            out.push(x2.sqrt());
        }
    }
    out
}

/// X_t = sqrt(alpha1 Y_t^2 + beta1 sigma_t^2) read off a direct GARCH path.
pub fn latent_from_path(params: &GarchParams, path: &GarchPath) -> Vec<f64> {
    path.y
        .iter()
        .zip(&path.sigma2)
        .map(|(y, s2)| (params.alpha1 * y * y + params.beta1 * s2).sqrt())
        .collect()
}

/// Stationary marginal CDF of the (G)ARCH returns, symmetrized.
pub fn build_psi(params: &GarchParams, n_sim: usize, seed: u64) -> Result<TabulatedCdf> {
    params.check_tabulable()?;
    let path = simulate_garch(params, n_sim, seed, BURN_IN);
    TabulatedCdf::symmetric_from_samples(&path.y)
}

/// Stationary marginal CDF of the auxiliary volatility process.
pub fn build_gamma(params: &GarchParams, n_sim: usize, seed: u64) -> Result<TabulatedCdf> {
    params.check_tabulable()?;
    if params.alpha1 == 0.0 {
        return Err(CoarmaError::domain("Gamma is degenerate when alpha1 = 0"));
    }
    let xs = simulate_modified_arch(params, n_sim, seed, BURN_IN);
    let bound = (params.alpha0 * params.beta1).sqrt();
    TabulatedCdf::from_samples(xs, Some(bound))
}

/// Replacement rule for Psi, e.g. re-tabulating from filtered data.
pub trait PsiUpdate {
    fn update(&self, params: &GarchParams, current: &TabulatedCdf) -> Result<TabulatedCdf>;
}

/// Re-tabulates Psi from an observed return series.
#[derive(Debug, Clone)]
pub struct EmpiricalPsi {
    pub data: Vec<f64>,
}

impl PsiUpdate for EmpiricalPsi {
    fn update(&self, _params: &GarchParams, _current: &TabulatedCdf) -> Result<TabulatedCdf> {
        TabulatedCdf::symmetric_from_samples(&self.data)
    }
}

/// Re-simulates Psi with a different size or seed.
#[derive(Debug, Clone, Copy)]
pub struct ResimulatedPsi {
    pub n_sim: usize,
    pub seed: u64,
}

impl PsiUpdate for ResimulatedPsi {
    fn update(&self, params: &GarchParams, _current: &TabulatedCdf) -> Result<TabulatedCdf> {
        build_psi(params, self.n_sim, self.seed)
    }
}

fn interior(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(CoarmaError::domain(format!("argument {u} outside (0,1)")))
    }
}

fn clamp_open(u: f64) -> f64 {
    u.clamp(1e-15, 1.0 - 1e-15)
}

/// The ARCH(1) pair copula.
#[derive(Debug, Clone)]
pub struct ArchCopula {
    pub params: GarchParams,
    pub psi: TabulatedCdf,
}

impl ArchCopula {
    pub fn new(params: GarchParams, psi: TabulatedCdf) -> Result<Self> {
        if !params.is_arch() {
            return Err(CoarmaError::domain("ARCH copula requires beta1 = 0"));
        }
        Ok(Self { params, psi })
    }

    fn scale(&self, v: f64) -> f64 {
        let y = self.psi.quantile(v);
        (self.params.alpha0 + self.params.alpha1 * y * y).sqrt()
    }

    /// C_{2|1}(u|v).
    pub fn ccdf(&self, u: f64, v: f64) -> Result<f64> {
        interior(u)?;
        interior(v)?;
        Ok(norm_cdf(self.psi.quantile(u) / self.scale(v)))
    }

    /// Inverse of `ccdf` in u.
    pub fn quantile(&self, e: f64, v: f64) -> Result<f64> {
        interior(e)?;
        interior(v)?;
        Ok(clamp_open(self.psi.cdf(self.scale(v) * norm_ppf(e))))
    }

    /// C(u1, u2) = ∫_0^{u2} C_{2|1}(u1|v) dv.
    pub fn cdf(&self, u1: f64, u2: f64) -> Result<f64> {
        if u1 <= 0.0 || u2 <= 0.0 {
            return Ok(0.0);
        }
        let (u1, u2) = (u1.min(1.0), u2.min(1.0));
        if u1 >= 1.0 {
            return Ok(u2);
        }
        let x = self.psi.quantile(u1);
        let gl = GaussLegendre::cached(64);
        let breaks: Vec<f64> = [0.01, 0.1, 0.5, 0.9, 0.99].iter().map(|b| b * u2).collect();
        Ok(gl.integrate_split(0.0, u2, &breaks, |v| norm_cdf(x / self.scale(v))))
    }

    /// Latent AR(1) path W_t = C^{-1}(eps_t | W_{t-1}).
    pub fn simulate(&self, n: usize, seed: u64, burn_in: usize) -> Result<Vec<f64>> {
        let mut rng = stream(seed, 0);
        let mut w = 0.5;
        let mut out = Vec::with_capacity(n);
        for t in 0..n + burn_in {
            w = self.quantile(open_unit(&mut rng), w)?;
            if t >= burn_in {
                out.push(w);
            }
        }
        Ok(out)
    }
}

/// The GARCH(1,1) AR/MAG copula pair.
#[derive(Debug, Clone)]
pub struct GarchCopula {
    pub params: GarchParams,
    pub psi: TabulatedCdf,
    pub gamma: TabulatedCdf,
}

pub fn garch_copula_pair(params: GarchParams, psi: TabulatedCdf, gamma: TabulatedCdf) -> Result<GarchCopula> {
    if params.alpha1 <= 0.0 {
        return Err(CoarmaError::domain("GARCH copula pair requires alpha1 > 0"));
    }
    Ok(GarchCopula { params, psi, gamma })
}

/// One output of the shared-innovation CoARMA(1,1) recursion.
#[derive(Debug, Clone)]
pub struct GarchCopulaPath {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub eps: Vec<f64>,
}

impl GarchCopula {
    pub fn build(params: GarchParams, n_sim: usize, seed: u64) -> Result<Self> {
        let psi = build_psi(&params, n_sim, seed)?;
        let gamma = build_gamma(&params, n_sim, seed.wrapping_add(1))?;
        garch_copula_pair(params, psi, gamma)
    }

    pub fn with_psi_update(mut self, hook: &dyn PsiUpdate) -> Result<Self> {
        self.psi = hook.update(&self.params, &self.psi)?;
        Ok(self)
    }

    fn base(&self, v: f64) -> f64 {
        let y = self.gamma.quantile(v);
        self.params.alpha0 + y * y
    }

    fn radicand(&self, u: f64, v: f64) -> f64 {
        let x = self.gamma.quantile(u);
        ((x * x / self.base(v) - self.params.beta1) / self.params.alpha1).max(0.0)
    }

    /// Conditional CDF of W_t given W_{t-1} = v: 2 Phi(sqrt(r)) - 1.
    pub fn ar_ccdf(&self, u: f64, v: f64) -> Result<f64> {
        interior(u)?;
        interior(v)?;
        Ok((2.0 * norm_cdf(self.radicand(u, v).sqrt()) - 1.0).max(0.0))
    }

    /// Phi(sqrt(r)) exactly as the unfolded expression reads.
    pub fn ar_ccdf_unfolded(&self, u: f64, v: f64) -> Result<f64> {
        interior(u)?;
        interior(v)?;
        Ok(norm_cdf(self.radicand(u, v).sqrt()))
    }

    /// Monotone inverse of `ar_ccdf` in u.
    pub fn ar_quantile(&self, e: f64, v: f64) -> Result<f64> {
        interior(e)?;
        interior(v)?;
        let z = norm_ppf(0.5 * (1.0 + e));
        let x = (self.base(v) * (self.params.alpha1 * z * z + self.params.beta1)).sqrt();
        Ok(clamp_open(self.gamma.cdf(x)))
    }

    /// W_t = Gamma[sqrt((a0 + Gamma^{-1}(v)^2)(a1 Phi^{-1}(e)^2 + b1))], driven by
    /// the same innovation as the MAG step.
    pub fn ar_update(&self, e: f64, v: f64) -> Result<f64> {
        interior(e)?;
        interior(v)?;
        let z = norm_ppf(e);
        let x = (self.base(v) * (self.params.alpha1 * z * z + self.params.beta1)).sqrt();
        Ok(clamp_open(self.gamma.cdf(x)))
    }

    /// K_{2|1}(u|v) = Phi[Psi^{-1}(u) / sqrt(a0 + Gamma^{-1}(v)^2)].
    pub fn mag_ccdf(&self, u: f64, v: f64) -> Result<f64> {
        interior(u)?;
        interior(v)?;
        Ok(norm_cdf(self.psi.quantile(u) / self.base(v).sqrt()))
    }

    pub fn mag_quantile(&self, e: f64, v: f64) -> Result<f64> {
        interior(e)?;
        interior(v)?;
        Ok(clamp_open(self.psi.cdf(self.base(v).sqrt() * norm_ppf(e))))
    }

    /// U_t = K^{-1}(eps_t | W_{t-1}), W_t = ar_update(eps_t | W_{t-1}).
    pub fn simulate(&self, n: usize, seed: u64, burn_in: usize) -> Result<GarchCopulaPath> {
        let mut rng = stream(seed, 0);
        let mut w = 0.5;
        let mut path = GarchCopulaPath { u: Vec::with_capacity(n), w: Vec::with_capacity(n), eps: Vec::with_capacity(n) };
        for t in 0..n + burn_in {
            let e = open_unit(&mut rng);
            let u = self.mag_quantile(e, w)?;
            w = self.ar_update(e, w)?;
            if t >= burn_in {
                path.u.push(u);
                path.w.push(w);
                path.eps.push(e);
            }
        }
        Ok(path)
    }

    /// Returns on the original scale: Psi^{-1}(U_t).
    pub fn simulate_returns(&self, n: usize, seed: u64, burn_in: usize) -> Result<Vec<f64>> {
        Ok(self.simulate(n, seed, burn_in)?.u.into_iter().map(|u| self.psi.quantile(u)).collect())
    }

    /// Rows (u, v, ar_ccdf, ar_ccdf_unfolded, mag_ccdf) on an m x m interior grid.
    pub fn grid(&self, m: usize) -> Result<Vec<[f64; 5]>> {
        let pts: Vec<f64> = (1..=m).map(|i| i as f64 / (m + 1) as f64).collect();
        let mut rows = Vec::with_capacity(m * m);
        for &v in &pts {
            for &u in &pts {
                rows.push([u, v, self.ar_ccdf(u, v)?, self.ar_ccdf_unfolded(u, v)?, self.mag_ccdf(u, v)?]);
            }
        }
        Ok(rows)
    }
}
