//! Forecast metrics, a Gaussian ARMA benchmark and a train/validation/test
//! backtest.

use rayon::prelude::*;

use crate::coarma::{forecast_percentiles, levels, FilterState, ForecastGrid, DENSITY_FLOOR, N_LEVELS};
use crate::copula::clamp_unit;
use crate::error::{CoarmaError, Result};
use crate::estimation::{fit, FitConfig};
use crate::gaussian_equiv::ar_phi;
use crate::margins::{unit_scale, MarginModel};
use crate::model::ModelTemplate;
use crate::optim::{nelder_mead, NelderMeadSettings};
use crate::rng::{open_unit, std_normal, stream};
use crate::special::{norm_cdf, norm_pdf, norm_ppf};
use crate::CoarmaSpec;

pub fn pinball(tau: f64, q: f64, y: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(CoarmaError::domain(format!("pinball level {tau} outside (0,1)")));
    }
    let d = y - q;
    Ok((tau * d).max((tau - 1.0) * d))
}

/// (2/K) sum_k pinball(level_k, q_k, y) for any set of K quantile levels.
pub fn crps_from_quantiles(levels: &[f64], qs: &[f64], y: f64) -> Result<f64> {
    if levels.len() != qs.len() || qs.is_empty() {
        return Err(CoarmaError::Shape { expected: levels.len(), got: qs.len() });
    }
    if qs.windows(2).any(|w| w[1] < w[0]) {
        return Err(CoarmaError::domain("quantile row must be nondecreasing"));
    }
    let mut s = 0.0;
    for (&a, &q) in levels.iter().zip(qs) {
        s += pinball(a, q, y)?;
    }
    Ok(2.0 * s / qs.len() as f64)
}

/// CRPS approximation from the 99 percentiles m/100.
pub fn crps_from_percentiles(row: &[f64], y: f64) -> Result<f64> {
    crps_from_quantiles(&levels(), row, y)
}

/// Closed-form CRPS of N(mu, sigma^2) at y.
pub fn normal_crps(mu: f64, sigma: f64, y: f64) -> f64 {
    let z = (y - mu) / sigma;
    sigma * (z * (2.0 * norm_cdf(z) - 1.0) + 2.0 * norm_pdf(z) - 1.0 / std::f64::consts::PI.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveNll {
    /// Per-observation terms -log(copula density x margin density).
    pub terms: Vec<f64>,
    pub total: f64,
    pub floored: usize,
}

impl PredictiveNll {
    pub fn mean(&self) -> f64 {
        self.total / self.terms.len() as f64
    }
}

/// One-step predictive NLL of `new` after conditioning on `old`, following the
/// same filtering path as `forecast_percentiles`.
pub fn predictive_nll(spec: &CoarmaSpec, margin: &MarginModel, old: &[f64], new: &[f64]) -> Result<PredictiveNll> {
    let r = spec.r();
    let mut st = FilterState::new(spec);
    for (t, &x) in unit_scale(margin.kind(), old)?.iter().enumerate() {
        if t < r {
            st.skip(x);
        } else {
            st.step(x, false)?;
        }
    }
    let mut out = PredictiveNll { terms: Vec::with_capacity(new.len()), total: 0.0, floored: 0 };
    for &y in new {
        let x = clamp_unit(margin.cdf(y));
        let c = if st.t() < r {
            st.skip(x);
            1.0
        } else {
            st.step(x, true)?.density.unwrap_or(1.0)
        };
        let mut d = c * margin.density(y)?;
        if !(d >= DENSITY_FLOOR) {
            d = DENSITY_FLOOR;
            out.floored += 1;
        }
        out.terms.push(-d.ln());
        out.total -= d.ln();
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub crps: f64,
    pub nll: f64,
    pub pbs05: f64,
    pub pbs95: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n_eval: usize,
}

pub const METRIC_COLUMNS: [&str; 7] = ["crps", "nll", "pbs05", "pbs95", "rmse", "mae", "n_eval"];

impl MetricsReport {
    /// Averages over the rows of `grid` against `realized`. Point forecasts are
    /// the mean of the 99 percentiles. `nll_terms` may be absent (reported as NaN).
    pub fn from_grid(grid: &ForecastGrid, realized: &[f64], nll_terms: Option<&[f64]>) -> Result<Self> {
        let n = realized.len();
        if grid.rows.len() != n || n == 0 {
            return Err(CoarmaError::Shape { expected: n, got: grid.rows.len() });
        }
        let (mut crps, mut p05, mut p95, mut se, mut ae) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (t, (row, &y)) in grid.rows.iter().zip(realized).enumerate() {
            crps += crps_from_percentiles(row, y)?;
            p05 += pinball(0.05, row[4], y)?;
            p95 += pinball(0.95, row[94], y)?;
            let e = y - grid.mean(t);
            se += e * e;
            ae += e.abs();
        }
        let nf = n as f64;
        let nll = match nll_terms {
            Some(ts) if ts.len() == n => ts.iter().sum::<f64>() / nf,
            Some(ts) => return Err(CoarmaError::Shape { expected: n, got: ts.len() }),
            None => f64::NAN,
        };
        Ok(Self { crps: crps / nf, nll, pbs05: p05 / nf, pbs95: p95 / nf, rmse: (se / nf).sqrt(), mae: ae / nf, n_eval: n })
    }

    pub fn values(&self) -> [f64; 7] {
        [self.crps, self.nll, self.pbs05, self.pbs95, self.rmse, self.mae, self.n_eval as f64]
    }
}

/// Gaussian ARMA(p,q) fitted by conditional least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaFit {
    pub mu: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma: f64,
    pub aic: f64,
    pub n_eff: usize,
}

impl ArmaFit {
    pub fn order(&self) -> (usize, usize) {
        (self.phi.len(), self.theta.len())
    }

    /// One-step predictive means for `series[start..]` given everything before.
    fn means(&self, series: &[f64], start: usize) -> Vec<f64> {
        let (p, q) = self.order();
        let mut e = vec![0.0; series.len()];
        let mut out = Vec::with_capacity(series.len().saturating_sub(start));
        for t in 0..series.len() {
            let mut m = self.mu;
            for j in 1..=p.min(t) {
                m += self.phi[j - 1] * (series[t - j] - self.mu);
            }
            for j in 1..=q.min(t) {
                m += self.theta[j - 1] * e[t - j];
            }
            if t >= p {
                e[t] = series[t] - m;
            }
            if t >= start {
                out.push(m);
            }
        }
        out
    }

    /// Percentile forecasts and predictive NLL terms for `new` after `old`.
    pub fn forecast(&self, old: &[f64], new: &[f64]) -> (ForecastGrid, Vec<f64>) {
        let all: Vec<f64> = old.iter().chain(new).copied().collect();
        let means = self.means(&all, old.len());
        let z: Vec<f64> = levels().iter().map(|&a| norm_ppf(a)).collect();
        let mut grid = ForecastGrid { rows: Vec::new(), pit: Vec::new(), unit: Vec::new(), clamped: 0 };
        let mut nll = Vec::with_capacity(new.len());
        for (&m, &y) in means.iter().zip(new) {
            let row: [f64; N_LEVELS] = std::array::from_fn(|k| m + self.sigma * z[k]);
            grid.rows.push(row);
            let pit = norm_cdf((y - m) / self.sigma);
            grid.pit.push(pit);
            grid.unit.push(pit);
            let d = (norm_pdf((y - m) / self.sigma) / self.sigma).max(DENSITY_FLOOR);
            nll.push(-d.ln());
        }
        (grid, nll)
    }
}

fn pacf_coeffs(z: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = z.iter().map(|v| v.tanh().clamp(-0.999, 0.999)).collect();
    ar_phi(&r).unwrap_or_else(|_| vec![0.0; z.len()])
}

/// Conditional-least-squares fit; the first `start` observations only serve
/// as initial values so that fits of different orders share a sample.
/// Stationarity and invertibility are enforced through partial
/// autocorrelation parameterizations.
pub fn fit_arma(y: &[f64], p: usize, q: usize, start: usize) -> Result<ArmaFit> {
    let start = start.max(p);
    if y.len() < start + 10 + p + q {
        return Err(CoarmaError::domain(format!("series too short for ARMA({p},{q})")));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt().max(1e-12);
    let build = |x: &[f64]| -> ArmaFit {
        let phi = pacf_coeffs(&x[1..1 + p]);
        let theta: Vec<f64> = pacf_coeffs(&x[1 + p..]).into_iter().map(|c| -c).collect();
        ArmaFit { mu: mean + sd * x[0], phi, theta, sigma: 1.0, aic: 0.0, n_eff: 0 }
    };
    let ssr = |m: &ArmaFit| -> f64 {
        m.means(y, start).iter().zip(&y[start..]).map(|(f, v)| (v - f).powi(2)).sum::<f64>()
    };
    let settings = NelderMeadSettings { max_evals: 4000 + 800 * (p + q), ..NelderMeadSettings::default() };
    let best = nelder_mead(|x| ssr(&build(x)), &vec![0.0; 1 + p + q], &settings);
    let mut m = build(&best.x);
    let n = y.len() - start;
    let s2 = (best.f / n as f64).max(1e-300);
    m.sigma = s2.sqrt();
    m.n_eff = n;
    let loglik = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0);
    m.aic = -2.0 * loglik + 2.0 * (p + q + 2) as f64;
    Ok(m)
}

/// AIC selection over all orders up to (max_p, max_q).
pub fn select_arma(y: &[f64], max_p: usize, max_q: usize) -> Result<ArmaFit> {
    let orders: Vec<(usize, usize)> = (0..=max_p).flat_map(|p| (0..=max_q).map(move |q| (p, q))).collect();
    let fits: Vec<ArmaFit> = orders.par_iter().map(|&(p, q)| fit_arma(y, p, q, max_p)).collect::<Result<_>>()?;
    fits.into_iter()
        .min_by(|a, b| a.aic.total_cmp(&b.aic))
        .ok_or_else(|| CoarmaError::domain("empty order grid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// ARMA(2,1) with Student-t(5) innovations.
    ArmaLike,
    /// Two-regime Markov-switching AR(1).
    RegimeMixture,
}

pub fn synthetic_series(kind: SyntheticKind, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 0);
    let burn = 200;
    let mut out = Vec::with_capacity(n);
    match kind {
        SyntheticKind::ArmaLike => {
            let t5 = |r: &mut rand_chacha::ChaCha8Rng| {
                let z = std_normal(r);
                let chi: f64 = (0..5).map(|_| std_normal(r).powi(2)).sum();
                z / (chi / 5.0).sqrt() * (3.0f64 / 5.0).sqrt()
            };
            let (mut y1, mut y2, mut e1) = (0.0, 0.0, 0.0);
            for t in 0..n + burn {
                let e = t5(&mut rng);
                let y = 0.6 * y1 - 0.2 * y2 + e + 0.3 * e1;
                (y2, y1, e1) = (y1, y, e);
                if t >= burn {
                    out.push(10.0 + y);
                }
            }
        }
        SyntheticKind::RegimeMixture => {
            let (mut state, mut y) = (0usize, 0.0);
            for t in 0..n + burn {
                if open_unit(&mut rng) > 0.97 {
                    state = 1 - state;
                }
                let (c, a, s) = if state == 0 { (0.0, 0.8, 0.5) } else { (2.0, 0.3, 1.5) };
                y = c + a * (y - c) + s * std_normal(&mut rng);
                if t >= burn {
                    out.push(y);
                }
            }
        }
    }
    out
}

/// A model entered into a backtest.
#[derive(Debug, Clone, PartialEq)]
pub enum ForecastModel {
    /// Margin plus copula process; free slots are fitted on the training set.
    Coarma { name: String, class: String, template: ModelTemplate },
    /// Gaussian ARMA with AIC order selection up to (max_p, max_q).
    GaussianArma { name: String, class: String, max_p: usize, max_q: usize },
}

impl ForecastModel {
    pub fn name(&self) -> &str {
        match self {
            Self::Coarma { name, .. } | Self::GaussianArma { name, .. } => name,
        }
    }

    pub fn class(&self) -> &str {
        match self {
            Self::Coarma { class, .. } | Self::GaussianArma { class, .. } => class,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitIndex {
    pub train: (usize, usize),
    pub val: (usize, usize),
    pub test: (usize, usize),
}

impl SplitIndex {
    pub fn new(n: usize, train_frac: f64, val_frac: f64) -> Result<Self> {
        if !(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0) {
            return Err(CoarmaError::domain("split fractions must be positive and sum to less than 1"));
        }
        let a = (n as f64 * train_frac).round() as usize;
        let b = (n as f64 * (train_frac + val_frac)).round() as usize;
        if a < 20 || b <= a || b >= n {
            return Err(CoarmaError::domain(format!("split of {n} observations leaves an empty or tiny segment")));
        }
        Ok(Self { train: (0, a), val: (a, b), test: (b, n) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestRow {
    pub name: String,
    pub class: String,
    /// Fitted model description.
    pub fitted: String,
    pub val: MetricsReport,
    pub test: MetricsReport,
    /// Best validation CRPS within its class.
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub split: SplitIndex,
    pub rows: Vec<BacktestRow>,
}

impl BacktestReport {
    /// Every row was evaluated on exactly the split's validation and test windows.
    pub fn audit(&self) -> bool {
        let nv = self.split.val.1 - self.split.val.0;
        let nt = self.split.test.1 - self.split.test.0;
        self.rows.iter().all(|r| r.val.n_eval == nv && r.test.n_eval == nt)
    }
}

fn evaluate_one(model: &ForecastModel, series: &[f64], split: &SplitIndex, seed: u64) -> Result<BacktestRow> {
    let train = &series[split.train.0..split.train.1];
    let after = &series[split.val.0..];
    let nv = split.val.1 - split.val.0;
    let (grid, nll, fitted): (ForecastGrid, Option<Vec<f64>>, String) = match model {
        ForecastModel::Coarma { template, .. } => {
            let margin = MarginModel::fit(template.margin, train)?;
            let spec = if template.n_free() == 0 {
                template.to_spec()?
            } else {
                fit(&FitConfig::new(template.clone(), seed), &unit_scale(template.margin, train)?)?.spec
            };
            let grid = forecast_percentiles(&spec, &margin, train, after)?;
            let nll = predictive_nll(&spec, &margin, train, after).ok().map(|r| r.terms);
            (grid, nll, ModelTemplate::from_spec(template.margin, &spec).to_string())
        }
        ForecastModel::GaussianArma { max_p, max_q, .. } => {
            let m = select_arma(train, *max_p, *max_q)?;
            let (grid, nll) = m.forecast(train, after);
            let (p, q) = m.order();
            (grid, Some(nll), format!("ARMA({p},{q})"))
        }
    };
    let cut = |g: &ForecastGrid, a: usize, b: usize| ForecastGrid {
        rows: g.rows[a..b].to_vec(),
        pit: g.pit[a..b].to_vec(),
        unit: g.unit[a..b].to_vec(),
        clamped: 0,
    };
    let n_after = after.len();
    let val = MetricsReport::from_grid(&cut(&grid, 0, nv), &after[..nv], nll.as_deref().map(|v| &v[..nv]))?;
    let test =
        MetricsReport::from_grid(&cut(&grid, nv, n_after), &after[nv..], nll.as_deref().map(|v| &v[nv..]))?;
    Ok(BacktestRow {
        name: model.name().to_string(),
        class: model.class().to_string(),
        fitted,
        val,
        test,
        selected: false,
    })
}

/// Fits every model on the training segment, forecasts one step ahead through
/// validation and test, and marks the best validation CRPS per class.
pub fn backtest(models: &[ForecastModel], series: &[f64], train_frac: f64, val_frac: f64, seed: u64) -> Result<BacktestReport> {
    let split = SplitIndex::new(series.len(), train_frac, val_frac)?;
    let mut rows: Vec<BacktestRow> =
        models.par_iter().map(|m| evaluate_one(m, series, &split, seed)).collect::<Result<_>>()?;
    let classes: Vec<String> = rows.iter().map(|r| r.class.clone()).collect();
    for class in classes {
        let best = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.class == class)
            .min_by(|a, b| a.1.val.crps.total_cmp(&b.1.val.crps))
            .map(|(i, _)| i);
        if let Some(i) = best {
            rows[i].selected = true;
        }
    }
    Ok(BacktestReport { split, rows })
}
