//! Maximum-likelihood fitting of the copula parameters, likelihood scans and
//! residual diagnostics.

use rayon::prelude::*;

use crate::coarma::{filter, neg_log_likelihood, CoarmaSpec};
use crate::copula::Family;
use crate::dependence::with_param;
use crate::error::{CoarmaError, Result};
use crate::model::{FreeSlot, ModelTemplate, Side};
use crate::optim::{nelder_mead, NelderMeadSettings};
use crate::rng::{open_unit, stream};
use crate::stats::{ks_uniform, KsResult};

/// Distance kept from the Gaussian MAG critical value 1/sqrt(2).
pub const MAG_DELTA: f64 = 1e-6;
/// Default Kendall's tau cap for non-Gaussian MAG pairs; a Gaussian pair at
/// correlation 1/sqrt(2) has tau 1/2.
pub const MAG_TAU_CAP: f64 = 0.5 - MAG_DELTA;

/// Default box for one free parameter.
pub fn default_bounds(slot: &FreeSlot, mag_tau_cap: f64) -> (f64, f64) {
    let mag = slot.side == Side::Mag;
    let cap = |f: Family| f.param_from_tau(mag_tau_cap).unwrap_or(f64::NAN);
    match (slot.family, slot.index) {
        (Family::Gaussian | Family::StudentT, 0) if mag => {
            let b = std::f64::consts::FRAC_1_SQRT_2.min((std::f64::consts::FRAC_PI_2 * mag_tau_cap).sin()) - MAG_DELTA;
            (-b, b)
        }
        (Family::Gaussian | Family::StudentT, 0) => (-0.995, 0.995),
        (Family::StudentT, _) => (2.1, 50.0),
        (Family::Clayton, _) if mag => (1e-4, cap(Family::Clayton)),
        (Family::Clayton, _) => (1e-4, 30.0),
        (Family::Gumbel, _) if mag => (1.0, cap(Family::Gumbel)),
        (Family::Gumbel, _) => (1.0, 20.0),
        (Family::Frank, _) if mag => {
            let b = cap(Family::Frank);
            (-b, b)
        }
        (Family::Frank, _) => (-40.0, 40.0),
        (Family::Frechet, _) if mag => (0.0, cap(Family::Frechet)),
        (Family::Frechet, _) => (0.0, 1.0),
        _ => (0.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub template: ModelTemplate,
    /// One (lo, hi) box per free slot, in `ModelTemplate::free_slots` order.
    pub bounds: Vec<(f64, f64)>,
    pub restarts: usize,
    pub optimizer: NelderMeadSettings,
    pub seed: u64,
}

impl FitConfig {
    pub fn new(template: ModelTemplate, seed: u64) -> Self {
        Self::with_tau_cap(template, seed, MAG_TAU_CAP)
    }

    /// Defaults with a different Kendall's tau cap for MAG pairs.
    pub fn with_tau_cap(template: ModelTemplate, seed: u64, mag_tau_cap: f64) -> Self {
        let bounds = template.free_slots().iter().map(|s| default_bounds(s, mag_tau_cap)).collect();
        Self { template, bounds, restarts: 5, optimizer: NelderMeadSettings::default(), seed }
    }

    pub fn set_bounds(&mut self, slot: usize, lo: f64, hi: f64) -> Result<()> {
        if slot >= self.bounds.len() {
            return Err(CoarmaError::Shape { expected: self.bounds.len(), got: slot + 1 });
        }
        if !(lo < hi) {
            return Err(CoarmaError::domain(format!("empty bound ({lo}, {hi})")));
        }
        self.bounds[slot] = (lo, hi);
        Ok(())
    }

    fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.bounds)
            .map(|(&z, &(lo, hi))| lo + (hi - lo) / (1.0 + (-z).exp()))
            .collect()
    }

    fn unit_to_params(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.bounds)
            .map(|(&x, &(lo, hi))| {
                let s = ((x - lo) / (hi - lo)).clamp(1e-6, 1.0 - 1e-6);
                (s / (1.0 - s)).ln()
            })
            .collect()
    }

    /// Starting points: near independence, moderate dependence, then random.
    fn starts(&self) -> Vec<Vec<f64>> {
        let slots = self.template.free_slots();
        let at_tau = |tau: f64| -> Vec<f64> {
            slots
                .iter()
                .zip(&self.bounds)
                .map(|(s, &(lo, hi))| {
                    let v = if s.index == 0 { s.family.param_from_tau(tau).unwrap_or(0.5 * (lo + hi)) } else { 8.0 };
                    let pad = 0.02 * (hi - lo);
                    v.clamp(lo + pad, hi - pad)
                })
                .collect()
        };
        let mut out = vec![at_tau(0.05), at_tau(0.3)];
        let mut rng = stream(self.seed, 0);
        while out.len() < self.restarts.max(1) {
            out.push(self.bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * (0.05 + 0.9 * open_unit(&mut rng))).collect());
        }
        out.truncate(self.restarts.max(1));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartTrace {
    pub start: Vec<f64>,
    pub params: Vec<f64>,
    pub nll: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: CoarmaSpec,
    pub params: Vec<f64>,
    pub nll: f64,
    pub converged: bool,
    /// Density-floor substitutions at the optimum.
    pub floored: usize,
    pub evaluations: usize,
    pub starts: Vec<StartTrace>,
}

fn check_data(data: &[f64], r: usize) -> Result<()> {
    let need = 10 * r.max(1);
    if data.len() <= need {
        return Err(CoarmaError::domain(format!("need more than {need} observations, got {}", data.len())));
    }
    if let Some(i) = data.iter().position(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(CoarmaError::domain(format!("observation {i} = {} is not in (0,1)", data[i])));
    }
    Ok(())
}

/// Multi-start Nelder-Mead on a logistic reparameterization of the bounds.
pub fn fit(config: &FitConfig, data: &[f64]) -> Result<FitResult> {
    let t = &config.template;
    check_data(data, t.p().max(t.q()))?;
    if config.bounds.len() != t.n_free() {
        return Err(CoarmaError::Shape { expected: t.n_free(), got: config.bounds.len() });
    }
    let objective = |z: &[f64]| -> f64 {
        let params = config.to_unit(z);
        t.instantiate(&params)
            .and_then(|spec| neg_log_likelihood(&spec, data))
            .map_or(f64::INFINITY, |r| r.nll)
    };
    let traces: Vec<StartTrace> = config
        .starts()
        .into_par_iter()
        .map(|start| {
            let m = nelder_mead(objective, &config.unit_to_params(&start), &config.optimizer);
            StartTrace { params: config.to_unit(&m.x), start, nll: m.f, evals: m.evals, converged: m.converged }
        })
        .collect();
    let best = traces
        .iter()
        .enumerate()
        .filter(|(_, s)| s.nll.is_finite())
        .min_by(|a, b| a.1.nll.total_cmp(&b.1.nll).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| {
            let trail: Vec<String> = traces.iter().map(|s| format!("start {:?} -> {}", s.start, s.nll)).collect();
            CoarmaError::Optimization(format!("no start reached a finite likelihood: {}", trail.join("; ")))
        })?;
    let b = &traces[best];
    let spec = t.instantiate(&b.params)?;
    let report = neg_log_likelihood(&spec, data)?;
    Ok(FitResult {
        spec,
        params: b.params.clone(),
        nll: report.nll,
        converged: b.converged,
        floored: report.floored,
        evaluations: traces.iter().map(|s| s.evals).sum(),
        starts: traces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub value: f64,
    pub nll: f64,
    pub floored: usize,
}

/// NLL along a 1-D grid of the first parameter of one pair. Grid values
/// outside the family's domain are reported with an infinite NLL.
pub fn nll_scan(template: &CoarmaSpec, side: Side, index: usize, data: &[f64], grid: &[f64]) -> Result<Vec<ScanPoint>> {
    check_data(data, template.r())?;
    let pairs = match side {
        Side::Ar => template.ar().pairs(),
        Side::Mag => template.mag().pairs(),
    };
    let current = pairs.get(index).ok_or_else(|| CoarmaError::domain(format!("no pair copula at index {index}")))?;
    with_param(template, side, index, current.params().first().copied().unwrap_or(f64::NAN))?;
    Ok(grid
        .par_iter()
        .map(|&value| match with_param(template, side, index, value).and_then(|s| neg_log_likelihood(&s, data)) {
            Ok(r) => ScanPoint { value, nll: r.nll, floored: r.floored },
            Err(_) => ScanPoint { value, nll: f64::INFINITY, floored: 0 },
        })
        .collect())
}

pub fn scan_argmin(points: &[ScanPoint]) -> Option<ScanPoint> {
    points.iter().copied().filter(|p| p.nll.is_finite()).min_by(|a, b| a.nll.total_cmp(&b.nll))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub n: usize,
    pub ks: KsResult,
    /// Lag-1 autocorrelation of sign(eps - 1/2).
    pub sign_lag1: f64,
    /// Share of residuals within 1e-6 of 0 or 1.
    pub boundary_fraction: f64,
    /// Largest |z| of window means against 1/2.
    pub mean_drift: f64,
    /// Largest |z| of window variances against 1/12.
    pub var_drift: f64,
    pub oscillation: bool,
    pub drift: bool,
}

pub const DRIFT_WINDOWS: usize = 10;
pub const DRIFT_Z: f64 = 4.5;

/// Filters `data` and checks the residuals for the oscillating,
/// non-ergodic behaviour that appears beyond the invertibility region.
pub fn residual_diagnostics(spec: &CoarmaSpec, data: &[f64]) -> Result<ResidualReport> {
    let f = filter(spec, data)?;
    let eps = &f.eps[spec.r()..];
    let n = eps.len();
    if n < 2 * DRIFT_WINDOWS {
        return Err(CoarmaError::domain(format!("too few residuals ({n}) for diagnostics")));
    }
    let signs: Vec<f64> = eps.iter().map(|&e| if e >= 0.5 { 1.0 } else { -1.0 }).collect();
    let ms = signs.iter().sum::<f64>() / n as f64;
    let den: f64 = signs.iter().map(|s| (s - ms).powi(2)).sum();
    let num: f64 = signs.windows(2).map(|w| (w[0] - ms) * (w[1] - ms)).sum();
    let sign_lag1 = if den > 0.0 { num / den } else { 1.0 };
    let boundary_fraction = eps.iter().filter(|&&e| !(1e-6..=1.0 - 1e-6).contains(&e)).count() as f64 / n as f64;
    let w = n / DRIFT_WINDOWS;
    let (mut mean_drift, mut var_drift) = (0.0f64, 0.0f64);
    let var_se = ((1.0 / 80.0 - 1.0 / 144.0) / w as f64).sqrt();
    for chunk in eps.chunks_exact(w) {
        let m = chunk.iter().sum::<f64>() / w as f64;
        let v = chunk.iter().map(|e| (e - 0.5).powi(2)).sum::<f64>() / w as f64;
        mean_drift = mean_drift.max((m - 0.5).abs() / (1.0 / (12.0 * w as f64)).sqrt());
        var_drift = var_drift.max((v - 1.0 / 12.0).abs() / var_se);
    }
    Ok(ResidualReport {
        n,
        ks: ks_uniform(eps),
        sign_lag1,
        boundary_fraction,
        mean_drift,
        var_drift,
        oscillation: sign_lag1 < -0.5 || boundary_fraction > 0.05,
        drift: mean_drift > DRIFT_Z || var_drift > DRIFT_Z,
    })
}
