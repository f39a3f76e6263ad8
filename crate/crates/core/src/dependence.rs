//! Joint distribution of consecutive observations (V_t, V_{t-1}) by tensor
//! Gauss-Legendre quadrature, with dependence measures built on it and a
//! Monte Carlo cross-check.
//!
//! `joint_cdf` returns F(x1, x2) = P(V_t <= x1, V_{t-1} <= x2). The innovation
//! eps_t is integrated out analytically, eps_{t-1} is integrated up to the
//! boundary of {V_{t-1} <= x2}, and the remaining innovations and the
//! stationary latent block are integrated over the unit cube.

use rayon::prelude::*;

use crate::coarma::{simulate, CoarmaSpec};
use crate::copula::CopulaSpec;
use crate::error::{CoarmaError, Result};
use crate::model::Side;
use crate::quadrature::{integrate_adaptive, GaussLegendre};
use crate::rng;
use crate::stats::spearman_uniform;
use crate::vine::VineSpec;

pub const SUPPORTED_ORDERS: [(usize, usize); 5] = [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2)];

#[derive(Debug, Clone, PartialEq)]
pub struct JointCdfSpec {
    model: CoarmaSpec,
    nodes: usize,
}

/// Default node count per dimension for an integration dimension.
pub fn default_nodes(dim: usize) -> usize {
    match dim {
        0..=2 => 64,
        3 => 32,
        _ => 24,
    }
}

impl JointCdfSpec {
    pub fn new(model: CoarmaSpec) -> Result<Self> {
        let pq = (model.p(), model.q());
        if !SUPPORTED_ORDERS.contains(&pq) {
            return Err(CoarmaError::Unsupported(format!("joint CDF for (p,q)={pq:?}")));
        }
        let nodes = default_nodes(model.p().max(1) + model.q());
        Ok(Self { model, nodes })
    }

    pub fn with_nodes(mut self, nodes: usize) -> Result<Self> {
        if nodes < 16 {
            return Err(CoarmaError::domain("at least 16 quadrature nodes per dimension"));
        }
        self.nodes = nodes;
        Ok(self)
    }

    pub fn model(&self) -> &CoarmaSpec {
        &self.model
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Integration dimension: the latent block, the q-1 intermediate innovations and eps_{t-1}.
    pub fn dim(&self) -> usize {
        self.model.p().max(1) + self.model.q()
    }
}

fn has_atom(v: &VineSpec) -> bool {
    v.pairs().iter().any(|c| c.has_atom())
}

/// Gauss-Legendre rule on [lo, hi] after the substitution x = lo + (hi-lo) s(t),
/// s(t) = t^3 (10 - 15t + 6t^2), which clusters nodes at both ends and tames
/// the endpoint singularities of h-functions.
fn smoothed(gl: &GaussLegendre, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let len = hi - lo;
    gl.mapped(0.0, 1.0).map(move |(t, w)| {
        let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        (lo + len * s, w * len * ds)
    })
}

/// Nodes on [0,1], with panels split at `brk` when given.
fn panel_nodes(n: usize, brk: Option<f64>) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::cached(n);
    match brk {
        Some(b) if b > 0.0 && b < 1.0 => smoothed(gl, 0.0, b).chain(smoothed(gl, b, 1.0)).collect(),
        _ => smoothed(gl, 0.0, 1.0).collect(),
    }
}

pub fn joint_cdf(spec: &JointCdfSpec, x1: f64, x2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x1) || !(0.0..=1.0).contains(&x2) {
        return Err(CoarmaError::domain("joint CDF arguments must lie in [0, 1]"));
    }
    if x1 == 0.0 || x2 == 0.0 {
        return Ok(0.0);
    }
    let m = &spec.model;
    let (p, q) = (m.p(), m.q());
    let pw = p.max(1);
    let atoms = has_atom(m.mag()) || has_atom(m.ar());
    let n = spec.nodes;
    let n_smooth = if atoms { 2 * n } else { n };
    let mag_atom1 = m.mag().pairs()[0].has_atom();

    // Outer dimensions: z_1..z_pw (latent block), then eps_{t-2}..eps_{t-q}.
    // The variable that conditions the first MAG pair of V_{t-1} is z_pw when
    // q = 1 and p <= 1, or eps_{t-2} when q >= 2.
    let mut dims: Vec<Vec<(f64, f64)>> = Vec::with_capacity(pw + q - 1);
    for k in 0..pw {
        let direct = q == 1 && k == pw - 1 && p <= 1;
        if direct && mag_atom1 {
            dims.push(panel_nodes(n, Some(x2)));
        } else {
            dims.push(panel_nodes(n_smooth, None));
        }
    }
    for k in 0..q.saturating_sub(1) {
        if k == 0 && mag_atom1 {
            dims.push(panel_nodes(n, Some(x2)));
        } else {
            dims.push(panel_nodes(n_smooth, None));
        }
    }
    let block_vine = if p >= 1 { Some(VineSpec::stationary(m.ar().pairs()[..p - 1].to_vec())) } else { None };
    let gl_inner = GaussLegendre::cached(n);
    let gl_doubled = GaussLegendre::cached(2 * n);

    let total: usize = dims.iter().map(|d| d.len()).product();
    let first_len = dims[0].len();
    let chunk = total / first_len;
    let partial: Result<Vec<f64>> = (0..first_len)
        .into_par_iter()
        .map(|i0| {
            let mut acc = 0.0;
            let mut z = vec![0.0; dims.len()];
            let mut cond1 = Vec::with_capacity(q);
            let mut cond0 = Vec::with_capacity(q);
            let mut ar_hist = Vec::with_capacity(p);
            for flat in 0..chunk {
                let mut rem = flat;
                let mut w = dims[0][i0].1;
                z[0] = dims[0][i0].0;
                for d in (1..dims.len()).rev() {
                    let len = dims[d].len();
                    let (x, wt) = dims[d][rem % len];
                    rem /= len;
                    z[d] = x;
                    w *= wt;
                }
                // Latent block oldest first: W_{t-q-pw} .. W_{t-q-1}.
                let block: Vec<f64> = match &block_vine {
                    Some(v) => v.inverse_rosenblatt(&z[..pw])?,
                    None => vec![z[0]],
                };
                let w_prev = block[pw - 1];
                let eps_mid = &z[pw..];
                cond1.clear();
                cond1.extend_from_slice(eps_mid);
                cond1.push(w_prev);
                let a = m.mag().mag_backward(x2, &cond1)?;
                if a <= 0.0 {
                    continue;
                }
                ar_hist.clear();
                ar_hist.extend(block.iter().rev().take(p));
                let latent = |e: f64| -> Result<f64> {
                    if p == 0 {
                        Ok(e)
                    } else {
                        m.ar().ar_cond_quantile(e, &ar_hist)
                    }
                };
                // W_{t-q} is fixed here unless q = 1.
                let w_tq = if q >= 2 { Some(latent(eps_mid[q - 2])?) } else { None };
                let brk = if !mag_atom1 {
                    None
                } else if q == 1 {
                    Some(if p == 0 { x1 } else { m.ar().ar_cond_cdf(x1, &ar_hist)? })
                } else {
                    Some(x1)
                };
                let mut inner_sum = 0.0;
                let mut eval = |e: f64| -> Result<f64> {
                    cond0.clear();
                    cond0.push(e);
                    if q >= 2 {
                        cond0.extend_from_slice(&eps_mid[..q - 2]);
                        cond0.push(w_tq.unwrap_or(0.5));
                    } else {
                        cond0[0] = latent(e)?;
                    }
                    m.mag().mag_backward(x1, &cond0)
                };
                let pieces: [(f64, f64); 2] = match brk {
                    Some(b) if b > 0.0 && b < a => [(0.0, b), (b, a)],
                    _ => [(0.0, a), (a, a)],
                };
                for (lo, hi) in pieces {
                    if hi <= lo {
                        continue;
                    }
                    let rule = if atoms && brk.is_none() { gl_doubled } else { gl_inner };
                    for (e, we) in smoothed(rule, lo, hi) {
                        inner_sum += we * eval(e)?;
                    }
                }
                acc += w * inner_sum;
            }
            Ok(acc)
        })
        .collect();
    Ok(partial?.iter().sum::<f64>().clamp(0.0, x1.min(x2)))
}

/// MAG(1) joint CDF with the single pair copula K: int_0^1 K(x1, K_{2|1}(x2|v)) dv,
/// by adaptive quadrature (independent of the tensor rule above).
pub fn mag1_joint_cdf(k: &CopulaSpec, x1: f64, x2: f64) -> f64 {
    let f = |v: f64| k.cdf(x1, k.h(x2, v));
    if k.has_atom() && x2 > 0.0 && x2 < 1.0 {
        integrate_adaptive(0.0, x2, 1e-13, f) + integrate_adaptive(x2, 1.0, 1e-13, f)
    } else {
        integrate_adaptive(0.0, 1.0, 1e-13, f)
    }
}

/// Closed-form joint CDF of the Frechet MAG(1) process, P(V_t <= x1, V_{t-1} <= x2).
pub fn frechet_mag1_joint(alpha: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CoarmaError::domain("Frechet weight must lie in [0, 1]"));
    }
    // Written in the variables (a, b) = (x2, x1).
    let (a, b) = (x2, x1);
    let c = 1.0 - alpha;
    Ok(c * c * a * b + c * alpha * a * b + a * alpha * (c * a + alpha).min(b) + (1.0 - a) * alpha * (c * a).min(b))
}

/// Spearman's rho: 12 times the integral of F over the unit square, minus 3.
pub fn spearman_rho(spec: &JointCdfSpec) -> Result<f64> {
    let m = if spec.dim() <= 2 { 24 } else { 12 };
    let gl = GaussLegendre::cached(m);
    let pts: Vec<(f64, f64)> = gl.mapped(0.0, 1.0).collect();
    let mut s = 0.0;
    for &(x1, w1) in &pts {
        for &(x2, w2) in &pts {
            s += w1 * w2 * joint_cdf(spec, x1, x2)?;
        }
    }
    Ok(12.0 * s - 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepMeasures {
    pub spearman_rho: f64,
    pub lower_tdc: f64,
    pub upper_tdc: f64,
    pub lower_order: f64,
    /// Survival-based upper tail order.
    pub upper_order: f64,
    /// log F(1-u,1-u) / log u, kept for comparison.
    pub upper_order_literal: f64,
    /// Unclamped tail coefficients.
    pub lower_tdc_raw: f64,
    pub upper_tdc_raw: f64,
}

/// Finite-u tail coefficients and tail orders.
pub fn tail_measures_from_cdf(f: impl Fn(f64, f64) -> Result<f64>, u: f64) -> Result<(f64, f64, f64, f64, f64)> {
    if !(u > 0.0 && u <= 0.25) {
        return Err(CoarmaError::domain("tail level must lie in (0, 0.25]"));
    }
    let lo = f(u, u)?;
    let hi = f(1.0 - u, 1.0 - u)?;
    let surv = 1.0 - 2.0 * (1.0 - u) + hi;
    Ok((lo / u, surv / u, lo.ln() / u.ln(), surv.ln() / u.ln(), hi.ln() / u.ln()))
}

pub fn dep_measures(spec: &JointCdfSpec, u: f64) -> Result<DepMeasures> {
    let (l, up, ol, ou, lit) = tail_measures_from_cdf(|a, b| joint_cdf(spec, a, b), u)?;
    Ok(DepMeasures {
        spearman_rho: spearman_rho(spec)?,
        lower_tdc: l.clamp(0.0, 1.0),
        upper_tdc: up.clamp(0.0, 1.0),
        lower_order: ol,
        upper_order: ou,
        upper_order_literal: lit,
        lower_tdc_raw: l,
        upper_tdc_raw: up,
    })
}

/// Draws one stationary pair (V_t, V_{t-1}) exactly: a stationary latent block
/// by inverse Rosenblatt, then fresh innovations.
pub fn draw_consecutive_pair<R: rand::RngCore>(model: &CoarmaSpec, r: &mut R) -> Result<(f64, f64)> {
    let (p, q) = (model.p(), model.q());
    let pw = p.max(1);
    let z: Vec<f64> = (0..pw).map(|_| rng::open_unit(r)).collect();
    let block = if p >= 1 {
        VineSpec::stationary(model.ar().pairs()[..p - 1].to_vec()).inverse_rosenblatt(&z)?
    } else {
        z
    };
    // eps[k] is the innovation at time t-q+k.
    let eps: Vec<f64> = (0..=q).map(|_| rng::open_unit(r)).collect();
    let w_prev = block[pw - 1];
    let w_tq = if p == 0 {
        eps[0]
    } else {
        let hist: Vec<f64> = block.iter().rev().take(p).copied().collect();
        model.ar().ar_cond_quantile(eps[0], &hist)?
    };
    let mut cond: Vec<f64> = eps[..q - 1].iter().rev().copied().collect();
    cond.push(w_prev);
    let v_prev = model.mag().mag_forward(eps[q - 1], &cond)?;
    let mut cond: Vec<f64> = eps[1..q].iter().rev().copied().collect();
    cond.push(w_tq);
    let v_t = model.mag().mag_forward(eps[q], &cond)?;
    Ok((v_t, v_prev))
}

/// Monte Carlo estimates of F at `points` from `n_paths` exact stationary pairs,
/// with binomial standard errors.
pub fn monte_carlo_joint_cdf(model: &CoarmaSpec, points: &[(f64, f64)], n_paths: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if model.q() == 0 {
        return Err(CoarmaError::Unsupported("Monte Carlo joint CDF needs q >= 1".into()));
    }
    const CHUNK: usize = 100_000;
    let n_chunks = n_paths.div_ceil(CHUNK);
    let counts: Result<Vec<Vec<u64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, c as u64);
            let len = CHUNK.min(n_paths - c * CHUNK);
            let mut k = vec![0u64; points.len()];
            for _ in 0..len {
                let (a, b) = draw_consecutive_pair(model, &mut r)?;
                for (cnt, &(x1, x2)) in k.iter_mut().zip(points) {
                    *cnt += (a <= x1 && b <= x2) as u64;
                }
            }
            Ok(k)
        })
        .collect();
    let counts = counts?;
    let n = n_paths as f64;
    Ok((0..points.len())
        .map(|i| {
            let ph = counts.iter().map(|k| k[i]).sum::<u64>() as f64 / n;
            (ph, (ph * (1.0 - ph) / n).sqrt())
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub param: f64,
    pub rho_quad: f64,
    pub rho_sim: f64,
    pub rho_sim_se: f64,
    pub measures: DepMeasures,
}

/// Replaces the first parameter of one pair copula in `template`.
pub fn with_param(template: &CoarmaSpec, side: Side, index: usize, value: f64) -> Result<CoarmaSpec> {
    let mut ar = template.ar().pairs().to_vec();
    let mut mag = template.mag().pairs().to_vec();
    let slot = match side {
        Side::Ar => ar.get_mut(index),
        Side::Mag => mag.get_mut(index),
    }
    .ok_or_else(|| CoarmaError::domain(format!("no pair copula at index {index}")))?;
    let mut params = slot.params().to_vec();
    if params.is_empty() {
        return Err(CoarmaError::domain("pair copula has no parameter to scan"));
    }
    params[0] = value;
    *slot = CopulaSpec::new(slot.family(), slot.rotation(), &params)?;
    Ok(CoarmaSpec::from_pairs(ar, mag))
}

/// Sweeps one pair-copula parameter; each row holds quadrature measures and a
/// simulated Spearman's rho with its standard error.
pub fn scan_dependence(
    template: &CoarmaSpec,
    side: Side,
    index: usize,
    grid: &[f64],
    n_sim: usize,
    seed: u64,
    u: f64,
    nodes: Option<usize>,
) -> Result<Vec<ScanRow>> {
    grid.par_iter()
        .enumerate()
        .map(|(i, &v)| {
            let model = with_param(template, side, index, v)?;
            let mut js = JointCdfSpec::new(model.clone())?;
            if let Some(n) = nodes {
                js = js.with_nodes(n)?;
            }
            let measures = dep_measures(&js, u)?;
            let sim = simulate(&model, n_sim, seed.wrapping_add(i as u64), crate::coarma::DEFAULT_BURN_IN)?;
            let (rho_sim, rho_sim_se) = spearman_uniform(&sim[1..], &sim[..sim.len() - 1]);
            Ok(ScanRow { param: v, rho_quad: measures.spearman_rho, rho_sim, rho_sim_se, measures })
        })
        .collect()
}
