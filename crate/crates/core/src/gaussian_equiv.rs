//! Maps between Gaussian pair-copula parameters and the coefficients of the
//! equivalent Gaussian ARMA model for Y_t = Phi^-1(U_t).

use nalgebra::{DMatrix, DVector};

use crate::coarma::{simulate, CoarmaSpec, DEFAULT_BURN_IN};
use crate::copula::CopulaSpec;
use crate::error::{CoarmaError, Result};
use crate::special::norm_ppf;
use crate::stats;

/// Y_t = sum phi_j Y_{t-j} + eta_t + sum psi_j eta_{t-j}, eta_t ~ N(0, innovation_sd^2).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaCoeffs {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub innovation_sd: f64,
}

fn check_open(xs: &[f64], what: &str) -> Result<()> {
    if let Some(x) = xs.iter().find(|x| !(x.abs() < 1.0)) {
        return Err(CoarmaError::domain(format!("{what} parameter {x} outside (-1, 1)")));
    }
    Ok(())
}

/// AR coefficients from the partial autocorrelations (Levinson recursion).
pub fn ar_phi(alphas: &[f64]) -> Result<Vec<f64>> {
    check_open(alphas, "AR")?;
    let mut phi: Vec<f64> = Vec::with_capacity(alphas.len());
    for (k, &a) in alphas.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - a * prev[k - 1 - j];
        }
        phi.push(a);
    }
    Ok(phi)
}

/// Partial autocorrelations from an autocorrelation sequence (Durbin-Levinson).
pub fn pacf_from_acf(rho: &[f64], max_lag: usize) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::new();
    let mut v = 1.0;
    let mut out = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let a = num / v;
        let prev = phi.clone();
        for j in 0..k - 1 {
            phi[j] = prev[j] - a * prev[k - 2 - j];
        }
        phi.push(a);
        v *= 1.0 - a * a;
        out.push(a);
    }
    out
}

pub fn sigma_product(params: &[f64]) -> f64 {
    params.iter().map(|a| (1.0 - a * a).sqrt()).product()
}

/// MA coefficients of a Gaussian MAG D-vine, relative to innovation sd sigma_beta.
pub fn mag_theta(betas: &[f64]) -> Result<Vec<f64>> {
    check_open(betas, "MAG")?;
    let sb = sigma_product(betas);
    let mut acc = 1.0;
    let mut out = Vec::with_capacity(betas.len());
    for &b in betas {
        out.push(acc * b / sb);
        acc *= (1.0 - b * b).sqrt();
    }
    Ok(out)
}

/// ARMA representation of a Gaussian CoARMA(p,q).
pub fn coarma_psi(alphas: &[f64], betas: &[f64]) -> Result<ArmaCoeffs> {
    let phi = ar_phi(alphas)?;
    let p = alphas.len();
    let q = betas.len();
    if q == 0 {
        return Ok(ArmaCoeffs { phi, psi: Vec::new(), innovation_sd: sigma_product(alphas) });
    }
    let theta = mag_theta(betas)?;
    let sa = sigma_product(alphas);
    let m = (p + q - 1).max(q);
    // MA polynomial (1 - sum phi_j B^j)(1 + sum_{i<q} theta_i B^i) + theta_q sigma_alpha B^q
    let mut poly = vec![0.0; m + 1];
    for r in 0..=p {
        let a = if r == 0 { 1.0 } else { -phi[r - 1] };
        for s in 0..q {
            let b = if s == 0 { 1.0 } else { theta[s - 1] };
            poly[r + s] += a * b;
        }
    }
    poly[q] += theta[q - 1] * sa;
    Ok(ArmaCoeffs { phi, psi: poly[1..].to_vec(), innovation_sd: sigma_product(betas) })
}

impl ArmaCoeffs {
    /// MA(infinity) weights psi_0 = 1, psi_1, ..., psi_{n-1}.
    pub fn impulse_response(&self, n: usize) -> Vec<f64> {
        let mut w = vec![0.0; n];
        for j in 0..n {
            let mut v = if j == 0 { 1.0 } else { self.psi.get(j - 1).copied().unwrap_or(0.0) };
            for (i, f) in self.phi.iter().enumerate() {
                if j > i {
                    v += f * w[j - i - 1];
                }
            }
            w[j] = v;
        }
        w
    }

    /// Exact autocovariances at lags 0..=max_lag.
    pub fn autocovariance(&self, max_lag: usize) -> Result<Vec<f64>> {
        let p = self.phi.len();
        let m = self.psi.len();
        let s2 = self.innovation_sd.powi(2);
        let w = self.impulse_response(m + 1);
        let theta = |j: usize| if j == 0 { 1.0 } else { self.psi.get(j - 1).copied().unwrap_or(0.0) };
        // rhs_k = s2 sum_{j=k}^{m} theta_j psi_{j-k}
        let rhs = |k: usize| (k..=m).map(|j| theta(j) * w[j - k]).sum::<f64>() * s2;
        let mut a = DMatrix::<f64>::zeros(p + 1, p + 1);
        let mut b = DVector::<f64>::zeros(p + 1);
        for k in 0..=p {
            a[(k, k)] += 1.0;
            for j in 1..=p {
                let lag = (k as isize - j as isize).unsigned_abs();
                a[(k, lag)] -= self.phi[j - 1];
            }
            b[k] = rhs(k);
        }
        let g0 = a
            .lu()
            .solve(&b)
            .ok_or_else(|| CoarmaError::domain("AR part is not stationary"))?;
        let mut g: Vec<f64> = g0.iter().copied().collect();
        for k in p + 1..=max_lag.max(p) {
            let mut v = rhs(k);
            for j in 1..=p {
                v += self.phi[j - 1] * g[k - j];
            }
            g.push(v);
        }
        g.truncate(max_lag + 1);
        Ok(g)
    }

    pub fn variance(&self) -> Result<f64> {
        Ok(self.autocovariance(0)?[0])
    }

    pub fn acf(&self, max_lag: usize) -> Result<Vec<f64>> {
        let g = self.autocovariance(max_lag)?;
        Ok(g.iter().map(|x| x / g[0]).collect())
    }
}

/// Bartlett standard errors of sample autocorrelations at lags 1..=max_lag.
pub fn bartlett_se(rho: &[f64], n: usize, max_lag: usize) -> Vec<f64> {
    let get = |j: isize| rho.get(j.unsigned_abs()).copied().unwrap_or(0.0);
    let m = rho.len() as isize - 1;
    (1..=max_lag as isize)
        .map(|k| {
            let rk = get(k);
            let mut s = 0.0;
            for j in -m..=m {
                let rj = get(j);
                s += get(j + k).powi(2) + get(j - k) * get(j + k) + 2.0 * rk * rk * rj * rj
                    - 4.0 * rk * rj * get(j + k);
            }
            (s.max(0.0) / n as f64).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagCheck {
    pub lag: usize,
    pub sample: f64,
    pub theory: f64,
    pub se: f64,
}

impl LagCheck {
    pub fn z(&self) -> f64 {
        (self.sample - self.theory) / self.se
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub coeffs: ArmaCoeffs,
    /// Lag 0 compares the sample variance with 1; other lags compare autocorrelations.
    pub lags: Vec<LagCheck>,
    pub sample_variance: f64,
    pub max_abs_dev: f64,
    pub pass: bool,
}

pub fn gaussian_spec(alphas: &[f64], betas: &[f64]) -> Result<CoarmaSpec> {
    let ar = alphas.iter().map(|&a| CopulaSpec::gaussian(a)).collect::<Result<Vec<_>>>()?;
    let mag = betas.iter().map(|&b| CopulaSpec::gaussian(b)).collect::<Result<Vec<_>>>()?;
    Ok(CoarmaSpec::from_pairs(ar, mag))
}

/// Simulates the Gaussian CoARMA model and compares the normal-scores ACF with
/// the ARMA theory (3 standard errors per lag, variance within 0.02 of 1).
pub fn verify_equivalence(alphas: &[f64], betas: &[f64], n: usize, seed: u64, max_lag: usize) -> Result<EquivalenceReport> {
    let coeffs = coarma_psi(alphas, betas)?;
    let spec = gaussian_spec(alphas, betas)?;
    let y: Vec<f64> = simulate(&spec, n, seed, DEFAULT_BURN_IN)?.into_iter().map(norm_ppf).collect();
    let theory_g = coeffs.autocovariance(max_lag.max(400))?;
    let theory: Vec<f64> = theory_g.iter().map(|g| g / theory_g[0]).collect();
    let sample = stats::acf(&y, max_lag);
    let var = stats::variance(&y);
    let ses = bartlett_se(&theory, n, max_lag);
    let var_se = (2.0 * (theory_g[0].powi(2) + 2.0 * theory_g[1..].iter().map(|g| g * g).sum::<f64>()) / n as f64).sqrt();
    let mut lags = vec![LagCheck { lag: 0, sample: var, theory: theory_g[0], se: var_se }];
    for k in 1..=max_lag {
        lags.push(LagCheck { lag: k, sample: sample[k], theory: theory[k], se: ses[k - 1] });
    }
    let max_abs_dev = lags.iter().map(|l| (l.sample - l.theory).abs()).fold(0.0, f64::max);
    let pass = lags.iter().all(|l| l.z().abs() <= 3.0) && (var - 1.0).abs() <= 0.02;
    Ok(EquivalenceReport { coeffs, lags, sample_variance: var, max_abs_dev, pass })
}
