//! Bivariate copula families: CDF, density, h-function and its inverse.
//!
//! `h(u, v)` is the conditional distribution `P(U <= u | V = v) = dC(u, v)/dv`.
//! All families here are exchangeable, so conditioning on either argument uses
//! the same formula.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{CoarmaError, Result};
use crate::quadrature::integrate_adaptive;
use crate::roots::{brent, invert_unit_increasing};
use crate::special::{bvn_cdf, debye1, ln_gamma, norm_cdf, norm_ppf, t_cdf, t_ppf};

static BOUNDARY_EPS_BITS: AtomicU64 = AtomicU64::new(1e-12f64.to_bits());

/// Current boundary clamp: arguments are moved into [eps, 1 - eps].
pub fn boundary_eps() -> f64 {
    f64::from_bits(BOUNDARY_EPS_BITS.load(Ordering::Relaxed))
}

/// Sets the process-wide boundary clamp. Values outside (0, 0.01] are rejected.
pub fn set_boundary_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.01) {
        return Err(CoarmaError::domain(format!("boundary eps {eps} outside (0, 0.01]")));
    }
    BOUNDARY_EPS_BITS.store(eps.to_bits(), Ordering::Relaxed);
    Ok(())
}

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    let eps = boundary_eps();
    x.clamp(eps, 1.0 - eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Independence,
    Comonotone,
    Gaussian,
    StudentT,
    Clayton,
    Gumbel,
    Frank,
    Frechet,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Independence,
        Family::Comonotone,
        Family::Gaussian,
        Family::StudentT,
        Family::Clayton,
        Family::Gumbel,
        Family::Frank,
        Family::Frechet,
    ];

    pub fn n_params(self) -> usize {
        match self {
            Family::Independence | Family::Comonotone => 0,
            Family::StudentT => 2,
            _ => 1,
        }
    }

    /// Long token name.
    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Comonotone => "comonotone",
            Family::Gaussian => "gaussian",
            Family::StudentT => "t",
            Family::Clayton => "clayton",
            Family::Gumbel => "gumbel",
            Family::Frank => "frank",
            Family::Frechet => "frechet",
        }
    }

    /// Short code used in compact model strings.
    pub fn code(self) -> &'static str {
        match self {
            Family::Independence => "i",
            Family::Comonotone => "m",
            Family::Gaussian => "n",
            Family::StudentT => "t",
            Family::Clayton => "c",
            Family::Gumbel => "g",
            Family::Frank => "f",
            Family::Frechet => "fr",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        let s = s.to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.code() == s)
            .or(match s.as_str() {
                "normal" | "gauss" => Some(Family::Gaussian),
                "student" | "studentt" => Some(Family::StudentT),
                "indep" => Some(Family::Independence),
                _ => None,
            })
    }

    /// False for families with a singular component (no density).
    pub fn is_absolutely_continuous(self) -> bool {
        !matches!(self, Family::Comonotone | Family::Frechet)
    }

    pub fn is_radially_symmetric(self) -> bool {
        !matches!(self, Family::Clayton | Family::Gumbel)
    }

    /// Kendall's tau for the (first) dependence parameter.
    pub fn tau(self, params: &[f64]) -> f64 {
        match self {
            Family::Independence => 0.0,
            Family::Comonotone => 1.0,
            Family::Gaussian | Family::StudentT => 2.0 / std::f64::consts::PI * params[0].asin(),
            Family::Clayton => params[0] / (params[0] + 2.0),
            Family::Gumbel => 1.0 - 1.0 / params[0],
            Family::Frank => frank_tau(params[0]),
            Family::Frechet => params[0] * (params[0] + 2.0) / 3.0,
        }
    }

    /// Inverse of [`Family::tau`] for the first dependence parameter.
    pub fn param_from_tau(self, tau: f64) -> Result<f64> {
        let bad = || CoarmaError::domain(format!("tau {tau} not attainable by {}", self.name()));
        if !(-1.0..=1.0).contains(&tau) || tau.is_nan() {
            return Err(bad());
        }
        match self {
            Family::Gaussian | Family::StudentT => {
                if tau.abs() >= 1.0 {
                    return Err(bad());
                }
                Ok((std::f64::consts::FRAC_PI_2 * tau).sin())
            }
            Family::Clayton => {
                if tau <= 0.0 || tau >= 1.0 {
                    return Err(bad());
                }
                Ok(2.0 * tau / (1.0 - tau))
            }
            Family::Gumbel => {
                if !(0.0..1.0).contains(&tau) {
                    return Err(bad());
                }
                Ok(1.0 / (1.0 - tau))
            }
            Family::Frank => {
                if tau == 0.0 || tau.abs() >= 1.0 {
                    return Err(bad());
                }
                let sign = tau.signum();
                let target = tau.abs();
                let mut hi = 1.0;
                while frank_tau(hi) < target {
                    hi *= 2.0;
                    if hi > 1e4 {
                        return Err(bad());
                    }
                }
                let theta = brent(|t| frank_tau(t) - target, 1e-10, hi, 1e-14, 200)?;
                Ok(sign * theta)
            }
            Family::Frechet => {
                if !(0.0..=1.0).contains(&tau) {
                    return Err(bad());
                }
                Ok(-1.0 + (1.0 + 3.0 * tau).sqrt())
            }
            Family::Independence | Family::Comonotone => Err(CoarmaError::Unsupported(format!(
                "{} has no dependence parameter",
                self.name()
            ))),
        }
    }
}

fn frank_tau(theta: f64) -> f64 {
    if theta.abs() < 1e-6 {
        return theta / 9.0;
    }
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Rotation {
    #[default]
    None,
    R180,
}

/// A validated bivariate copula: family, rotation and parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSpec {
    family: Family,
    rotation: Rotation,
    params: [f64; 2],
}

/// Variant of the approximate Gumbel reciprocal chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReciprocalVariant {
    /// rho' = sqrt(1 - rho^2), consistent with the Gaussian rule.
    #[default]
    SquareRoot,
    /// rho' = sqrt(1 - rho), the literal text variant.
    Literal,
}

impl CopulaSpec {
    pub fn new(family: Family, rotation: Rotation, params: &[f64]) -> Result<Self> {
        if params.len() != family.n_params() {
            return Err(CoarmaError::domain(format!(
                "{} expects {} parameter(s), got {}",
                family.name(),
                family.n_params(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(CoarmaError::domain(format!("non-finite parameter for {}", family.name())));
        }
        let bad = |what: &str| Err(CoarmaError::domain(format!("{}: {what}", family.name())));
        match family {
            Family::Gaussian if params[0].abs() >= 1.0 => return bad("correlation must lie in (-1, 1)"),
            Family::StudentT if params[0].abs() >= 1.0 => return bad("correlation must lie in (-1, 1)"),
            Family::StudentT if params[1] <= 2.0 => return bad("degrees of freedom must exceed 2"),
            Family::Clayton if params[0] <= 0.0 => return bad("parameter must be > 0"),
            Family::Gumbel if params[0] < 1.0 => return bad("parameter must be >= 1"),
            Family::Frank if params[0] == 0.0 => return bad("parameter must be nonzero"),
            Family::Frechet if !(0.0..=1.0).contains(&params[0]) => return bad("weight must lie in [0, 1]"),
            _ => {}
        }
        let rotation = if family.is_radially_symmetric() { Rotation::None } else { rotation };
        let mut p = [0.0; 2];
        p[..params.len()].copy_from_slice(params);
        Ok(Self { family, rotation, params: p })
    }

    pub fn independence() -> Self {
        Self { family: Family::Independence, rotation: Rotation::None, params: [0.0; 2] }
    }

    pub fn comonotone() -> Self {
        Self { family: Family::Comonotone, rotation: Rotation::None, params: [0.0; 2] }
    }

    pub fn gaussian(rho: f64) -> Result<Self> {
        Self::new(Family::Gaussian, Rotation::None, &[rho])
    }

    pub fn student_t(rho: f64, nu: f64) -> Result<Self> {
        Self::new(Family::StudentT, Rotation::None, &[rho, nu])
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Self::new(Family::Clayton, Rotation::None, &[theta])
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        Self::new(Family::Gumbel, Rotation::None, &[theta])
    }

    pub fn frank(theta: f64) -> Result<Self> {
        Self::new(Family::Frank, Rotation::None, &[theta])
    }

    pub fn frechet(alpha: f64) -> Result<Self> {
        Self::new(Family::Frechet, Rotation::None, &[alpha])
    }

    /// Builds a spec from Kendall's tau; `nu` is required for the t family.
    pub fn from_tau(family: Family, rotation: Rotation, tau: f64, nu: Option<f64>) -> Result<Self> {
        let first = family.param_from_tau(tau)?;
        match family {
            Family::StudentT => {
                let nu = nu.ok_or_else(|| CoarmaError::domain("t family needs degrees of freedom"))?;
                Self::new(family, rotation, &[first, nu])
            }
            _ => Self::new(family, rotation, &[first]),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rotation(&self) -> Rotation {
        self.rotation
    }

    pub fn params(&self) -> &[f64] {
        &self.params[..self.family.n_params()]
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.family.is_absolutely_continuous()
    }

    /// True when the conditional distribution has an atom (h jumps in its first argument).
    pub fn has_atom(&self) -> bool {
        match self.family {
            Family::Comonotone => true,
            Family::Frechet => self.params[0] > 0.0,
            _ => false,
        }
    }

    pub fn tau(&self) -> f64 {
        self.family.tau(self.params())
    }

    /// Copula CDF C(u, v).
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let c = match self.rotation {
            Rotation::None => self.base_cdf(u, v),
            Rotation::R180 => u + v - 1.0 + self.base_cdf(1.0 - u, 1.0 - v),
        };
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }

    /// Conditional CDF P(U <= u | V = v).
    pub fn h(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        if self.has_atom() {
            return self.base_h(u, v.clamp(0.0, 1.0));
        }
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let r = match self.rotation {
            Rotation::None => self.base_h(u, v),
            Rotation::R180 => 1.0 - self.base_h(1.0 - u, 1.0 - v),
        };
        r.clamp(0.0, 1.0)
    }

    /// Conditional quantile: the generalized inverse of `h(., v)` at `p`.
    pub fn hinv(&self, p: f64, v: f64) -> Result<f64> {
        if p.is_nan() || v.is_nan() {
            return Err(CoarmaError::domain("NaN argument to hinv"));
        }
        if p <= 0.0 {
            return Ok(0.0);
        }
        if p >= 1.0 {
            return Ok(1.0);
        }
        if self.has_atom() {
            return Ok(self.base_hinv(p, v.clamp(0.0, 1.0))?.clamp(0.0, 1.0));
        }
        let (p, v) = (clamp_unit(p), clamp_unit(v));
        let r = match self.rotation {
            Rotation::None => self.base_hinv(p, v)?,
            Rotation::R180 => 1.0 - self.base_hinv(1.0 - p, 1.0 - v)?,
        };
        Ok(r.clamp(0.0, 1.0))
    }

    /// Copula density. Errors for families with a singular component.
    pub fn pdf(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.ln_pdf(u, v)?.exp())
    }

    /// Log copula density.
    pub fn ln_pdf(&self, u: f64, v: f64) -> Result<f64> {
        if !self.family.is_absolutely_continuous() {
            return Err(CoarmaError::Unsupported(format!(
                "{} copula has a singular component and no density",
                self.family.name()
            )));
        }
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        Ok(match self.rotation {
            Rotation::None => self.base_ln_pdf(u, v),
            Rotation::R180 => self.base_ln_pdf(1.0 - u, 1.0 - v),
        })
    }

    /// Reciprocal-representation parameter for Gaussian (exact) and Gumbel (approximate).
    pub fn reciprocal(&self, variant: ReciprocalVariant) -> Result<CopulaSpec> {
        match self.family {
            Family::Gaussian => {
                let a = self.params[0];
                Self::gaussian((1.0 - a * a).sqrt())
            }
            Family::Gumbel => {
                let tau = self.tau();
                let rho = (std::f64::consts::FRAC_PI_2 * tau).sin();
                let rho_dagger = match variant {
                    ReciprocalVariant::SquareRoot => (1.0 - rho * rho).sqrt(),
                    ReciprocalVariant::Literal => (1.0 - rho).sqrt(),
                };
                let tau_dagger = 2.0 / std::f64::consts::PI * rho_dagger.asin();
                Self::new(Family::Gumbel, self.rotation, &[1.0 / (1.0 - tau_dagger)])
            }
            f => Err(CoarmaError::Unsupported(format!("no reciprocal rule for {}", f.name()))),
        }
    }

    fn base_cdf(&self, u: f64, v: f64) -> f64 {
        let p = self.params;
        match self.family {
            Family::Independence => u * v,
            Family::Comonotone => u.min(v),
            Family::Frechet => (1.0 - p[0]) * u * v + p[0] * u.min(v),
            Family::Gaussian => bvn_cdf(norm_ppf(u), norm_ppf(v), p[0]),
            Family::StudentT => student_t_cdf(u, v, p[0], p[1]),
            Family::Clayton => (-clayton_l(u, v, p[0]) / p[0]).exp(),
            Family::Gumbel => {
                let (_, _, s, _) = gumbel_parts(u, v, p[0]);
                (-s).exp()
            }
            Family::Frank => {
                let t = p[0];
                if t.abs() < 1.0 {
                    let num = (-t * u).exp_m1() * (-t * v).exp_m1();
                    -(num / (-t).exp_m1()).ln_1p() / t
                } else {
                    -(frank_den(u, v, t) / -(-t).exp_m1()).ln() / t
                }
            }
        }
    }

    fn base_h(&self, u: f64, v: f64) -> f64 {
        let p = self.params;
        match self.family {
            Family::Independence => u,
            Family::Comonotone => {
                if v <= u {
                    1.0
                } else {
                    0.0
                }
            }
            Family::Frechet => (1.0 - p[0]) * u + if v <= u { p[0] } else { 0.0 },
            Family::Gaussian => {
                let r = p[0];
                norm_cdf((norm_ppf(u) - r * norm_ppf(v)) / (1.0 - r * r).sqrt())
            }
            Family::StudentT => {
                let (r, nu) = (p[0], p[1]);
                let x = t_ppf(u, nu);
                let y = t_ppf(v, nu);
                let scale = ((nu + y * y) * (1.0 - r * r) / (nu + 1.0)).sqrt();
                t_cdf((x - r * y) / scale, nu + 1.0)
            }
            Family::Clayton => {
                let t = p[0];
                let lb = -t * v.ln();
                ((1.0 + 1.0 / t) * (lb - clayton_l(u, v, t))).exp()
            }
            Family::Gumbel => {
                let t = p[0];
                let (_, y, s, _) = gumbel_parts(u, v, t);
                (y - s + (t - 1.0) * (y.ln() - s.ln())).exp()
            }
            Family::Frank => {
                let t = p[0];
                -(-t * v).exp() * (-t * u).exp_m1() / frank_den(u, v, t)
            }
        }
    }

    fn base_hinv(&self, q: f64, v: f64) -> Result<f64> {
        let p = self.params;
        Ok(match self.family {
            Family::Independence => q,
            Family::Comonotone => v,
            Family::Frechet => {
                let a = p[0];
                let lo = (1.0 - a) * v;
                if q <= lo {
                    q / (1.0 - a)
                } else if q <= lo + a {
                    v
                } else {
                    (q - a) / (1.0 - a)
                }
            }
            Family::Gaussian => {
                let r = p[0];
                norm_cdf((1.0 - r * r).sqrt() * norm_ppf(q) + r * norm_ppf(v))
            }
            Family::StudentT => {
                let (r, nu) = (p[0], p[1]);
                let y = t_ppf(v, nu);
                let scale = ((nu + y * y) * (1.0 - r * r) / (nu + 1.0)).sqrt();
                t_cdf(t_ppf(q, nu + 1.0) * scale + r * y, nu)
            }
            Family::Clayton => {
                let t = p[0];
                let lb = -t * v.ln();
                let s = -(t / (t + 1.0)) * q.ln();
                let em = s.exp_m1();
                let z = lb + em.ln();
                let lu = if z > 30.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
                (-lu / t).exp()
            }
            Family::Frank => {
                let t = p[0];
                if t.abs() < 1.0 {
                    let b = (-t * v).exp_m1();
                    let a = q * (-t).exp_m1() / (1.0 + (1.0 - q) * b);
                    -a.ln_1p() / t
                } else {
                    let lq = q.ln();
                    let lq1 = (-q).ln_1p();
                    let num = log_add_exp(lq1 - t * v, lq - t);
                    let den = log_add_exp(lq, lq1 - t * v);
                    -(num - den) / t
                }
            }
            Family::Gumbel => {
                invert_unit_increasing(
                    |u| {
                        if u <= 0.0 {
                            0.0
                        } else if u >= 1.0 {
                            1.0
                        } else {
                            self.base_h(u, v)
                        }
                    },
                    q,
                )?
            }
        })
    }

    fn base_ln_pdf(&self, u: f64, v: f64) -> f64 {
        let p = self.params;
        match self.family {
            Family::Independence => 0.0,
            Family::Comonotone | Family::Frechet => f64::NAN,
            Family::Gaussian => {
                let r = p[0];
                let x = norm_ppf(u);
                let y = norm_ppf(v);
                let om = 1.0 - r * r;
                -0.5 * om.ln() - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * om)
            }
            Family::StudentT => {
                let (r, nu) = (p[0], p[1]);
                let x = t_ppf(u, nu);
                let y = t_ppf(v, nu);
                let om = 1.0 - r * r;
                ln_gamma(0.5 * (nu + 2.0)) + ln_gamma(0.5 * nu) - 2.0 * ln_gamma(0.5 * (nu + 1.0))
                    - 0.5 * om.ln()
                    - 0.5 * (nu + 2.0) * ((x * x + y * y - 2.0 * r * x * y) / (nu * om)).ln_1p()
                    + 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p())
            }
            Family::Clayton => {
                let t = p[0];
                (1.0 + t).ln() - (t + 1.0) * (u.ln() + v.ln()) - (2.0 + 1.0 / t) * clayton_l(u, v, t)
            }
            Family::Gumbel => {
                let t = p[0];
                let (x, y, s, ln_a) = gumbel_parts(u, v, t);
                -s + x + y + (t - 1.0) * (x.ln() + y.ln()) + (1.0 / t - 2.0) * ln_a + (s + t - 1.0).ln()
            }
            Family::Frank => {
                let t = p[0];
                (t * -(-t).exp_m1()).ln() - t * (u + v) - 2.0 * frank_den(u, v, t).abs().ln()
            }
        }
    }
}

// e^{-tu} + e^{-tv} - e^{-t(u+v)} - e^{-t}, written as a sum of same-signed terms.
fn frank_den(u: f64, v: f64, t: f64) -> f64 {
    -(-t * u).exp() * (-t * v).exp_m1() - (-t * v).exp() * (-t * (1.0 - v)).exp_m1()
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

// ln(u^-t + v^-t - 1) for Clayton.
fn clayton_l(u: f64, v: f64, t: f64) -> f64 {
    let la = -t * u.ln();
    let lb = -t * v.ln();
    let m = la.max(lb);
    if m < 1.0 {
        (la.exp_m1() + lb.exp_m1()).ln_1p()
    } else {
        m + ((la - m).exp() + (lb - m).exp() - (-m).exp()).ln()
    }
}

// (x, y, s, ln A) for Gumbel with x = -ln u, y = -ln v, A = x^t + y^t, s = A^(1/t).
fn gumbel_parts(u: f64, v: f64, t: f64) -> (f64, f64, f64, f64) {
    let x = -u.ln();
    let y = -v.ln();
    let (big, small) = if x >= y { (x, y) } else { (y, x) };
    let ln_a = t * big.ln() + (small / big).powf(t).ln_1p();
    let s = (ln_a / t).exp();
    (x, y, s, ln_a)
}

fn student_t_cdf(u: f64, v: f64, r: f64, nu: f64) -> f64 {
    let xa = t_ppf(u, nu);
    let yb = t_ppf(v, nu);
    let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * std::f64::consts::PI).ln();
    let om = 1.0 - r * r;
    let g = |y: f64| {
        let k = ((nu + 1.0) / ((nu + y * y) * om)).sqrt();
        let dens = (ln_norm - 0.5 * (nu + 1.0) * (y * y / nu).ln_1p()).exp();
        t_cdf((xa - r * y) * k, nu + 1.0) * dens
    };
    let sigma = yb.abs().max(1.0);
    let tail = |sign: f64| {
        integrate_adaptive(0.0, 1.0, 1e-12, |tau| {
            if tau <= 0.0 {
                return 0.0;
            }
            let y = yb + sign * sigma * (1.0 - tau) / tau;
            g(y) * sigma / (tau * tau)
        })
    };
    let c = if yb <= 0.0 { tail(-1.0) } else { u - tail(1.0) };
    c.clamp((u + v - 1.0).max(0.0), u.min(v))
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        if self.rotation == Rotation::R180 {
            f.write_str("180")?;
        }
        let ps = self.params();
        if !ps.is_empty() {
            f.write_str(":")?;
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}

/// Splits a family token such as `gumbel180` into family and rotation.
pub fn parse_family_token(tok: &str) -> Option<(Family, Rotation)> {
    let tok = tok.trim();
    if let Some(base) = tok.strip_suffix("180") {
        if let Some(f) = Family::from_name(base) {
            return Some((f, Rotation::R180));
        }
    }
    Family::from_name(tok).map(|f| (f, Rotation::None))
}

impl FromStr for CopulaSpec {
    type Err = CoarmaError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let (family, rotation) = parse_family_token(name)
            .ok_or_else(|| CoarmaError::Parse { pos: 0, msg: format!("unknown copula family '{name}'") })?;
        let mut params = Vec::new();
        if let Some(rest) = rest {
            for (i, tok) in rest.split(',').enumerate() {
                let v: f64 = tok.trim().parse().map_err(|_| CoarmaError::Parse {
                    pos: name.len() + 1 + i,
                    msg: format!("bad parameter '{tok}'"),
                })?;
                params.push(v);
            }
        }
        CopulaSpec::new(family, rotation, &params)
    }
}
