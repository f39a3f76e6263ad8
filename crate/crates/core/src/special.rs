//! Scalar special functions: normal and Student-t distributions, log-gamma,
//! regularized incomplete beta, bivariate normal CDF and the Debye function.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal CDF, accurate to ~1e-15 absolute and relative in the lower tail.
pub fn norm_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    let tail = if ax > 38.5 {
        0.0
    } else if ax >= 3.0 {
        // Mills-ratio continued fraction, evaluated backward.
        let mut t = ax;
        for k in (1..=60).rev() {
            t = ax + k as f64 / t;
        }
        (-0.5 * ax * ax).exp() / SQRT_2PI / t
    } else {
        let mut num = 3.526_249_659_989_11e-2 * ax + 0.700_383_064_443_688;
        num = num * ax + 6.373_962_203_531_65;
        num = num * ax + 33.912_866_078_383;
        num = num * ax + 112.079_291_497_871;
        num = num * ax + 221.213_596_169_931;
        num = num * ax + 220.206_867_912_376;
        let mut den = 8.838_834_764_831_84e-2 * ax + 1.755_667_163_182_64;
        den = den * ax + 16.064_177_579_207;
        den = den * ax + 86.780_732_202_946_1;
        den = den * ax + 296.564_248_779_674;
        den = den * ax + 637.333_633_378_831;
        den = den * ax + 793.826_512_519_948;
        den = den * ax + 440.413_735_824_752;
        (-0.5 * ax * ax).exp() * num / den
    };
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    2.0 * norm_cdf(-x * std::f64::consts::SQRT_2)
}

/// Standard normal quantile. Returns +-inf at the endpoints.
pub fn norm_ppf(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        -lower_ppf(1.0 - p)
    } else {
        lower_ppf(p)
    }
}

fn lower_ppf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let x = if p < 0.024_25 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let mut x = x;
    for _ in 0..2 {
        let d = norm_pdf(x);
        if d <= 0.0 {
            break;
        }
        let u = (norm_cdf(x) - p) / d;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Natural log of the gamma function for x > 0 (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + a.ln()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta I_x(a, b), taking `y = 1 - x` separately so that
/// callers can pass an accurately computed complement.
pub fn inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * y.ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, y) / b
    }
}

/// Student-t CDF with `nu` degrees of freedom.
pub fn t_cdf(t: f64, nu: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    if let Some(f) = t_cdf_integer(t, nu) {
        return f;
    }
    let t2 = t * t;
    let x = nu / (nu + t2);
    let y = t2 / (nu + t2);
    let tail = 0.5 * inc_beta(0.5 * nu, 0.5, x, y);
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Finite trigonometric series for integer `nu`, used away from the tails
/// where 0.5 + A/2 would cancel.
fn t_cdf_integer(t: f64, nu: f64) -> Option<f64> {
    if !(1.0..=60.0).contains(&nu) || nu.fract() != 0.0 {
        return None;
    }
    let k = nu as u32;
    let th = (t / nu.sqrt()).atan();
    let (s, c) = th.sin_cos();
    let c2 = c * c;
    let a = if k % 2 == 1 {
        let mut sum = 0.0;
        if k > 1 {
            let mut term = c;
            sum = c;
            for j in (3..=k - 2).step_by(2) {
                term *= c2 * (j - 1) as f64 / j as f64;
                sum += term;
            }
        }
        2.0 / PI * (th + s * sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in (2..=k - 2).step_by(2) {
            term *= c2 * (j - 1) as f64 / j as f64;
            sum += term;
        }
        s * sum
    };
    let f = 0.5 + 0.5 * a;
    (f > 1e-3 && f < 1.0 - 1e-3).then_some(f)
}

/// Log of the Student-t density.
pub fn t_ln_pdf(t: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * PI).ln()
        - 0.5 * (nu + 1.0) * (t * t / nu).ln_1p()
}

/// Student-t density.
pub fn t_pdf(t: f64, nu: f64) -> f64 {
    t_ln_pdf(t, nu).exp()
}

/// Student-t quantile by safeguarded Newton iteration.
pub fn t_ppf(p: f64, nu: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    if p > 0.5 {
        return -t_lower_ppf(1.0 - p, nu);
    }
    t_lower_ppf(p, nu)
}

// Solves F(t) = p for p < 0.5, so t < 0.
fn t_lower_ppf(p: f64, nu: f64) -> f64 {
    if nu == 1.0 {
        return -1.0 / (PI * p).tan();
    }
    if nu == 2.0 {
        return (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
    }
    if nu == 4.0 {
        let ra = (4.0 * p * (1.0 - p)).sqrt();
        let q = ((ra.acos() / 3.0).cos() / ra - 1.0).max(0.0);
        let t = -2.0 * q.sqrt();
        return t - (t_cdf(t, nu) - p) / t_pdf(t, nu);
    }
    let z = norm_ppf(p);
    let z3 = z * z * z;
    let mut t = z + (z3 + z) / (4.0 * nu) + (5.0 * z3 * z * z + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu);
    // Tail guess: F(t) ~ c |t|^-nu.
    let ln_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
        + 0.5 * (nu - 1.0) * nu.ln()
        - nu.ln();
    let t_tail = -((ln_c - p.ln()) / nu).exp();
    if t_tail < t {
        t = t_tail;
    }
    if !(t < 0.0) || !t.is_finite() {
        t = -1.0;
    }
    let ln_p = p.ln();
    let mut lo = f64::NEG_INFINITY;
    let mut hi = 0.0_f64;
    for _ in 0..100 {
        let f = t_cdf(t, nu);
        if f > p {
            hi = t;
        } else {
            lo = t;
        }
        let g = f.ln() - ln_p;
        let step = g * f / t_pdf(t, nu);
        let mut next = t - step;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if lo.is_finite() {
                if hi - lo > 1.0 && lo < -1.0 && hi < -1.0 {
                    -((-lo).ln() * 0.5 + (-hi).ln() * 0.5).exp()
                } else {
                    0.5 * (lo + hi)
                }
            } else {
                2.0 * t.min(-1.0)
            };
        }
        if (next - t).abs() <= 1e-15 * t.abs().max(1e-300) {
            return next;
        }
        t = next;
    }
    t
}

const BVN_QUAD_6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197),
];

const BVN_QUAD_12: [(f64, f64); 6] = [
    (0.471_753_363_865_117_7e-1, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];

const BVN_QUAD_20: [(f64, f64); 10] = [
    (0.176_140_071_391_521_2e-1, -0.993_128_599_185_094_9),
    (0.406_014_298_003_869_4e-1, -0.963_971_927_277_913_8),
    (0.626_720_483_341_090_6e-1, -0.912_234_428_251_325_9),
    (0.832_767_415_767_047_5e-1, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.765_265_211_334_973_3e-1),
];

/// Upper bivariate normal probability P(X > dh, Y > dk) with correlation r
/// (Genz' BVND).
pub fn bvnd(dh: f64, dk: f64, r: f64) -> f64 {
    let two_pi_inv = 0.5 / PI;
    let quad: &[(f64, f64)] = if r.abs() < 0.3 {
        &BVN_QUAD_6
    } else if r.abs() < 0.75 {
        &BVN_QUAD_12
    } else {
        &BVN_QUAD_20
    };
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        if r.abs() > 0.0 {
            let hs = (h * h + k * k) / 2.0;
            let asr = 0.5 * r.asin();
            for &(w, x) in quad {
                for is in [-1.0, 1.0] {
                    let sn = (asr * (is * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr * two_pi_inv;
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * SQRT_2PI
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(w, x) in quad {
            for is in [-1.0, 1.0] {
                let xs = a * (is * x + 1.0);
                let xs2 = xs * xs;
                let rs = (1.0 - xs2).sqrt();
                let asr = -0.5 * (b_s / xs2 + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs2 * (1.0 + d * xs2)));
                }
            }
        }
        bvn *= -two_pi_inv;
    }
    if r > 0.0 {
        bvn += norm_cdf(-h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            bvn += norm_cdf(k) - norm_cdf(h);
        }
    }
    bvn
}

/// Bivariate standard normal CDF P(X <= x, Y <= y) with correlation r.
pub fn bvn_cdf(x: f64, y: f64, r: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return norm_cdf(y);
    }
    if y == f64::INFINITY {
        return norm_cdf(x);
    }
    bvnd(-x, -y, r).clamp(0.0, 1.0)
}

/// Debye function D_1(x) = (1/x) * int_0^x t / (e^t - 1) dt, for any real x.
pub fn debye1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 1.0 - x / 4.0;
    }
    if x < 0.0 {
        return debye1(-x) - x / 2.0;
    }
    let gl = crate::quadrature::GaussLegendre::cached(64);
    let integral = gl.integrate(0.0, x, |t| if t == 0.0 { 1.0 } else { t / t.exp_m1() });
    integral / x
}
