use coarma_core::quadrature::{integrate_adaptive, GaussLegendre};
use coarma_core::special::*;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::gamma;

// Frozen values computed with 40-digit arithmetic.
const NORM_CDF_TABLE: [(f64, f64); 25] = [
    (-37.0, 5.725571222524577e-300),
    (-30.0, 4.906713927148187e-198),
    (-20.0, 2.7536241186062337e-89),
    (-12.0, 1.776482112077679e-33),
    (-9.5, 1.0494515075362608e-21),
    (-7.03, 1.0326676912942681e-12),
    (-6.0, 9.86587645037698e-10),
    (-5.0, 2.866515718791939e-07),
    (-4.0, 3.1671241833119924e-05),
    (-3.2, 0.0006871379379158481),
    (-3.0, 0.0013498980316300946),
    (-2.7, 0.0034669738030406664),
    (-2.0, 0.02275013194817921),
    (-1.3, 0.09680048458561033),
    (-0.5, 0.3085375387259869),
    (-0.1, 0.460172162722971),
    (0.0, 0.5),
    (0.25, 0.5987063256829237),
    (0.8, 0.7881446014166034),
    (1.7, 0.955434537241457),
    (2.9, 0.998134186699616),
    (3.1, 0.9990323967867817),
    (4.5, 0.9999966023268753),
    (6.0, 0.9999999990134123),
    (8.5, 1.0),
];

const NORM_PPF_TABLE: [(f64, f64); 12] = [
    (1e-300, -37.0470962993612),
    (1e-100, -21.273453560965326),
    (1e-20, -9.262340089798407),
    (1e-12, -7.034483825301132),
    (1e-6, -4.753424308822899),
    (0.001, -3.0902323061678136),
    (0.02425, -1.972961051311885),
    (0.1, -1.2815515655446004),
    (0.3, -0.5244005127080408),
    (0.7, 0.5244005127080407),
    (0.97575, 1.972961051311885),
    (0.999, 3.090232306167813),
];

#[test]
fn normal_cdf_matches_frozen_values() {
    for &(x, expected) in &NORM_CDF_TABLE {
        let ours = norm_cdf(x);
        assert!((ours - expected).abs() < 1e-15, "x={x}");
        if x < 0.0 {
            assert!(((ours - expected) / expected).abs() < 1e-13, "relative error at {x}: {ours} vs {expected}");
        }
    }
    assert!((erfc(-2.7 / std::f64::consts::SQRT_2) - 2.0 * 0.9965330261969593).abs() < 1e-15);
}

#[test]
fn normal_quantile_matches_frozen_values_and_inverts() {
    for &(p, expected) in &NORM_PPF_TABLE {
        let ours = norm_ppf(p);
        assert!((ours - expected).abs() <= 1e-13 * expected.abs().max(1.0), "p={p} ours={ours} ref={expected}");
    }
    assert_eq!(norm_ppf(0.5), 0.0);
    for i in 1..1000 {
        let p = i as f64 / 1000.0;
        assert!((norm_cdf(norm_ppf(p)) - p).abs() < 1e-15);
    }
    assert_eq!(norm_ppf(0.0), f64::NEG_INFINITY);
    assert_eq!(norm_ppf(1.0), f64::INFINITY);
    assert!(norm_ppf(1.5).is_nan());
}

#[test]
fn ln_gamma_matches_reference() {
    for &x in &[0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 52.5, 171.0, 1000.0] {
        let r = gamma::ln_gamma(x);
        assert!((ln_gamma(x) - r).abs() < 1e-12 * r.abs().max(1.0), "x={x}");
    }
}

#[test]
fn student_t_matches_reference() {
    for &nu in &[1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 7.5, 9.0, 30.0, 200.0] {
        let d = StudentsT::new(0.0, 1.0, nu).unwrap();
        let mut t = -40.0;
        while t <= 40.0 {
            let ours = t_cdf(t, nu);
            let theirs = d.cdf(t);
            assert!((ours - theirs).abs() < 1e-12, "nu={nu} t={t} ours={ours} ref={theirs}");
            t += 0.173;
        }
        for &p in &[1e-12, 1e-8, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-8] {
            let q = t_ppf(p, nu);
            let back = t_cdf(q, nu);
            assert!((back - p).abs() <= 1e-13 * p.min(1.0 - p).max(1e-3), "nu={nu} p={p} q={q} back={back}");
        }
        let pdf_int = integrate_adaptive(-60.0, 60.0, 1e-12, |x| t_pdf(x, nu));
        assert!((pdf_int - (t_cdf(60.0, nu) - t_cdf(-60.0, nu))).abs() < 1e-9);
    }
}

#[test]
fn bivariate_normal_orthant_identity() {
    for &r in &[-0.999_f64, -0.95, -0.9, -0.5, -0.1, 0.0, 0.2, 0.5, 0.8, 0.93, 0.99, 0.999] {
        let expected = 0.25 + r.asin() / (2.0 * std::f64::consts::PI);
        assert!((bvn_cdf(0.0, 0.0, r) - expected).abs() < 1e-13, "r={r}");
    }
}

#[test]
fn bivariate_normal_matches_integral_oracle() {
    let gl = GaussLegendre::new(200);
    for &r in &[-0.95f64, -0.6, 0.0, 0.4, 0.7, 0.92, 0.97] {
        for &(x, y) in &[(-1.0, 0.5), (0.3, -2.0), (1.5, 1.2), (-0.7, -0.4), (2.5, -1.0)] {
            let s = (1.0 - r * r).sqrt();
            // P(X<=x, Y<=y) = int_{-inf}^{x} phi(a) Phi((y - r a)/s) da
            let lo = -12.0;
            let oracle = gl.integrate(lo, x, |a| norm_pdf(a) * norm_cdf((y - r * a) / s));
            assert!((bvn_cdf(x, y, r) - oracle).abs() < 1e-12, "r={r} x={x} y={y}");
        }
    }
}

#[test]
fn debye_matches_direct_integral() {
    for &x in &[-8.0f64, -1.0, 0.5, 2.0, 5.0, 20.0] {
        let direct = integrate_adaptive(0.0, x.abs(), 1e-14, |t| if t == 0.0 { 1.0 } else { t / t.exp_m1() });
        let expected = if x > 0.0 { direct / x } else { direct / x.abs() + x.abs() / 2.0 };
        assert!((debye1(x) - expected).abs() < 1e-12, "x={x}");
    }
}
