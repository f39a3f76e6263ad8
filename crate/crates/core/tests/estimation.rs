use coarma_core::coarma::{neg_log_likelihood, simulate, CoarmaSpec};
use coarma_core::estimation::*;
use coarma_core::model::Side;
use coarma_core::stats::{mean, variance};
use coarma_core::{CopulaSpec, ModelTemplate};

fn g(r: f64) -> CopulaSpec {
    CopulaSpec::gaussian(r).unwrap()
}

fn mag1(a: f64) -> CoarmaSpec {
    CoarmaSpec::from_pairs(vec![], vec![g(a)])
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

#[test]
fn default_bounds_respect_the_mag_threshold() {
    let t: ModelTemplate = "u-CoARMA(1,4)-(n:?)-(n:?,g:?,c:?,f:?)".parse().unwrap();
    let cfg = FitConfig::new(t, 1);
    let (lo, hi) = cfg.bounds[1];
    assert!(hi < std::f64::consts::FRAC_1_SQRT_2 && hi > std::f64::consts::FRAC_1_SQRT_2 - 1e-5);
    assert_eq!(lo, -hi);
    assert!(cfg.bounds[0].1 > 0.99);
    for (i, f) in [(2, 1.0 / (1.0 - MAG_TAU_CAP)), (3, 2.0 * MAG_TAU_CAP / (1.0 - MAG_TAU_CAP))] {
        assert!((cfg.bounds[i].1 - f).abs() < 1e-9);
    }
    let frank = CopulaSpec::frank(cfg.bounds[4].1).unwrap();
    assert!((frank.tau() - MAG_TAU_CAP).abs() < 1e-9);
}

#[test]
fn gaussian_mag1_recovers_parameter() {
    let u = simulate(&mag1(0.5), 5000, 201, 500).unwrap();
    let t: ModelTemplate = "u-CoARMA(0,1)-()-(n:?)".parse().unwrap();
    let res = fit(&FitConfig::new(t, 3), &u).unwrap();
    assert!((0.45..=0.55).contains(&res.params[0]), "{res:?}");
    assert!(res.nll <= neg_log_likelihood(&mag1(0.5), &u).unwrap().nll + 1e-9);
    let scan = nll_scan(&mag1(0.5), Side::Mag, 0, &u, &grid(0.0, 0.7, 0.005)).unwrap();
    let best = scan_argmin(&scan).unwrap();
    assert!((best.value - res.params[0]).abs() <= 0.005 + 1e-9, "{best:?} vs {:?}", res.params);
}

#[test]
fn gaussian_mag1_above_threshold_finds_reciprocal() {
    let u = simulate(&mag1(0.875), 5000, 202, 500).unwrap();
    let t: ModelTemplate = "u-CoARMA(0,1)-()-(n:?)".parse().unwrap();
    let res = fit(&FitConfig::new(t, 4), &u).unwrap();
    assert!((0.43..=0.53).contains(&res.params[0]), "{res:?}");
}

#[test]
fn arma11_fit_matches_grid_oracle() {
    let truth = CoarmaSpec::from_pairs(vec![g(0.5)], vec![g(0.25)]);
    let u = simulate(&truth, 10_000, 203, 500).unwrap();
    let t: ModelTemplate = "u-CoARMA(1,1)-(n:?)-(n:?)".parse().unwrap();
    let res = fit(&FitConfig::new(t.clone(), 5), &u).unwrap();
    assert!((res.params[0] - 0.5).abs() < 0.07 && (res.params[1] - 0.25).abs() < 0.07, "{:?}", res.params);
    assert!(res.nll <= neg_log_likelihood(&truth, &u).unwrap().nll + 1e-9);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for &a in &grid(0.3, 0.7, 0.02) {
        for &b in &grid(0.05, 0.45, 0.02) {
            let v = neg_log_likelihood(&t.instantiate(&[a, b]).unwrap(), &u).unwrap().nll;
            if v < best.0 {
                best = (v, a, b);
            }
        }
    }
    assert!((best.1 - res.params[0]).abs() <= 0.02 + 1e-9 && (best.2 - res.params[1]).abs() <= 0.02 + 1e-9);
    assert!(res.nll <= best.0 + 1e-9);
}

#[test]
fn fit_is_deterministic_and_validates_input() {
    let u = simulate(&mag1(0.3), 800, 204, 100).unwrap();
    let t: ModelTemplate = "u-CoARMA(1,1)-(c:?)-(n:?)".parse().unwrap();
    let cfg = FitConfig::new(t.clone(), 9);
    assert_eq!(fit(&cfg, &u).unwrap(), fit(&cfg, &u).unwrap());
    assert!(fit(&cfg, &u[..10]).is_err());
    let mut bad = u.clone();
    bad[5] = 1.0;
    assert!(fit(&cfg, &bad).is_err());
    let mut cfg2 = cfg.clone();
    cfg2.set_bounds(1, 0.0, 0.1).unwrap();
    let r = fit(&cfg2, &u).unwrap();
    assert!(r.params[1] >= 0.0 && r.params[1] <= 0.1);
    assert!(cfg2.clone().set_bounds(5, 0.0, 1.0).is_err());
}

#[test]
fn gumbel_scan_near_truth() {
    let truth = CoarmaSpec::from_pairs(vec![], vec![CopulaSpec::gumbel(1.25).unwrap()]);
    let u = simulate(&truth, 5000, 205, 500).unwrap();
    let scan = nll_scan(&truth, Side::Mag, 0, &u, &grid(1.0, 3.0, 0.025)).unwrap();
    let best = scan_argmin(&scan).unwrap();
    assert!((best.value - 1.25).abs() <= 0.15, "{best:?}");
    let bad = nll_scan(&truth, Side::Mag, 0, &u, &[0.5, 1.25]).unwrap();
    assert!(bad[0].nll.is_infinite() && bad[1].nll.is_finite());
}

#[test]
fn independence_data_scan_is_flat_near_zero() {
    let u = simulate(&mag1(0.0), 4000, 206, 0).unwrap();
    let scan = nll_scan(&mag1(0.0), Side::Mag, 0, &u, &grid(-0.6, 0.6, 0.01)).unwrap();
    let best = scan_argmin(&scan).unwrap();
    assert!(best.value.abs() <= 0.06);
    let at0 = scan.iter().find(|p| p.value.abs() < 1e-12).unwrap();
    assert!(at0.nll.abs() < 1e-9);
}

#[test]
fn residual_oscillation_beyond_threshold() {
    let u = simulate(&mag1(0.875), 5000, 207, 500).unwrap();
    let above = residual_diagnostics(&mag1(0.875), &u).unwrap();
    assert!(above.oscillation, "{above:?}");
    let below = residual_diagnostics(&mag1((1.0f64 - 0.875 * 0.875).sqrt()), &u).unwrap();
    assert!(!below.oscillation && !below.drift, "{below:?}");
    assert!(below.ks.p_value > 0.01);
    let ar = CoarmaSpec::from_pairs(vec![CopulaSpec::clayton(2.0).unwrap()], vec![g(0.4)]);
    let v = simulate(&ar, 5000, 208, 500).unwrap();
    let rep = residual_diagnostics(&ar, &v).unwrap();
    assert!(!rep.oscillation && !rep.drift, "{rep:?}");
}

#[test]
fn monte_carlo_consistency() {
    let t: ModelTemplate = "u-CoARMA(0,1)-()-(n:?)".parse().unwrap();
    let est: Vec<f64> = (0..50)
        .map(|i| {
            let u = simulate(&mag1(0.5), 5000, 1000 + i, 200).unwrap();
            let mut cfg = FitConfig::new(t.clone(), i);
            cfg.restarts = 2;
            fit(&cfg, &u).unwrap().params[0]
        })
        .collect();
    assert!((mean(&est) - 0.5).abs() < 0.02, "{}", mean(&est));
    assert!(variance(&est).sqrt() < 0.05);
}
