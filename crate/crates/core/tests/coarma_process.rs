use coarma_core::coarma::*;
use coarma_core::gaussian_equiv::{coarma_psi, gaussian_spec};
use coarma_core::margins::{MarginKind, MarginModel};
use coarma_core::special::norm_ppf;
use coarma_core::stats::{acf, batch_means, kendall_tau, ks_uniform, variance};
use coarma_core::CopulaSpec;

fn g(r: f64) -> CopulaSpec {
    CopulaSpec::gaussian(r).unwrap()
}

#[test]
fn independent_mag_passes_innovations_through() {
    let spec = CoarmaSpec::from_pairs(vec![g(0.7)], vec![CopulaSpec::independence(); 2]);
    let path = simulate_path(&spec, 1000, 4, 50).unwrap();
    assert_eq!(path.u, path.eps);
    let nll = neg_log_likelihood(&spec, &path.u).unwrap();
    assert_eq!(nll.nll, 0.0);
    assert_eq!(nll.floored, 0);
}

#[test]
fn comonotone_mag_is_shifted_latent_ar() {
    let ar = CopulaSpec::clayton(2.0).unwrap();
    let spec = CoarmaSpec::from_pairs(vec![ar], vec![CopulaSpec::comonotone()]);
    let path = simulate_path(&spec, 100_000, 2, 500).unwrap();
    for t in 1..path.u.len() {
        assert_eq!(path.u[t], path.w[t - 1]);
    }
    let est = kendall_tau(&path.u[1..], &path.u[..path.u.len() - 1]);
    assert!((est.tau - ar.tau()).abs() < 3.0 * est.se, "{est:?}");
}

#[test]
fn gaussian_arma11_autocorrelations() {
    let spec = gaussian_spec(&[0.5], &[0.25]).unwrap();
    let y: Vec<f64> = simulate(&spec, 100_000, 12, DEFAULT_BURN_IN).unwrap().into_iter().map(norm_ppf).collect();
    let theory = coarma_psi(&[0.5], &[0.25]).unwrap().acf(10).unwrap();
    let sample = acf(&y, 10);
    for k in 1..=10 {
        assert!((sample[k] - theory[k]).abs() < 0.02, "lag {k}: {} vs {}", sample[k], theory[k]);
    }
}

#[test]
fn filter_recovers_simulated_innovations() {
    let families: [fn(f64) -> CopulaSpec; 3] = [
        |s| CopulaSpec::gaussian(0.5 * s).unwrap(),
        |s| CopulaSpec::gumbel(1.0 + s).unwrap(),
        |s| CopulaSpec::clayton(1.5 * s).unwrap(),
    ];
    for make in families {
        for (p, q) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let ar: Vec<CopulaSpec> = (0..p).map(|j| make(0.8 / (j + 1) as f64)).collect();
            let mag: Vec<CopulaSpec> = (0..q).map(|j| make(0.5 / (j + 1) as f64)).collect();
            let spec = CoarmaSpec::from_pairs(ar, mag);
            let path = simulate_path(&spec, 2000, 31, 500).unwrap();
            let f = filter(&spec, &path.u).unwrap();
            for t in 300..path.u.len() {
                assert!((f.eps[t] - path.eps[t]).abs() < 1e-6, "{spec} t={t}: {} vs {}", f.eps[t], path.eps[t]);
                assert!((f.w[t] - path.w[t]).abs() < 1e-6, "{spec} t={t}");
            }
        }
    }
}

#[test]
fn pure_ar_residuals_are_uniform() {
    let spec = CoarmaSpec::from_pairs(vec![CopulaSpec::gumbel(1.8).unwrap(), g(0.2)], vec![]);
    let u = simulate(&spec, 20_000, 5, 500).unwrap();
    let f = filter(&spec, &u).unwrap();
    let ks = ks_uniform(&f.eps[2..]);
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn nll_terms_are_insensitive_to_prefix_after_warm_up() {
    let spec = CoarmaSpec::from_pairs(vec![g(0.6), g(0.2)], vec![g(0.4)]);
    let u = simulate(&spec, 1500, 77, 500).unwrap();
    let (full, _) = nll_terms(&spec, &u).unwrap();
    let (tail, _) = nll_terms(&spec, &u[300..]).unwrap();
    for t in 200..tail.len() {
        assert!((full[t + 300] - tail[t]).abs() < 1e-3, "t={t}");
    }
    assert!(nll_terms(&spec, &u[..2]).is_err());
}

#[test]
fn stationarity_over_blocks() {
    let spec = CoarmaSpec::from_pairs(vec![CopulaSpec::gumbel(2.0).unwrap()], vec![CopulaSpec::clayton(1.0).unwrap()]);
    let u = simulate(&spec, 200_000, 9, 500).unwrap();
    let (a, b) = u.split_at(100_000);
    let (ma, sa) = batch_means(a, 50);
    let (mb, sb) = batch_means(b, 50);
    assert!((ma - mb).abs() < 3.0 * (sa * sa + sb * sb).sqrt());
    let sq = |x: &[f64]| x.iter().map(|v| (v - 0.5).powi(2)).collect::<Vec<_>>();
    let (va, sva) = batch_means(&sq(a), 50);
    let (vb, svb) = batch_means(&sq(b), 50);
    assert!((va - vb).abs() < 3.0 * (sva * sva + svb * svb).sqrt());
    assert!((variance(&u) - 1.0 / 12.0).abs() < 0.002);
}

fn grid_argmin(u: &[f64], grid: &[f64]) -> f64 {
    let mut best = (f64::INFINITY, f64::NAN);
    for &a in grid {
        let spec = CoarmaSpec::from_pairs(vec![], vec![g(a)]);
        let v = neg_log_likelihood(&spec, u).unwrap().nll;
        if v < best.0 {
            best = (v, a);
        }
    }
    best.1
}

#[test]
fn nll_landscape_finds_true_or_reciprocal_parameter() {
    let grid: Vec<f64> = (0..=95).map(|i| i as f64 / 100.0).collect();
    let u = simulate(&CoarmaSpec::from_pairs(vec![], vec![g(0.5)]), 5000, 101, 500).unwrap();
    assert!((grid_argmin(&u, &grid) - 0.5).abs() <= 0.05);
    let u = simulate(&CoarmaSpec::from_pairs(vec![], vec![g(0.875)]), 5000, 102, 500).unwrap();
    let recip = (1.0f64 - 0.875 * 0.875).sqrt();
    let small: Vec<f64> = grid.iter().copied().filter(|a| *a < 0.7).collect();
    assert!((grid_argmin(&u, &small) - recip).abs() <= 0.05);
}

#[test]
fn forecast_with_independent_mag_is_unconditional() {
    let spec = CoarmaSpec::from_pairs(vec![g(0.5)], vec![CopulaSpec::independence()]);
    let data: Vec<f64> = simulate(&spec, 600, 3, 100).unwrap().into_iter().map(norm_ppf).collect();
    let margin = MarginModel::fit(MarginKind::Normal, &data[..400]).unwrap();
    let grid = forecast_percentiles(&spec, &margin, &data[..400], &data[400..]).unwrap();
    assert_eq!(grid.rows.len(), 200);
    let lv = levels();
    for row in &grid.rows {
        for (v, a) in row.iter().zip(&lv) {
            assert!((v - margin.quantile(*a).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn forecast_rows_are_monotone_and_calibrated() {
    let spec = CoarmaSpec::from_pairs(vec![CopulaSpec::gumbel(2.0).unwrap(), g(0.3)], vec![g(0.4)]);
    let u = simulate(&spec, 4000, 55, 500).unwrap();
    let data: Vec<f64> = u.iter().map(|&x| norm_ppf(x)).collect();
    let margin = MarginModel::Normal { mean: 0.0, sd: 1.0 };
    let grid = forecast_percentiles(&spec, &margin, &data[..2000], &data[2000..]).unwrap();
    for row in &grid.rows {
        assert!(row.windows(2).all(|w| w[0] <= w[1]));
    }
    let ks = ks_uniform(&grid.pit);
    assert!(ks.p_value > 0.05, "{ks:?}");
    assert_eq!(grid.clamped, 0);
}

#[test]
fn pure_ar_forecast_median_is_conditional_median() {
    let ar = CopulaSpec::frank(5.0).unwrap();
    let spec = CoarmaSpec::from_pairs(vec![ar], vec![]);
    let data: Vec<f64> = simulate(&spec, 700, 8, 100).unwrap().into_iter().map(norm_ppf).collect();
    let margin = MarginModel::fit(MarginKind::Kde, &data[..500]).unwrap();
    let grid = forecast_percentiles(&spec, &margin, &data[..500], &data[500..]).unwrap();
    let mut prev = coarma_core::margins::pobs(&data[..500])[499];
    for (t, &y) in data[500..].iter().enumerate() {
        let median = margin.quantile(ar.hinv(0.5, prev).unwrap()).unwrap();
        assert!((grid.median(t) - median).abs() < 1e-9, "t={t}");
        prev = margin.cdf(y);
    }
}
