use coarma_core::garch_link::*;
use coarma_core::special::norm_cdf;
use coarma_core::stats::{acf_batch_se, ks_two_sample, mean};

fn thin(xs: &[f64], k: usize) -> Vec<f64> {
    xs.iter().step_by(k).copied().collect()
}

#[test]
fn degenerate_arch_marginal_is_normal() {
    let p = GarchParams::arch(0.5, 0.0).unwrap();
    let psi = build_psi(&p, DEFAULT_NSIM, 1).unwrap();
    let sd = 0.5f64.sqrt();
    let mut worst = 0.0f64;
    for i in -40..=40 {
        let x = i as f64 * 0.1;
        worst = worst.max((psi.cdf(x) - norm_cdf(x / sd)).abs());
    }
    assert!(worst < 0.005, "{worst}");
    assert!((psi.cdf(0.0) - 0.5).abs() < 1e-12);
}

#[test]
fn arch_marginal_is_heavy_tailed() {
    let p = GarchParams::arch(0.1, 0.3).unwrap();
    let y = simulate_garch(&p, DEFAULT_NSIM, 2, 1000).y;
    let m2 = mean(&y.iter().map(|v| v * v).collect::<Vec<_>>());
    let m4 = mean(&y.iter().map(|v| v.powi(4)).collect::<Vec<_>>());
    let kurt = m4 / (m2 * m2);
    let theory = 3.0 * (1.0 - 0.09) / (1.0 - 3.0 * 0.09);
    assert!(kurt > 3.0);
    assert!((kurt - theory).abs() < 0.3, "{kurt} vs {theory}");
    assert!((m2 - 0.1 / 0.7).abs() < 0.005);
}

#[test]
fn tabulated_cdf_roundtrips() {
    let p = GarchParams::new(0.1, 0.1, 0.8).unwrap();
    let psi = build_psi(&p, DEFAULT_NSIM, 3).unwrap();
    let gamma = build_gamma(&p, DEFAULT_NSIM, 4).unwrap();
    for t in [&psi, &gamma] {
        assert!(t.values().windows(2).all(|w| w[0] < w[1]));
        assert!(t.grid().windows(2).all(|w| w[0] < w[1]));
        let step = t.max_step();
        for i in 1..2000 {
            let q = i as f64 / 2000.0;
            let x = t.quantile(q);
            assert!((t.cdf(x) - q).abs() < 1e-12, "q={q}");
        }
        for &x in t.grid().iter().step_by(97) {
            assert!((t.quantile(t.cdf(x)) - x).abs() < step);
        }
        for &q in &[1e-7, 1e-5, 0.9999, 1.0 - 1e-7] {
            assert!((t.cdf(t.quantile(q)) - q).abs() < 1e-9 * q.max(1e-3));
        }
    }
    for i in 1..100 {
        let q = i as f64 / 100.0;
        assert!((psi.quantile(q) + psi.quantile(1.0 - q)).abs() < 1e-9);
    }
}

#[test]
fn gamma_support_and_path_construction() {
    let p = GarchParams::new(0.1, 0.1, 0.8).unwrap();
    let xs = simulate_modified_arch(&p, 200_000, 5, 1000);
    let bound = (0.1f64 * 0.8).sqrt();
    assert!(xs.iter().all(|&x| x > bound));
    let gamma = build_gamma(&p, DEFAULT_NSIM, 6).unwrap();
    assert_eq!(gamma.cdf(bound), 0.0);
    assert!(gamma.quantile(1e-12) >= bound);
    for (params, seed) in [(GarchParams::arch(0.2, 0.4).unwrap(), 7), (p, 8)] {
        let a = simulate_modified_arch(&params, 1_000_000, seed, 1000);
        let b = latent_from_path(&params, &simulate_garch(&params, 1_000_000, seed + 100, 1000));
        let ks = ks_two_sample(&thin(&a, 50), &thin(&b, 50));
        assert!(ks.p_value > 0.05, "{params:?}: {ks:?}");
    }
}

#[test]
fn arch_reduction_of_latent_process() {
    let p = GarchParams::arch(0.2, 0.4).unwrap();
    let path = simulate_garch(&p, 1000, 9, 0);
    let x = latent_from_path(&p, &path);
    for (xi, yi) in x.iter().zip(&path.y) {
        assert!((xi - 0.4f64.sqrt() * yi.abs()).abs() < 1e-12);
    }
}

#[test]
fn arch_copula_properties() {
    let p = GarchParams::arch(0.1, 0.3).unwrap();
    let psi = build_psi(&p, DEFAULT_NSIM, 10).unwrap();
    let c = ArchCopula::new(p, psi.clone()).unwrap();
    let pts: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    for &v in &pts {
        let mut prev = 0.0;
        for &u in &pts {
            let h = c.ccdf(u, v).unwrap();
            assert!(h >= prev);
            prev = h;
            assert!((h - c.ccdf(u, 1.0 - v).unwrap()).abs() < 1e-9);
            assert!((c.ccdf(c.quantile(u, v).unwrap(), v).unwrap() - u).abs() < 1e-6);
        }
        assert!(c.ccdf(1e-12, v).unwrap() < 1e-6 && c.ccdf(1.0 - 1e-12, v).unwrap() > 1.0 - 1e-6);
    }
    for &u in &pts {
        let at_half = norm_cdf(psi.quantile(u) / 0.1f64.sqrt());
        assert!((c.ccdf(u, 0.5).unwrap() - at_half).abs() < 1e-3);
        assert!((c.cdf(u, 1.0).unwrap() - u).abs() < 1e-3, "u={u}");
    }
    let zero = ArchCopula::new(GarchParams::arch(0.3, 0.0).unwrap(), build_psi(&GarchParams::arch(0.3, 0.0).unwrap(), DEFAULT_NSIM, 11).unwrap()).unwrap();
    for &u in &pts {
        assert!((zero.ccdf(u, 0.3).unwrap() - u).abs() < 0.005);
    }
}

#[test]
fn arch_copula_simulation_reproduces_arch() {
    let p = GarchParams::arch(0.1, 0.3).unwrap();
    let c = ArchCopula::new(p, build_psi(&p, DEFAULT_NSIM, 12).unwrap()).unwrap();
    let y: Vec<f64> = c.simulate(100_000, 13, 500).unwrap().into_iter().map(|w| c.psi.quantile(w)).collect();
    let direct = simulate_garch(&p, 100_000, 14, 1000).y;
    let ks = ks_two_sample(&thin(&y, 10), &thin(&direct, 10));
    assert!(ks.p_value > 0.01, "{ks:?}");
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let a = acf_batch_se(&sq(&y), 1, 50)[0];
    assert!((a.0 - 0.3).abs() < 3.0 * a.1 + 0.01, "{a:?}");
}

#[test]
fn garch_pair_properties() {
    let p = GarchParams::new(0.1, 0.1, 0.8).unwrap();
    let g = GarchCopula::build(p, DEFAULT_NSIM, 15).unwrap();
    let pts: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
    for &v in &pts {
        let (mut pa, mut pm) = (0.0, 0.0);
        for &u in &pts {
            let a = g.ar_ccdf(u, v).unwrap();
            let m = g.mag_ccdf(u, v).unwrap();
            assert!(a >= pa && m >= pm);
            (pa, pm) = (a, m);
            assert!((g.ar_ccdf(g.ar_quantile(u, v).unwrap(), v).unwrap() - u).abs() < 1e-6);
            assert!((g.mag_ccdf(g.mag_quantile(u, v).unwrap(), v).unwrap() - u).abs() < 1e-6);
            assert!(g.ar_ccdf_unfolded(u, v).unwrap() >= 0.5);
        }
    }
    let gl = coarma_core::quadrature::GaussLegendre::new(64);
    for &u in &[0.1, 0.3, 0.5, 0.7, 0.9] {
        let ia = gl.integrate_split(0.0, 1.0, &[0.01, 0.1, 0.9, 0.99], |v| g.ar_ccdf(u, v).unwrap());
        let im = gl.integrate_split(0.0, 1.0, &[0.01, 0.1, 0.9, 0.99], |v| g.mag_ccdf(u, v).unwrap());
        assert!((ia - u).abs() < 1e-3, "ar u={u}: {ia}");
        assert!((im - u).abs() < 1e-3, "mag u={u}: {im}");
    }
    let rows = g.grid(5).unwrap();
    assert_eq!(rows.len(), 25);
    assert!(garch_copula_pair(GarchParams::arch(0.1, 0.0).unwrap(), g.psi.clone(), g.gamma.clone()).is_err());
}

#[test]
fn mag_pair_reduces_to_arch_pair_without_beta() {
    let p = GarchParams::arch(0.1, 0.3).unwrap();
    let g = GarchCopula::build(p, DEFAULT_NSIM, 16).unwrap();
    let arch = ArchCopula::new(p, g.psi.clone()).unwrap();
    for &v in &[0.1, 0.4, 0.7, 0.95] {
        let v_arch = g.psi.cdf(g.gamma.quantile(v) / 0.3f64.sqrt());
        for &u in &[0.05, 0.3, 0.5, 0.8] {
            let a = g.mag_ccdf(u, v).unwrap();
            let b = arch.ccdf(u, v_arch).unwrap();
            assert!((a - b).abs() < 5e-3, "u={u} v={v}: {a} vs {b}");
        }
    }
}

#[test]
fn garch_copula_simulation_matches_direct_garch() {
    let p = GarchParams::new(0.1, 0.1, 0.8).unwrap();
    let g = GarchCopula::build(p, DEFAULT_NSIM, 17).unwrap();
    let y = g.simulate_returns(100_000, 18, 1000).unwrap();
    let direct = simulate_garch(&p, 100_000, 19, 1000).y;
    assert!(ks_two_sample(&y, &direct).statistic < 0.01);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let a = acf_batch_se(&sq(&y), 5, 50);
    let b = acf_batch_se(&sq(&direct), 5, 50);
    for (k, (x, z)) in a.iter().zip(&b).enumerate() {
        assert!((x.0 - z.0).abs() < 3.0 * (x.1 * x.1 + z.1 * z.1).sqrt(), "lag {}: {x:?} {z:?}", k + 1);
    }
}

#[test]
fn stationarity_checker_matches_divergence() {
    let mut checked = 0;
    for i in 0..5 {
        for j in 0..4 {
            let a1 = [0.05, 0.3, 0.8, 1.5, 3.0][i];
            let b1 = [0.0, 0.5, 0.9, 1.05][j];
            let p = GarchParams::new(0.1, a1, b1).unwrap();
            let lm = p.log_moment();
            let path = simulate_modified_arch(&p, 20_000, 20 + checked, 0);
            let tail = &path[15_000..];
            let diverged = tail.iter().any(|x| !x.is_finite()) || tail.iter().map(|x| x.ln()).sum::<f64>() / 5000.0 > 50.0;
            if lm.abs() > 0.02 {
                assert_eq!(lm < 0.0, !diverged, "a1={a1} b1={b1} lm={lm}");
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
    assert!(GarchParams::new(0.1, 0.1, 0.9).unwrap().check_tabulable().is_ok());
    assert!(GarchParams::arch(0.1, 1.2).unwrap().check_tabulable().is_err());
    assert!(GarchParams::new(0.0, 0.1, 0.1).is_err());
}

#[test]
fn log_moment_quadrature() {
    let p = GarchParams::new(1.0, 0.3, 0.6).unwrap();
    let mut r = coarma_core::rng::stream(1, 0);
    let n = 2_000_000;
    let mc: f64 = (0..n)
        .map(|_| {
            let e = coarma_core::rng::std_normal(&mut r);
            (0.3 * e * e + 0.6).ln()
        })
        .sum::<f64>()
        / n as f64;
    assert!((p.log_moment() - mc).abs() < 2e-3);
    let arch = GarchParams::arch(1.0, 1.0).unwrap();
    assert!((arch.log_moment() + 1.270_362_845_461_478).abs() < 1e-12);
}

#[test]
fn psi_hooks() {
    let p = GarchParams::new(0.1, 0.1, 0.8).unwrap();
    let g = GarchCopula::build(p, 100_000, 21).unwrap();
    let data = simulate_garch(&p, 100_000, 22, 100).y;
    let g2 = g.clone().with_psi_update(&EmpiricalPsi { data }).unwrap();
    assert!((g2.psi.quantile(0.9) - g.psi.quantile(0.9)).abs() < 0.05);
    let g3 = g.clone().with_psi_update(&ResimulatedPsi { n_sim: 100_000, seed: 21 }).unwrap();
    assert_eq!(g3.psi, g.psi);
}
