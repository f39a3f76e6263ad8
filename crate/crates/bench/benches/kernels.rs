use std::hint::black_box;

use coarma_bench::{families, mixed_model, model, series};
use coarma_core::coarma::{forecast_percentiles, neg_log_likelihood, simulate};
use coarma_core::dependence::{joint_cdf, JointCdfSpec};
use coarma_core::garch_link::{GarchCopula, GarchParams};
use coarma_core::special::norm_ppf;
use coarma_core::MarginModel;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn h_functions(c: &mut Criterion) {
    let mut g = c.benchmark_group("h");
    for (name, cop) in families() {
        g.bench_function(BenchmarkId::new("h", name), |b| b.iter(|| cop.h(black_box(0.3), black_box(0.7))));
        g.bench_function(BenchmarkId::new("hinv", name), |b| {
            b.iter(|| cop.hinv(black_box(0.3), black_box(0.7)).unwrap())
        });
        g.bench_function(BenchmarkId::new("ln_pdf", name), |b| {
            b.iter(|| cop.ln_pdf(black_box(0.3), black_box(0.7)).unwrap())
        });
    }
    g.finish();
}

fn filtering(c: &mut Criterion) {
    let mut g = c.benchmark_group("nll");
    g.sample_size(20);
    for (name, spec) in [("gauss11", model(1, 1)), ("gauss22", model(2, 2)), ("mixed21", mixed_model())] {
        let u = series(&spec, 2000);
        g.bench_function(BenchmarkId::new("n2000", name), |b| b.iter(|| neg_log_likelihood(&spec, black_box(&u)).unwrap()));
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    g.sample_size(20);
    for (name, spec) in [("gauss11", model(1, 1)), ("mixed21", mixed_model())] {
        g.bench_function(BenchmarkId::new("n2000", name), |b| b.iter(|| simulate(&spec, 2000, black_box(1), 0).unwrap()));
    }
    g.finish();
}

fn forecasting(c: &mut Criterion) {
    let spec = model(1, 1);
    let y: Vec<f64> = series(&spec, 600).into_iter().map(norm_ppf).collect();
    let margin = MarginModel::Normal { mean: 0.0, sd: 1.0 };
    let mut g = c.benchmark_group("forecast");
    g.sample_size(10);
    g.bench_function("percentiles_100_steps", |b| {
        b.iter(|| forecast_percentiles(&spec, &margin, &y[..500], black_box(&y[500..])).unwrap())
    });
    g.finish();
}

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("joint_cdf");
    g.sample_size(10);
    for (p, q) in [(0, 1), (1, 1), (2, 1), (2, 2)] {
        let js = JointCdfSpec::new(model(p, q)).unwrap();
        g.bench_function(BenchmarkId::new("order", format!("{p}{q}")), |b| {
            b.iter(|| joint_cdf(&js, black_box(0.3), black_box(0.6)).unwrap())
        });
    }
    g.finish();
}

fn garch_tables(c: &mut Criterion) {
    let params = GarchParams::new(0.1, 0.1, 0.8).unwrap();
    let mut g = c.benchmark_group("garch");
    g.sample_size(10);
    g.bench_function("build_1e5", |b| b.iter(|| GarchCopula::build(params, 100_000, black_box(1)).unwrap()));
    let gc = GarchCopula::build(params, 100_000, 1).unwrap();
    g.bench_function("ar_ccdf", |b| b.iter(|| gc.ar_ccdf(black_box(0.7), black_box(0.4)).unwrap()));
    g.bench_function("mag_quantile", |b| b.iter(|| gc.mag_quantile(black_box(0.7), black_box(0.4)).unwrap()));
    g.finish();
}

criterion_group!(benches, h_functions, filtering, simulation, forecasting, quadrature, garch_tables);
criterion_main!(benches);
