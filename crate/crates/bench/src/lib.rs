//! Shared fixtures for the benchmarks.

use coarma_core::coarma::simulate;
use coarma_core::{CoarmaSpec, CopulaSpec};

/// Pair copulas of every family at moderate dependence.
pub fn families() -> Vec<(&'static str, CopulaSpec)> {
    vec![
        ("gaussian", CopulaSpec::gaussian(0.5).unwrap()),
        ("t", CopulaSpec::student_t(0.5, 4.0).unwrap()),
        ("clayton", CopulaSpec::clayton(2.0).unwrap()),
        ("gumbel", CopulaSpec::gumbel(2.0).unwrap()),
        ("frank", CopulaSpec::frank(5.0).unwrap()),
    ]
}

pub fn model(p: usize, q: usize) -> CoarmaSpec {
    let ar = [0.5, 0.3, 0.2][..p].iter().map(|&a| CopulaSpec::gaussian(a).unwrap()).collect();
    let mag = [0.3, 0.25, 0.2][..q].iter().map(|&b| CopulaSpec::gaussian(b).unwrap()).collect();
    CoarmaSpec::from_pairs(ar, mag)
}

pub fn mixed_model() -> CoarmaSpec {
    CoarmaSpec::from_pairs(
        vec![CopulaSpec::gumbel(1.8).unwrap(), CopulaSpec::gaussian(0.2).unwrap()],
        vec![CopulaSpec::clayton(1.0).unwrap()],
    )
}

pub fn series(spec: &CoarmaSpec, n: usize) -> Vec<f64> {
    simulate(spec, n, 42, 200).unwrap()
}
