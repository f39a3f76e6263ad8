//! Gauss-Legendre rules and small helpers for nested integration.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// An n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                dp = nf * (z * p1 - p2) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared, lazily built rule for `n` nodes.
    pub fn cached(n: usize) -> &'static GaussLegendre {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry(n)
            .or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Integral of `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Integral over [a, b] split at the interior `breaks`.
    pub fn integrate_split<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, breaks: &[f64], mut f: F) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut pts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&x| x > a + 1e-14 && x < b - 1e-14)
            .collect();
        if pts.is_empty() {
            return self.integrate(a, b, f);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
        let mut total = 0.0;
        let mut lo = a;
        for hi in pts.into_iter().chain(std::iter::once(b)) {
            total += self.integrate(lo, hi, &mut f);
            lo = hi;
        }
        total
    }
}

/// Adaptive Gauss-Legendre integration by interval bisection.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    fn rec<F: FnMut(f64) -> f64>(
        gl: &GaussLegendre,
        f: &mut F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = gl.integrate(a, m, &mut *f);
        let right = gl.integrate(m, b, &mut *f);
        if depth == 0 || (left + right - whole).abs() <= tol {
            return left + right;
        }
        rec(gl, f, a, m, left, 0.5 * tol, depth - 1) + rec(gl, f, m, b, right, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let gl = GaussLegendre::cached(15);
    let whole = gl.integrate(a, b, &mut f);
    rec(gl, &mut f, a, b, whole, tol, 24)
}
