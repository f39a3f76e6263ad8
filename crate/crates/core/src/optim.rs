//! Derivative-free minimization (Nelder-Mead).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadSettings {
    /// Converged once the relative spread of simplex values and the simplex
    /// diameter are both below these.
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evals: usize,
    pub initial_step: f64,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        Self { f_tol: 1e-9, x_tol: 1e-6, max_evals: 2000, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 1/2, 1/2). Non-finite values are treated as +inf.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], s: &NelderMeadSettings) -> Minimum {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return Minimum { x: vec![], f: v, evals, converged: true };
    }
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += s.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    let mut converged = false;
    while evals < s.max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let spread = vals[n] - vals[0];
        let diam = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= s.f_tol * (1.0 + vals[0].abs()) && diam <= s.x_tol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let x = along(-0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            pts[i] = pts[i].iter().zip(&pts[0]).map(|(a, b)| b + 0.5 * (a - b)).collect();
            vals[i] = eval(&pts[i], &mut evals);
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Minimum { x: pts[best].clone(), f: vals[best], evals, converged }
}
