//! Scalar root finding.

use crate::error::{CoarmaError, Result};

/// Brent's method on a bracket [a, b] with f(a) and f(b) of opposite sign.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(CoarmaError::NoConvergence {
            what: "brent".into(),
            iterations: 0,
            detail: format!("root not bracketed: f({a})={fa}, f({b})={fb}"),
        });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(CoarmaError::NoConvergence {
        what: "brent".into(),
        iterations: max_iter,
        detail: format!("last iterate {b}"),
    })
}

/// Solves g(x) = target on [0, 1] for a nondecreasing g, using a coarse scan to
/// narrow the bracket before Brent's method.
pub fn invert_unit_increasing<G: FnMut(f64) -> f64>(mut g: G, target: f64) -> Result<f64> {
    const SCAN: usize = 16;
    let mut lo = 0.0;
    let mut hi = 1.0;
    for i in 1..SCAN {
        let x = i as f64 / SCAN as f64;
        if g(x) >= target {
            hi = x;
            break;
        }
        lo = x;
    }
    let f = |x: f64| g(x) - target;
    brent(f, lo, hi, 1e-300, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 50).is_err());
    }

    #[test]
    fn inverts_power() {
        let r = invert_unit_increasing(|x| x.powi(3), 0.2).unwrap();
        assert!((r - 0.2f64.cbrt()).abs() < 1e-14);
    }
}
