//! Scalar root bracketing via Brent's method.
//!
//! Used to invert monotone pricing maps, e.g. recovering the implied
//! volatility that reprices a European option. Combines bisection, secant and
//! inverse quadratic interpolation; convergence is guaranteed for any
//! continuous function with a sign change on the bracket.
//!
//! # References
//!
//! - R. P. Brent, *Algorithms for Minimization without Derivatives*,
//!   Prentice-Hall 1973, ch. 4.

use crate::error::{LpHedgeError, Result};

/// Maximum iterations before declaring non-convergence.
const MAX_ITER: usize = 200;

/// Finds `x` in `[a, b]` with `f(x) = 0` to absolute tolerance `tol`.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] if `f(a)` and `f(b)` do not bracket a root;
/// [`LpHedgeError::Numerical`] if the iteration budget is exhausted.
pub fn brent(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(LpHedgeError::invalid(format!(
            "no sign change on bracket: f({a}) = {fa:.6e}, f({b}) = {fb:.6e}"
        )));
    }

    // Keep |f(b)| ≤ |f(a)|: b is the best iterate, a the previous one, c the
    // counterpoint that still brackets the root with b.
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITER {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt interpolation: secant if two points, inverse quadratic
            // if three distinct ones.
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * xm * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0)), (q - 1.0) * (r - 1.0) * (s - 1.0))
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }

    Err(LpHedgeError::numerical(format!("root search did not converge within {MAX_ITER} iterations")))
}
