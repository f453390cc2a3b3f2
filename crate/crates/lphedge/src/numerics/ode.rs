//! Adaptive Runge–Kutta integration for small complex ODE systems.
//!
//! Implements the Dormand–Prince 5(4) embedded pair with proportional step
//! control and first-same-as-last reuse. The state is a fixed-size vector of
//! complex numbers, matching the Riccati-type coefficient systems that moment
//! generating functions of affine-ish volatility models satisfy along a
//! Fourier contour.
//!
//! # References
//!
//! - J. R. Dormand, P. J. Prince, "A family of embedded Runge–Kutta
//!   formulae", J. Comp. Appl. Math. 6 (1980) 19–26.
//! - E. Hairer, S. P. Nørsett, G. Wanner, *Solving Ordinary Differential
//!   Equations I*, 2nd ed., Springer 1993 (step-size controller, §II.4).

use num_complex::Complex64;

use crate::error::{LpHedgeError, Result};

/// Tolerances and budget for [`integrate_rk45`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    /// Absolute tolerance per component.
    pub abs_tol: f64,
    /// Relative tolerance per component.
    pub rel_tol: f64,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_steps: 100_000 }
    }
}

// Dormand–Prince coefficients (c: stage times, a: stage couplings,
// b: 5th-order weights, e: 5th-minus-4th-order error weights).
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type State<const N: usize> = [Complex64; N];

fn axpy<const N: usize>(y: &State<N>, h: f64, coeffs: &[f64], ks: &[State<N>]) -> State<N> {
    let mut out = *y;
    for (c, k) in coeffs.iter().zip(ks.iter()) {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t1` (forward only).
///
/// # Errors
///
/// [`LpHedgeError::Numerical`] on step-size underflow, non-finite state, or
/// step-budget exhaustion; the message carries the failure time for
/// diagnostics.
pub fn integrate_rk45<const N: usize>(
    mut rhs: impl FnMut(f64, &State<N>) -> State<N>,
    t0: f64,
    t1: f64,
    y0: State<N>,
    tol: OdeTolerance,
) -> Result<State<N>> {
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(LpHedgeError::invalid(format!("integration requires finite t1 ≥ t0, got [{t0}, {t1}]")));
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = (span / 100.0).clamp(1e-10, 1e-2);

    for _ in 0..tol.max_steps {
        h = h.min(t1 - t);

        let k2 = rhs(t + C[0] * h, &axpy(&y, h, &A2, &[k1]));
        let k3 = rhs(t + C[1] * h, &axpy(&y, h, &A3, &[k1, k2]));
        let k4 = rhs(t + C[2] * h, &axpy(&y, h, &A4, &[k1, k2, k3]));
        let k5 = rhs(t + C[3] * h, &axpy(&y, h, &A5, &[k1, k2, k3, k4]));
        let k6 = rhs(t + C[4] * h, &axpy(&y, h, &A6, &[k1, k2, k3, k4, k5]));
        let y5 = axpy(&y, h, &B, &[k1, k2, k3, k4, k5, k6]);
        let k7 = rhs(t + h, &y5);
        let y4 = axpy(&y, h, &B4, &[k1, k2, k3, k4, k5, k6, k7]);

        // Scaled max-norm of the embedded error.
        let mut err_ratio = 0.0f64;
        let mut finite = true;
        for i in 0..N {
            let err = (y5[i] - y4[i]).norm();
            let scale = tol.abs_tol + tol.rel_tol * y[i].norm().max(y5[i].norm());
            err_ratio = err_ratio.max(err / scale);
            finite &= y5[i].re.is_finite() && y5[i].im.is_finite();
        }
        if !finite {
            return Err(LpHedgeError::numerical(format!("ODE state became non-finite near t = {t:.6e}")));
        }

        if err_ratio <= 1.0 {
            t += h;
            y = y5;
            k1 = k7; // first-same-as-last
            if t >= t1 - f64::EPSILON * span.abs() {
                return Ok(y);
            }
        }

        let factor = if err_ratio == 0.0 { 5.0 } else { (0.9 * err_ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < span * 1e-14 {
            return Err(LpHedgeError::numerical(format!("ODE step size underflow near t = {t:.6e}")));
        }
    }

    Err(LpHedgeError::numerical(format!(
        "ODE integrator exceeded {} steps before reaching t = {t1}",
        tol.max_steps
    )))
}
