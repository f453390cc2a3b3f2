//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 15-point Kronrod rule with embedded 7-point Gauss rule supplies a value
//! and error estimate per panel; panels are bisected greedily (worst panel
//! first) until the summed error meets the requested tolerance. A vector
//! variant integrates several integrands in one pass over shared abscissae,
//! which is how the pricing layer evaluates all payoff transforms against a
//! single sweep of the (expensive) model moment-generating function.
//!
//! # References
//!
//! - R. Piessens, E. de Doncker-Kapenga, C. Überhuber, D. Kahaner,
//!   *QUADPACK: A Subroutine Package for Automatic Integration*, Springer 1983.
//! - A. S. Kronrod, *Nodes and Weights of Quadrature Formulas*, 1965.

// Nodes and weights are transcribed at the precision published in QUADPACK;
// the digits beyond f64 resolution document the source values verbatim.
#![allow(clippy::excessive_precision)]

use crate::error::{LpHedgeError, Result};

/// Positive abscissae of the 15-point Kronrod rule on [−1, 1], centre first.
const XGK: [f64; 8] = [
    0.000_000_000_000_000_000_000_000_000_000_000,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.991_455_371_120_812_639_206_854_697_526_329,
];

/// Kronrod weights matching [`XGK`].
const WGK: [f64; 8] = [
    0.209_482_141_084_727_828_012_999_174_891_714,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.022_935_322_010_529_224_963_732_008_058_970,
];

/// Weights of the embedded 7-point Gauss rule (nodes are XGK[0], XGK[2], …).
const WG: [f64; 4] = [
    0.417_959_183_673_469_387_755_102_040_816_327,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.129_484_966_168_869_693_270_611_432_679_082,
];

/// QUADPACK's empirical error rescaling: damps the raw |Kronrod − Gauss|
/// difference by the panel's oscillation measure so smooth panels are not
/// overcharged, with a floor at round-off level.
fn rescale_error(raw: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = raw.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

/// One 15-point Kronrod panel for `N` integrands sharing abscissae.
///
/// Returns per-component `(value, error_estimate)`.
fn gk15_panel<const N: usize>(
    f: &mut impl FnMut(f64) -> [f64; N],
    a: f64,
    b: f64,
) -> ([f64; N], [f64; N]) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_centre = f(centre);
    let mut kron = [0.0; N];
    let mut gauss = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut samples = [[0.0; N]; 15];
    samples[0] = f_centre;
    for j in 0..N {
        kron[j] = WGK[0] * f_centre[j];
        gauss[j] = WG[0] * f_centre[j];
        res_abs[j] = WGK[0] * f_centre[j].abs();
    }

    for i in 1..8 {
        let lo = f(centre - half * XGK[i]);
        let hi = f(centre + half * XGK[i]);
        samples[2 * i - 1] = lo;
        samples[2 * i] = hi;
        for j in 0..N {
            let pair = lo[j] + hi[j];
            kron[j] += WGK[i] * pair;
            res_abs[j] += WGK[i] * (lo[j].abs() + hi[j].abs());
            if i % 2 == 0 {
                gauss[j] += WG[i / 2] * pair;
            }
        }
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for j in 0..N {
        value[j] = kron[j] * half;
        let mean = kron[j] * 0.5;
        // Oscillation measure Σ w·|f − mean| for the rescaled error bound.
        let mut res_asc = WGK[0] * (samples[0][j] - mean).abs();
        for i in 1..8 {
            res_asc += WGK[i]
                * ((samples[2 * i - 1][j] - mean).abs() + (samples[2 * i][j] - mean).abs());
        }
        error[j] = rescale_error((kron[j] - gauss[j]) * half, res_abs[j] * half.abs(), res_asc * half.abs());
    }
    (value, error)
}

/// Tolerances and budget for [`integrate_vec`] / [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    /// Absolute tolerance on each component of the integral.
    pub abs_tol: f64,
    /// Relative tolerance on each component of the integral.
    pub rel_tol: f64,
    /// Maximum number of panel bisections before giving up.
    pub max_panels: usize,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_panels: 2_000 }
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    worst: f64,
}

/// Adaptively integrates `N` integrands over `[a, b]` in one shared pass.
///
/// All components are refined together: the panel with the largest error is
/// bisected until every component meets `max(abs_tol, rel_tol·|integral|)`.
///
/// # Errors
///
/// [`LpHedgeError::Numerical`] if the panel budget is exhausted or the
/// integrand returns a non-finite value; the message reports the achieved
/// error for diagnosis.
pub fn integrate_vec<const N: usize>(
    mut f: impl FnMut(f64) -> [f64; N],
    a: f64,
    b: f64,
    tol: QuadTolerance,
) -> Result<[f64; N]> {
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(LpHedgeError::invalid(format!("integration bounds must be finite with b > a, got [{a}, {b}]")));
    }

    let (value, error) = gk15_panel(&mut f, a, b);
    let worst = error.iter().fold(0.0f64, |m, e| m.max(*e));
    let mut panels = vec![Panel { a, b, value, error, worst }];

    for _ in 0..tol.max_panels {
        let mut total = [0.0; N];
        let mut total_err = [0.0; N];
        for p in &panels {
            for j in 0..N {
                total[j] += p.value[j];
                total_err[j] += p.error[j];
            }
        }
        if total.iter().any(|v| !v.is_finite()) {
            return Err(LpHedgeError::numerical("integrand produced a non-finite value".to_string()));
        }
        let converged = (0..N)
            .all(|j| total_err[j] <= tol.abs_tol.max(tol.rel_tol * total[j].abs()));
        if converged {
            return Ok(total);
        }

        // Bisect the panel with the largest single-component error.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.worst.total_cmp(&y.worst))
            .expect("panel list is never empty");
        let Panel { a, b, .. } = panels.swap_remove(idx);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            return Err(LpHedgeError::numerical(format!(
                "quadrature interval [{a}, {b}] cannot be bisected further"
            )));
        }
        for (lo, hi) in [(a, mid), (mid, b)] {
            let (value, error) = gk15_panel(&mut f, lo, hi);
            let worst = error.iter().fold(0.0f64, |m, e| m.max(*e));
            panels.push(Panel { a: lo, b: hi, value, error, worst });
        }
    }

    let achieved = panels.iter().map(|p| p.worst).sum::<f64>();
    Err(LpHedgeError::numerical(format!(
        "quadrature did not converge within {} panels (achieved error ≈ {achieved:.3e})",
        tol.max_panels
    )))
}

/// Scalar convenience wrapper over [`integrate_vec`].
///
/// # Errors
///
/// Same as [`integrate_vec`].
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: QuadTolerance) -> Result<f64> {
    integrate_vec(|x| [f(x)], a, b, tol).map(|v| v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: QuadTolerance = QuadTolerance { abs_tol: 1e-13, rel_tol: 1e-12, max_panels: 2_000 };

    #[test]
    fn integrates_polynomial_exactly() {
        // Kronrod-15 is exact for polynomials up to degree 22.
        let got = integrate(|x| x * x, 0.0, 1.0, TOL).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn integrates_sine_over_half_period() {
        let got = integrate(f64::sin, 0.0, std::f64::consts::PI, TOL).unwrap();
        assert!((got - 2.0).abs() < 1e-13, "got {got}");
    }

    #[test]
    fn integrates_gaussian_tail() {
        // ∫₀^∞ e^{−x²} dx = √π/2; the tail beyond 12 is ≈ e^{−144}.
        let got = integrate(|x| (-x * x).exp(), 0.0, 12.0, TOL).unwrap();
        let expected = std::f64::consts::PI.sqrt() / 2.0;
        assert!((got - expected).abs() < 1e-13, "got {got}, expected {expected}");
    }

    #[test]
    fn handles_oscillatory_damped_integrand() {
        // ∫₀^∞ cos(bx)·e^{−a x²} dx = ½√(π/a)·e^{−b²/(4a)}, here a=1/2, b=4
        // (≈ 25 oscillation periods over the truncated range).
        let a = 0.5_f64;
        let b = 4.0_f64;
        // abs_tol must sit above the estimator's round-off floor (~9e-15
        // here: 50ε·res_abs accumulated across panels).
        let tol = QuadTolerance { abs_tol: 2e-14, rel_tol: 1e-12, max_panels: 2000 };
        let got = integrate(|x| (b * x).cos() * (-a * x * x).exp(), 0.0, 40.0, tol).unwrap();
        let expected = 0.5 * (std::f64::consts::PI / a).sqrt() * (-b * b / (4.0 * a)).exp();
        assert!(
            ((got - expected) / expected).abs() < 1e-10,
            "got {got:e}, expected {expected:e}"
        );
    }

    #[test]
    fn vector_pass_matches_component_wise_integrals() {
        let joint = integrate_vec(|x| [x.sin(), x.cos(), 1.0], 0.0, 1.0, TOL).unwrap();
        let sin = integrate(f64::sin, 0.0, 1.0, TOL).unwrap();
        let cos = integrate(f64::cos, 0.0, 1.0, TOL).unwrap();
        assert!((joint[0] - sin).abs() < 1e-14);
        assert!((joint[1] - cos).abs() < 1e-14);
        assert!((joint[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reports_failure_when_budget_is_too_small() {
        // An integrable singularity needs many panels; give it almost none.
        let tight = QuadTolerance { abs_tol: 1e-14, rel_tol: 1e-14, max_panels: 3 };
        let err = integrate(|x| x.sqrt().recip(), 1e-12, 1.0, tight).unwrap_err();
        assert!(
            matches!(err, LpHedgeError::Numerical { .. }),
            "expected numerical error, got {err:?}"
        );
        assert!(err.to_string().contains("achieved"), "message was: {err}");
    }

    #[test]
    fn rejects_inverted_bounds() {
        let err = integrate(|x| x, 1.0, 0.0, TOL).unwrap_err();
        assert!(matches!(err, LpHedgeError::InvalidInput { .. }));
    }
}
