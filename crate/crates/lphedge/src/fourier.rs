//! Model-independent claim valuation from the moment generating function of
//! the log return, by contour integration in the complex plane.
//!
//! A model exposes `E(τ; φ) = E[exp(−φ·(ln p_τ − ln p_t))]`, analytic on a
//! strip around the imaginary axis. Every payoff used here has an explicit
//! generalized Fourier transform `û(φ)` on the strip `−1 < Re(φ) < 0`, and
//! prices follow from a single real integral along the vertical contour
//! `φ = iy + c` (default `c = −½`, the symmetric choice):
//!
//! ```text
//! PV = e^{−rτ} · (1/π) ∫₀^∞ Re[ û(iy + c) · E(τ; iy + c) ] dy.
//! ```
//!
//! The building blocks are the capped claim `min(p_τ, k)` (vanillas follow
//! by parity on both sides), the digital, and the banded square-root claim.
//! Full-range and concentrated protection values assemble from these plus
//! the affine legs, which need no quadrature at all.
//!
//! # References
//!
//! - A. Lewis, *A simple option formula for general jump-diffusion and
//!   other exponential Lévy processes*, Envision Financial Systems 2001.
//! - A. Lipton, "The vol smile problem", *Risk*, February 2002.
//! - P. Carr, D. Madan, "Option valuation using the fast Fourier
//!   transform", *Journal of Computational Finance* 2(4), 1999.

use num_complex::Complex64;

use crate::amm::{protection_payoff, PositionKind, PositionSpec, PriceRange, Protocol};
use crate::bsm::{BsmParams, OptionType, ValuationContext};
use crate::decomposition::{decompose, ILComponents};
use crate::error::{LpHedgeError, Result};
use crate::numerics::{integrate_vec, QuadTolerance};

/// Default contour height: real part of `φ` along the integration line.
const DEFAULT_CONTOUR_OFFSET: f64 = -0.5;
/// Decay the integrand must show at the truncation point, relative to its
/// peak near the origin.
const TAIL_DECAY: f64 = 1e-12;
/// How many times the truncation point may double before giving up.
const MAX_TAIL_DOUBLINGS: u32 = 8;

/// A model priced by this module: the conditional moment generating
/// function of its negated log return, plus its carry rates.
pub trait MgfModel {
    /// `E(τ; φ) = E[exp(−φ·(ln p_τ − ln p_t))]` for `φ` on the pricing
    /// strip. Must satisfy `E(0; φ) = 1` and `E(τ; 0) = 1`; `E(τ; −1)`
    /// is the gross forward growth factor `e^{μτ}` (exactly for
    /// martingale-consistent models).
    ///
    /// # Errors
    ///
    /// Model-specific: e.g. an ODE solve failing to converge.
    fn mgf(&self, tau: f64, phi: Complex64) -> Result<Complex64>;

    /// Continuously-compounded discount rate `r`.
    fn rate(&self) -> f64;

    /// Continuous yield `q` of the risky asset.
    fn dividend(&self) -> f64;

    /// A volatility-like scale used to place the truncation point of the
    /// contour integral.
    fn variance_scale(&self) -> f64;
}

/// Log-normal model: the closed-form MGF of Brownian returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsmMgf {
    params: BsmParams,
}

impl BsmMgf {
    pub fn new(params: BsmParams) -> Self {
        Self { params }
    }
}

impl MgfModel for BsmMgf {
    fn mgf(&self, tau: f64, phi: Complex64) -> Result<Complex64> {
        let sigma2 = self.params.sigma * self.params.sigma;
        let drift = self.params.mu() - 0.5 * sigma2;
        Ok((-phi * drift * tau + 0.5 * phi * phi * sigma2 * tau).exp())
    }

    fn rate(&self) -> f64 {
        self.params.r
    }

    fn dividend(&self) -> f64 {
        self.params.q
    }

    fn variance_scale(&self) -> f64 {
        self.params.sigma
    }
}

/// Contour placement and quadrature budget for the Fourier integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Real part of the contour; must stay inside `(−1, 0)`.
    pub contour_offset: f64,
    /// Truncation point of the `y` integral; `None` picks
    /// `200/(scale·√τ)` from the model's variance scale, and the tail is
    /// checked (and the point doubled) in either case.
    pub y_max: Option<f64>,
    pub tolerance: QuadTolerance,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            contour_offset: DEFAULT_CONTOUR_OFFSET,
            y_max: None,
            tolerance: QuadTolerance::default(),
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if !(-1.0 < self.contour_offset && self.contour_offset < 0.0) {
            return Err(LpHedgeError::domain(format!(
                "contour offset must lie strictly inside (-1, 0), got {}",
                self.contour_offset
            )));
        }
        if let Some(y_max) = self.y_max {
            if !(y_max.is_finite() && y_max > 0.0) {
                return Err(LpHedgeError::invalid(format!(
                    "truncation point must be positive and finite, got {y_max}"
                )));
            }
        }
        Ok(())
    }

    fn initial_y_max(&self, model: &impl MgfModel, tau: f64) -> f64 {
        self.y_max
            .unwrap_or_else(|| (200.0 / (model.variance_scale() * tau.sqrt())).clamp(50.0, 1e6))
    }
}

/// Transform of the capped claim `min(p_τ, k)/k = exp(min(x* − x_τ', 0))`
/// shifted by the log moneyness `x* = ln(p_t/k)`:
///
/// ```text
/// û(φ) = −k·e^{−φx*} / (φ² + φ),
/// ```
///
/// analytic for `−1 < Re(φ) < 0`.
///
/// # Errors
///
/// [`LpHedgeError::Domain`] when `φ` leaves the strip.
pub fn transform_capped(phi: Complex64, p_t: f64, k: f64) -> Result<Complex64> {
    if !(-1.0 < phi.re && phi.re < 0.0) {
        return Err(LpHedgeError::domain(format!(
            "capped-claim transform needs -1 < Re(φ) < 0, got Re(φ) = {}",
            phi.re
        )));
    }
    let x_star = (p_t / k).ln();
    Ok(-k * (-phi * x_star).exp() / (phi * phi + phi))
}

/// Transform of the digital `1{p_τ ≥ k}`: `û(φ) = −e^{φκ}/φ` with
/// `κ = ln(k/p_t)`, analytic for `Re(φ) < 0`.
fn transform_digital(phi: Complex64, p_t: f64, k: f64) -> Complex64 {
    let kappa = (k / p_t).ln();
    -(phi * kappa).exp() / phi
}

/// Transform of `e^{z/2}·1{x_a < z < x_b}` where `z` is the log return and
/// `x_{a,b} = ln(p_{a,b}/p_t)`: a difference of exponentials over `φ + ½`,
/// with a removable singularity at `φ = −½`.
fn transform_banded_sqrt(phi: Complex64, p_t: f64, range: PriceRange) -> Complex64 {
    let x_a = (range.lower() / p_t).ln();
    let x_b = (range.upper() / p_t).ln();
    let s = phi + 0.5;
    if s.norm() < 1e-6 {
        // (e^{s·x_b} − e^{s·x_a})/s expanded to second order in s.
        let d1 = x_b - x_a;
        let d2 = x_b * x_b - x_a * x_a;
        let d3 = x_b * x_b * x_b - x_a * x_a * x_a;
        Complex64::new(d1, 0.0) + s * (d2 / 2.0) + s * s * (d3 / 6.0)
    } else {
        ((s * x_b).exp() - (s * x_a).exp()) / s
    }
}

/// Runs the half-line inversion for `N` payoff transforms sharing one MGF
/// evaluation per node, with tail placement checked and auto-extended.
fn inversion_integral<const N: usize>(
    model: &impl MgfModel,
    tau: f64,
    config: &QuadratureConfig,
    transforms: &dyn Fn(Complex64) -> [Complex64; N],
    legs: &[&str; N],
) -> Result<[f64; N]> {
    let offset = config.contour_offset;
    let integrand = |y: f64| -> Result<[f64; N]> {
        let phi = Complex64::new(offset, y);
        let e = model.mgf(tau, phi)?;
        let hats = transforms(phi);
        let mut out = [0.0; N];
        for (slot, hat) in out.iter_mut().zip(hats) {
            *slot = (hat * e).re;
        }
        Ok(out)
    };

    // Place the truncation point: the integrand must have decayed at y_max
    // relative to its peak near the origin.
    let mut y_max = config.initial_y_max(model, tau);
    let probes = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];
    let mut peak = f64::MIN_POSITIVE;
    for y in probes {
        let values = integrand(y)?;
        peak = values.iter().fold(peak, |acc, v| acc.max(v.abs()));
    }
    let mut placed = false;
    for _ in 0..=MAX_TAIL_DOUBLINGS {
        let tail = integrand(y_max)?.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if tail <= TAIL_DECAY * peak {
            placed = true;
            break;
        }
        y_max *= 2.0;
    }
    if !placed {
        return Err(LpHedgeError::Quadrature {
            leg: legs.join(", "),
            message: format!("integrand has not decayed by y = {y_max}; widen y_max"),
        });
    }

    // The quadrature callback is infallible; stash any MGF error and
    // surface it afterwards.
    let mut model_error = None;
    let mut f = |y: f64| -> [f64; N] {
        match integrand(y) {
            Ok(values) => values,
            Err(e) => {
                model_error.get_or_insert(e);
                [0.0; N]
            }
        }
    };
    let raw = integrate_vec(&mut f, 0.0, y_max, config.tolerance);
    if let Some(e) = model_error {
        return Err(e);
    }
    let raw = raw.map_err(|e| match e {
        LpHedgeError::Quadrature { message, .. } => {
            LpHedgeError::Quadrature { leg: legs.join(", "), message }
        }
        other => other,
    })?;
    Ok(raw.map(|v| v / std::f64::consts::PI))
}

fn validate_claim_inputs(p_t: f64, k: f64, tau: f64) -> Result<()> {
    crate::error::validate_positive(p_t, "spot price")?;
    crate::error::validate_positive(k, "strike")?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(LpHedgeError::invalid(format!(
            "time to expiry must be a nonnegative year fraction, got {tau}"
        )));
    }
    Ok(())
}

/// Vanilla price under any [`MgfModel`], via the capped claim
/// `U = PV[min(p_τ, k)]`: `call = PV[p_τ] − U`, `put = e^{−rτ}k − U`.
///
/// At `τ = 0` returns the intrinsic value.
///
/// # Errors
///
/// Invalid inputs, contour misplacement ([`LpHedgeError::Domain`]), or
/// quadrature/model failures.
pub fn price_vanilla(
    model: &impl MgfModel,
    p_t: f64,
    k: f64,
    option: OptionType,
    tau: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    validate_claim_inputs(p_t, k, tau)?;
    config.validate()?;
    if tau == 0.0 {
        return Ok(match option {
            OptionType::Call => (p_t - k).max(0.0),
            OptionType::Put => (k - p_t).max(0.0),
        });
    }
    let discount = (-model.rate() * tau).exp();
    let [integral] = inversion_integral(
        model,
        tau,
        config,
        &|phi| [transform_capped(phi, p_t, k).expect("offset validated")],
        &["capped claim"],
    )?;
    let capped = discount * integral;
    match option {
        OptionType::Call => {
            let forward_pv = discount * p_t * model.mgf(tau, Complex64::new(-1.0, 0.0))?.re;
            Ok(forward_pv - capped)
        }
        OptionType::Put => Ok(discount * k - capped),
    }
}

/// Cash-or-nothing digital price: pays 1 when the side's moneyness
/// condition holds at expiry (`p_τ ≥ k` for calls, `p_τ ≤ k` for puts; the
/// put follows by parity against the discounted bond).
///
/// At `τ = 0` returns the indicator with closed boundaries.
///
/// # Errors
///
/// As [`price_vanilla`].
pub fn price_digital(
    model: &impl MgfModel,
    p_t: f64,
    k: f64,
    option: OptionType,
    tau: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    validate_claim_inputs(p_t, k, tau)?;
    config.validate()?;
    if tau == 0.0 {
        return Ok(match option {
            OptionType::Call => {
                if p_t >= k {
                    1.0
                } else {
                    0.0
                }
            }
            OptionType::Put => {
                if p_t <= k {
                    1.0
                } else {
                    0.0
                }
            }
        });
    }
    let discount = (-model.rate() * tau).exp();
    let [integral] = inversion_integral(
        model,
        tau,
        config,
        &|phi| [transform_digital(phi, p_t, k)],
        &["digital"],
    )?;
    match option {
        OptionType::Call => Ok(discount * integral),
        OptionType::Put => Ok(discount * (1.0 - integral)),
    }
}

/// Price of the banded square-root claim paying `2√p_τ·1{p_a < p_τ < p_b}`.
///
/// At `τ = 0` returns the payoff (closed band).
///
/// # Errors
///
/// As [`price_vanilla`].
pub fn price_sqrt_claim(
    model: &impl MgfModel,
    p_t: f64,
    range: PriceRange,
    tau: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    validate_claim_inputs(p_t, range.lower(), tau)?;
    config.validate()?;
    if tau == 0.0 {
        let in_band = range.lower() <= p_t && p_t <= range.upper();
        return Ok(if in_band { 2.0 * p_t.sqrt() } else { 0.0 });
    }
    let discount = (-model.rate() * tau).exp();
    let [integral] = inversion_integral(
        model,
        tau,
        config,
        &|phi| [transform_banded_sqrt(phi, p_t, range)],
        &["banded sqrt claim"],
    )?;
    Ok(2.0 * p_t.sqrt() * discount * integral)
}

/// Full-range protection value under any [`MgfModel`]: closed in the
/// half-moment `E(τ; −½)` and the forward factor `E(τ; −1)`, no quadrature.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for concentrated or relative specs;
/// model failures.
pub fn pv_v2_mgf(model: &impl MgfModel, spec: &PositionSpec, ctx: &ValuationContext) -> Result<f64> {
    if spec.protocol != Protocol::V2 {
        return Err(LpHedgeError::invalid(
            "full-range valuation requires a full-range position; use the concentrated valuer",
        ));
    }
    debug_assert!(
        ((ctx.p_t / spec.p0).ln() - ctx.x_t).abs() < 1e-12,
        "valuation context was built against a different entry price"
    );
    let discount = (-model.rate() * ctx.tau).exp();
    let half_moment = model.mgf(ctx.tau, Complex64::new(-0.5, 0.0))?.re;
    let sqrt_ratio = (0.5 * ctx.x_t).exp() * half_moment;
    match spec.kind {
        PositionKind::Funded => Ok(discount * (1.0 - sqrt_ratio)),
        PositionKind::BorrowedNominal => {
            let forward_ratio = ctx.x_t.exp() * model.mgf(ctx.tau, Complex64::new(-1.0, 0.0))?.re;
            Ok(0.5 * discount * (forward_ratio - 2.0 * sqrt_ratio + 1.0))
        }
        PositionKind::BorrowedRelative => Err(LpHedgeError::invalid(
            "relative losses have no present value; use the nominal borrowed kind",
        )),
    }
}

/// PVs of the three decomposition legs, in the same raw units as the
/// decomposition itself (divide by the normalization for the claim value).
struct LegPresentValues {
    u0: f64,
    u_half: f64,
    u1: f64,
}

/// Values all quadrature-bearing legs of a concentrated decomposition in a
/// single shared contour pass (one MGF evaluation per node).
fn leg_present_values(
    model: &impl MgfModel,
    components: &ILComponents,
    ctx: &ValuationContext,
    config: &QuadratureConfig,
) -> Result<LegPresentValues> {
    let tau = ctx.tau;
    let p_t = ctx.p_t;
    let discount = (-model.rate() * tau).exp();
    let forward_factor = model.mgf(tau, Complex64::new(-1.0, 0.0))?.re;

    let affine = &components.u0;
    let u0 = discount * (affine.slope * p_t * forward_factor + affine.intercept);

    let band = PriceRange::new(components.u_half.lower, components.u_half.upper)?;
    let options = &components.u1;
    let (k_put, k_call) = (options.put_strike, options.call_strike);
    let legs = ["put leg", "call leg", "digital put leg", "digital call leg", "sqrt leg"];
    let integrals = inversion_integral(
        model,
        tau,
        config,
        &|phi| {
            [
                transform_capped(phi, p_t, k_put).expect("offset validated"),
                transform_capped(phi, p_t, k_call).expect("offset validated"),
                transform_digital(phi, p_t, k_put),
                transform_digital(phi, p_t, k_call),
                transform_banded_sqrt(phi, p_t, band),
            ]
        },
        &legs,
    )?;

    let put_pv = discount * k_put - discount * integrals[0];
    let call_pv = discount * p_t * forward_factor - discount * integrals[1];
    let digital_put_pv = discount * (1.0 - integrals[2]);
    let digital_call_pv = discount * integrals[3];
    let sqrt_unit_pv = p_t.sqrt() * discount * integrals[4];

    let u_half = components.u_half.coefficient * sqrt_unit_pv;
    let u1 = options.put_weight * put_pv
        + options.call_weight * call_pv
        + options.digital_put_weight * digital_put_pv
        + options.digital_call_weight * digital_call_pv;
    Ok(LegPresentValues { u0, u_half, u1 })
}

/// Concentrated protection value under any [`MgfModel`]: the decomposition
/// legs valued through one shared contour integral.
///
/// At `τ = 0` returns the protection payoff itself.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for unsupported specs, quadrature or
/// model failures ([`LpHedgeError::Quadrature`] names the legs).
pub fn pv_v3_mgf(
    model: &impl MgfModel,
    spec: &PositionSpec,
    ctx: &ValuationContext,
    config: &QuadratureConfig,
) -> Result<f64> {
    config.validate()?;
    debug_assert!(
        ((ctx.p_t / spec.p0).ln() - ctx.x_t).abs() < 1e-12,
        "valuation context was built against a different entry price"
    );
    let components = decompose(spec)?;
    if ctx.tau == 0.0 {
        return Ok(protection_payoff(spec, ctx.p_t));
    }
    let pvs = leg_present_values(model, &components, ctx, config)?;
    Ok(-(pvs.u0 + pvs.u_half + pvs.u1) / components.normalization)
}
