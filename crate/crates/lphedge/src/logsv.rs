//! Log-normal stochastic volatility: a first-order moment generating
//! function and the implied-vol smile it produces.
//!
//! The instantaneous volatility follows a mean-reverting log-normal
//! diffusion with level-dependent reversion speed,
//!
//! ```text
//! dx = −σ²/2 dt + σ dW,
//! dσ = (κ₁ + κ₂σ)(θ − σ) dt + βσ dW + εσ dZ,   ⟨dW, dZ⟩ = 0,
//! ```
//!
//! so `β` carries spot–vol correlation and `ϑ² = β² + ε²` the total
//! vol-of-vol. The MGF of the negated log return is approximated to first
//! order in the vol displacement:
//!
//! ```text
//! E(τ; φ) ≈ exp{A₀(τ) + A₁(τ)(σ₀−θ) + A₂(τ)(σ₀−θ)²},
//! ```
//!
//! where the `A_k` solve a quadratic (matrix-Riccati-type) ODE system with
//! `A(0) = 0`, integrated here with an adaptive Dormand–Prince scheme. At
//! `φ ∈ {0, −1}` the inhomogeneous terms vanish, so `E = 1` exactly and the
//! approximation prices the forward correctly. With `ϑ = β = 0` and
//! `σ₀ = θ` the MGF collapses to the log-normal one in closed form.
//!
//! One coefficient of the `A₂` equation is written here in two published
//! variants ([`VolOfVolTerm`]); the squared form is the default, selected
//! by cross-checking prices against a path-level Euler simulation.
//!
//! # References
//!
//! - J. C. Butcher, *Numerical Methods for Ordinary Differential
//!   Equations*, Wiley 2008 (Riccati systems, embedded RK pairs).
//! - R. P. Brent, *Algorithms for Minimization without Derivatives*,
//!   Prentice-Hall 1973 (implied-vol root bracketing).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bsm::{bsm_vanilla, BsmParams, OptionType};
use crate::error::{validate_finite, validate_positive, LpHedgeError, Result};
use crate::fourier::{price_vanilla, MgfModel, QuadratureConfig};
use crate::numerics::{brent, integrate_rk45, OdeTolerance};

/// Lower edge of the implied-vol bracket.
const IV_BRACKET_LOW: f64 = 1e-4;
/// Upper edge of the implied-vol bracket.
const IV_BRACKET_HIGH: f64 = 5.0;
/// Absolute tolerance of the implied-vol root solve.
const IV_TOLERANCE: f64 = 1e-10;

/// Parameters of the log-normal stochastic volatility dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSvParams {
    /// Initial instantaneous volatility `σ₀`.
    pub sigma0: f64,
    /// Long-run volatility level `θ`.
    pub theta: f64,
    /// Constant part of the mean-reversion speed `κ₁`.
    pub kappa1: f64,
    /// Level-proportional part of the mean-reversion speed `κ₂`.
    pub kappa2: f64,
    /// Correlated vol-of-vol `β` (loads on the spot Brownian).
    pub beta: f64,
    /// Independent vol-of-vol `ε`.
    pub epsilon: f64,
}

impl LogSvParams {
    /// Validates the parameter set: positive levels, nonnegative reversion
    /// speeds with at least one active, nonnegative `ε`, finite `β`.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] describing the offending field.
    pub fn validate(&self) -> Result<()> {
        validate_positive(self.sigma0, "initial volatility sigma0")?;
        validate_positive(self.theta, "long-run volatility theta")?;
        validate_finite(self.kappa1, "reversion speed kappa1")?;
        validate_finite(self.kappa2, "reversion speed kappa2")?;
        if self.kappa1 < 0.0 || self.kappa2 < 0.0 {
            return Err(LpHedgeError::invalid(format!(
                "reversion speeds must be nonnegative, got kappa1 = {}, kappa2 = {}",
                self.kappa1, self.kappa2
            )));
        }
        if self.kappa2 == 0.0 && self.kappa1 <= 0.0 {
            return Err(LpHedgeError::invalid(
                "volatility must mean-revert: kappa1 must be positive when kappa2 is zero",
            ));
        }
        validate_finite(self.beta, "correlated vol-of-vol beta")?;
        validate_finite(self.epsilon, "independent vol-of-vol epsilon")?;
        if self.epsilon < 0.0 {
            return Err(LpHedgeError::invalid(format!(
                "independent vol-of-vol epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Total squared vol-of-vol `ϑ² = β² + ε²`.
    fn vol_of_vol_sq(&self) -> f64 {
        self.beta * self.beta + self.epsilon * self.epsilon
    }
}

/// Which published form of the `A₂`-damping coefficient to use: the two
/// differ in whether the vol-of-vol enters squared or linearly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolOfVolTerm {
    /// `ϑ²` — consistent with the path-level simulation; the default.
    #[default]
    Squared,
    /// `ϑ` — the alternative printed form, kept for comparison.
    AsPrinted,
}

/// The coefficient ODE right-hand side: `A'_k = AᵀM⁽ᵏ⁾A + L⁽ᵏ⁾ᵀA + H⁽ᵏ⁾`
/// written out with the zero entries dropped.
fn coefficient_rhs(
    a: &[Complex64; 3],
    phi: Complex64,
    params: &LogSvParams,
    variant: VolOfVolTerm,
) -> [Complex64; 3] {
    let th = params.theta;
    let b = params.beta;
    let vth2 = params.vol_of_vol_sq();
    let vth_term = match variant {
        VolOfVolTerm::Squared => vth2,
        VolOfVolTerm::AsPrinted => vth2.sqrt(),
    };
    let kappa = params.kappa1 + params.kappa2 * th;
    let [_, a1, a2] = *a;
    let a1a1 = a1 * a1;
    let a1a2 = a1 * a2;
    let a2a2 = a2 * a2;
    let h = phi * phi + phi;
    let d0 = (0.5 * th * th * vth2) * a1a1 - (th * th * b) * phi * a1
        + (th * th * vth2) * a2
        + 0.5 * th * th * h;
    let d1 = (th * vth2) * a1a1 + (2.0 * th * th * vth2) * a1a2
        - (kappa + (2.0 * th * b) * phi) * a1
        + 2.0 * ((th * vth2) - (th * th * b) * phi) * a2
        + th * h;
    let d2 = (0.5 * vth2) * a1a1 + (4.0 * th * vth2) * a1a2 + (2.0 * th * th * vth2) * a2a2
        - (b * phi + params.kappa2) * a1
        + (vth_term - 2.0 * kappa - (4.0 * th * b) * phi) * a2
        + 0.5 * h;
    [d0, d1, d2]
}

/// The stochastic-vol model packaged for the contour pricer: carries the
/// dynamics, the discount/yield rates, the coefficient variant, and the
/// ODE accuracy budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSvMgf {
    params: LogSvParams,
    r: f64,
    q: f64,
    variant: VolOfVolTerm,
    tolerance: OdeTolerance,
}

impl LogSvMgf {
    /// Wraps validated dynamics with zero rates, the default coefficient
    /// variant, and the default ODE tolerance.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] if the parameters are invalid.
    pub fn new(params: LogSvParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, r: 0.0, q: 0.0, variant: VolOfVolTerm::default(), tolerance: OdeTolerance::default() })
    }

    /// Sets the discount rate and the asset yield.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on non-finite rates.
    pub fn with_rates(mut self, r: f64, q: f64) -> Result<Self> {
        validate_finite(r, "discount rate")?;
        validate_finite(q, "asset yield")?;
        self.r = r;
        self.q = q;
        Ok(self)
    }

    /// Selects the `A₂`-damping coefficient variant.
    pub fn with_variant(mut self, variant: VolOfVolTerm) -> Self {
        self.variant = variant;
        self
    }

    /// Overrides the coefficient-ODE accuracy budget.
    pub fn with_ode_tolerance(mut self, tolerance: OdeTolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn params(&self) -> &LogSvParams {
        &self.params
    }
}

impl MgfModel for LogSvMgf {
    fn mgf(&self, tau: f64, phi: Complex64) -> Result<Complex64> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(LpHedgeError::invalid(format!(
                "time to expiry must be a nonnegative year fraction, got {tau}"
            )));
        }
        let params = self.params;
        let variant = self.variant;
        let a = integrate_rk45(
            |_, state| coefficient_rhs(state, phi, &params, variant),
            0.0,
            tau,
            [Complex64::new(0.0, 0.0); 3],
            self.tolerance,
        )?;
        let dv = params.sigma0 - params.theta;
        let exponent = a[0] + a[1] * dv + a[2] * (dv * dv);
        // The coefficient system describes the driftless return; the carry
        // drift enters as an exact prefactor.
        let mu = self.r - self.q;
        Ok(((-phi) * (mu * tau) + exponent).exp())
    }

    fn rate(&self) -> f64 {
        self.r
    }

    fn dividend(&self) -> f64 {
        self.q
    }

    fn variance_scale(&self) -> f64 {
        self.params.sigma0.max(self.params.theta)
    }
}

/// Black–Scholes–Merton implied volatility of a call price, bracketed on
/// `[10⁻⁴, 5]`.
///
/// # Errors
///
/// [`LpHedgeError::Domain`] when the price violates the no-arbitrage
/// bounds at this strike; [`LpHedgeError::Numerical`] if the root solve
/// fails.
pub fn implied_vol(price: f64, p_t: f64, k: f64, r: f64, q: f64, tau: f64) -> Result<f64> {
    validate_positive(p_t, "spot price")?;
    validate_positive(k, "strike")?;
    validate_positive(tau, "time to expiry")?;
    let lower = (p_t * (-q * tau).exp() - k * (-r * tau).exp()).max(0.0);
    let upper = p_t * (-q * tau).exp();
    if !(lower < price && price < upper) {
        return Err(LpHedgeError::domain(format!(
            "call price {price} at strike {k} violates the no-arbitrage bounds ({lower}, {upper})"
        )));
    }
    brent(
        |sigma| {
            let params = BsmParams::new(sigma, r, q).expect("bracket keeps sigma positive");
            bsm_vanilla(p_t, k, OptionType::Call, &params, tau) - price
        },
        IV_BRACKET_LOW,
        IV_BRACKET_HIGH,
        IV_TOLERANCE,
    )
    .map_err(|e| match e {
        LpHedgeError::InvalidInput { message } | LpHedgeError::Numerical { message } => {
            LpHedgeError::numerical(format!("implied vol at strike {k}: {message}"))
        }
        other => other,
    })
}

/// Implied-vol smile of a model: call prices by contour integration, then
/// per-strike root solves against the log-normal formula.
///
/// # Errors
///
/// Propagates pricing failures; [`LpHedgeError::Domain`] names any strike
/// whose model price leaves the no-arbitrage bounds.
pub fn implied_vol_curve(
    model: &impl MgfModel,
    p_t: f64,
    strikes: &[f64],
    tau: f64,
    config: &QuadratureConfig,
) -> Result<Vec<f64>> {
    strikes
        .iter()
        .map(|&k| {
            let price = price_vanilla(model, p_t, k, OptionType::Call, tau, config)?;
            implied_vol(price, p_t, k, model.rate(), model.dividend(), tau)
        })
        .collect()
}
