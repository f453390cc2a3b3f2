//! Closed-form log-normal valuation and delta of impermanent-loss protection
//! claims, plus the vanilla building blocks.
//!
//! The pool price follows `dp = μp dt + σp dw` with `μ = r − q` under the
//! pricing measure. A protection claim pays `−il(p_T)` per unit notional at
//! maturity. Its value assembles the loss decomposition term by term:
//!
//! ```text
//! pv = −(U₀ + U_½ + U₁)/D
//! U₀  = e^{−qτ}·slope·p_t + e^{−rτ}·intercept
//! U_½ = 2e^{−rτ}√p_t·e^{μτ/2 − σ²τ/8}·[N(h_b) − N(h_a)],
//!       h_x = (ln(p_x/p_t) − μτ)/(σ√τ)
//! U₁  = −Put(p_a)/√p_a + Call(p_b)/√p_b + 2√p_a·Dig⁻(p_a) + 2√p_b·Dig⁺(p_b)
//! ```
//!
//! Full-range claims reduce to one square-root moment
//! `G(τ;−½) = e^{μτ/2 − σ²τ/8}` and need no strikes.
//!
//! # References
//!
//! - F. Black, M. Scholes, "The pricing of options and corporate
//!   liabilities", J. Political Economy 81 (1973) 637–654.
//! - R. C. Merton, "Theory of rational option pricing", Bell J. Econ. 4
//!   (1973) 141–183.

use serde::{Deserialize, Serialize};

use crate::amm::{protection_payoff, PositionKind, PositionSpec, PriceRange, Protocol};
use crate::decomposition::{decompose, ILComponents};
use crate::error::{validate_finite, validate_positive, LpHedgeError, Result};
use crate::numerics::{norm_cdf, norm_pdf};

/// Year-fraction convention used throughout (day counts divide by this).
pub const DAYS_PER_YEAR: f64 = 365.0;

/// Vanilla option flavour; `omega` is the usual ±1 sign in d±-form prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionType {
    Call,
    Put,
}

impl OptionType {
    /// +1 for calls, −1 for puts.
    pub fn omega(&self) -> f64 {
        match self {
            OptionType::Call => 1.0,
            OptionType::Put => -1.0,
        }
    }
}

/// Log-normal model parameters: volatility and the two carry rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsmParams {
    /// Annualized volatility, σ > 0.
    pub sigma: f64,
    /// Discount rate r (annualized, continuous compounding).
    pub r: f64,
    /// Borrow/dividend rate q; the risk-neutral drift is μ = r − q.
    pub q: f64,
}

impl BsmParams {
    /// Validated construction.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on σ ≤ 0 or non-finite rates.
    pub fn new(sigma: f64, r: f64, q: f64) -> Result<Self> {
        validate_positive(sigma, "volatility")?;
        validate_finite(r, "discount rate")?;
        validate_finite(q, "borrow rate")?;
        Ok(Self { sigma, r, q })
    }

    /// Volatility-only parameters with r = q = 0, the common DEX setting.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on σ ≤ 0.
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        Self::new(sigma, 0.0, 0.0)
    }

    /// Risk-neutral drift μ = r − q.
    pub fn mu(&self) -> f64 {
        self.r - self.q
    }
}

/// Where a claim is being valued: time to maturity, current price, and the
/// realized log-performance since entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValuationContext {
    /// Year fraction to maturity, τ ≥ 0.
    pub tau: f64,
    /// Current pool price.
    pub p_t: f64,
    /// Realized log-performance `x_t = ln(p_t/p₀)`.
    pub x_t: f64,
}

impl ValuationContext {
    /// Builds a context at current price `p_t` for a position entered at
    /// `p0`; keeps `x_t` consistent by construction.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on negative τ or non-positive prices.
    pub fn new(tau: f64, p_t: f64, p0: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(LpHedgeError::invalid(format!(
                "time to maturity must be finite and nonnegative, got {tau}"
            )));
        }
        validate_positive(p_t, "current price")?;
        validate_positive(p0, "entry price")?;
        Ok(Self { tau, p_t, x_t: (p_t / p0).ln() })
    }

    /// Context at the entry price itself (`x_t = 0`).
    ///
    /// # Errors
    ///
    /// As [`ValuationContext::new`].
    pub fn at_entry(tau: f64, p0: f64) -> Result<Self> {
        Self::new(tau, p0, p0)
    }
}

/// d± of the log-normal model.
fn d_plus_minus(p: f64, k: f64, params: &BsmParams, tau: f64) -> (f64, f64) {
    let st = params.sigma * tau.sqrt();
    let d_minus = ((p / k).ln() + params.mu() * tau) / st - 0.5 * st;
    (d_minus + st, d_minus)
}

/// Vanilla European price `ω[e^{−qτ}p·N(ωd₊) − ke^{−rτ}N(ωd₋)]`.
///
/// At τ = 0 returns the raw payoff `(ω(p−k))⁺`. Inputs must be positive
/// prices (debug-asserted; no error path per the closed-form contract).
pub fn bsm_vanilla(p_t: f64, k: f64, option: OptionType, params: &BsmParams, tau: f64) -> f64 {
    debug_assert!(p_t > 0.0 && k > 0.0, "prices must be positive: p={p_t}, k={k}");
    let omega = option.omega();
    if tau == 0.0 {
        return (omega * (p_t - k)).max(0.0);
    }
    let (d_plus, d_minus) = d_plus_minus(p_t, k, params, tau);
    omega
        * ((-params.q * tau).exp() * p_t * norm_cdf(omega * d_plus)
            - k * (-params.r * tau).exp() * norm_cdf(omega * d_minus))
}

/// Cash-or-nothing digital `e^{−rτ}N(ωd₋)`, paying 1 beyond the strike.
///
/// At τ = 0 the payoff uses closed boundaries (call pays at `p ≥ k`, put at
/// `p ≤ k`), matching the digital legs of the loss decomposition.
pub fn bsm_digital(p_t: f64, k: f64, option: OptionType, params: &BsmParams, tau: f64) -> f64 {
    debug_assert!(p_t > 0.0 && k > 0.0, "prices must be positive: p={p_t}, k={k}");
    let omega = option.omega();
    if tau == 0.0 {
        return if omega * (p_t - k) >= 0.0 { 1.0 } else { 0.0 };
    }
    let (_, d_minus) = d_plus_minus(p_t, k, params, tau);
    (-params.r * tau).exp() * norm_cdf(omega * d_minus)
}

/// Value of the banded square-root claim paying `2√p_T·1{p_a < p_T < p_b}`.
///
/// The leading 2 matches the square-root leg of the loss decomposition
/// (whose coefficient is itself pinned by reconstruction tests). At τ = 0
/// returns the raw payoff with its open-interval indicator.
pub fn sqrt_claim(p_t: f64, range: PriceRange, params: &BsmParams, tau: f64) -> f64 {
    2.0 * sqrt_claim_unit(p_t, range, params, tau)
}

/// Value of `√p_T·1{p_a < p_T < p_b}` — the coefficient-free claim that
/// `pv_v3` scales by the decomposition's stored coefficient.
fn sqrt_claim_unit(p_t: f64, range: PriceRange, params: &BsmParams, tau: f64) -> f64 {
    debug_assert!(p_t > 0.0, "price must be positive: p={p_t}");
    if tau == 0.0 {
        return if range.contains(p_t) { p_t.sqrt() } else { 0.0 };
    }
    let mu = params.mu();
    let st = params.sigma * tau.sqrt();
    let h_b = ((range.upper() / p_t).ln() - mu * tau) / st;
    let h_a = ((range.lower() / p_t).ln() - mu * tau) / st;
    (-params.r * tau).exp()
        * p_t.sqrt()
        * (mu * tau / 2.0 - params.sigma * params.sigma * tau / 8.0).exp()
        * (norm_cdf(h_b) - norm_cdf(h_a))
}

/// Square-root moment `G(τ;−½) = E[e^{x_τ/2}] = e^{μτ/2 − σ²τ/8}` of the
/// log-return.
fn sqrt_moment(params: &BsmParams, tau: f64) -> f64 {
    (params.mu() * tau / 2.0 - params.sigma * params.sigma * tau / 8.0).exp()
}

/// Present value of a full-range protection claim per unit notional.
///
/// ```text
/// funded:   e^{−rτ}[1 − e^{x_t/2}G(τ;−½)]
/// borrowed: ½e^{−rτ}[e^{x_t+μτ} − 2e^{x_t/2}G(τ;−½) + 1]
/// ```
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for non-full-range specs or the relative
/// borrowed kind (the claim market prices nominal losses).
pub fn pv_v2(spec: &PositionSpec, ctx: &ValuationContext, params: &BsmParams) -> Result<f64> {
    if spec.protocol != Protocol::V2 {
        return Err(LpHedgeError::invalid("full-range valuation requires a full-range position"));
    }
    debug_assert!(
        (ctx.x_t - (ctx.p_t / spec.p0).ln()).abs() < 1e-12,
        "context log-performance inconsistent with the position's entry price"
    );
    let g = sqrt_moment(params, ctx.tau);
    let half_perf = (ctx.x_t / 2.0).exp();
    let discount = (-params.r * ctx.tau).exp();
    match spec.kind {
        PositionKind::Funded => Ok(discount * (1.0 - half_perf * g)),
        PositionKind::BorrowedNominal => {
            let hold = (ctx.x_t + params.mu() * ctx.tau).exp();
            Ok(0.5 * discount * (hold - 2.0 * half_perf * g + 1.0))
        }
        PositionKind::BorrowedRelative => Err(LpHedgeError::invalid(
            "relative losses are not priced; use the nominal borrowed kind",
        )),
    }
}

/// Present value of a banded protection claim per unit notional:
/// `−(U₀ + U_½ + U₁)/D`, the decomposition priced term by term.
///
/// At τ = 0 returns the raw protection payoff.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for full-range specs or the relative
/// borrowed kind (propagated from the decomposition).
pub fn pv_v3(spec: &PositionSpec, ctx: &ValuationContext, params: &BsmParams) -> Result<f64> {
    let components = decompose(spec)?;
    debug_assert!(
        (ctx.x_t - (ctx.p_t / spec.p0).ln()).abs() < 1e-12,
        "context log-performance inconsistent with the position's entry price"
    );
    if ctx.tau == 0.0 {
        return Ok(protection_payoff(spec, ctx.p_t));
    }
    Ok(-(u0_value(&components, ctx, params)
        + u_half_value(&components, ctx, params)
        + u1_value(&components, ctx, params))
        / components.normalization)
}

/// Discounted expectation of the affine leg; the forward prices the slope.
fn u0_value(components: &ILComponents, ctx: &ValuationContext, params: &BsmParams) -> f64 {
    (-params.q * ctx.tau).exp() * components.u0.slope * ctx.p_t
        + (-params.r * ctx.tau).exp() * components.u0.intercept
}

/// Value of the square-root leg with the decomposition's own coefficient.
fn u_half_value(components: &ILComponents, ctx: &ValuationContext, params: &BsmParams) -> f64 {
    let range = PriceRange::new(components.u_half.lower, components.u_half.upper)
        .expect("decomposition carries a valid band");
    components.u_half.coefficient * sqrt_claim_unit(ctx.p_t, range, params, ctx.tau)
}

/// Value of the vanilla/digital leg with the decomposition's signed weights.
fn u1_value(components: &ILComponents, ctx: &ValuationContext, params: &BsmParams) -> f64 {
    let ol = &components.u1;
    ol.put_weight * bsm_vanilla(ctx.p_t, ol.put_strike, OptionType::Put, params, ctx.tau)
        + ol.call_weight * bsm_vanilla(ctx.p_t, ol.call_strike, OptionType::Call, params, ctx.tau)
        + ol.digital_put_weight * bsm_digital(ctx.p_t, ol.put_strike, OptionType::Put, params, ctx.tau)
        + ol.digital_call_weight
            * bsm_digital(ctx.p_t, ol.call_strike, OptionType::Call, params, ctx.tau)
}

/// Hedge ratio of the banded protection claim: `∂pv/∂p_t` per unit notional,
/// assembled from the printed vanilla and digital deltas.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] as [`pv_v3`], and additionally at τ = 0
/// where the payoff's kinks make the derivative undefined.
pub fn delta_v3(spec: &PositionSpec, ctx: &ValuationContext, params: &BsmParams) -> Result<f64> {
    let components = decompose(spec)?;
    if ctx.tau == 0.0 {
        return Err(LpHedgeError::invalid(
            "delta requires positive time to maturity (the payoff kinks at expiry)",
        ));
    }
    let tau = ctx.tau;
    let p_t = ctx.p_t;
    let mu = params.mu();
    let st = params.sigma * tau.sqrt();

    let d_u0 = (-params.q * tau).exp() * components.u0.slope;

    // d/dp of C·√p·[N(h_b) − N(h_a)] with h_x = (ln(p_x/p) − μτ)/(σ√τ).
    let sl = &components.u_half;
    let h_b = ((sl.upper / p_t).ln() - mu * tau) / st;
    let h_a = ((sl.lower / p_t).ln() - mu * tau) / st;
    let c = sl.coefficient * (-params.r * tau).exp() * sqrt_moment(params, tau);
    let d_u_half = c
        * ((norm_cdf(h_b) - norm_cdf(h_a)) / (2.0 * p_t.sqrt())
            - (norm_pdf(h_b) - norm_pdf(h_a)) / (p_t.sqrt() * st));

    let vanilla_delta = |k: f64, omega: f64| -> f64 {
        let (d_plus, _) = d_plus_minus(p_t, k, params, tau);
        omega * (-params.q * tau).exp() * norm_cdf(omega * d_plus)
    };
    let digital_delta = |k: f64, omega: f64| -> f64 {
        let (_, d_minus) = d_plus_minus(p_t, k, params, tau);
        omega * (-params.r * tau).exp() * norm_pdf(d_minus) / (p_t * st)
    };
    let ol = &components.u1;
    let d_u1 = ol.put_weight * vanilla_delta(ol.put_strike, -1.0)
        + ol.call_weight * vanilla_delta(ol.call_strike, 1.0)
        + ol.digital_put_weight * digital_delta(ol.put_strike, -1.0)
        + ol.digital_call_weight * digital_delta(ol.call_strike, 1.0);

    Ok(-(d_u0 + d_u_half + d_u1) / components.normalization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TAU: f64 = 14.0 / 365.0;
    const P0: f64 = 2_000.0;

    fn params() -> BsmParams {
        BsmParams::from_sigma(0.5).unwrap()
    }

    fn reference_range() -> PriceRange {
        PriceRange::new(1_500.0, 2_500.0).unwrap()
    }

    fn v3_spec(kind: PositionKind) -> PositionSpec {
        PositionSpec::from_notional(Protocol::V3(reference_range()), P0, 1.0, kind).unwrap()
    }

    #[test]
    fn vanilla_matches_references() {
        // (p, k, type, r, q, expected) at σ = 0.5, τ = 14/365.
        let cases = [
            (2_000.0, 2_000.0, OptionType::Call, 0.0, 0.0, 78.100_562_120_393_44),
            (2_000.0, 2_500.0, OptionType::Call, 0.0, 0.0, 0.852_245_236_712_051_6),
            (2_000.0, 1_500.0, OptionType::Put, 0.0, 0.0, 0.080_517_155_792_907_23),
            (2_000.0, 2_100.0, OptionType::Call, 0.03, 0.01, 40.236_055_060_584_03),
        ];
        for (p, k, option, r, q, expected) in cases {
            let params = BsmParams::new(0.5, r, q).unwrap();
            assert_relative_eq!(bsm_vanilla(p, k, option, &params, TAU), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn put_call_parity_holds() {
        let params = BsmParams::new(0.5, 0.03, 0.01).unwrap();
        let (p, k) = (2_000.0, 2_100.0);
        let call = bsm_vanilla(p, k, OptionType::Call, &params, TAU);
        let put = bsm_vanilla(p, k, OptionType::Put, &params, TAU);
        let forward = (-params.q * TAU).exp() * p - (-params.r * TAU).exp() * k;
        assert_relative_eq!(call - put, forward, max_relative = 1e-12);
    }

    #[test]
    fn vanilla_expiry_returns_payoff() {
        assert_eq!(bsm_vanilla(110.0, 100.0, OptionType::Call, &params(), 0.0), 10.0);
        assert_eq!(bsm_vanilla(110.0, 100.0, OptionType::Put, &params(), 0.0), 0.0);
    }

    #[test]
    fn digital_matches_reference_and_parity() {
        let d = bsm_digital(2_000.0, 2_500.0, OptionType::Call, &params(), TAU);
        assert_relative_eq!(d, 0.009_963_695_805_345_449, max_relative = 1e-12);

        let params = BsmParams::new(0.5, 0.03, 0.0).unwrap();
        let up = bsm_digital(2_000.0, 1_900.0, OptionType::Call, &params, TAU);
        let down = bsm_digital(2_000.0, 1_900.0, OptionType::Put, &params, TAU);
        assert_relative_eq!(up + down, (-params.r * TAU).exp(), max_relative = 1e-14);
    }

    #[test]
    fn digital_call_saturates_at_vanishing_strike() {
        let params = BsmParams::new(0.5, 0.03, 0.0).unwrap();
        let d = bsm_digital(2_000.0, 1e-9, OptionType::Call, &params, TAU);
        assert_relative_eq!(d, (-params.r * TAU).exp(), max_relative = 1e-12);
    }

    #[test]
    fn sqrt_claim_matches_references() {
        let banded = sqrt_claim(2_000.0, reference_range(), &params(), TAU);
        assert_relative_eq!(banded, 88.174_784_045_915_97, max_relative = 1e-13);

        let carry = BsmParams::new(0.5, 0.03, 0.01).unwrap();
        let with_rates = sqrt_claim(2_000.0, reference_range(), &carry, TAU);
        assert_relative_eq!(with_rates, 88.089_870_651_083_88, max_relative = 1e-13);

        // Unbounded band → 2√p·e^{−σ²τ/8} at r = q = 0.
        let wide = PriceRange::new(1e-9, 1e12).unwrap();
        let unbounded = sqrt_claim(2_000.0, wide, &params(), TAU);
        assert_relative_eq!(unbounded, 89.335_574_587_493_19, max_relative = 1e-12);
    }

    #[test]
    fn sqrt_claim_vanishes_on_degenerate_band() {
        let thin = PriceRange::new(1_800.0, 1_800.0 * (1.0 + 1e-12)).unwrap();
        assert!(sqrt_claim(2_000.0, thin, &params(), TAU).abs() < 1e-9);
    }

    #[test]
    fn pv_v2_matches_references() {
        // (kind, x_t, μ, σ, r, expected); q = r − μ.
        let cases = [
            (PositionKind::Funded, 0.0, 0.0, 0.5, 0.0, 0.001_197_912_066_812_494),
            (PositionKind::BorrowedNominal, 0.0, 0.0, 0.5, 0.0, 0.001_197_912_066_812_494),
            (PositionKind::Funded, 0.12, 0.02, 0.8, 0.03, -0.058_921_572_848_072_2),
            (PositionKind::BorrowedNominal, -0.25, -0.01, 1.2, 0.05, 0.012_969_198_411_060_45),
        ];
        for (kind, x_t, mu, sigma, r, expected) in cases {
            let spec = PositionSpec::v2(P0, 1.0, kind).unwrap();
            let ctx = ValuationContext::new(TAU, P0 * f64::exp(x_t), P0).unwrap();
            let params = BsmParams::new(sigma, r, r - mu).unwrap();
            assert_relative_eq!(pv_v2(&spec, &ctx, &params).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn pv_v2_borrowed_vanishes_as_volatility_dies() {
        let spec = PositionSpec::v2(P0, 1.0, PositionKind::BorrowedNominal).unwrap();
        let ctx = ValuationContext::at_entry(TAU, P0).unwrap();
        let tiny = BsmParams::from_sigma(1e-9).unwrap();
        assert!(pv_v2(&spec, &ctx, &tiny).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pv_v2_borrowed_is_nonnegative() {
        let spec = PositionSpec::v2(P0, 1.0, PositionKind::BorrowedNominal).unwrap();
        for x_t in [-1.0, -0.3, 0.0, 0.4, 1.2] {
            for sigma in [0.2, 0.6, 1.4] {
                let ctx = ValuationContext::new(TAU, P0 * f64::exp(x_t), P0).unwrap();
                let params = BsmParams::from_sigma(sigma).unwrap();
                assert!(pv_v2(&spec, &ctx, &params).unwrap() >= 0.0, "x_t={x_t}, σ={sigma}");
            }
        }
    }

    #[test]
    fn pv_v3_matches_references() {
        // (kind, p0, p_t, σ, r, q, expected per unit notional), τ = 14/365,
        // band [1500, 2500].
        let cases = [
            (PositionKind::BorrowedNominal, 2_000.0, 2_000.0, 0.5, 0.0, 0.0, 0.009_974_272_878_837_56),
            (PositionKind::Funded, 2_000.0, 2_000.0, 0.5, 0.0, 0.0, 0.009_974_272_878_837_56),
            (PositionKind::BorrowedNominal, 2_000.0, 1_200.0, 0.5, 0.0, 0.0, 0.171_819_194_472_580_8),
            (PositionKind::Funded, 2_000.0, 2_600.0, 0.5, 0.0, 0.0, -0.049_144_504_976_399_6),
            (PositionKind::BorrowedNominal, 2_000.0, 1_800.0, 0.7, 0.03, 0.01, 0.028_725_073_631_719_94),
            (PositionKind::Funded, 2_000.0, 1_800.0, 0.7, 0.03, 0.01, 0.072_442_128_467_734_05),
            (PositionKind::BorrowedNominal, 1_300.0, 2_000.0, 0.5, 0.0, 0.0, 0.136_632_999_844_045_62),
            (PositionKind::Funded, 2_800.0, 2_000.0, 0.5, 0.0, 0.0, 0.058_928_512_054_002_7),
        ];
        for (kind, p0, p_t, sigma, r, q, expected) in cases {
            let spec =
                PositionSpec::from_notional(Protocol::V3(reference_range()), p0, 1.0, kind).unwrap();
            let ctx = ValuationContext::new(TAU, p_t, p0).unwrap();
            let params = BsmParams::new(sigma, r, q).unwrap();
            assert_relative_eq!(pv_v3(&spec, &ctx, &params).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn pv_v3_expiry_returns_raw_payoff() {
        let spec = v3_spec(PositionKind::BorrowedNominal);
        for p_t in [1_300.0, 1_900.0, 2_500.0, 3_000.0] {
            let ctx = ValuationContext::new(0.0, p_t, P0).unwrap();
            assert_relative_eq!(
                pv_v3(&spec, &ctx, &params()).unwrap(),
                protection_payoff(&spec, p_t),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn pv_v3_borrowed_vanishes_as_volatility_dies() {
        let spec = v3_spec(PositionKind::BorrowedNominal);
        let ctx = ValuationContext::at_entry(TAU, P0).unwrap();
        let tiny = BsmParams::from_sigma(1e-9).unwrap();
        assert!(pv_v3(&spec, &ctx, &tiny).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pv_v3_borrowed_is_nondecreasing_in_volatility() {
        let spec = v3_spec(PositionKind::BorrowedNominal);
        let ctx = ValuationContext::new(TAU, 2_100.0, P0).unwrap();
        let mut prev = 0.0;
        for sigma in [0.1, 0.3, 0.5, 0.8, 1.2, 1.6] {
            let pv = pv_v3(&spec, &ctx, &BsmParams::from_sigma(sigma).unwrap()).unwrap();
            assert!(pv >= prev, "PV decreased from {prev} to {pv} at σ = {sigma}");
            prev = pv;
        }
    }

    #[test]
    fn pv_v2_is_the_wide_band_limit_of_pv_v3() {
        let wide = PriceRange::new(P0 * 1e-6, P0 * 1e6).unwrap();
        let banded = PositionSpec::from_notional(
            Protocol::V3(wide),
            P0,
            1.0,
            PositionKind::BorrowedNominal,
        )
        .unwrap();
        let full = PositionSpec::v2(P0, 1.0, PositionKind::BorrowedNominal).unwrap();
        let ctx = ValuationContext::new(TAU, 2_100.0, P0).unwrap();
        let v3 = pv_v3(&banded, &ctx, &params()).unwrap();
        let v2 = pv_v2(&full, &ctx, &params()).unwrap();
        assert!((v3 - v2).abs() < 1e-4, "v3 {v3} vs v2 {v2}");
    }

    #[test]
    fn pv_v3_is_continuous_across_band_edges() {
        let spec = v3_spec(PositionKind::BorrowedNominal);
        for edge in [1_500.0, 2_500.0] {
            let below = ValuationContext::new(TAU, edge * (1.0 - 1e-9), P0).unwrap();
            let above = ValuationContext::new(TAU, edge * (1.0 + 1e-9), P0).unwrap();
            let gap = pv_v3(&spec, &below, &params()).unwrap() - pv_v3(&spec, &above, &params()).unwrap();
            assert!(gap.abs() < 1e-8, "PV jumps by {gap} at {edge}");
        }
    }

    #[test]
    fn delta_matches_references() {
        // (kind, p_t, σ, r, q, expected), τ = 14/365, p0 = 2000.
        let cases = [
            (PositionKind::BorrowedNominal, 2_000.0, 0.5, 0.0, 0.0, 2.144_316_831_779_48e-6),
            (PositionKind::Funded, 1_700.0, 0.5, 0.0, 0.0, -3.891_664_553_815_118_5e-4),
            (PositionKind::BorrowedNominal, 3_200.0, 0.5, 0.0, 0.0, 2.202_095_495_273_015_7e-4),
            (PositionKind::BorrowedNominal, 1_800.0, 0.7, 0.03, 0.01, -1.011_191_108_842_470_6e-4),
        ];
        for (kind, p_t, sigma, r, q, expected) in cases {
            let spec = v3_spec(kind);
            let ctx = ValuationContext::new(TAU, p_t, P0).unwrap();
            let params = BsmParams::new(sigma, r, q).unwrap();
            assert_relative_eq!(delta_v3(&spec, &ctx, &params).unwrap(), expected, max_relative = 1e-10);
        }
    }

    #[test]
    fn delta_agrees_with_finite_differences() {
        let spec = v3_spec(PositionKind::BorrowedNominal);
        for p_t in [1_600.0, 2_000.0, 2_450.0] {
            let ctx = ValuationContext::new(TAU, p_t, P0).unwrap();
            let analytic = delta_v3(&spec, &ctx, &params()).unwrap();
            let h = 1e-4 * p_t;
            let up = ValuationContext::new(TAU, p_t + h, P0).unwrap();
            let down = ValuationContext::new(TAU, p_t - h, P0).unwrap();
            let fd = (pv_v3(&spec, &up, &params()).unwrap() - pv_v3(&spec, &down, &params()).unwrap())
                / (2.0 * h);
            assert!((analytic - fd).abs() < 1e-6, "at {p_t}: analytic {analytic}, fd {fd}");
        }
    }

    #[test]
    fn delta_reaches_the_deep_out_of_range_plateau() {
        // Far above the band the borrowed payoff is linear with slope
        // (1/√p₀ − 1/√p_b)/D, so the delta saturates there.
        let spec = v3_spec(PositionKind::BorrowedNominal);
        let ctx = ValuationContext::new(TAU, 50.0 * 2_500.0, P0).unwrap();
        let d = decompose(&spec).unwrap().normalization;
        let plateau = (1.0 / P0.sqrt() - 1.0 / 2_500.0_f64.sqrt()) / d;
        assert_relative_eq!(delta_v3(&spec, &ctx, &params()).unwrap(), plateau, max_relative = 1e-9);
    }

    #[test]
    fn delta_is_zero_at_entry_for_symmetric_local_quadratic() {
        // With σ → 0 the borrowed loss is locally quadratic around p₀, so
        // the hedge ratio at the entry price vanishes.
        let spec = v3_spec(PositionKind::BorrowedNominal);
        let ctx = ValuationContext::at_entry(TAU, P0).unwrap();
        let tiny = BsmParams::from_sigma(1e-6).unwrap();
        assert!(delta_v3(&spec, &ctx, &tiny).unwrap().abs() < 1e-9);
    }

    #[test]
    fn wrong_protocols_and_kinds_are_rejected() {
        let ctx = ValuationContext::at_entry(TAU, P0).unwrap();
        let v2 = PositionSpec::v2(P0, 1.0, PositionKind::Funded).unwrap();
        let v3 = v3_spec(PositionKind::Funded);
        assert!(matches!(pv_v2(&v3, &ctx, &params()), Err(LpHedgeError::InvalidInput { .. })));
        assert!(matches!(pv_v3(&v2, &ctx, &params()), Err(LpHedgeError::InvalidInput { .. })));

        let relative = v3_spec(PositionKind::BorrowedRelative);
        assert!(matches!(pv_v3(&relative, &ctx, &params()), Err(LpHedgeError::InvalidInput { .. })));

        let expiry = ValuationContext::new(0.0, P0, P0).unwrap();
        assert!(matches!(delta_v3(&v3, &expiry, &params()), Err(LpHedgeError::InvalidInput { .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(BsmParams::new(0.0, 0.0, 0.0), Err(LpHedgeError::InvalidInput { .. })));
        assert!(matches!(BsmParams::new(0.5, f64::NAN, 0.0), Err(LpHedgeError::InvalidInput { .. })));
        assert!(matches!(
            ValuationContext::new(-0.1, P0, P0),
            Err(LpHedgeError::InvalidInput { .. })
        ));
    }
}
