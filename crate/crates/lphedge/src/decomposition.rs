//! Exact decomposition of concentrated-liquidity impermanent loss into an
//! affine leg, a square-root claim, and vanilla/digital option payoffs.
//!
//! Writing `f(p) = clamp(p, p_a, p_b)` and `f₀ = f(p₀)`, the loss of one
//! unit of liquidity splits as
//!
//! ```text
//! il(p_t)·D = u₀(p_t) + u_½(p_t) + u₁(p_t),          D = V(p₀)/L,
//!
//! u₀(p)  = slope·p + intercept
//!          funded:   −p/√p_b + (p₀/√p_b − p₀/√f₀ − √f₀)
//!          borrowed: −p/√f₀ − √f₀
//! u_½(p) = 2√p·1{p_a < p < p_b}
//! u₁(p)  = −(p_a−p)⁺/√p_a + (p−p_b)⁺/√p_b
//!          + 2√p_a·1{p ≤ p_a} + 2√p_b·1{p ≥ p_b}
//! ```
//!
//! The split is what makes model pricing tractable: the affine leg is priced
//! by the forward, the square-root claim and the vanillas/digitals each have
//! closed transforms. The factor 2 on the square-root leg is stored as an
//! explicit coefficient field and pinned by the reconstruction tests rather
//! than trusted.

use serde::Serialize;

use crate::amm::{PositionKind, PositionSpec, Protocol};
use crate::error::{LpHedgeError, Result};

/// Affine price leg `slope·p + intercept`, in loss·D units per unit notional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineLeg {
    /// Coefficient of `p` (units: 1/√price).
    pub slope: f64,
    /// Constant term (units: √price).
    pub intercept: f64,
}

/// Square-root claim `coefficient·√p` active strictly inside the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqrtLeg {
    /// Scalar multiplying `√p`; fixed to 2 by the reconstruction identity.
    pub coefficient: f64,
    /// Open-interval activation bounds (the position's band).
    pub lower: f64,
    pub upper: f64,
}

/// Vanilla and digital option payoffs with signed weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptionLeg {
    /// Put strike `p_a` with weight `−1/√p_a` on `(p_a − p)⁺`.
    pub put_strike: f64,
    pub put_weight: f64,
    /// Call strike `p_b` with weight `+1/√p_b` on `(p − p_b)⁺`.
    pub call_strike: f64,
    pub call_weight: f64,
    /// Weight `2√p_a` on the lower digital `1{p ≤ p_a}`.
    pub digital_put_weight: f64,
    /// Weight `2√p_b` on the upper digital `1{p ≥ p_b}`.
    pub digital_call_weight: f64,
}

/// The three legs of the loss decomposition plus the value normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ILComponents {
    pub u0: AffineLeg,
    pub u_half: SqrtLeg,
    pub u1: OptionLeg,
    /// Initial value per unit liquidity `D = V(p₀)/L`; leg sums divide by
    /// this to land in loss-per-unit-notional units.
    pub normalization: f64,
}

/// Per-leg values at a price, already normalized so `total` equals `il`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LegValues {
    pub u0: f64,
    pub u_half: f64,
    pub u1: f64,
    pub total: f64,
}

/// Splits a concentrated position's loss into the three legs.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for full-range positions (their loss is
/// already a single square-root claim, no banded legs exist) and for the
/// relative borrowed kind (its terminal-value normalization is nonlinear in
/// the payoff and does not decompose).
pub fn decompose(spec: &PositionSpec) -> Result<ILComponents> {
    let range = match spec.protocol {
        Protocol::V3(range) => range,
        Protocol::V2 => {
            return Err(LpHedgeError::invalid(
                "full-range positions do not decompose into banded legs; their loss is a single √p claim",
            ))
        }
    };
    let sqrt_f0 = range.clamp(spec.p0).sqrt();
    let sqrt_pa = range.lower().sqrt();
    let sqrt_pb = range.upper().sqrt();

    let u0 = match spec.kind {
        PositionKind::Funded => AffineLeg {
            slope: -1.0 / sqrt_pb,
            intercept: spec.p0 / sqrt_pb - spec.p0 / sqrt_f0 - sqrt_f0,
        },
        PositionKind::BorrowedNominal => {
            AffineLeg { slope: -1.0 / sqrt_f0, intercept: -sqrt_f0 }
        }
        PositionKind::BorrowedRelative => {
            return Err(LpHedgeError::invalid(
                "relative loss normalizes by the terminal hold value and does not decompose; use the nominal borrowed kind",
            ))
        }
    };

    Ok(ILComponents {
        u0,
        u_half: SqrtLeg { coefficient: 2.0, lower: range.lower(), upper: range.upper() },
        u1: OptionLeg {
            put_strike: range.lower(),
            put_weight: -1.0 / sqrt_pa,
            call_strike: range.upper(),
            call_weight: 1.0 / sqrt_pb,
            digital_put_weight: 2.0 * sqrt_pa,
            digital_call_weight: 2.0 * sqrt_pb,
        },
        normalization: crate::amm::v3_unit_value(spec.p0, range),
    })
}

/// Evaluates the legs at price `p`; `total` reproduces `il` exactly.
pub fn evaluate(components: &ILComponents, p: f64) -> LegValues {
    let d = components.normalization;
    let u0 = (components.u0.slope * p + components.u0.intercept) / d;

    let sl = &components.u_half;
    let in_band = sl.lower < p && p < sl.upper;
    let u_half = if in_band { sl.coefficient * p.sqrt() / d } else { 0.0 };

    let ol = &components.u1;
    let mut u1 = ol.put_weight * (ol.put_strike - p).max(0.0)
        + ol.call_weight * (p - ol.call_strike).max(0.0);
    if p <= ol.put_strike {
        u1 += ol.digital_put_weight;
    }
    if p >= ol.call_strike {
        u1 += ol.digital_call_weight;
    }
    u1 /= d;

    LegValues { u0, u_half, u1, total: u0 + u_half + u1 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amm::{il, PriceRange};
    use approx::assert_relative_eq;

    const P0: f64 = 2_000.0;

    fn spec(kind: PositionKind) -> PositionSpec {
        let range = PriceRange::new(1_500.0, 2_500.0).unwrap();
        PositionSpec::from_notional(Protocol::V3(range), P0, 1_000_000.0, kind).unwrap()
    }

    #[test]
    fn borrowed_affine_leg_reads_off_entry_price() {
        let c = decompose(&spec(PositionKind::BorrowedNominal)).unwrap();
        assert_relative_eq!(c.u0.slope, -1.0 / P0.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(c.u0.intercept, -P0.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn funded_affine_leg_reads_off_entry_and_upper_bound() {
        let c = decompose(&spec(PositionKind::Funded)).unwrap();
        assert_relative_eq!(c.u0.slope, -1.0 / 50.0, max_relative = 1e-15);
        assert_relative_eq!(c.u0.intercept, P0 / 50.0 - 2.0 * P0.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn option_leg_weights_read_off_band() {
        let c = decompose(&spec(PositionKind::Funded)).unwrap();
        assert_relative_eq!(c.u1.put_weight, -1.0 / 1_500.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(c.u1.call_weight, 1.0 / 50.0, max_relative = 1e-15);
        assert_relative_eq!(c.u1.digital_put_weight, 2.0 * 1_500.0_f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(c.u1.digital_call_weight, 100.0, max_relative = 1e-15);
        assert_eq!(c.u_half.coefficient, 2.0);
    }

    #[test]
    fn legs_reconstruct_il_on_a_dense_grid() {
        for kind in [PositionKind::Funded, PositionKind::BorrowedNominal] {
            let s = spec(kind);
            let c = decompose(&s).unwrap();
            let mut p = 150.0;
            while p <= 25_000.0 {
                let legs = evaluate(&c, p);
                let want = il(&s, p);
                assert!(
                    (legs.total - want).abs() <= 1e-12 * (1.0 + want.abs()),
                    "{kind:?} reconstruction off at p = {p}: legs {}, il {}",
                    legs.total,
                    want
                );
                p *= 1.07;
            }
        }
    }

    #[test]
    fn reconstruction_holds_with_entry_outside_band() {
        let range = PriceRange::new(1_500.0, 2_500.0).unwrap();
        for p0 in [1_300.0, 2_800.0] {
            let s = PositionSpec::from_notional(
                Protocol::V3(range),
                p0,
                1_000_000.0,
                PositionKind::BorrowedNominal,
            )
            .unwrap();
            let c = decompose(&s).unwrap();
            for p in [1_000.0, 1_500.0, 1_700.0, 2_500.0, 3_200.0] {
                let legs = evaluate(&c, p);
                assert_relative_eq!(legs.total, il(&s, p), max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn below_band_only_put_and_digital_fire() {
        let c = decompose(&spec(PositionKind::BorrowedNominal)).unwrap();
        let p = 750.0; // half the lower bound
        let legs = evaluate(&c, p);
        assert_eq!(legs.u_half, 0.0);
        let sqrt_pa = 1_500.0_f64.sqrt();
        let raw_u1 = -(1_500.0 - p) / sqrt_pa + 2.0 * sqrt_pa;
        assert_relative_eq!(legs.u1 * c.normalization, raw_u1, max_relative = 1e-14);
    }

    #[test]
    fn in_band_borrowed_total_matches_closed_form() {
        let s = spec(PositionKind::BorrowedNominal);
        let c = decompose(&s).unwrap();
        for p in [1_600.0, 1_950.0, 2_000.0, 2_420.0] {
            let legs = evaluate(&c, p);
            let closed = -P0.sqrt() * ((p / P0).sqrt() - 1.0).powi(2);
            assert_relative_eq!(legs.total * c.normalization, closed, max_relative = 1e-11, epsilon = 1e-13);
        }
    }

    #[test]
    fn leg_sum_is_continuous_at_band_edges() {
        for kind in [PositionKind::Funded, PositionKind::BorrowedNominal] {
            let c = decompose(&spec(kind)).unwrap();
            for edge in [1_500.0, 2_500.0] {
                let below = evaluate(&c, edge * (1.0 - 1e-11)).total;
                let at = evaluate(&c, edge).total;
                let above = evaluate(&c, edge * (1.0 + 1e-11)).total;
                assert!((below - at).abs() < 1e-8, "{kind:?} jump below {edge}");
                assert!((above - at).abs() < 1e-8, "{kind:?} jump above {edge}");
            }
        }
    }

    #[test]
    fn kind_difference_is_affine_in_price() {
        let funded = decompose(&spec(PositionKind::Funded)).unwrap();
        let borrowed = decompose(&spec(PositionKind::BorrowedNominal)).unwrap();
        let diff = |p: f64| evaluate(&funded, p).total - evaluate(&borrowed, p).total;
        for p in [900.0, 1_600.0, 2_000.0, 2_700.0] {
            let second = diff(p + 50.0) - 2.0 * diff(p) + diff(p - 50.0);
            assert!(second.abs() < 1e-12, "second difference {second} at {p}");
        }
    }

    #[test]
    fn funded_total_flattens_far_above_band() {
        let c = decompose(&spec(PositionKind::Funded)).unwrap();
        let far = evaluate(&c, 100.0 * 2_500.0).total;
        let farther = evaluate(&c, 200.0 * 2_500.0).total;
        assert!((far - farther).abs() < 1e-12, "{far} vs {farther}");
    }

    #[test]
    fn unsupported_specs_are_rejected() {
        let v2 = PositionSpec::v2(P0, 1.0, PositionKind::Funded).unwrap();
        assert!(matches!(decompose(&v2), Err(LpHedgeError::InvalidInput { .. })));
        let relative = spec(PositionKind::BorrowedRelative);
        assert!(matches!(decompose(&relative), Err(LpHedgeError::InvalidInput { .. })));
    }
}
