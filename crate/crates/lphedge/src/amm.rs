//! Liquidity-pool position mechanics: reserves, value, P&L and divergence
//! loss for constant-product market makers.
//!
//! A full-range pool holds reserves `x` (risky asset) and `y` (numeraire)
//! with `x·y = L²`, so at pool price `p`:
//!
//! ```text
//! x(p) = L/√p,   y(p) = L√p,   V(p) = x·p + y = 2L√p.
//! ```
//!
//! A concentrated position is only active on `[p_a, p_b]`; writing
//! `f(p) = clamp(p, p_a, p_b)` its reserves are
//!
//! ```text
//! x(p) = L·(1/√f(p) − 1/√p_b),   y(p) = L·(√f(p) − √p_a),
//! V(p) = p/√f(p) + √f(p) − p/√p_b − √p_a   (per unit L),
//! ```
//!
//! which degenerates to the full-range formulas as `p_a → 0`, `p_b → ∞`.
//! Below the range the position is entirely in the risky asset, above it
//! entirely in the numeraire.
//!
//! Two funding conventions matter for hedging. A *funded* position is bought
//! with cash, so its P&L is measured against that initial cash. A *borrowed*
//! position borrows the initial reserves, so its P&L is measured against
//! holding those reserves unchanged — this isolates divergence
//! ("impermanent") loss, which is never positive.

use serde::{Deserialize, Serialize};

use crate::error::{validate_positive, LpHedgeError, Result};

/// Active price band `[lower, upper]` of a concentrated-liquidity position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRange {
    lower: f64,
    upper: f64,
}

impl PriceRange {
    /// Creates a validated range with `0 < lower < upper`, both finite.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on non-finite, non-positive or
    /// unordered bounds.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        validate_positive(lower, "range lower bound")?;
        validate_positive(upper, "range upper bound")?;
        if lower >= upper {
            return Err(LpHedgeError::invalid(format!(
                "range lower bound {lower} must be strictly below upper bound {upper}"
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Lower activation price `p_a`.
    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// Upper activation price `p_b`.
    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Clamps `p` into the band: the `f(p)` of the reserve formulas.
    pub fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.lower, self.upper)
    }

    /// Whether `p` lies strictly inside the band.
    pub fn contains(&self, p: f64) -> bool {
        self.lower < p && p < self.upper
    }
}

/// Pool flavour a position lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Full-range constant-product pool.
    V2,
    /// Concentrated liquidity active on a price band.
    V3(PriceRange),
}

/// Funding convention and normalization of a position's loss measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionKind {
    /// Bought with cash; P&L against the initial outlay (can gain).
    Funded,
    /// Initial reserves are borrowed; loss against holding them, normalized
    /// by initial position value.
    BorrowedNominal,
    /// As borrowed, but the loss is normalized by the *terminal* hold value.
    BorrowedRelative,
}

/// Token amounts held by a position at some price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reserves {
    /// Risky-asset amount.
    pub x: f64,
    /// Numeraire amount.
    pub y: f64,
}

impl Reserves {
    /// Marks the reserves to market at price `p`.
    pub fn value(&self, p: f64) -> f64 {
        self.x * p + self.y
    }
}

/// A liquidity position: pool flavour, entry price, size and funding kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionSpec {
    /// Pool flavour (and band, for concentrated liquidity).
    pub protocol: Protocol,
    /// Entry price `p₀`.
    pub p0: f64,
    /// Pool liquidity parameter `L`.
    pub liquidity: f64,
    /// Funding convention.
    pub kind: PositionKind,
}

impl PositionSpec {
    /// Full-range position with explicit liquidity.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on non-positive `p0` or `liquidity`.
    pub fn v2(p0: f64, liquidity: f64, kind: PositionKind) -> Result<Self> {
        validate_positive(p0, "entry price")?;
        validate_positive(liquidity, "liquidity")?;
        Ok(Self { protocol: Protocol::V2, p0, liquidity, kind })
    }

    /// Concentrated position with explicit liquidity. The entry price may
    /// lie outside the band (the position then starts single-asset).
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on non-positive `p0` or `liquidity`.
    pub fn v3(p0: f64, range: PriceRange, liquidity: f64, kind: PositionKind) -> Result<Self> {
        validate_positive(p0, "entry price")?;
        validate_positive(liquidity, "liquidity")?;
        Ok(Self { protocol: Protocol::V3(range), p0, liquidity, kind })
    }

    /// Sizes the position so its value at `p0` equals `notional`.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on non-positive inputs.
    pub fn from_notional(protocol: Protocol, p0: f64, notional: f64, kind: PositionKind) -> Result<Self> {
        let liquidity = match protocol {
            Protocol::V2 => v2_liquidity_from_notional(notional, p0)?,
            Protocol::V3(range) => v3_liquidity_from_notional(notional, p0, range)?,
        };
        Ok(Self { protocol, p0, liquidity, kind })
    }

    /// Reserves held at price `p`.
    pub fn reserves(&self, p: f64) -> Reserves {
        match self.protocol {
            Protocol::V2 => v2_reserves(p, self.liquidity),
            Protocol::V3(range) => v3_reserves(p, range, self.liquidity),
        }
    }

    /// Position value `x(p)·p + y(p)`.
    pub fn value(&self, p: f64) -> f64 {
        self.reserves(p).value(p)
    }

    /// Initial position value `V(p₀)` (the notional for sized positions).
    pub fn initial_value(&self) -> f64 {
        self.value(self.p0)
    }
}

/// Full-range reserves `x = L/√p`, `y = L√p`.
pub fn v2_reserves(p: f64, liquidity: f64) -> Reserves {
    let sqrt_p = p.sqrt();
    Reserves { x: liquidity / sqrt_p, y: liquidity * sqrt_p }
}

/// Liquidity making a full-range position worth `notional` at `p0`:
/// `L = N/(2√p₀)`.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] on non-positive inputs.
pub fn v2_liquidity_from_notional(notional: f64, p0: f64) -> Result<f64> {
    validate_positive(notional, "notional")?;
    validate_positive(p0, "entry price")?;
    Ok(notional / (2.0 * p0.sqrt()))
}

/// Concentrated reserves, single-asset outside the band.
pub fn v3_reserves(p: f64, range: PriceRange, liquidity: f64) -> Reserves {
    let f = range.clamp(p).sqrt();
    Reserves {
        x: liquidity * (1.0 / f - 1.0 / range.upper().sqrt()),
        y: liquidity * (f - range.lower().sqrt()),
    }
}

/// Value of one unit of concentrated liquidity at price `p`:
/// `p/√f(p) + √f(p) − p/√p_b − √p_a`.
pub fn v3_unit_value(p: f64, range: PriceRange) -> f64 {
    let f = range.clamp(p).sqrt();
    p / f + f - p / range.upper().sqrt() - range.lower().sqrt()
}

/// Liquidity making a concentrated position worth `notional` at `p0`:
/// `L = N / (p₀/√f(p₀) + √f(p₀) − p₀/√p_b − √p_a)`.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] on non-positive inputs;
/// [`LpHedgeError::Domain`] if the unit value degenerates to zero (cannot
/// happen for a valid band, guarded against regardless).
pub fn v3_liquidity_from_notional(notional: f64, p0: f64, range: PriceRange) -> Result<f64> {
    validate_positive(notional, "notional")?;
    validate_positive(p0, "entry price")?;
    let unit = v3_unit_value(p0, range);
    if unit <= 0.0 {
        return Err(LpHedgeError::domain(format!(
            "unit position value {unit} at p0 = {p0} is not positive"
        )));
    }
    Ok(notional / unit)
}

/// P&L of the position at terminal price `p_t`.
///
/// Funded positions are measured against the initial cash outlay; borrowed
/// positions against holding the initial reserves (the divergence loss in
/// numeraire units, always ≤ 0).
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for [`PositionKind::BorrowedRelative`]:
/// its dollar P&L coincides with the nominal convention, so asking for it
/// is ambiguous — use `BorrowedNominal`.
pub fn pnl(spec: &PositionSpec, p_t: f64) -> Result<f64> {
    let value = spec.value(p_t);
    let result = match spec.kind {
        PositionKind::Funded => value - spec.initial_value(),
        PositionKind::BorrowedNominal => value - spec.reserves(spec.p0).value(p_t),
        PositionKind::BorrowedRelative => {
            return Err(LpHedgeError::invalid(
                "relative positions have no distinct dollar P&L; use the nominal borrowed kind",
            ))
        }
    };

    #[cfg(debug_assertions)]
    {
        // Cross-check the reserve route against the closed forms.
        let closed = match (spec.protocol, spec.kind) {
            (Protocol::V2, PositionKind::Funded) => {
                2.0 * spec.liquidity * spec.p0.sqrt() * ((p_t / spec.p0).sqrt() - 1.0)
            }
            (Protocol::V2, PositionKind::BorrowedNominal) => {
                let d = (p_t / spec.p0).sqrt() - 1.0;
                -spec.liquidity * spec.p0.sqrt() * d * d
            }
            (Protocol::V3(range), PositionKind::Funded) => {
                spec.liquidity * (v3_unit_value(p_t, range) - v3_unit_value(spec.p0, range))
            }
            (Protocol::V3(range), PositionKind::BorrowedNominal) => {
                let f0 = range.clamp(spec.p0).sqrt();
                let ft = range.clamp(p_t).sqrt();
                spec.liquidity * (p_t / ft + ft - p_t / f0 - f0)
            }
            (_, PositionKind::BorrowedRelative) => unreachable!(),
        };
        let scale = 1.0 + result.abs() + spec.initial_value().abs();
        debug_assert!(
            (result - closed).abs() <= 1e-9 * scale,
            "P&L routes disagree: reserves {result}, closed form {closed}"
        );
    }

    Ok(result)
}

/// Impermanent loss of the position at `p_t`, per the position's kind.
///
/// Funded and nominal borrowed losses are normalized by the initial position
/// value; the relative convention divides the borrowed loss by the terminal
/// hold value instead.
pub fn il(spec: &PositionSpec, p_t: f64) -> f64 {
    let v0 = spec.initial_value();
    match spec.kind {
        PositionKind::Funded => (spec.value(p_t) - v0) / v0,
        PositionKind::BorrowedNominal => {
            (spec.value(p_t) - spec.reserves(spec.p0).value(p_t)) / v0
        }
        PositionKind::BorrowedRelative => {
            let hold = spec.reserves(spec.p0).value(p_t);
            (spec.value(p_t) - hold) / hold
        }
    }
}

/// Payoff of a protection claim covering one unit of notional: `−il`.
///
/// Borrowed payoffs are non-negative; the funded payoff is signed (the claim
/// also pays out the position's upside shortfall against cash).
pub fn protection_payoff(spec: &PositionSpec, p_t: f64) -> f64 {
    let payoff = -il(spec, p_t);

    #[cfg(debug_assertions)]
    if let (Protocol::V3(range), PositionKind::Funded | PositionKind::BorrowedNominal) =
        (spec.protocol, spec.kind)
    {
        // Compact clamp forms of the same payoffs.
        let d = v3_unit_value(spec.p0, range);
        let compact = match spec.kind {
            PositionKind::Funded => 1.0 - v3_unit_value(p_t, range) / d,
            PositionKind::BorrowedNominal => {
                let f0 = range.clamp(spec.p0).sqrt();
                let ft = range.clamp(p_t).sqrt();
                (p_t / f0 + f0 - p_t / ft - ft) / d
            }
            PositionKind::BorrowedRelative => unreachable!(),
        };
        debug_assert!(
            (payoff - compact).abs() <= 1e-12 * (1.0 + payoff.abs()),
            "payoff routes disagree: reserves {payoff}, compact {compact}"
        );
    }

    payoff
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Reference pool: 1,000,000 numeraire at entry price 2000.
    const NOTIONAL: f64 = 1_000_000.0;
    const P0: f64 = 2_000.0;

    fn reference_range() -> PriceRange {
        PriceRange::new(1_500.0, 2_500.0).unwrap()
    }

    fn v3_funded() -> PositionSpec {
        PositionSpec::from_notional(Protocol::V3(reference_range()), P0, NOTIONAL, PositionKind::Funded)
            .unwrap()
    }

    #[test]
    fn v2_liquidity_matches_notional_sizing() {
        let l = v2_liquidity_from_notional(NOTIONAL, P0).unwrap();
        assert_relative_eq!(l, 11_180.339_887_498_948, max_relative = 1e-12);
    }

    #[test]
    fn v2_reserves_match_references() {
        let l = v2_liquidity_from_notional(NOTIONAL, P0).unwrap();
        // (price, x, y) at entry and after moves both ways.
        let cases = [
            (2_000.0, 250.0, 500_000.0),
            (1_500.0, 288.675_134_594_812_9, 433_012.701_892_219_3),
            (2_500.0, 223.606_797_749_978_97, 559_016.994_374_947_4),
        ];
        for (p, x, y) in cases {
            let r = v2_reserves(p, l);
            assert_relative_eq!(r.x, x, max_relative = 1e-12);
            assert_relative_eq!(r.y, y, max_relative = 1e-12);
            assert_relative_eq!(r.x * r.y, l * l, max_relative = 1e-12);
        }
    }

    #[test]
    fn v2_value_identity_holds() {
        let l = 11_180.339_887_498_948;
        for p in [500.0, 1_000.0, 2_000.0, 3_333.0, 10_000.0] {
            let v = v2_reserves(p, l).value(p);
            assert_relative_eq!(v, 2.0 * l * p.sqrt(), max_relative = 1e-13);
        }
    }

    #[test]
    fn v3_liquidity_matches_notional_sizing() {
        let l = v3_liquidity_from_notional(NOTIONAL, P0, reference_range()).unwrap();
        assert_relative_eq!(l, 93_345.531_148_076_33, max_relative = 1e-12);
        // A near-degenerate band concentrates enormously.
        let tight = PriceRange::new(1_999.0, 2_001.0).unwrap();
        let l_tight = v3_liquidity_from_notional(NOTIONAL, P0, tight).unwrap();
        assert_relative_eq!(l_tight, 44_726_946.226_432_49, max_relative = 1e-10);
    }

    #[test]
    fn v3_reserves_match_references() {
        let l = v3_liquidity_from_notional(NOTIONAL, P0, reference_range()).unwrap();
        let at_entry = v3_reserves(P0, reference_range(), l);
        assert_relative_eq!(at_entry.x, 220.358_907_467_700_01, max_relative = 1e-12);
        assert_relative_eq!(at_entry.y, 559_282.185_064_6, max_relative = 1e-12);

        let below = v3_reserves(1_500.0, reference_range(), l);
        assert_relative_eq!(below.x, 543.260_627_567_708_9, max_relative = 1e-12);
        assert_eq!(below.y, 0.0);

        for p in [2_500.0, 3_000.0, 10_000.0] {
            let above = v3_reserves(p, reference_range(), l);
            assert_eq!(above.x, 0.0);
            assert_relative_eq!(above.y, 1_052_019.681_609_963_2, max_relative = 1e-12);
        }
    }

    #[test]
    fn v3_reserves_are_continuous_at_band_edges() {
        let l = 93_345.531_148_076_33;
        for edge in [1_500.0, 2_500.0] {
            let inside = v3_reserves(edge * (1.0 + 1e-13), reference_range(), l);
            let outside = v3_reserves(edge * (1.0 - 1e-13), reference_range(), l);
            assert!((inside.x - outside.x).abs() < 1e-6 * (1.0 + inside.x.abs()));
            assert!((inside.y - outside.y).abs() < 1e-6 * (1.0 + inside.y.abs()));
        }
    }

    #[test]
    fn wide_band_degenerates_to_full_range() {
        let wide = PriceRange::new(P0 * 1e-9, P0 * 1e9).unwrap();
        let l = 11_180.339_887_498_948;
        for p in [1_200.0, 2_000.0, 2_900.0] {
            let v3 = v3_reserves(p, wide, l);
            let v2 = v2_reserves(p, l);
            assert_relative_eq!(v3.x, v2.x, max_relative = 1e-4);
            assert_relative_eq!(v3.y, v2.y, max_relative = 1e-4);
        }
    }

    #[test]
    fn funded_pnl_is_zero_at_entry_and_matches_reference_beyond_band() {
        let spec = v3_funded();
        assert!(pnl(&spec, P0).unwrap().abs() < 1e-9);
        assert_relative_eq!(pnl(&spec, 2_500.0).unwrap(), 52_019.681_609_963_25, max_relative = 1e-10);
        // Value is pinned above the band, so the P&L is too.
        assert_relative_eq!(pnl(&spec, 9_999.0).unwrap(), 52_019.681_609_963_25, max_relative = 1e-10);
    }

    #[test]
    fn borrowed_pnl_is_never_positive() {
        let v2 = PositionSpec::from_notional(Protocol::V2, P0, NOTIONAL, PositionKind::BorrowedNominal)
            .unwrap();
        let v3 = PositionSpec::from_notional(
            Protocol::V3(reference_range()),
            P0,
            NOTIONAL,
            PositionKind::BorrowedNominal,
        )
        .unwrap();
        for p in [800.0, 1_500.0, 1_999.0, 2_000.0, 2_001.0, 2_500.0, 4_000.0] {
            assert!(pnl(&v2, p).unwrap() <= 1e-9, "v2 borrowed P&L positive at {p}");
            assert!(pnl(&v3, p).unwrap() <= 1e-9, "v3 borrowed P&L positive at {p}");
        }
    }

    #[test]
    fn relative_pnl_is_rejected() {
        let spec = PositionSpec::v2(P0, 1.0, PositionKind::BorrowedRelative).unwrap();
        assert!(matches!(pnl(&spec, 1_900.0), Err(LpHedgeError::InvalidInput { .. })));
    }

    #[test]
    fn il_matches_references() {
        let borrowed = PositionSpec::from_notional(
            Protocol::V3(reference_range()),
            P0,
            NOTIONAL,
            PositionKind::BorrowedNominal,
        )
        .unwrap();
        assert_relative_eq!(il(&borrowed, 1_500.0), -0.074_929_604_914_586_64, max_relative = 1e-12);

        let funded = v3_funded();
        assert_relative_eq!(il(&funded, 1_000.0), -0.456_739_372_432_291_1, max_relative = 1e-12);

        // V2 closed forms: funded √r − 1, borrowed −½(√r−1)², relative
        // −(√r−1)²/(r+1).
        let r: f64 = 0.64;
        let p_t = P0 * r;
        let s = r.sqrt() - 1.0;
        for (kind, expected) in [
            (PositionKind::Funded, s),
            (PositionKind::BorrowedNominal, -0.5 * s * s),
            (PositionKind::BorrowedRelative, -s * s / (r + 1.0)),
        ] {
            let spec = PositionSpec::from_notional(Protocol::V2, P0, NOTIONAL, kind).unwrap();
            assert_relative_eq!(il(&spec, p_t), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn protection_payoff_mirrors_il() {
        let spec = v3_funded();
        for p in [1_200.0, 1_500.0, 2_000.0, 2_300.0, 2_800.0] {
            assert_relative_eq!(protection_payoff(&spec, p), -il(&spec, p), max_relative = 1e-14);
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(matches!(PriceRange::new(-1.0, 2.0), Err(LpHedgeError::InvalidInput { .. })));
        assert!(matches!(PriceRange::new(2.0, 2.0), Err(LpHedgeError::InvalidInput { .. })));
        assert!(matches!(PriceRange::new(3.0, 2.0), Err(LpHedgeError::InvalidInput { .. })));
        assert!(matches!(
            v2_liquidity_from_notional(0.0, P0),
            Err(LpHedgeError::InvalidInput { .. })
        ));
        assert!(matches!(
            PositionSpec::v2(f64::NAN, 1.0, PositionKind::Funded),
            Err(LpHedgeError::InvalidInput { .. })
        ));
    }
}
