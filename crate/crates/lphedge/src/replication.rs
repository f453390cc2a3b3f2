//! Static replication of impermanent loss with discrete vanilla portfolios,
//! plus the continuous strike-density (Carr–Madan) representation.
//!
//! Any piecewise-smooth payoff can be replicated by a cash position, a
//! forward, and a strip of out-of-the-money vanillas. On a discrete strike
//! grid the strip becomes a piecewise-linear interpolation: with chord
//! slopes `δIL(k_n) = (IL(k_n) − IL(k_{n−1}))/(k_n − k_{n−1})`,
//!
//! ```text
//! puts  (k_1 < … < k_N ≤ p₀):  w_N = δIL(k_N),  w_n = −(δIL(k_{n+1}) − δIL(k_n)),  w_1 = 0
//! calls (p₀ ≤ j_1 < … < j_M):  v_1 = −δ⁺IL(j_1), v_m = −(δ⁺IL(j_m) − δ⁺IL(j_{m−1})), v_M = 0
//! ```
//!
//! where `δ⁺` are forward chords. The hedged book (position loss + bought
//! portfolio + linear leg) is then exactly zero at every grid strike and
//! interpolates linearly between them.
//!
//! For concentrated funded positions the continuous limit is explicit: the
//! position value per unit liquidity carries the strike density
//! `−¼k^{−3/2}` of straddles over the band plus two linear boundary terms.
//!
//! # References
//!
//! - P. Carr, D. Madan, "Towards a theory of volatility trading", in
//!   *Volatility* (R. Jarrow, ed.), Risk Publications 1998.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::amm::{il, PositionKind, PositionSpec, Protocol};
use crate::bsm::OptionType;
use crate::error::{validate_positive, LpHedgeError, Result};

/// Relative tolerance for matching portfolio strikes to chain strikes.
const STRIKE_MATCH_TOLERANCE: f64 = 1e-9;

/// Ascending put and call strikes separated at the position's entry price.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrikeGrid {
    put_strikes: Vec<f64>,
    call_strikes: Vec<f64>,
    width: f64,
}

impl StrikeGrid {
    /// Validates strictly ascending positive strikes on both sides.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on empty sides, non-positive or
    /// unsorted strikes, or non-positive width.
    pub fn new(put_strikes: Vec<f64>, call_strikes: Vec<f64>, width: f64) -> Result<Self> {
        validate_positive(width, "strike width")?;
        for (name, strikes) in [("put", &put_strikes), ("call", &call_strikes)] {
            if strikes.is_empty() {
                return Err(LpHedgeError::invalid(format!("{name} strikes must not be empty")));
            }
            for pair in strikes.windows(2) {
                if pair[1] <= pair[0] {
                    return Err(LpHedgeError::invalid(format!(
                        "{name} strikes must be strictly ascending, got {} then {}",
                        pair[0], pair[1]
                    )));
                }
            }
            if strikes[0] <= 0.0 {
                return Err(LpHedgeError::invalid(format!(
                    "{name} strikes must be positive, got {}",
                    strikes[0]
                )));
            }
        }
        Ok(Self { put_strikes, call_strikes, width })
    }

    /// Builds an equidistant grid of step `width` over `[low, high]`, with
    /// both sides anchored at the entry price snapped to the nearest
    /// multiple of `width`.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on non-positive inputs or a span that
    /// leaves either side empty.
    pub fn regular(p0: f64, low: f64, high: f64, width: f64) -> Result<Self> {
        validate_positive(p0, "entry price")?;
        validate_positive(low, "span lower bound")?;
        validate_positive(width, "strike width")?;
        if !(low < p0 && p0 < high) {
            return Err(LpHedgeError::invalid(format!(
                "span [{low}, {high}] must straddle the entry price {p0}"
            )));
        }
        let anchor = (p0 / width).round() * width;
        if anchor <= 0.0 {
            return Err(LpHedgeError::invalid(format!(
                "entry price {p0} snaps to a non-positive strike at width {width}"
            )));
        }
        let mut put_strikes = Vec::new();
        let mut k = anchor;
        while k >= low - 1e-9 * width {
            put_strikes.push(k);
            k -= width;
        }
        put_strikes.reverse();
        let mut call_strikes = Vec::new();
        let mut k = anchor;
        while k <= high + 1e-9 * width {
            call_strikes.push(k);
            k += width;
        }
        Self::new(put_strikes, call_strikes, width)
    }

    pub fn put_strikes(&self) -> &[f64] {
        &self.put_strikes
    }

    pub fn call_strikes(&self) -> &[f64] {
        &self.call_strikes
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Distance from `target` to the nearest strike on either side.
    fn snap_distance(&self, target: f64) -> f64 {
        self.put_strikes
            .iter()
            .chain(self.call_strikes.iter())
            .map(|k| (k - target).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One vanilla position: strike and signed weight (positive = long).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortfolioLeg {
    pub strike: f64,
    pub weight: f64,
}

/// Cash-plus-forward remainder of the replication: pays `cash + slope·p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearLeg {
    pub cash: f64,
    pub slope: f64,
}

/// How far the grid had to snap the marked prices (entry, band bounds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapDistances {
    pub entry: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// Build record of a portfolio: the position it replicates, the grid it
/// lives on, the linear remainder, and the snapping diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioMetadata {
    pub spec: PositionSpec,
    pub grid: StrikeGrid,
    pub linear: LinearLeg,
    pub snap: SnapDistances,
}

/// The option portfolio a hedger buys against a position's loss.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgePortfolio {
    pub put_legs: Vec<PortfolioLeg>,
    pub call_legs: Vec<PortfolioLeg>,
    pub metadata: PortfolioMetadata,
}

/// Chord slopes of `il_fn` between consecutive grid points.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] on fewer than 2 points or non-ascending
/// (including duplicate) points.
pub fn delta_il(il_fn: impl Fn(f64) -> f64, points: &[f64]) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(LpHedgeError::invalid(format!(
            "chord slopes need at least 2 grid points, got {}",
            points.len()
        )));
    }
    for pair in points.windows(2) {
        if pair[1] <= pair[0] {
            return Err(LpHedgeError::invalid(format!(
                "grid points must be strictly ascending, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(points
        .windows(2)
        .map(|pair| (il_fn(pair[1]) - il_fn(pair[0])) / (pair[1] - pair[0]))
        .collect())
}

/// Put-side replication weights on strikes `k_1 < … < k_N` at or below the
/// forward: `w_N` carries the last chord slope, interiors the negated slope
/// increments, and `w_1 = 0`.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] on fewer than 3 strikes (the recursion
/// needs an interior) or an invalid grid.
pub fn put_weights(il_fn: impl Fn(f64) -> f64, strikes: &[f64]) -> Result<Vec<f64>> {
    if strikes.len() < 3 {
        return Err(LpHedgeError::invalid(format!(
            "put weights need at least 3 strikes, got {}",
            strikes.len()
        )));
    }
    let slopes = delta_il(il_fn, strikes)?;
    let n = strikes.len();
    let mut weights = vec![0.0; n];
    weights[n - 1] = slopes[n - 2];
    for i in 1..n - 1 {
        weights[i] = slopes[i - 1] - slopes[i];
    }
    Ok(weights)
}

/// Call-side mirror of [`put_weights`] on strikes at or above the forward:
/// `v_1` carries the negated first chord slope and `v_M = 0`.
///
/// # Errors
///
/// As [`put_weights`].
pub fn call_weights(il_fn: impl Fn(f64) -> f64, strikes: &[f64]) -> Result<Vec<f64>> {
    if strikes.len() < 3 {
        return Err(LpHedgeError::invalid(format!(
            "call weights need at least 3 strikes, got {}",
            strikes.len()
        )));
    }
    let slopes = delta_il(il_fn, strikes)?;
    let n = strikes.len();
    let mut weights = vec![0.0; n];
    weights[0] = -slopes[0];
    for i in 1..n - 1 {
        weights[i] = slopes[i - 1] - slopes[i];
    }
    Ok(weights)
}

impl HedgePortfolio {
    /// Builds the portfolio replicating `−il` (in numeraire units) for the
    /// position on the given grid, together with its linear remainder.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] if the grid does not separate at the
    /// entry price, has too few strikes, or the kind is the relative
    /// borrowed one (no dollar loss to replicate).
    pub fn build(spec: &PositionSpec, grid: &StrikeGrid) -> Result<Self> {
        if spec.kind == PositionKind::BorrowedRelative {
            return Err(LpHedgeError::invalid(
                "relative losses have no dollar payoff to replicate; use the nominal borrowed kind",
            ));
        }
        // Grids anchored at a snapped entry price may place the innermost
        // strike up to half a width away from p0; anything further is a
        // misaligned grid. The construction itself only needs puts ≤ calls.
        let top_put = *grid.put_strikes.last().expect("validated non-empty");
        let bottom_call = grid.call_strikes[0];
        let snap_slack = 0.5 * grid.width;
        if top_put > bottom_call
            || top_put > spec.p0 + snap_slack
            || bottom_call < spec.p0 - snap_slack
        {
            return Err(LpHedgeError::invalid(format!(
                "grid must separate at the entry price {}: last put strike {top_put}, first call strike {bottom_call}",
                spec.p0
            )));
        }

        let notional = spec.initial_value();
        let il_fn = |p: f64| il(spec, p) * notional;
        let puts = put_weights(il_fn, &grid.put_strikes)?;
        let calls = call_weights(il_fn, &grid.call_strikes)?;

        // The payoff the hedger buys is g = −IL; between the innermost
        // strikes it is linear, carried explicitly as cash + slope·p.
        let g = |p: f64| -il_fn(p);
        let linear = if top_put == bottom_call {
            LinearLeg { cash: g(top_put), slope: 0.0 }
        } else {
            let slope = (g(bottom_call) - g(top_put)) / (bottom_call - top_put);
            LinearLeg { cash: g(top_put) - slope * top_put, slope }
        };

        let snap = match spec.protocol {
            Protocol::V3(range) => SnapDistances {
                entry: grid.snap_distance(spec.p0),
                lower: Some(grid.snap_distance(range.lower())),
                upper: Some(grid.snap_distance(range.upper())),
            },
            Protocol::V2 => {
                SnapDistances { entry: grid.snap_distance(spec.p0), lower: None, upper: None }
            }
        };

        Ok(Self {
            put_legs: grid
                .put_strikes
                .iter()
                .zip(puts)
                .map(|(&strike, weight)| PortfolioLeg { strike, weight })
                .collect(),
            call_legs: grid
                .call_strikes
                .iter()
                .zip(calls)
                .map(|(&strike, weight)| PortfolioLeg { strike, weight })
                .collect(),
            metadata: PortfolioMetadata { spec: *spec, grid: grid.clone(), linear, snap },
        })
    }
}

/// Terminal payoff `Σ w·(k−p)⁺ + Σ v·(p−j)⁺` of the vanilla legs alone.
pub fn portfolio_payoff(portfolio: &HedgePortfolio, p: f64) -> f64 {
    let puts: f64 =
        portfolio.put_legs.iter().map(|leg| leg.weight * (leg.strike - p).max(0.0)).sum();
    let calls: f64 =
        portfolio.call_legs.iter().map(|leg| leg.weight * (p - leg.strike).max(0.0)).sum();
    puts + calls
}

/// Hedged-book residuals `[IL + portfolio + linear]/N` over a price grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    /// Largest residual magnitude, as a fraction of notional.
    pub max_abs: f64,
    /// Per-point residuals, same units and order as the input grid.
    pub residuals: Vec<f64>,
}

/// Evaluates how exactly the portfolio (plus its linear leg) cancels the
/// position's loss over the given prices; residuals are fractions of the
/// position's notional.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] if the position's entry price differs
/// from the one the portfolio was built for.
pub fn replication_residual(
    spec: &PositionSpec,
    portfolio: &HedgePortfolio,
    prices: &[f64],
) -> Result<ResidualReport> {
    if (spec.p0 - portfolio.metadata.spec.p0).abs() > 1e-12 * spec.p0 {
        return Err(LpHedgeError::invalid(format!(
            "portfolio was built at entry price {}, cannot assess a position entered at {}",
            portfolio.metadata.spec.p0, spec.p0
        )));
    }
    let notional = spec.initial_value();
    let linear = portfolio.metadata.linear;
    let residuals: Vec<f64> = prices
        .iter()
        .map(|&p| {
            (il(spec, p) * notional + portfolio_payoff(portfolio, p) + linear.cash + linear.slope * p)
                / notional
        })
        .collect();
    let max_abs = residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    Ok(ResidualReport { max_abs, residuals })
}

/// Midpoint discretization of the continuous replication of a funded
/// concentrated claim: straddles with strike density `¼k^{−3/2}/D` over the
/// band plus a linear boundary leg, per unit notional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarrMadanStrip {
    /// Midpoint nodes as (strike, straddle weight).
    pub nodes: Vec<PortfolioLeg>,
    pub linear: LinearLeg,
    /// Actual node spacing after rounding the band to a whole node count.
    pub step: f64,
}

impl CarrMadanStrip {
    /// Approximate protection payoff `Σ w·|p − k| + cash + slope·p`.
    pub fn payoff(&self, p: f64) -> f64 {
        let strip: f64 = self.nodes.iter().map(|n| n.weight * (p - n.strike).abs()).sum();
        strip + self.linear.cash + self.linear.slope * p
    }
}

/// Builds the discretized strike-density replication of a funded
/// concentrated protection claim.
///
/// # Errors
///
/// [`LpHedgeError::InvalidInput`] for non-concentrated or non-funded specs,
/// or a non-positive step.
pub fn carr_madan_portfolio(spec: &PositionSpec, step: f64) -> Result<CarrMadanStrip> {
    validate_positive(step, "quadrature step")?;
    let range = match (spec.protocol, spec.kind) {
        (Protocol::V3(range), PositionKind::Funded) => range,
        _ => {
            return Err(LpHedgeError::invalid(
                "the strike-density replication covers funded concentrated positions only",
            ))
        }
    };
    let d = crate::amm::v3_unit_value(spec.p0, range);
    let (pa, pb) = (range.lower(), range.upper());
    let n_nodes = (((pb - pa) / step).round() as usize).max(1);
    let dk = (pb - pa) / n_nodes as f64;
    let nodes = (0..n_nodes)
        .map(|i| {
            let k = pa + (i as f64 + 0.5) * dk;
            PortfolioLeg { strike: k, weight: 0.25 * k.powf(-1.5) * dk / d }
        })
        .collect();
    // payoff = 1 − [strip + p·(1/(2√pa) − 1/(2√pb)) + (√pb − √pa)/2]/D.
    let linear = LinearLeg {
        cash: 1.0 - (pb.sqrt() - pa.sqrt()) / (2.0 * d),
        slope: -(0.5 / pa.sqrt() - 0.5 / pb.sqrt()) / d,
    };
    Ok(CarrMadanStrip { nodes, linear, step: dk })
}

/// Which side of the quote a costing uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuoteSide {
    Mid,
    Ask,
}

/// One quoted option: strike, side, and the three price levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub strike: f64,
    pub side: OptionType,
    pub bid: f64,
    pub ask: f64,
    pub mid: f64,
}

/// A single-maturity option chain in numeraire units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptionChain {
    /// Year fraction to the chain's common maturity.
    pub maturity: f64,
    pub records: Vec<ChainRecord>,
}

impl OptionChain {
    /// Validates quotes: positive strikes, `0 ≤ bid ≤ mid ≤ ask`.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on any violated quote or a negative
    /// maturity.
    pub fn new(maturity: f64, records: Vec<ChainRecord>) -> Result<Self> {
        if !(maturity.is_finite() && maturity >= 0.0) {
            return Err(LpHedgeError::invalid(format!(
                "chain maturity must be a nonnegative year fraction, got {maturity}"
            )));
        }
        for record in &records {
            if record.strike <= 0.0 || !record.strike.is_finite() {
                return Err(LpHedgeError::invalid(format!(
                    "chain strike must be positive, got {}",
                    record.strike
                )));
            }
            if !(0.0 <= record.bid && record.bid <= record.mid && record.mid <= record.ask) {
                return Err(LpHedgeError::invalid(format!(
                    "quote at strike {} violates 0 ≤ bid ≤ mid ≤ ask: ({}, {}, {})",
                    record.strike, record.bid, record.mid, record.ask
                )));
            }
        }
        Ok(Self { maturity, records })
    }

    /// Parses a chain from CSV with header `strike,side,bid,ask,mid`.
    ///
    /// # Errors
    ///
    /// [`LpHedgeError::InvalidInput`] on CSV syntax or quote violations.
    pub fn from_csv(reader: impl Read, maturity: f64) -> Result<Self> {
        let mut csv_reader = csv::Reader::from_reader(reader);
        let records = csv_reader
            .deserialize::<ChainRecord>()
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| LpHedgeError::invalid(format!("malformed option chain CSV: {e}")))?;
        Self::new(maturity, records)
    }

    /// Looks up the quote for a strike/side pair (near-exact strike match).
    fn quote(&self, strike: f64, side: OptionType) -> Option<&ChainRecord> {
        self.records.iter().find(|record| {
            record.side == side && (record.strike - strike).abs() <= STRIKE_MATCH_TOLERANCE * strike
        })
    }
}

/// Costs the portfolio against a chain: `Σ weight·quote` on the chosen
/// side, positive weights buying.
///
/// # Errors
///
/// [`LpHedgeError::MissingStrikes`] listing every portfolio strike absent
/// from the chain; no interpolation is attempted.
pub fn portfolio_cost(portfolio: &HedgePortfolio, chain: &OptionChain, side: QuoteSide) -> Result<f64> {
    let mut cost = 0.0;
    let mut missing = Vec::new();
    let sides = [
        (&portfolio.put_legs, OptionType::Put),
        (&portfolio.call_legs, OptionType::Call),
    ];
    for (legs, option) in sides {
        for leg in legs.iter() {
            match chain.quote(leg.strike, option) {
                Some(record) => {
                    let price = match side {
                        QuoteSide::Mid => record.mid,
                        QuoteSide::Ask => record.ask,
                    };
                    cost += leg.weight * price;
                }
                None => missing.push(leg.strike),
            }
        }
    }
    if missing.is_empty() {
        Ok(cost)
    } else {
        Err(LpHedgeError::MissingStrikes { strikes: missing })
    }
}
