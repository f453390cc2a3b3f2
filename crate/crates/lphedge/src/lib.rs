//! Impermanent-loss analytics and hedging for constant-function market makers.
//!
//! The crate models liquidity positions on constant-product pools (full-range
//! and concentrated-liquidity variants), decomposes their divergence loss
//! into constant, square-root and vanilla-option legs, builds static
//! replicating option portfolios, and values protection claims under both a
//! closed-form log-normal model and a log-normal stochastic-volatility model
//! driven through a generic Fourier transform layer. A seeded Monte Carlo
//! engine provides an independent oracle for every analytic route.
//!
//! # Example
//!
//! Two weeks of loss protection on a $1m concentrated position, banded at
//! [1500, 2500] around an entry price of 2000, with the base stake borrowed:
//!
//! ```
//! use lphedge::bsm::pv_v3;
//! use lphedge::{BsmParams, PositionKind, PositionSpec, PriceRange, Protocol, ValuationContext};
//!
//! # fn main() -> lphedge::Result<()> {
//! let band = PriceRange::new(1_500.0, 2_500.0)?;
//! let position = PositionSpec::from_notional(
//!     Protocol::V3(band),
//!     2_000.0,     // entry price
//!     1_000_000.0, // notional in quote units
//!     PositionKind::BorrowedNominal,
//! )?;
//! let market = BsmParams::new(0.5, 0.0, 0.0)?; // σ, r, q
//! let at_entry = ValuationContext::new(14.0 / 365.0, 2_000.0, 2_000.0)?;
//!
//! // Present value of the protection claim, as a fraction of notional.
//! let pv = pv_v3(&position, &at_entry, &market)?;
//! assert!((pv - 0.00997).abs() < 1e-4);
//! # Ok(())
//! # }
//! ```

pub mod amm;
pub mod bsm;
pub mod decomposition;
pub mod error;
pub mod fourier;
pub mod logsv;
pub mod mc;
pub mod numerics;
pub mod replication;

pub use amm::{PositionKind, PositionSpec, PriceRange, Protocol, Reserves};
pub use bsm::{BsmParams, OptionType, ValuationContext, DAYS_PER_YEAR};
pub use decomposition::{ILComponents, LegValues};
pub use error::{LpHedgeError, Result};
pub use fourier::{BsmMgf, MgfModel, QuadratureConfig};
pub use logsv::{LogSvMgf, LogSvParams, VolOfVolTerm};
pub use mc::{McConfig, McSamples};
pub use replication::{HedgePortfolio, OptionChain, QuoteSide, StrikeGrid};
