//! Flags, config file, and their resolution.
//!
//! Precedence is fixed: built-in defaults, overridden by the JSON config
//! file (`--config`), overridden by command-line flags. Every command
//! resolves its inputs through [`Layers`] and echoes the result into its
//! JSON artifact.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lphedge::{LogSvParams, PositionKind, PositionSpec, PriceRange, Protocol};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Default entry price for every fixture.
pub const DEFAULT_P0: f64 = 2_000.0;
/// Default position notional in quote units.
pub const DEFAULT_NOTIONAL: f64 = 1_000_000.0;
/// Default concentrated range.
pub const DEFAULT_RANGE: (f64, f64) = (1_500.0, 2_500.0);
/// Default annualized volatility.
pub const DEFAULT_SIGMA: f64 = 0.5;
/// Default claim tenor in days (365-day year).
pub const DEFAULT_TAU_DAYS: f64 = 14.0;
/// Default number of grid points for tabulated outputs.
pub const DEFAULT_POINTS: usize = 101;
/// Default hedge-strike spacing.
pub const DEFAULT_STRIKE_WIDTH: f64 = 50.0;
/// Default hedge-strike span.
pub const DEFAULT_GRID: (f64, f64) = (1_000.0, 3_000.0);
/// Default Monte Carlo path count.
pub const DEFAULT_PATHS: usize = 100_000;
/// Default Euler step count.
pub const DEFAULT_STEPS: usize = 256;
/// Default Monte Carlo seed.
pub const DEFAULT_SEED: u64 = 42;
/// Default stochastic-vol dynamics (independent vol factor dominant).
pub const DEFAULT_SV: LogSvParams = LogSvParams {
    sigma0: 0.5,
    theta: 0.5,
    kappa1: 2.21,
    kappa2: 2.18,
    beta: 0.0,
    epsilon: 1.0,
};

#[derive(Parser)]
#[command(
    name = "lphedge",
    version,
    about = "Liquidity-position loss math, static option hedges, and protection-claim pricing"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: CommandChoice,
}

#[derive(Args)]
pub struct GlobalArgs {
    /// JSON config file; file values override defaults, flags override the file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory for output artifacts, created if missing (default ".").
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Tabular artifact format (default csv).
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatChoice>,
    /// Monte Carlo seed (default 42).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
pub enum CommandChoice {
    /// Reserve composition (p, x, y, value) over a price grid.
    Position(PositionArgs),
    /// Terminal profit-and-loss and loss fraction (p, pnl, il) over a grid.
    Il(IlArgs),
    /// Static option hedge: weight table plus residual statistics.
    Replicate(ReplicateArgs),
    /// Protection-claim present value and annualized premium.
    Price(PriceArgs),
    /// Claim hedge ratio, analytic and central finite difference.
    Delta(DeltaArgs),
}

/// Position flags shared by every subcommand.
#[derive(Args)]
pub struct SpecArgs {
    /// Pool type (default v3).
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolChoice>,
    /// Entry price p0 (default 2000).
    #[arg(long)]
    pub p0: Option<f64>,
    /// Initial notional in quote units (default 1e6).
    #[arg(long)]
    pub notional: Option<f64>,
    /// Funding convention (default borrowed).
    #[arg(long, value_enum)]
    pub kind: Option<KindChoice>,
    /// Lower edge of the concentrated range (default 1500).
    #[arg(long)]
    pub range_lower: Option<f64>,
    /// Upper edge of the concentrated range (default 2500).
    #[arg(long)]
    pub range_upper: Option<f64>,
}

/// Market flags for the pricing commands.
#[derive(Args)]
pub struct MarketArgs {
    /// Annualized log-normal volatility (default 0.5).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Annualized discount rate (default 0).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Annualized asset yield / borrow rate (default 0).
    #[arg(long)]
    pub dividend: Option<f64>,
    /// Days to expiry on a 365-day year (default 14).
    #[arg(long)]
    pub tau_days: Option<f64>,
    /// Valuation price (default p0).
    #[arg(long)]
    pub p_t: Option<f64>,
}

/// Price-grid flags for tabulated outputs.
#[derive(Args)]
pub struct GridArgs {
    /// Grid lower bound (default 0.5·p0).
    #[arg(long)]
    pub p_min: Option<f64>,
    /// Grid upper bound (default 1.5·p0).
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Number of grid points (default 101).
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args)]
pub struct PositionArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args)]
pub struct IlArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Sweep of range half-widths m (band e^{±m}·p0), one series each.
    #[arg(long, value_delimiter = ',')]
    pub range_multiples: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct ReplicateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// Hedge-strike spacing (default 50).
    #[arg(long)]
    pub strike_width: Option<f64>,
    /// Lowest hedge strike (default 1000).
    #[arg(long)]
    pub grid_low: Option<f64>,
    /// Highest hedge strike (default 3000).
    #[arg(long)]
    pub grid_high: Option<f64>,
    /// Residual-grid resolution (default 101).
    #[arg(long)]
    pub points: Option<usize>,
    /// Option-chain CSV (`strike,side,bid,ask,mid`) to cost the hedge.
    #[arg(long, value_name = "FILE")]
    pub chain: Option<PathBuf>,
    /// Days to the chain's expiry (default 14).
    #[arg(long)]
    pub tau_days: Option<f64>,
}

#[derive(Args)]
pub struct PriceArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub market: MarketArgs,
    /// Price dynamics (default bsm).
    #[arg(long, value_enum)]
    pub model: Option<ModelChoice>,
    /// Valuation engine (default closed; closed requires bsm).
    #[arg(long, value_enum)]
    pub engine: Option<EngineChoice>,
    /// Monte Carlo path count (default 100000).
    #[arg(long)]
    pub paths: Option<usize>,
    /// Euler step count for stochastic-vol Monte Carlo (default 256).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Sweep of range half-widths m (band e^{±m}·p0), one row each.
    #[arg(long, value_delimiter = ',')]
    pub range_multiples: Option<Vec<f64>>,
    /// Stochastic-vol spot volatility σ0.
    #[arg(long)]
    pub sv_sigma0: Option<f64>,
    /// Stochastic-vol mean level θ.
    #[arg(long)]
    pub sv_theta: Option<f64>,
    /// Stochastic-vol constant mean-reversion speed κ1.
    #[arg(long)]
    pub sv_kappa1: Option<f64>,
    /// Stochastic-vol proportional mean-reversion speed κ2.
    #[arg(long)]
    pub sv_kappa2: Option<f64>,
    /// Stochastic-vol spot-correlated vol-of-vol β.
    #[arg(long)]
    pub sv_beta: Option<f64>,
    /// Stochastic-vol independent vol-of-vol ε.
    #[arg(long)]
    pub sv_epsilon: Option<f64>,
}

#[derive(Args)]
pub struct DeltaArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub market: MarketArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also tabulate (p, analytic, finite difference) over the grid.
    #[arg(long)]
    pub emit_grid: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolChoice {
    V2,
    V3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindChoice {
    /// Stake financed in quote; loss measured against the initial notional.
    Funded,
    /// Base stake borrowed or delta-hedged; loss against the hold value.
    Borrowed,
    /// Borrowed stake with the loss normalized by the terminal hold value.
    BorrowedRelative,
}

impl From<KindChoice> for PositionKind {
    fn from(choice: KindChoice) -> Self {
        match choice {
            KindChoice::Funded => Self::Funded,
            KindChoice::Borrowed => Self::BorrowedNominal,
            KindChoice::BorrowedRelative => Self::BorrowedRelative,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Bsm,
    Logsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    Closed,
    Fourier,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatChoice {
    Csv,
    Json,
}

/// Optional values read from `--config`; unknown keys are rejected so a
/// typo cannot silently fall back to a default.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub protocol: Option<ProtocolChoice>,
    pub p0: Option<f64>,
    pub notional: Option<f64>,
    pub kind: Option<KindChoice>,
    pub range_lower: Option<f64>,
    pub range_upper: Option<f64>,
    pub sigma: Option<f64>,
    pub rate: Option<f64>,
    pub dividend: Option<f64>,
    pub tau_days: Option<f64>,
    pub p_t: Option<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub points: Option<usize>,
    pub strike_width: Option<f64>,
    pub grid_low: Option<f64>,
    pub grid_high: Option<f64>,
    pub chain: Option<PathBuf>,
    pub model: Option<ModelChoice>,
    pub engine: Option<EngineChoice>,
    pub sv: Option<LogSvParams>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub range_multiples: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub format: Option<FormatChoice>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    /// Reads the file named by `--config`, or an empty layer when absent.
    ///
    /// # Errors
    ///
    /// [`CliError::Usage`] when the file is unreadable or not valid JSON
    /// for this schema.
    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

/// One flag layer over one file layer; `pick` applies the precedence.
pub struct Layers {
    pub file: FileConfig,
    pub out: PathBuf,
    pub format: FormatChoice,
    pub seed: u64,
}

impl Layers {
    /// # Errors
    ///
    /// Propagates config-file failures.
    pub fn new(global: &GlobalArgs) -> Result<Self> {
        let file = FileConfig::load(global.config.as_ref())?;
        let out = global.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| ".".into());
        let format = global.format.or(file.format).unwrap_or(FormatChoice::Csv);
        let seed = global.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        Ok(Self { file, out, format, seed })
    }

    /// Resolves a validated position from spec flags, file, and defaults.
    ///
    /// # Errors
    ///
    /// [`CliError::Usage`] when the resolved values fail validation.
    pub fn position(&self, args: &SpecArgs) -> Result<PositionSpec> {
        let protocol_choice =
            args.protocol.or(self.file.protocol).unwrap_or(ProtocolChoice::V3);
        let p0 = args.p0.or(self.file.p0).unwrap_or(DEFAULT_P0);
        let notional = args.notional.or(self.file.notional).unwrap_or(DEFAULT_NOTIONAL);
        let kind = args.kind.or(self.file.kind).unwrap_or(KindChoice::Borrowed);
        let protocol = match protocol_choice {
            ProtocolChoice::V2 => Protocol::V2,
            ProtocolChoice::V3 => {
                let lower =
                    args.range_lower.or(self.file.range_lower).unwrap_or(DEFAULT_RANGE.0);
                let upper =
                    args.range_upper.or(self.file.range_upper).unwrap_or(DEFAULT_RANGE.1);
                Protocol::V3(PriceRange::new(lower, upper)?)
            }
        };
        Ok(PositionSpec::from_notional(protocol, p0, notional, kind.into())?)
    }

    /// Resolves the market state for the pricing commands.
    pub fn market(&self, args: &MarketArgs, p0: f64) -> MarketState {
        MarketState {
            sigma: args.sigma.or(self.file.sigma).unwrap_or(DEFAULT_SIGMA),
            rate: args.rate.or(self.file.rate).unwrap_or(0.0),
            dividend: args.dividend.or(self.file.dividend).unwrap_or(0.0),
            tau_days: args.tau_days.or(self.file.tau_days).unwrap_or(DEFAULT_TAU_DAYS),
            p_t: args.p_t.or(self.file.p_t).unwrap_or(p0),
        }
    }

    /// Resolves a tabulation grid centred on the position's entry price.
    ///
    /// # Errors
    ///
    /// [`CliError::Usage`] on an empty or inverted grid.
    pub fn grid(&self, args: &GridArgs, p0: f64) -> Result<PriceGrid> {
        let low = args.p_min.or(self.file.p_min).unwrap_or(0.5 * p0);
        let high = args.p_max.or(self.file.p_max).unwrap_or(1.5 * p0);
        let points = args.points.or(self.file.points).unwrap_or(DEFAULT_POINTS);
        PriceGrid::new(low, high, points)
    }
}

/// Resolved market state, echoed into pricing artifacts.
#[derive(Clone, Copy, Serialize)]
pub struct MarketState {
    pub sigma: f64,
    pub rate: f64,
    pub dividend: f64,
    pub tau_days: f64,
    pub p_t: f64,
}

impl MarketState {
    pub fn tau(&self) -> f64 {
        self.tau_days / lphedge::DAYS_PER_YEAR
    }
}

/// A validated, inclusive evaluation grid.
#[derive(Clone, Copy, Serialize)]
pub struct PriceGrid {
    pub low: f64,
    pub high: f64,
    pub points: usize,
}

impl PriceGrid {
    /// # Errors
    ///
    /// [`CliError::Usage`] unless `0 < low ≤ high` and `points ≥ 1`
    /// (`low == high` requires a single point).
    pub fn new(low: f64, high: f64, points: usize) -> Result<Self> {
        let ordered = low.is_finite() && high.is_finite() && 0.0 < low && low <= high;
        let consistent = points >= 1 && (low < high) == (points > 1);
        if ordered && consistent {
            Ok(Self { low, high, points })
        } else {
            Err(CliError::Usage(format!(
                "price grid needs 0 < p-min ≤ p-max and a consistent point count, got [{low}, {high}] with {points} points"
            )))
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.low];
        }
        let step = (self.high - self.low) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.low + step * i as f64).collect()
    }
}
