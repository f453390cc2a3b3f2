//! `replicate`: build the static option hedge, report its residual, and
//! optionally cost it against an option-chain CSV.

use std::fs::File;

use lphedge::bsm::OptionType;
use lphedge::replication::{portfolio_cost, replication_residual, OptionChain};
use lphedge::{HedgePortfolio, QuoteSide, StrikeGrid, DAYS_PER_YEAR};
use serde::Serialize;
use serde_json::json;

use crate::config::{Layers, PriceGrid, ReplicateArgs, DEFAULT_GRID, DEFAULT_STRIKE_WIDTH, DEFAULT_TAU_DAYS};
use crate::error::{CliError, Result};
use crate::output::Emitter;

#[derive(Serialize)]
struct Row {
    side: OptionType,
    strike: f64,
    weight: f64,
}

pub fn run(layers: &Layers, emitter: &Emitter, args: &ReplicateArgs) -> Result<()> {
    let position = layers.position(&args.spec)?;
    let width =
        args.strike_width.or(layers.file.strike_width).unwrap_or(DEFAULT_STRIKE_WIDTH);
    let low = args.grid_low.or(layers.file.grid_low).unwrap_or(DEFAULT_GRID.0);
    let high = args.grid_high.or(layers.file.grid_high).unwrap_or(DEFAULT_GRID.1);
    let points = args.points.or(layers.file.points).unwrap_or(crate::config::DEFAULT_POINTS);
    let grid = StrikeGrid::regular(position.p0, low, high, width)?;
    let portfolio = HedgePortfolio::build(&position, &grid)?;

    let rows: Vec<Row> = portfolio
        .put_legs
        .iter()
        .map(|leg| Row { side: OptionType::Put, strike: leg.strike, weight: leg.weight })
        .chain(
            portfolio
                .call_legs
                .iter()
                .map(|leg| Row { side: OptionType::Call, strike: leg.strike, weight: leg.weight }),
        )
        .collect();

    let prices = PriceGrid::new(low, high, points)?.values();
    let report = replication_residual(&position, &portfolio, &prices)?;
    let argmax = report
        .residuals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map_or(f64::NAN, |(i, _)| prices[i]);

    let mut summary = json!({
        "config": super::base_config(layers, &position),
        "linear_leg": portfolio.metadata.linear,
        "residual": {
            "max_abs": report.max_abs,
            "argmax_p": argmax,
            "grid_points": prices.len(),
        },
    });
    summary["config"]["strike_grid"] =
        json!({ "low": low, "high": high, "width": width });

    if let Some(chain_path) = args.chain.as_ref().or(layers.file.chain.as_ref()) {
        let tau_days =
            args.tau_days.or(layers.file.tau_days).unwrap_or(DEFAULT_TAU_DAYS);
        let file = File::open(chain_path).map_err(|e| {
            CliError::Usage(format!("cannot read chain {}: {e}", chain_path.display()))
        })?;
        let chain = OptionChain::from_csv(file, tau_days / DAYS_PER_YEAR)?;
        summary["cost"] = json!({
            "mid": portfolio_cost(&portfolio, &chain, QuoteSide::Mid)?,
            "ask": portfolio_cost(&portfolio, &chain, QuoteSide::Ask)?,
        });
        summary["config"]["chain"] = json!(chain_path.display().to_string());
    }
    emitter.emit("replicate", summary, &rows)
}
