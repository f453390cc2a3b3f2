//! `il`: terminal profit-and-loss (quote units) and loss fraction over a
//! price grid, optionally one series per range half-width.

use lphedge::amm::{il, pnl};
use lphedge::{PositionSpec, PriceRange, Protocol};
use serde::Serialize;
use serde_json::json;

use crate::config::{IlArgs, Layers};
use crate::error::Result;
use crate::output::Emitter;

#[derive(Serialize)]
struct Row {
    /// Range half-width of the series; empty for a single-position run.
    multiple: Option<f64>,
    p: f64,
    pnl: f64,
    il: f64,
}

fn series(position: &PositionSpec, multiple: Option<f64>, prices: &[f64]) -> Result<Vec<Row>> {
    prices
        .iter()
        .map(|&p| Ok(Row { multiple, p, pnl: pnl(position, p)?, il: il(position, p) }))
        .collect()
}

pub fn run(layers: &Layers, emitter: &Emitter, args: &IlArgs) -> Result<()> {
    let position = layers.position(&args.spec)?;
    let grid = layers.grid(&args.grid, position.p0)?;
    let prices = grid.values();
    let multiples =
        args.range_multiples.clone().or_else(|| layers.file.range_multiples.clone());
    let rows = match &multiples {
        None => series(&position, None, &prices)?,
        Some(ms) => {
            // The sweep rebuilds the band as e^{±m}·p0 around the resolved
            // entry; protocol and explicit range flags are superseded.
            let mut rows = Vec::with_capacity(ms.len() * prices.len());
            for &m in ms {
                let range =
                    PriceRange::new(position.p0 * (-m).exp(), position.p0 * m.exp())?;
                let swept = PositionSpec::from_notional(
                    Protocol::V3(range),
                    position.p0,
                    position.initial_value(),
                    position.kind,
                )?;
                rows.extend(series(&swept, Some(m), &prices)?);
            }
            rows
        }
    };
    let mut summary = json!({ "config": super::base_config(layers, &position) });
    summary["config"]["grid"] = json!(grid);
    if let Some(ms) = &multiples {
        summary["config"]["range_multiples"] = json!(ms);
    }
    emitter.emit("il", summary, &rows)
}
