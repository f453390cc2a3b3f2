//! `delta`: the claim's hedge ratio at the valuation price, analytic and
//! central finite difference side by side, optionally tabulated over a
//! price grid.

use lphedge::bsm::{delta_v3, pv_v3};
use lphedge::{BsmParams, PositionSpec, Protocol, ValuationContext};
use serde::Serialize;
use serde_json::json;

use crate::config::{DeltaArgs, Layers};
use crate::error::{CliError, Result};
use crate::output::Emitter;

/// Relative bump of the central difference, `h = 1e-4·p`.
const FD_BUMP: f64 = 1e-4;

#[derive(Serialize)]
struct Row {
    p: f64,
    analytic: f64,
    finite_difference: f64,
}

fn both_deltas(
    position: &PositionSpec,
    params: &BsmParams,
    tau: f64,
    p: f64,
) -> Result<(f64, f64)> {
    let pv_at = |price: f64| -> Result<f64> {
        let ctx = ValuationContext::new(tau, price, position.p0)?;
        Ok(pv_v3(position, &ctx, params)?)
    };
    let ctx = ValuationContext::new(tau, p, position.p0)?;
    let analytic = delta_v3(position, &ctx, params)?;
    let h = FD_BUMP * p;
    let fd = (pv_at(p + h)? - pv_at(p - h)?) / (2.0 * h);
    Ok((analytic, fd))
}

pub fn run(layers: &Layers, emitter: &Emitter, args: &DeltaArgs) -> Result<()> {
    let position = layers.position(&args.spec)?;
    if matches!(position.protocol, Protocol::V2) {
        return Err(CliError::Usage(
            "delta is defined for concentrated positions; use --protocol v3".into(),
        ));
    }
    let market = layers.market(&args.market, position.p0);
    let params = BsmParams::new(market.sigma, market.rate, market.dividend)?;
    let tau = market.tau();

    let (analytic, fd) = both_deltas(&position, &params, tau, market.p_t)?;
    let mut summary = json!({
        "config": super::base_config(layers, &position),
        "delta": { "analytic": analytic, "finite_difference": fd },
    });
    summary["config"]["market"] = json!(market);

    let rows = if args.emit_grid {
        let grid = layers.grid(&args.grid, position.p0)?;
        summary["config"]["grid"] = json!(grid);
        grid.values()
            .into_iter()
            .map(|p| {
                let (analytic, finite_difference) = both_deltas(&position, &params, tau, p)?;
                Ok(Row { p, analytic, finite_difference })
            })
            .collect::<Result<Vec<Row>>>()?
    } else {
        Vec::new()
    };
    emitter.emit("delta", summary, &rows)
}
