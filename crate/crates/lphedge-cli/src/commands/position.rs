//! `position`: reserve composition over a price grid.

use serde::Serialize;
use serde_json::json;

use crate::config::{Layers, PositionArgs};
use crate::error::Result;
use crate::output::Emitter;

#[derive(Serialize)]
struct Row {
    p: f64,
    x: f64,
    y: f64,
    value: f64,
}

pub fn run(layers: &Layers, emitter: &Emitter, args: &PositionArgs) -> Result<()> {
    let position = layers.position(&args.spec)?;
    let grid = layers.grid(&args.grid, position.p0)?;
    let rows: Vec<Row> = grid
        .values()
        .into_iter()
        .map(|p| {
            let reserves = position.reserves(p);
            Row { p, x: reserves.x, y: reserves.y, value: reserves.value(p) }
        })
        .collect();
    let mut summary = json!({ "config": super::base_config(layers, &position) });
    summary["config"]["grid"] = json!(grid);
    emitter.emit("position", summary, &rows)
}
