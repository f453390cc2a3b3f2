//! Subcommand implementations. Each resolves its configuration through
//! [`Layers`], computes with the library, and hands rows plus a JSON
//! summary to the [`Emitter`].

mod delta;
mod il;
mod position;
mod price;
mod replicate;

use lphedge::PositionSpec;
use serde_json::{json, Value};

use crate::config::{Cli, CommandChoice, Layers};
use crate::error::Result;
use crate::output::Emitter;

pub fn run(cli: Cli) -> Result<()> {
    let layers = Layers::new(&cli.global)?;
    let emitter = Emitter::new(layers.out.clone(), layers.format);
    match cli.command {
        CommandChoice::Position(args) => position::run(&layers, &emitter, &args),
        CommandChoice::Il(args) => il::run(&layers, &emitter, &args),
        CommandChoice::Replicate(args) => replicate::run(&layers, &emitter, &args),
        CommandChoice::Price(args) => price::run(&layers, &emitter, &args),
        CommandChoice::Delta(args) => delta::run(&layers, &emitter, &args),
    }
}

/// Config echo shared by every artifact: the resolved position plus the
/// global knobs that affect the run.
fn base_config(layers: &Layers, position: &PositionSpec) -> Value {
    json!({
        "position": position,
        "notional": position.initial_value(),
        "format": layers.format,
        "out": layers.out.display().to_string(),
        "seed": layers.seed,
    })
}
