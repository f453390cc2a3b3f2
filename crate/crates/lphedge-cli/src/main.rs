//! `lphedge` — reproducible, file-driven runs of the liquidity-position
//! math: reserve tables, loss curves, static option hedges, protection
//! pricing, and hedge ratios, emitted as CSV/JSON artifacts.
//!
//! Configuration is layered: built-in defaults, then an optional JSON
//! config file (`--config`), then command-line flags. Every run echoes its
//! fully resolved configuration into the JSON artifact so results can be
//! reproduced from the artifact alone. Exit codes: 0 on success, 2 for
//! usage and input errors, 3 for numerical failures.

mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use crate::config::Cli;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = commands::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
