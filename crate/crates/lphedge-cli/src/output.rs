//! Artifact emission: atomic CSV/JSON writers and the shared summary
//! layout. Files are written to a temporary sibling and persisted with a
//! rename so a crashed run never leaves a truncated artifact.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use tempfile::NamedTempFile;

use crate::config::FormatChoice;
use crate::error::{CliError, Result};

/// Version tag embedded in every JSON artifact.
const SCHEMA_VERSION: &str = "v1";

/// Schema string for a command's artifact, e.g. `lphedge.price.v1`.
pub fn schema(command: &str) -> String {
    format!("lphedge.{command}.{SCHEMA_VERSION}")
}

fn persist(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut file = NamedTempFile::new_in(dir)?;
    file.write_all(bytes)?;
    let target = dir.join(name);
    file.persist(&target).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(target)
}

fn csv_bytes<S: Serialize>(rows: &[S]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    writer.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Emits one command's artifacts.
///
/// The JSON summary (schema string, resolved config, scalar results) always
/// lands in `<out>/<command>.json` and on stdout. Tabular data lands in
/// `<out>/<command>.csv` under `--format csv` (the summary records the
/// path) or inline under a `rows` key under `--format json`.
pub struct Emitter {
    out: PathBuf,
    format: FormatChoice,
}

impl Emitter {
    pub fn new(out: PathBuf, format: FormatChoice) -> Self {
        Self { out, format }
    }

    /// Writes the summary, plus the table when `rows` is non-empty.
    ///
    /// # Errors
    ///
    /// [`CliError::Io`] on filesystem failures.
    pub fn emit<S: Serialize>(
        &self,
        command: &str,
        mut summary: Value,
        rows: &[S],
    ) -> Result<()> {
        summary["schema"] = json!(schema(command));
        if !rows.is_empty() {
            match self.format {
                FormatChoice::Csv => {
                    let path = persist(&self.out, &format!("{command}.csv"), &csv_bytes(rows)?)?;
                    summary["csv"] = json!(path.display().to_string());
                }
                FormatChoice::Json => {
                    summary["rows"] = serde_json::to_value(rows)
                        .map_err(|e| CliError::Io(e.to_string()))?;
                }
            }
        }
        let text = serde_json::to_string_pretty(&summary)
            .map_err(|e| CliError::Io(e.to_string()))?;
        persist(&self.out, &format!("{command}.json"), text.as_bytes())?;
        println!("{text}");
        Ok(())
    }
}
