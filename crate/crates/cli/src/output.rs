//! Output writers. Every file carries the analysis configuration and a
//! timestamp: JSON files as `config`/`timestamp` fields, CSV files as a
//! leading `#` comment line holding the same JSON object.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use eqtl_dissect::{Error, Result};

fn now_epoch_secs() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

/// JSON file `{ "config": ..., "timestamp": ..., <key>: <payload> }` with
/// sorted keys, so output bytes are reproducible apart from the timestamp.
pub fn write_json<C: Serialize, T: Serialize>(
    path: &Path,
    config: &C,
    key: &str,
    payload: &T,
) -> Result<()> {
    let mut envelope = json!({
        "config": serde_json::to_value(config).map_err(|e| Error::Numeric(e.to_string()))?,
        "timestamp": now_epoch_secs(),
    });
    envelope[key] =
        serde_json::to_value(payload).map_err(|e| Error::Numeric(e.to_string()))?;
    write_value(path, &envelope)
}

fn write_value(path: &Path, value: &Value) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    let text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(e.to_string()))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))?;
    f.write_all(b"\n").map_err(io_err(path))?;
    Ok(())
}

/// CSV with a `# {...}` provenance comment, a header row, and data rows.
pub fn write_csv<C: Serialize>(
    path: &Path,
    config: &C,
    header: &str,
    rows: &[String],
) -> Result<()> {
    let provenance = json!({
        "config": serde_json::to_value(config).map_err(|e| Error::Numeric(e.to_string()))?,
        "timestamp": now_epoch_secs(),
    });
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    writeln!(f, "# {provenance}").map_err(io_err(path))?;
    writeln!(f, "{header}").map_err(io_err(path))?;
    for row in rows {
        writeln!(f, "{row}").map_err(io_err(path))?;
    }
    f.flush().map_err(io_err(path))?;
    Ok(())
}
