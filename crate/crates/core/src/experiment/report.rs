//! Report writing: JSON with sorted keys, RFC-4180 CSV with a header row.
//! No timestamps or environment data ever enter a report, so re-running an
//! experiment with the same config produces byte-identical files.

use serde::Serialize;
use std::path::Path;

use crate::error::Result;

/// Serialize through `serde_json::Value`, whose object map is ordered, so
/// keys come out sorted regardless of struct field order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let value = serde_json::to_value(value)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// A CSV writer for one file; rows are serialized structs.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
