//! File formats: step-function CSV with a JSON sidecar, stable JSON
//! artifacts, and content hashing for run manifests.
//!
//! Every float is printed with 17 significant digits, which round-trips any
//! `f64` exactly; reading a file this module wrote recovers the original
//! values bit for bit. Artifacts are byte-stable: fixed float formatting,
//! fixed column order, and sorted JSON maps, so a rerun of the same manifest
//! can be compared with `cmp`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::grid::{DyadicGrid, StepFunction};
use crate::weights::Weight;
use crate::{Error, Result};

/// Render a float with 17 significant digits; parsing the result recovers
/// the exact bit pattern for every finite `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Path of the JSON descriptor written beside a CSV: `f.csv` → `f.csv.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// Serialize a step function as `cell_index,value` CSV text.
pub fn step_to_csv(f: &StepFunction) -> String {
    let mut out = String::from("cell_index,value\n");
    for (i, v) in f.values().iter().enumerate() {
        out.push_str(&format!("{i},{}\n", format_float(*v)));
    }
    out
}

/// Write a step function as CSV plus a `{"depth": d}` sidecar descriptor.
pub fn write_step_csv(path: &Path, f: &StepFunction) -> Result<()> {
    fs::write(path, step_to_csv(f))?;
    fs::write(sidecar_path(path), format!("{{\"depth\": {}}}\n", f.grid().depth()))?;
    Ok(())
}

/// Parse `cell_index,value` CSV text into cell values, checking the header
/// and that indices run `0..n` in order.
pub fn parse_step_csv(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "cell_index,value" => {}
        other => {
            return Err(Error::Config(format!(
                "expected header 'cell_index,value', got {other:?}"
            )))
        }
    }
    let mut values = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (idx, val) = line.split_once(',').ok_or_else(|| {
            Error::Config(format!("row {row}: expected 'cell_index,value', got '{line}'"))
        })?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("row {row}: bad cell index: {e}")))?;
        if idx != values.len() {
            return Err(Error::Config(format!(
                "row {row}: cell index {idx} out of order (expected {})",
                values.len()
            )));
        }
        let val: f64 = val
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("row {row}: bad value: {e}")))?;
        values.push(val);
    }
    Ok(values)
}

fn depth_for_len(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Config(format!(
            "{n} rows do not fill a dyadic grid (need a power of two)"
        )));
    }
    Ok(n.trailing_zeros())
}

/// Read a step function written by [`write_step_csv`]. The sidecar fixes the
/// depth when present; otherwise the row count must be a power of two.
pub fn read_step_csv(path: &Path) -> Result<StepFunction> {
    let values = parse_step_csv(&fs::read_to_string(path)?)?;
    let sidecar = sidecar_path(path);
    let depth = if sidecar.exists() {
        let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sidecar)?)?;
        meta.get("depth")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Config(format!("{} lacks a depth field", sidecar.display())))?
            as u32
    } else {
        depth_for_len(values.len())?
    };
    let grid = DyadicGrid::new(depth)?;
    if values.len() != grid.cell_count() {
        return Err(Error::Config(format!(
            "{} rows but depth {depth} needs {}",
            values.len(),
            grid.cell_count()
        )));
    }
    StepFunction::new(grid, values)
}

/// Read a CSV as a strictly positive weight.
pub fn read_weight_csv(path: &Path) -> Result<Weight> {
    Weight::from_positive(read_step_csv(path)?)
}

/// Serialize any artifact as pretty JSON text with a trailing newline.
/// Struct fields keep declaration order and maps are sorted, so the bytes
/// are a pure function of the value.
pub fn to_json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Write an artifact as stable pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_text(value)?)?;
    Ok(())
}

/// Hex SHA-256 of a byte string, for manifest input references.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Hex SHA-256 of a file's contents.
pub fn hash_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}
