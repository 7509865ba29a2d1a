//! CSV helpers, atomic file writes and checksums shared by the result types.
//!
//! All numeric CSV files have exactly one header line and a fixed column
//! order. Lines starting with `#` carry metadata and are skipped by readers.
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back reproduces the original values bit for bit.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Parses a numeric CSV body whose header must equal `columns`.
pub fn read_csv(text: &str, columns: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::SchemaMismatch("missing header line".into()))?;
    let found: Vec<&str> = header.split(',').map(str::trim).collect();
    if found != columns {
        return Err(Error::SchemaMismatch(format!(
            "expected columns {}, found {}",
            columns.join(","),
            header
        )));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let row: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("data row {}: {e}", i + 1)))?;
            if row.len() != columns.len() {
                return Err(Error::SchemaMismatch(format!(
                    "data row {} has {} fields, expected {}",
                    i + 1,
                    row.len(),
                    columns.len()
                )));
            }
            Ok(row)
        })
        .collect()
}

/// Metadata lines (`# key=value ...`) of a CSV file, merged into one map.
pub fn read_csv_metadata(text: &str) -> std::collections::BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .flat_map(|l| l.split_whitespace())
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
