//! CSV tables and the JSON run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::Result;

/// Serialize `rows` as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| crate::Error::Parse(e.to_string()))
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    config_hash: String,
    config: &'a ExperimentConfig,
    outputs: Vec<String>,
    package_version: &'static str,
}

/// `manifest.json` next to the outputs it lists.
pub fn write_manifest(dir: &Path, command: &str, cfg: &ExperimentConfig, outputs: &[PathBuf]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let m = Manifest {
        schema_version: cfg.schema_version,
        command,
        config_hash: cfg.hash(),
        config: cfg,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
        package_version: env!("CARGO_PKG_VERSION"),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(path)
}
