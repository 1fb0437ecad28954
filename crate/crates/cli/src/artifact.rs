//! Output files and their manifests.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{mode_name, RunConfig};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub elapsed_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masked_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
    pub outputs: Vec<OutputEntry>,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a RunConfig, elapsed_seconds: f64) -> Self {
        Self {
            tool: "steerlab",
            version: env!("CARGO_PKG_VERSION"),
            command: mode_name(config.mode),
            config,
            elapsed_seconds,
            masked_cells: None,
            summary: None,
            outputs: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn to_json(v: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("reports serialize");
    out.push(b'\n');
    out
}

/// Sends `body` to `out` with a manifest next to it, or to stdout.
pub fn emit(out: Option<&Path>, body: &[u8], mut manifest: Manifest) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_atomic(path, body)?;
            manifest.outputs.push(OutputEntry {
                file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                bytes: body.len(),
                sha256: sha256_hex(body),
            });
            write_atomic(&manifest_path(path), &to_json(&manifest))
        }
        None => std::io::stdout()
            .lock()
            .write_all(body)
            .map_err(|e| CliError::Runtime(format!("stdout: {e}"))),
    }
}
