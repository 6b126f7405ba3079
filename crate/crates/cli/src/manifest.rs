//! Run manifests: the resolved configuration and content digests of every
//! output, written atomically next to the primary output. Re-running the
//! recorded command with the recorded config reproduces the outputs
//! bit-exactly (digests match; the manifest itself carries a timestamp).

use std::error::Error;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub created_utc: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            schema_version: 1,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_utc: chrono::Utc::now().to_rfc3339(),
            command: command.to_string(),
            seed,
            config,
            outputs: Vec::new(),
        }
    }

    /// Record an already-written output file.
    pub fn record(&mut self, path: &Path) -> Result<(), Box<dyn Error>> {
        let data = std::fs::read(path)?;
        self.outputs.push(OutputRecord {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&data)),
            bytes: data.len() as u64,
        });
        Ok(())
    }

    /// Write the manifest as `<primary>.manifest.json`, atomically.
    pub fn write_next_to(&self, primary: &Path) -> Result<PathBuf, Box<dyn Error>> {
        let mut name = primary
            .file_name()
            .ok_or("output path has no file name")?
            .to_os_string();
        name.push(".manifest.json");
        let path = primary.with_file_name(name);
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }
}

/// Write via a temp file in the same directory, then rename into place.
pub fn write_atomic(path: &Path, data: &[u8]) -> std::io::Result<()> {
    let mut tmp_name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, data)?;
    std::fs::rename(&tmp, path)
}
