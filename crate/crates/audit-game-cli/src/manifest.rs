//! Run manifests: config echo, seed, per-output checksums, and first-class
//! warnings, written next to every command's outputs.

use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;

use crate::config::ExperimentConfig;

/// One emitted file with its content checksum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: usize,
    /// FNV-1a 64 of the file content, hex-encoded.
    pub checksum: String,
}

/// Manifest describing a single command run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputEntry>,
    pub warnings: Vec<String>,
}

/// FNV-1a over bytes, 64-bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    /// Write one output file under the out directory and record it.
    pub fn write_output(&mut self, dir: &Path, name: &str, content: &str) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, content)?;
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            bytes: content.len(),
            checksum: format!("{:016x}", fnv1a64(content.as_bytes())),
        });
        Ok(())
    }

    /// Serialize the manifest itself as `manifest.json`.
    pub fn write(&mut self, dir: &Path) -> io::Result<()> {
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.json"), body)
    }
}
