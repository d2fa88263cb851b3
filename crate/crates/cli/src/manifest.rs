//! Run manifests: enough to re-run a subcommand and check that it
//! reproduces its outputs byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    /// File path, or `None` for standard output.
    pub path: Option<PathBuf>,
    pub bytes: usize,
    pub sha256: String,
}

impl OutputRecord {
    pub fn new(path: Option<PathBuf>, contents: &str) -> Self {
        OutputRecord { path, bytes: contents.len(), sha256: digest(contents) }
    }
}

pub fn digest(contents: &str) -> String {
    Sha256::digest(contents.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Command line after the program name, without `--threads` and
    /// `--manifest`.
    pub argv: Vec<String>,
    /// Parsed parameters, including defaults and environment overrides.
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Drops the `--threads` and `--manifest` options (both `--flag value` and
/// `--flag=value` forms) from a command line.
pub fn strip_run_options(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
            continue;
        }
        if a == "--threads" || a == "--manifest" {
            skip_next = true;
            continue;
        }
        if a.starts_with("--threads=") || a.starts_with("--manifest=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}
