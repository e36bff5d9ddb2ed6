//! Run manifests: enough metadata to reproduce an output file byte for
//! byte and to verify it was not modified.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
}

/// Written alongside every `--out` file. Re-running the named command with
/// the recorded parameters reproduces the output byte-identically (all
/// randomness is seeded and recorded in `params`).
#[derive(Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub params: serde_json::Value,
    pub tool_version: &'static str,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn new(command: &str, params: serde_json::Value, path: &Path, bytes: &[u8]) -> Self {
        RunManifest {
            schema: "manifest/1",
            command: command.to_string(),
            params,
            tool_version: env!("CARGO_PKG_VERSION"),
            outputs: vec![OutputRecord {
                path: path.display().to_string(),
                sha256: hex_digest(bytes),
            }],
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifests serialize");
        s.push('\n');
        s
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
