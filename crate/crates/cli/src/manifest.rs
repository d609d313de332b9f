//! Provenance sidecar written next to every output file.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::noise::PRNG_ID;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRecord {
    pub prng: String,
    pub seed: u64,
    pub sigma_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub scenario: String,
    pub config_path: PathBuf,
    /// SHA-256 of the raw config bytes, lowercase hex.
    pub config_sha256: String,
    pub inputs: Vec<PathBuf>,
    pub output_path: PathBuf,
    pub format: String,
    pub noise: NoiseRecord,
    /// RFC 3339, UTC, second precision.
    pub timestamp: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

impl RunManifest {
    pub fn noise(seed: u64, sigma_rel: f64) -> NoiseRecord {
        NoiseRecord { prng: PRNG_ID.to_string(), seed, sigma_rel }
    }

    pub fn now() -> String {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}
