//! Run manifests: a versioned snapshot of everything needed to reproduce a
//! run bit for bit (config, dataset digest, seed) plus its outcomes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::eval::EvalMetrics;
use crate::train::TrainConfig;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest io: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, ManifestError>;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub config: TrainConfig,
    /// SHA-256 of the input dataset file.
    pub dataset_digest: String,
    pub seed: u64,
    pub checkpoint_path: String,
    pub schema_path: Option<String>,
    pub metrics: Option<EvalMetrics>,
    pub train_seconds: f64,
    pub benchmark_protocol: Option<String>,
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn digest_file(path: &Path) -> Result<String> {
    Ok(digest_bytes(&fs::read(path)?))
}

impl RunManifest {
    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization")
    }

    pub fn from_str(text: &str) -> Result<Self> {
        let m: RunManifest =
            serde_json::from_str(text).map_err(|e| ManifestError::Format(e.to_string()))?;
        if m.version != MANIFEST_VERSION {
            return Err(ManifestError::Format(format!("unsupported version {}", m.version)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string_pretty())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_str(&fs::read_to_string(path)?)
    }
}
