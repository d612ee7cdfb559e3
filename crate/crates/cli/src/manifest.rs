//! The run manifest: configuration identity, per-stage records and a
//! content digest for every file in the output directory.

use std::collections::BTreeMap;
use std::path::Path;

use boussinesq_core::profiles::ProfileSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{sha256_hex, KGrid, RunConfig};
use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Hash of the configuration sections the stage depends on.
    pub key: String,
    pub seconds: f64,
    pub error_estimate: Option<f64>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool_version: String,
    pub config_hash: String,
    pub profile: ProfileSpec,
    pub k_grid: KGrid,
    pub zeta: Vec<f64>,
    pub t: Vec<f64>,
    pub config: RunConfig,
    pub stages: BTreeMap<String, StageRecord>,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(config: &RunConfig) -> Self {
        Manifest {
            schema: 1,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            profile: config.profile.clone(),
            k_grid: config.k_grid,
            zeta: config.zeta.clone(),
            t: config.t.clone(),
            config: config.clone(),
            stages: BTreeMap::new(),
            files: BTreeMap::new(),
        }
    }

    pub fn read(dir: &Path) -> Result<Option<Self>, CliError> {
        let path = dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Artifact { path, reason: e.to_string() })
    }

    /// A manifest for `config` that keeps the stage records of `previous`
    /// whose keys still match.
    pub fn carry_over(config: &RunConfig, previous: Option<Manifest>, keys: &BTreeMap<&str, String>) -> Self {
        let mut m = Manifest::new(config);
        if let Some(prev) = previous {
            for (name, rec) in prev.stages {
                if keys.get(name.as_str()) == Some(&rec.key) {
                    for f in &rec.outputs {
                        if let Some(d) = prev.files.get(f) {
                            m.files.insert(f.clone(), d.clone());
                        }
                    }
                    m.stages.insert(name, rec);
                }
            }
        }
        m
    }

    /// True when the stage was recorded under `key` and each of its outputs
    /// still has the recorded digest.
    pub fn stage_is_current(&self, dir: &Path, name: &str, key: &str) -> bool {
        let Some(rec) = self.stages.get(name) else {
            return false;
        };
        rec.key == key
            && rec.outputs.iter().all(|f| match (self.files.get(f), digest_file(&dir.join(f))) {
                (Some(want), Ok(have)) => *want == have,
                _ => false,
            })
    }

    pub fn record(&mut self, dir: &Path, name: &str, rec: StageRecord) -> Result<(), CliError> {
        for f in &rec.outputs {
            self.files.insert(f.clone(), digest_file(&dir.join(f))?);
        }
        self.stages.insert(name.to_string(), rec);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}

pub fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}
