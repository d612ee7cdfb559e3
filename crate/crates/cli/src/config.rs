//! The JSON run configuration and command-line overrides.

use std::path::Path;

use boussinesq_core::profiles::ProfileSpec;
use boussinesq_core::{AsymConfig, ScatterConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Uniform k-grid `start..=end` with `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KGrid {
    pub start: f64,
    pub end: f64,
    pub nodes: usize,
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid {
            start: 0.01,
            end: 7.0,
            nodes: 1399,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSection {
    pub half_length: f64,
    pub n: usize,
    pub dt: Option<f64>,
    pub c_cfl: f64,
    pub dealias: bool,
    pub significance: f64,
    pub allow_small_domain: bool,
}

impl Default for PdeSection {
    fn default() -> Self {
        PdeSection {
            half_length: 640.0,
            n: 8192,
            dt: None,
            c_cfl: 0.5,
            dealias: true,
            significance: 1e-3,
            allow_small_domain: false,
        }
    }
}

fn default_zeta() -> Vec<f64> {
    vec![0.6, 1.0, 1.4]
}

fn default_t() -> Vec<f64> {
    vec![40.0, 80.0, 160.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default)]
    pub k_grid: KGrid,
    #[serde(default)]
    pub scatter: ScatterConfig,
    #[serde(default)]
    pub asym: AsymConfig,
    #[serde(default)]
    pub pde: PdeSection,
    #[serde(default = "default_zeta")]
    pub zeta: Vec<f64>,
    #[serde(default = "default_t")]
    pub t: Vec<f64>,
    /// Run the assumption checks before `asym` and `compare`, failing on a
    /// negative verdict.
    #[serde(default)]
    pub require_assumptions: bool,
    /// Worker threads for the k-sweep; `None` lets rayon decide. Does not
    /// enter any hash.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn hash_value(v: &Value) -> String {
    sha256_hex(serde_json::to_string(v).expect("json values serialize").as_bytes())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Applies `key=value` overrides. A key is either a dotted path from the
    /// root (`scatter.k_min`) or a bare name that occurs exactly once
    /// anywhere in the configuration (`k_min`). Values are parsed as JSON,
    /// falling back to a plain string.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, CliError> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut root = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
            let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
            let path = resolve_key(&root, key.trim())?;
            let mut slot = &mut root;
            for part in &path {
                slot = slot
                    .get_mut(part.as_str())
                    .ok_or_else(|| CliError::Config(format!("override key `{key}` does not exist")))?;
            }
            *slot = value;
        }
        serde_json::from_value(root).map_err(|e| CliError::Config(format!("after overrides: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let g = &self.k_grid;
        if !(g.start > 0.0 && g.end > g.start && g.nodes >= 5) {
            return bad(format!("k_grid must satisfy 0 < start < end with at least 5 nodes, got {g:?}"));
        }
        if self.zeta.iter().any(|z| !(z.is_finite() && *z > 0.0)) {
            return bad("zeta values must be positive".into());
        }
        if self.t.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("t values must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    fn section(&self, keys: &[&str]) -> Value {
        let all = serde_json::to_value(self).expect("config serializes");
        let picked: serde_json::Map<String, Value> =
            keys.iter().map(|k| (k.to_string(), all[*k].clone())).collect();
        Value::Object(picked)
    }

    /// Hash of everything that influences results.
    pub fn hash(&self) -> String {
        hash_value(&self.section(&["profile", "k_grid", "scatter", "asym", "pde", "zeta", "t", "require_assumptions"]))
    }

    pub fn scatter_key(&self) -> String {
        hash_value(&self.section(&["profile", "k_grid", "scatter"]))
    }

    pub fn pde_key(&self) -> String {
        hash_value(&self.section(&["profile", "pde", "zeta", "t"]))
    }

    pub fn sorted_times(&self) -> Vec<f64> {
        let mut t = self.t.clone();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }

    /// Largest |x| a ray sample can ask for.
    pub fn x_observation(&self) -> f64 {
        let z = self.zeta.iter().cloned().fold(0.0, f64::max);
        let t = self.t.iter().cloned().fold(0.0, f64::max);
        z * t
    }
}

fn resolve_key(root: &Value, key: &str) -> Result<Vec<String>, CliError> {
    if key.contains('.') {
        return Ok(key.split('.').map(str::to_string).collect());
    }
    let mut found = Vec::new();
    collect_paths(root, key, &mut Vec::new(), &mut found);
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        0 => Err(CliError::Config(format!("unknown override key `{key}`"))),
        _ => Err(CliError::Config(format!(
            "override key `{key}` is ambiguous: {}",
            found.iter().map(|p| p.join(".")).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn collect_paths(v: &Value, key: &str, prefix: &mut Vec<String>, found: &mut Vec<Vec<String>>) {
    if let Value::Object(map) = v {
        for (k, child) in map {
            prefix.push(k.clone());
            if k == key {
                found.push(prefix.clone());
            }
            collect_paths(child, key, prefix, found);
            prefix.pop();
        }
    }
}
