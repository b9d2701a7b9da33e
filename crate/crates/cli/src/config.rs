use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::GlobalArgs;

const GLOBAL_KEYS: [&str; 3] = ["out", "seed", "parallel"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Global {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub parallel: Option<usize>,
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

/// The optional JSON config file, kept raw for merging and digesting.
#[derive(Debug, Default)]
pub struct ConfigFile {
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
    entries: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let bytes = std::fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
        let value: Value =
            serde_json::from_slice(&bytes).with_context(|| format!("parsing config {}", path.display()))?;
        let Value::Object(entries) = value else {
            bail!("config {} must hold a JSON object", path.display());
        };
        let entries = entries
            .into_iter()
            .map(|(k, v)| (k.replace('-', "_"), v))
            .collect();
        Ok(Self {
            path: Some(path.to_path_buf()),
            bytes,
            entries,
        })
    }

    pub fn merge_global(&self, flags: &GlobalArgs) -> anyhow::Result<Global> {
        let base: Map<String, Value> = self
            .entries
            .iter()
            .filter(|(k, _)| GLOBAL_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        overlay(base, flags)
    }

    /// File entries (other than the global ones) overridden by set flags.
    pub fn merge<A: Serialize, C: DeserializeOwned>(&self, flags: &A) -> anyhow::Result<C> {
        let base: Map<String, Value> = self
            .entries
            .iter()
            .filter(|(k, _)| !GLOBAL_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        overlay(base, flags)
    }
}

fn overlay<A: Serialize, C: DeserializeOwned>(mut base: Map<String, Value>, flags: &A) -> anyhow::Result<C> {
    if let Value::Object(set) = serde_json::to_value(flags)? {
        base.extend(set);
    }
    serde_json::from_value(Value::Object(base)).context("invalid configuration")
}
