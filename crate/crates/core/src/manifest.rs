//! Reproducibility manifest written next to every CLI run's output.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::write_atomic;

/// What a run was given and what it produced. Serialized as pretty JSON;
/// identical runs differ only in `wall_seconds`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            parameters: BTreeMap::new(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable parameter"),
        );
        self
    }

    pub fn seed(&mut self, key: &str, value: u64) -> &mut Self {
        self.seeds.insert(key.to_string(), value);
        self
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) -> &mut Self {
        self.inputs.push(path.into());
        self
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) -> &mut Self {
        self.outputs.push(path.into());
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArg(format!("manifest serialization: {e}")))?;
        write_atomic(path, format!("{json}\n").as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_and_sorts_keys() {
        let mut m = RunManifest::new("train");
        m.param("epochs", 10)
            .param("bravo", "x")
            .param("alpha", 1.5)
            .seed("init", 42)
            .input("/tmp/in.csv")
            .output("/tmp/out.nst");
        m.wall_seconds = 1.25;
        let f = tempfile::NamedTempFile::new().unwrap();
        m.write(f.path()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back.subcommand, "train");
        assert_eq!(back.seeds["init"], 42);
        // BTreeMap keys serialize sorted, so reruns are byte-stable.
        let alpha = text.find("\"alpha\"").unwrap();
        let bravo = text.find("\"bravo\"").unwrap();
        assert!(alpha < bravo);
        assert!(text.ends_with('\n'));
    }
}
