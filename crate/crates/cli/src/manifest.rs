//! Run manifest: the resolved config echo plus provenance for one run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "run_manifest.toml";

/// Written once per run. The data files are fully determined by
/// (config, seed); the wall-clock fields here are the only thing that
/// varies between identical runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    /// Output name → path, e.g. "trace:active_elim" → "trace_active_elim.csv".
    pub outputs: BTreeMap<String, String>,
    /// Resolved config after flag overrides; re-parsing yields an equal
    /// config.
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(config: RunConfig) -> Self {
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_seconds: 0.0,
            outputs: BTreeMap::new(),
            config,
        }
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let text = toml::to_string(self)
            .map_err(|e| CliError::Runtime(format!("manifest serialization: {e}")))?;
        std::fs::write(dir.join(MANIFEST_FILE), text)?;
        Ok(())
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)?;
        toml::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("manifest {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let config =
            RunConfig::from_toml("n = 10\nk = 2\nt = 100\neps = 0.1\nseed = 9\n").unwrap();
        let mut manifest = RunManifest::new(config.clone());
        manifest
            .outputs
            .insert("aggregate".into(), "aggregate.csv".into());
        let dir = tempfile::tempdir().unwrap();
        manifest.write(dir.path()).unwrap();
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back.config, config);
        assert_eq!(back.outputs["aggregate"], "aggregate.csv");
    }
}
