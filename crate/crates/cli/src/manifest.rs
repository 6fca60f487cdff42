use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Record of one run: enough to repeat it and to find what it produced.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub version: String,
    pub wall_seconds: f64,
    pub outputs: Value,
}

impl RunManifest {
    pub fn new(command: &str, config: Value, wall_seconds: f64, outputs: Value) -> Self {
        RunManifest {
            command: command.to_string(),
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_seconds,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// `runs/ber.csv` -> `runs/ber.manifest.json`.
pub fn beside(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}
