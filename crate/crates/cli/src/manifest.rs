use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Provenance record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Omitted in deterministic mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>, deterministic: bool) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: (!deterministic).then(|| chrono::Utc::now().to_rfc3339()),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.display().to_string());
    }
}

/// `report.json` -> `report.json.manifest.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
