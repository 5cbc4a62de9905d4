use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{writing, CliError};

/// Everything needed to rerun a command: the arguments as given, the
/// resolved configuration and the seed. Contains no timestamps so repeated
/// runs produce identical bytes.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub config: Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str, seed: Option<u64>, config: impl Serialize) -> Result<Self, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Internal(e.to_string()))?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            args: std::env::args().skip(1).collect(),
            seed,
            config,
            outputs: Vec::new(),
        })
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<path>.manifest.json`.
    pub fn write_beside(&self, path: &Path) -> Result<PathBuf, CliError> {
        let mut name = path.as_os_str().to_owned();
        name.push(".manifest.json");
        let target = PathBuf::from(name);
        self.write_to(&target)?;
        Ok(target)
    }

    pub fn write_to(&self, target: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(target, text + "\n").map_err(writing(target))
    }
}
