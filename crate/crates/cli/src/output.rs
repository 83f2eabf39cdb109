use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::CliError;

/// Description of one run, written as `manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_ms: f64,
    pub truncated: bool,
    pub outputs: Vec<String>,
}

/// Collects the files of one run and writes the manifest last.
pub(crate) struct RunDir {
    dir: PathBuf,
    start: Instant,
    outputs: Vec<String>,
}

impl RunDir {
    pub(crate) fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            start: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub(crate) fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub(crate) fn write_json<T: Serialize>(
        &mut self,
        name: &str,
        value: &T,
    ) -> Result<(), CliError> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Domain(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub(crate) fn finish<P: Serialize>(
        mut self,
        subcommand: &str,
        params: &P,
        seed: Option<u64>,
        truncated: bool,
    ) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            params: serde_json::to_value(params).map_err(|e| CliError::Domain(e.to_string()))?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_ms: self.start.elapsed().as_secs_f64() * 1e3,
            truncated,
            outputs: self.outputs.clone(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}
