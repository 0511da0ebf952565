use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one run. Everything except `wall_time_s` is a pure function of
/// the configuration.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputFile>,
}

/// Collects output files as a command writes them.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), files: Vec::new(), started: Instant::now() })
    }

    /// Path for `name` inside the output directory, registered for hashing.
    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let p = self.path(name);
        cdiff::io::write_json(&p, value).map_err(CliError::from)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let p = self.path(name);
        std::fs::write(&p, body).map_err(|e| CliError::data(format!("cannot write {}: {e}", p.display())))
    }

    pub fn finish<C: Serialize>(self, command: &str, config: &C) -> Result<PathBuf, CliError> {
        let mut outputs = Vec::with_capacity(self.files.len());
        for name in &self.files {
            let p = self.dir.join(name);
            let body = std::fs::read(&p).map_err(|e| CliError::data(format!("cannot read {}: {e}", p.display())))?;
            outputs.push(OutputFile {
                file: name.clone(),
                bytes: body.len() as u64,
                sha256: hex::encode(Sha256::digest(&body)),
            });
        }
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: serde_json::to_value(config).expect("configuration serializes"),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs,
        };
        let path = self.dir.join("manifest.json");
        cdiff::io::write_json(&path, &manifest)?;
        Ok(path)
    }
}
