//! Run manifest: what was run, with which resolved parameters, and what it
//! wrote. Every CSV carries the manifest digest on its first line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use semireg::risk::ExperimentConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};
use toml::Table;

use crate::CliError;

/// The part of a run that determines its outputs. Thread count and log
/// level are deliberately absent.
#[derive(Debug, Serialize)]
struct RunKey<'a> {
    subcommand: &'a str,
    options: &'a Table,
    config: &'a ExperimentConfig,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub digest: String,
    pub outputs: Vec<String>,
    pub options: Table,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(subcommand: &str, options: Table, config: &ExperimentConfig) -> Result<Self, CliError> {
        let key = RunKey {
            subcommand,
            options: &options,
            config,
        };
        let text = toml::to_string(&key).map_err(|e| CliError::Config(format!("cannot serialize run: {e}")))?;
        Ok(Self {
            subcommand: subcommand.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            digest: hex::encode(Sha256::digest(text.as_bytes())),
            outputs: Vec::new(),
            options,
            config: config.clone(),
        })
    }

    /// Writes `name` under `dir` with the digest line followed by `body`.
    pub fn write_csv<F>(&mut self, dir: &Path, name: &str, body: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        writeln!(buf, "# manifest_digest={}", self.digest).expect("write to Vec");
        body(&mut buf).expect("write to Vec");
        let path = dir.join(name);
        fs::write(&path, buf).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn finish(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize manifest: {e}")))?;
        let path = dir.join("manifest.toml");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
