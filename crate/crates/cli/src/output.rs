use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

/// Writes files into one output directory through a temp file and rename.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Config(format!("key `out`: cannot create {}: {e}", root.display())))?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write_with<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let mut tmp = NamedTempFile::new_in(&self.root)?;
        fill(tmp.as_file_mut())?;
        tmp.as_file_mut().sync_all()?;
        tmp.persist(self.root.join(name)).map_err(|e| CliError::Io(e.error))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_str(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(qmemlab::Error::from)?;
        self.write_str(name, &(text + "\n"))
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub qmemlab: &'static str,
    pub os: &'static str,
    pub arch: &'static str,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub versions: Versions,
    pub started_unix: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn versions() -> Versions {
        Versions { qmemlab: env!("CARGO_PKG_VERSION"), os: std::env::consts::OS, arch: std::env::consts::ARCH }
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}
