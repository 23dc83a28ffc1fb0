use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Gnuplot,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

/// Top level of every config file. `params` holds the experiment's module
/// parameters; omitted keys take the experiment's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig<P> {
    /// Must name the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    pub params: P,
}

impl<P> ExperimentConfig<P> {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Overlays `user` on `base`. A table whose `kind` differs from the base
/// replaces it wholesale, so tagged variants do not inherit foreign keys.
fn overlay(base: &mut toml::Value, user: toml::Value) {
    match (base, user) {
        (toml::Value::Table(b), toml::Value::Table(u)) => {
            let switched = matches!((b.get("kind"), u.get("kind")), (Some(x), Some(y)) if x != y);
            if switched {
                *b = u;
                return;
            }
            for (k, v) in u {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses a config file for `experiment`, filling gaps from `defaults`.
pub fn parse_config<P>(text: &str, experiment: &str, defaults: &P) -> Result<ExperimentConfig<P>, CliError>
where
    P: Serialize + DeserializeOwned,
{
    let mut user: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let mut params = toml::Value::try_from(defaults).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(p) = user.remove("params") {
        if !p.is_table() {
            return Err(CliError::Config("`params` must be a table".into()));
        }
        overlay(&mut params, p);
    }
    user.insert("params".into(), params);
    let cfg: ExperimentConfig<P> =
        toml::Value::Table(user).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    if let Some(name) = &cfg.experiment {
        if name != experiment {
            return Err(CliError::Config(format!("key `experiment`: config is for `{name}`, not `{experiment}`")));
        }
    }
    Ok(cfg)
}

pub fn load_config<P>(path: Option<&Path>, experiment: &str, defaults: &P) -> Result<ExperimentConfig<P>, CliError>
where
    P: Serialize + DeserializeOwned,
{
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse_config(&text, experiment, defaults)
}

/// Canonical TOML of the effective config.
pub fn canonical<P: Serialize>(cfg: &ExperimentConfig<P>) -> Result<String, CliError> {
    toml::to_string(cfg).map_err(|e| CliError::Config(e.to_string()))
}

pub fn config_hash(canonical: &str) -> String {
    format!("{:x}", Sha256::digest(canonical.as_bytes()))
}
