//! Experiment settings shared by every subcommand.
//!
//! Flags, an optional TOML file and per-command defaults are overlaid in that
//! order of precedence. Keys a command does not use are rejected.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::UsageError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Channel spec such as `depolarizing:0.3`; repeatable. `battery` expands
    /// to the fixed 20-channel battery.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel: Option<Vec<String>>,
    /// Dimension for specs that do not name one; largest factor for the lemma battery.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Code dimensions `|B|`, `|E|`, `|S|`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_dim: Option<usize>,
    /// Number of decoder targets.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<usize>,
    /// Code file written by `build-qid-code`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<PathBuf>,
    /// Block length.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Error level; for `evaluate-qid-code` an asserted ceiling on the
    /// worst sampled identification error.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Diagonal of the channel input, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    /// Code dimensions for the monotonicity sweep.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    /// Random codes per size in the monotonicity sweep.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
    /// Worker threads; falls back to `QIDLAB_THREADS`, then logical cores.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Output path, `-` for standard output.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Must match the subcommand when given in a config file.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// TOML file with any of the keys above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

/// Keys every command accepts besides its own.
const PLUMBING: [&str; 4] = ["threads", "out", "format", "command"];

fn to_map(s: &Settings) -> Map<String, Value> {
    match serde_json::to_value(s) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("settings serialize to an object"),
    }
}

fn check_keys(source: &str, map: &Map<String, Value>, allowed: &[&str]) -> Result<(), UsageError> {
    let bad: Vec<&str> =
        map.keys().map(String::as_str).filter(|k| !allowed.contains(k) && !PLUMBING.contains(k)).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(UsageError(format!("{source}: not used by this command: {}", bad.join(", "))))
    }
}

pub fn load_file(path: &Path) -> Result<Settings, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

/// Overlays `flags` on the config file on `defaults`, after checking that
/// both explicit layers only use `allowed` keys.
pub fn resolve(command: &str, flags: &Settings, defaults: Settings, allowed: &[&str]) -> Result<Settings, UsageError> {
    let flag_map = to_map(flags);
    check_keys("flags", &flag_map, allowed)?;
    let mut merged = to_map(&defaults);
    if let Some(path) = &flags.config {
        let file = load_file(path)?;
        if let Some(c) = &file.command {
            if c != command {
                return Err(UsageError(format!("{}: written for `{c}`, not `{command}`", path.display())));
            }
        }
        let file_map = to_map(&file);
        check_keys(&path.display().to_string(), &file_map, allowed)?;
        merged.extend(file_map);
    }
    merged.extend(flag_map);
    merged.insert("command".into(), Value::String(command.into()));
    serde_json::from_value(Value::Object(merged)).map_err(|e| UsageError(e.to_string()))
}

impl Settings {
    /// The settings that determine the report, embedded in it verbatim.
    pub fn provenance(&self) -> Settings {
        Settings { threads: None, out: None, config: None, ..self.clone() }
    }

    pub fn require_seed(&self) -> Result<u64, UsageError> {
        self.seed.ok_or_else(|| UsageError("this command is stochastic; --seed is required".into()))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }
}
