use std::path::{Path, PathBuf};
use std::time::Instant;

use gmrf_core::io;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] gmrf_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_numerical() => 4,
            CliError::Core(e) if e.is_io() => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

pub fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required {flag}")))
}

/// Loads a command config from JSON. A file written as a run manifest is
/// accepted too; its `config` member is used after checking `command`.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>, command: &str) -> CliResult<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read(path).map_err(|e| CliError::Core(e.into()))?;
    let value: serde_json::Value = serde_json::from_slice(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("command") && map.contains_key("config") => {
            let found = map.get("command").and_then(|c| c.as_str()).unwrap_or_default();
            if found != command {
                return usage(format!("{} is a manifest for `{found}`, not `{command}`", path.display()));
            }
            map.remove("config").unwrap_or_default()
        }
        other => other,
    };
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Record of one command invocation, written next to its outputs.
#[derive(Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub seeds: Vec<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub version: &'static str,
    pub parallelism: usize,
    pub duration_secs: f64,
}

/// Collects output paths under one directory and finishes with the manifest.
pub struct Run {
    start: Instant,
    dir: PathBuf,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn start(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            start: Instant::now(),
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    /// Path of `name` inside the output directory, recorded as an output.
    pub fn output(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.outputs.push(p.clone());
        p
    }

    pub fn finish<C: Serialize>(mut self, command: &str, config: &C, seeds: Vec<u64>, inputs: Vec<PathBuf>) -> CliResult<()> {
        let path = self.output("manifest.json");
        let manifest = RunManifest {
            command,
            config,
            seeds,
            inputs,
            outputs: self.outputs,
            version: env!("CARGO_PKG_VERSION"),
            parallelism: gmrf_core::par::parallelism(),
            duration_secs: self.start.elapsed().as_secs_f64(),
        };
        io::write_json(&path, &manifest)?;
        Ok(())
    }
}

/// Comma-separated list flag.
pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}
