use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::commands::{config_err, CliError};

pub const TOOL: &str = "pdcsim";

/// Sidecar describing how an output file was produced. `args` is the fully
/// resolved command line, so replaying it needs neither the original config
/// file nor the environment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, config: serde_json::Value) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args,
            config,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read manifest {}: {e}", path.display())))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| config_err(format!("manifest {}: {e}", path.display())))?;
        if m.tool != TOOL {
            return Err(config_err(format!("manifest was written by `{}`", m.tool)));
        }
        Ok(m)
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Writes `body` to `out` (stdout when `None`) and the manifest beside it.
/// Nothing is written unless the whole body was produced.
pub fn emit(out: Option<&Path>, body: &str, manifest: &RunManifest) -> Result<(), CliError> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            let io = |e: std::io::Error| config_err(format!("cannot write {}: {e}", path.display()));
            let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
            write_atomic(path, body).map_err(io)?;
            write_atomic(&manifest_path(path), &(json + "\n")).map_err(io)
        }
    }
}
