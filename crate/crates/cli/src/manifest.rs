use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

/// Record written next to every command's primary output as
/// `<output>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_output(path: &Path, contents: &[u8]) -> CliResult<OutputDigest> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(OutputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(contents),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn write_manifest(
    output: &Path,
    command: &str,
    args: &[String],
    config: serde_json::Value,
    seed: Option<u64>,
    elapsed: Duration,
    outputs: Vec<OutputDigest>,
) -> CliResult<PathBuf> {
    let manifest = RunManifest {
        command: command.to_string(),
        args: args.to_vec(),
        config,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: elapsed.as_secs_f64(),
        outputs,
    };
    let path = manifest_path(output);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_output(&path, text.as_bytes())?;
    Ok(path)
}
