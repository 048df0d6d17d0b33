use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;
use crate::kernel::PointSet;

/// 17 significant digits: round-trips every double.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Points CSV with header `x1..xd` followed by `t1..tk`.
pub(crate) fn read_points(path: &Path, dim_space: usize, dim_time: usize) -> Result<PointSet, CliError> {
    let input = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| input(e.to_string()))?;
    let want: Vec<String> = (1..=dim_space).map(|i| format!("x{i}")).chain((1..=dim_time).map(|i| format!("t{i}"))).collect();
    let header: Vec<String> = rdr.headers().map_err(|e| input(e.to_string()))?.iter().map(str::to_string).collect();
    if header != want {
        return Err(input(format!("header {header:?}, expected {want:?}")));
    }
    let mut coords = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| input(format!("line {line}, column {}: not a number: {field:?}", col + 1)))?;
            coords.push(v);
        }
    }
    if coords.is_empty() {
        return Err(input("no points".into()));
    }
    PointSet::new(dim_space, dim_time, coords).map_err(|e| input(e.to_string()))
}

/// Writes via a temporary file in the target directory and renames it into place.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let fail = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Sidecar `<out>.manifest.json` describing how an output was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    /// SHA-256 of the model config, when the command reads one.
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub output: PathBuf,
    pub output_sha256: String,
    pub started_unix: f64,
    pub finished_unix: f64,
}

pub(crate) fn now_unix() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub(crate) struct Run {
    pub command: &'static str,
    pub started: f64,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl Run {
    pub fn new(command: &'static str, parameters: serde_json::Value) -> Self {
        Self { command, started: now_unix(), config_hash: None, seed: None, parameters, inputs: Vec::new() }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = read_text(path)?;
        self.inputs.push(InputDigest { path: path.to_path_buf(), sha256: sha256_hex(text.as_bytes()) });
        Ok(text)
    }

    pub fn record(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.to_path_buf(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    /// Writes `bytes` to `out` and the manifest next to it.
    pub fn finish(self, out: &Path, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(out, bytes)?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: self.config_hash,
            seed: self.seed,
            parameters: self.parameters,
            inputs: self.inputs,
            output: out.to_path_buf(),
            output_sha256: sha256_hex(bytes),
            started_unix: self.started,
            finished_unix: now_unix(),
        };
        let mut name = out.as_os_str().to_os_string();
        name.push(".manifest.json");
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        write_atomic(Path::new(&name), json.as_bytes())
    }
}
