//! Output directory handling, checksums and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use psdyn_core::export::round_json;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to reproduce a run. Contains no paths, thread counts
/// or timings, so identical configurations give identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub results: Value,
    pub outputs: Vec<OutputFile>,
}

impl Manifest {
    pub fn summary(&self) -> String {
        let mut s = format!("{} {}: {} file(s)", self.tool, self.command, self.outputs.len() + 1);
        for f in &self.outputs {
            let _ = write!(s, "\n  {}  {}", &f.sha256[..16], f.name);
        }
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Pretty JSON with floats rounded to 12 significant digits.
pub fn rounded_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn rounded_value<T: Serialize>(value: &T) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    round_json(&mut v);
    Ok(v)
}

pub struct OutputDir {
    dir: PathBuf,
    files: Vec<OutputFile>,
    timings: Vec<(String, Duration)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            timings: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.files.retain(|f| f.name != name);
        self.files.push(OutputFile {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, rounded_json(value)?.as_bytes())
    }

    pub fn record_time(&mut self, stage: &str, d: Duration) {
        self.timings.push((stage.to_string(), d));
    }

    /// Writes `manifest.json` and the `timings.json` sidecar.
    pub fn finish(self, mut manifest: Manifest) -> Result<Manifest, CliError> {
        manifest.outputs = self.files;
        let text = rounded_json(&manifest)?;
        std::fs::write(self.dir.join("manifest.json"), text)?;
        let timings: serde_json::Map<String, Value> = self
            .timings
            .iter()
            .map(|(k, d)| (k.clone(), Value::from(d.as_secs_f64())))
            .collect();
        std::fs::write(
            self.dir.join("timings.json"),
            serde_json::to_string_pretty(&Value::Object(timings)).map_err(|e| CliError::Io(e.to_string()))?,
        )?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn json_is_rounded() {
        let s = rounded_json(&serde_json::json!({"x": 0.1 + 0.2})).unwrap();
        assert!(s.contains("0.3"), "{s}");
        assert!(!s.contains("0.30000000000000004"));
    }
}
