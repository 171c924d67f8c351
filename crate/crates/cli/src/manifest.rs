//! Record of one invocation: inputs hash, versions and every file written.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub scenario: String,
    pub config_sha256: String,
    pub seed: u64,
    pub c_over_a0_thz: f64,
    /// Every output except the manifest itself, in write order.
    pub files: Vec<FileRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Manifest {
    pub fn new(scenario: &str, config_text: &str, seed: u64, c_over_a0_thz: f64) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            scenario: scenario.into(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            c_over_a0_thz,
            files: Vec::new(),
        }
    }

    /// Hashes `dir/name` and appends it.
    pub fn record(&mut self, dir: &Path, name: &str) -> Result<()> {
        let path = dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        self.files.push(FileRecord {
            path: name.into(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn csv_files(&self) -> impl Iterator<Item = &FileRecord> {
        self.files.iter().filter(|f| f.path.ends_with(".csv"))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::BadInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Re-hashes every listed file and reports the first mismatch.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let path = dir.join(&f.path);
            let bytes =
                std::fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
            if sha256_hex(&bytes) != f.sha256 {
                return Err(Error::BadInput {
                    path,
                    message: "contents changed since the manifest was written".into(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.csv"), "x\n1\n").unwrap();
        let mut m = Manifest::new("g2", "[scenario]", 7, 673.0);
        m.record(dir.path(), "a.csv").unwrap();
        m.save(dir.path()).unwrap();
        let back = Manifest::load(&dir.path().join(MANIFEST_NAME)).unwrap();
        assert_eq!(back, m);
        back.verify(dir.path()).unwrap();
        std::fs::write(dir.path().join("a.csv"), "x\n2\n").unwrap();
        assert!(back.verify(dir.path()).is_err());
    }
}
