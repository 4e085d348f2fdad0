use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance record written next to every primary output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    /// Arguments after the program name; `replay` parses them again.
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub version: String,
    pub timestamp: String,
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn digest(path: &Path) -> Result<FileDigest, Failure> {
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
    })
}

/// Files a command has created, removed again if the command fails.
#[derive(Debug, Default)]
pub struct Outputs {
    written: Vec<PathBuf>,
    inputs: Vec<FileDigest>,
    seeds: BTreeMap<String, u64>,
}

impl Outputs {
    pub fn write(&mut self, path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
        self.register(path);
        std::fs::write(path, bytes).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))
    }

    /// Records a file written by library code.
    pub fn register(&mut self, path: &Path) {
        if !self.written.iter().any(|p| p == path) {
            self.written.push(path.to_path_buf());
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), Failure> {
        let d = digest(path)?;
        self.inputs.push(d);
        Ok(())
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    pub fn remove_all(&self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
    }

    /// Writes the manifest for `primary`, listing every registered output.
    pub fn finish(
        &mut self,
        primary: &Path,
        command: &str,
        argv: &[String],
        flags: serde_json::Value,
    ) -> Result<PathBuf, Failure> {
        let outputs = self.written.iter().map(|p| digest(p)).collect::<Result<Vec<_>, _>>()?;
        let manifest = Manifest {
            command: command.to_string(),
            argv: argv.to_vec(),
            flags,
            seeds: self.seeds.clone(),
            inputs: self.inputs.clone(),
            outputs,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
        };
        let path = manifest_path(primary);
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        self.write(&path, json + "\n")?;
        Ok(path)
    }
}
