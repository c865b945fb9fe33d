use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use culture_class::evaluate::write_file;
use culture_class::export::to_json;

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub role: &'static str,
    pub path: PathBuf,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub seed: u64,
    pub config: PathBuf,
    pub created_at: Option<String>,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hash_input(role: &'static str, path: &Path) -> Result<InputFile, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(culture_class::Error::at_path(path, e)))?;
    Ok(InputFile {
        role,
        path: path.to_path_buf(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    })
}

/// Tracks every file a run writes under one directory.
pub struct OutputDir {
    pub root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn new(root: PathBuf) -> Self {
        OutputDir {
            root,
            written: Vec::new(),
        }
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<(), CliError> {
        let rel = rel.as_ref();
        write_file(&self.root.join(rel), bytes).map_err(CliError::Pipeline)?;
        self.written.retain(|f| f.path != rel);
        self.written.push(OutputFile {
            path: rel.to_path_buf(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn written(&self) -> &[OutputFile] {
        &self.written
    }

    pub fn finish(mut self, mut manifest: Manifest) -> Result<Vec<OutputFile>, CliError> {
        manifest.outputs = self.written.clone();
        let text = to_json(&manifest).map_err(CliError::Pipeline)?;
        self.write("manifest.json", text.as_bytes())?;
        Ok(self.written)
    }
}
