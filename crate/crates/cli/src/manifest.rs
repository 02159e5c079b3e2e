use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::commands::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub stage: &'static str,
    pub path: PathBuf,
}

/// Record of one command run. It holds no wall-clock data so that reruns
/// with the same inputs reproduce it byte for byte.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub artifacts: Vec<Artifact>,
}

impl RunManifest {
    pub fn new(command: &'static str, seed: u64, config: Option<&Path>, out_dir: &Path) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config: config.map(Path::to_path_buf),
            inputs: Vec::new(),
            out_dir: out_dir.to_path_buf(),
            artifacts: Vec::new(),
        }
    }

    /// Writes `contents` to `file` inside the output directory and lists it.
    pub fn write(&mut self, stage: &'static str, file: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(file);
        if self.artifacts.iter().any(|a| a.path == path) {
            return Err(CliError::Usage(format!("artifact {} written twice", path.display())));
        }
        opforge_core::jsonl::write_file(&path, contents)?;
        self.artifacts.push(Artifact { stage, path: path.clone() });
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Usage(e.to_string()))?;
        text.push('\n');
        opforge_core::jsonl::write_file(&path, &text)?;
        Ok(path)
    }
}
