use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, SCHEMA_VERSION};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Output directory whose files are written through a temporary file and a rename, and
/// listed in the manifest.
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
    inputs: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new(), inputs: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let target = self.root.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root).with_context(|| format!("temporary file in {}", self.root.display()))?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).with_context(|| format!("cannot write {}", target.display()))?;
        self.artifacts.retain(|a| a.path != name);
        self.artifacts.push(Artifact { path: name.to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(Artifact { path: path.display().to_string(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
    }

    /// The manifest holds the resolved config, so `--config manifest.json` repeats the run.
    /// No timestamps or host data: identical runs give identical manifests.
    pub fn finish(mut self, command: &str, config: &RunConfig, summary: serde_json::Value) -> Result<()> {
        let manifest = json!({
            "kind": "manifest",
            "schema_version": SCHEMA_VERSION,
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "core_version": horizonlab::VERSION,
            "command": command,
            "config": config,
            "inputs": self.inputs,
            "outputs": self.artifacts,
            "summary": summary,
        });
        self.write_json("manifest.json", &manifest)
    }
}

/// CSV with a header and `{:.16e}` cells; `None` becomes an empty cell.
pub fn csv(header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(|x| format!("{x:.16e}")).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
