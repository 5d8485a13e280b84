//! Atomic file output and the provenance sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

/// Fails unless `dir` is an existing directory.
pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    match std::fs::metadata(dir) {
        Ok(m) if m.is_dir() => Ok(()),
        Ok(_) => bail!("output path {} is not a directory", dir.display()),
        Err(e) => bail!("output directory {}: {e}", dir.display()),
    }
}

/// Files staged in memory and written together.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.0.clone()).collect()
    }

    /// Writes every file through a temporary file and a rename. On failure
    /// the files already written by this call are removed.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        ensure_out_dir(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let target = dir.join(name);
            if let Err(e) = write_atomic(&target, contents) {
                for path in &written {
                    let _ = std::fs::remove_file(path);
                }
                return Err(e);
            }
            written.push(target);
        }
        Ok(written)
    }
}

pub fn write_atomic(target: &Path, contents: &[u8]) -> Result<()> {
    let dir = target.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)
        .and_then(|_| tmp.as_file().sync_all())
        .with_context(|| format!("writing {}", target.display()))?;
    tmp.persist(target)
        .with_context(|| format!("renaming into {}", target.display()))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub arguments: Vec<String>,
    pub config: &'a RunConfig,
    pub seeds: Vec<u64>,
    pub files: Vec<String>,
}

impl<'a> Provenance<'a> {
    pub fn new(config: &'a RunConfig, seeds: Vec<u64>, files: Vec<String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            arguments: std::env::args().skip(1).collect(),
            config,
            seeds,
            files,
        }
    }
}
