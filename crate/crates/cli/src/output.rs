//! Staged output: files are written to a scratch directory next to the
//! destination and only moved into place once the whole command succeeded.
//! Nothing touches the disk before the first write.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::TempDir;

use crate::error::{CliError, CliResult};

pub struct Staging {
    dest: PathBuf,
    scratch: Option<TempDir>,
    files: Vec<String>,
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::data(format!("{}: {e}", path.display()))
}

impl Staging {
    pub fn new(dest: &Path) -> CliResult<Self> {
        Ok(Staging { dest: dest.to_path_buf(), scratch: None, files: Vec::new() })
    }

    fn scratch(&mut self) -> CliResult<&Path> {
        if self.scratch.is_none() {
            let parent = match self.dest.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            fs::create_dir_all(&parent).map_err(|e| io(&parent, e))?;
            let dir = tempfile::Builder::new()
                .prefix(".isrp-staging-")
                .tempdir_in(&parent)
                .map_err(|e| io(&parent, e))?;
            self.scratch = Some(dir);
        }
        Ok(self.scratch.as_ref().map(TempDir::path).expect("scratch was just created"))
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.scratch()?.join(name);
        let mut f = fs::File::create(&path).map_err(|e| io(&path, e))?;
        f.write_all(bytes).map_err(|e| io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::data(e.to_string()))?;
        s.push('\n');
        self.write_bytes(name, s.as_bytes())
    }

    /// Builds a CSV in memory with LF line endings.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let err = |e: csv::Error| CliError::data(e.to_string());
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::data(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// Moves every staged file into the destination directory.
    pub fn commit(self) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(&self.dest).map_err(|e| io(&self.dest, e))?;
        let mut out = Vec::with_capacity(self.files.len());
        let Some(scratch) = &self.scratch else { return Ok(out) };
        for name in &self.files {
            let from = scratch.path().join(name);
            let to = self.dest.join(name);
            fs::rename(&from, &to).map_err(|e| io(&to, e))?;
            out.push(to);
        }
        Ok(out)
    }
}

pub fn num(v: f64) -> String {
    isrp_core::data::format_number(v)
}

pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
