//! CSV and JSON artifacts plus the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A float with 17 significant digits, enough to round-trip.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProducedFile {
    /// Relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub files: Vec<ProducedFile>,
    pub summary: Value,
}

/// Collects the files a command writes.
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<ProducedFile>,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

impl ArtifactWriter {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.files.push(ProducedFile { path: name.to_owned(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Header row, then one row per record; floats in round-trip form.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<()> {
        let mut out = header.join(",");
        out.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        self.write_bytes(name, out.as_bytes())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn into_files(self) -> Vec<ProducedFile> {
        self.files
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    F(f64),
    I(u64),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::F(v) => fmt_float(v),
            Cell::I(v) => v.to_string(),
        }
    }
}

/// Machine-readable error record for stderr.
pub fn error_record(err: &Error) -> Value {
    serde_json::json!({
        "error": {
            "module": err.module(),
            "exit_code": err.exit_code(),
            "message": err.to_string(),
            "detail": format!("{err:?}"),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path()).unwrap();
        w.write_csv("a.csv", &["i", "x"], vec![vec![Cell::I(0), Cell::F(0.5)]]).unwrap();
        let text = fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(text, "i,x\n0,5.0000000000000000e-1\n");
        let files = w.into_files();
        assert_eq!(files[0].sha256, sha256_hex(text.as_bytes()));
    }
}
