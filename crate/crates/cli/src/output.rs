//! CSV and file writing. Numbers are written with 17 significant digits so
//! that every f64 round-trips; no timestamps, so equal runs give equal bytes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub enum Cell {
    Int(usize),
    Real(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Start a file with the metadata block and the column header.
    pub fn new(cfg: &RunConfig, columns: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# cwlab {}", cwlab_core::VERSION);
        let _ = writeln!(text, "# command: {}", cfg.command_line());
        let mut csv = Csv { text };
        csv.text.push_str(&columns.join(","));
        csv.text.push('\n');
        csv
    }

    /// Extra `# key: value` line. Must be called before any row.
    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let header_start = self.text.rfind("\n# ").map(|i| i + 1).unwrap_or(0);
        let insert_at = self.text[header_start..].find('\n').map(|i| header_start + i + 1).unwrap_or(self.text.len());
        self.text.insert_str(insert_at, &format!("# {key}: {value}\n"));
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Real(v) => real(v),
            })
            .collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}
