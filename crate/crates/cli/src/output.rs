//! Tables, atomic file writes and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Format;
use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Text(String::new()), Cell::Float)
    }
}

/// Floats print with 17 significant digits so values round-trip.
fn float_text(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Float(x) => float_text(*x),
                    Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
                    Cell::Text(t) => t.clone(),
                    Cell::Bool(b) => b.to_string(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| {
                        let v = match c {
                            Cell::Int(i) => Value::from(*i),
                            Cell::Float(x) if x.is_finite() => Value::from(*x),
                            Cell::Float(x) => Value::from(float_text(*x)),
                            Cell::Text(t) => Value::from(t.clone()),
                            Cell::Bool(b) => Value::from(*b),
                        };
                        ((*k).to_owned(), v)
                    })
                    .collect::<serde_json::Map<_, _>>();
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("table JSON");
        s.push('\n');
        s
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| CliError::Other(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub unit: String,
    pub seed: u64,
    pub stream: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: Value,
    pub seeds: Vec<SeedEntry>,
    pub outputs: Vec<OutputEntry>,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad manifest: {e}")))
    }

    /// Files whose digest no longer matches the inventory.
    pub fn verify(&self, dir: &Path) -> CliResult<Vec<String>> {
        let mut bad = Vec::new();
        for o in &self.outputs {
            match std::fs::read(dir.join(&o.file)) {
                Ok(b) if sha256_hex(&b) == o.sha256 && b.len() as u64 == o.bytes => {}
                _ => bad.push(o.file.clone()),
            }
        }
        Ok(bad)
    }
}

/// Output directory of one run. Every write refreshes the manifest, so a
/// killed run still leaves a valid manifest listing what finished.
pub struct Run {
    dir: PathBuf,
    format: Format,
    manifest: RunManifest,
    clock: Instant,
}

impl Run {
    pub fn start(dir: &Path, format: Format, command: &str, config: Value) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        let started = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let run = Self {
            dir: dir.to_path_buf(),
            format,
            manifest: RunManifest {
                tool: "dnls".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                status: RunStatus::Running,
                error: None,
                config,
                seeds: Vec::new(),
                outputs: Vec::new(),
                started_unix: started,
                wall_clock_seconds: 0.0,
            },
            clock: Instant::now(),
        };
        run.flush()?;
        Ok(run)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn seed(&mut self, unit: impl Into<String>, seed: u64, stream: u64) {
        self.manifest.seeds.push(SeedEntry {
            unit: unit.into(),
            seed,
            stream,
        });
    }

    fn flush(&self) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest JSON");
        text.push('\n');
        write_atomic(&self.dir.join(MANIFEST_FILE), text.as_bytes())
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        let entry = OutputEntry {
            file: name.to_owned(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        };
        match self.manifest.outputs.iter_mut().find(|o| o.file == name) {
            Some(o) => *o = entry,
            None => self.manifest.outputs.push(entry),
        }
        self.manifest.wall_clock_seconds = self.clock.elapsed().as_secs_f64();
        self.flush()
    }

    /// Write a table as `<stem>.csv` or `<stem>.json` depending on the format.
    pub fn write_table(&mut self, stem: &str, table: &Table) -> CliResult<()> {
        match self.format {
            Format::Csv => self.write_bytes(&format!("{stem}.csv"), table.to_csv().as_bytes()),
            Format::Json => self.write_bytes(&format!("{stem}.json"), table.to_json().as_bytes()),
        }
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("JSON output");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn finish(mut self, outcome: &CliResult<()>) -> CliResult<()> {
        self.manifest.wall_clock_seconds = self.clock.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => self.manifest.status = RunStatus::Complete,
            Err(e) => {
                self.manifest.status = RunStatus::Failed;
                self.manifest.error = Some(e.to_string());
            }
        }
        self.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_round_trip() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::from(0.1 + 0.2), Cell::from(3usize)]);
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let x: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert_eq!(x, 0.1 + 0.2);
        assert_eq!(csv.lines().next().unwrap(), "a,b");
    }

    #[test]
    fn text_cells_are_quoted_when_needed() {
        let mut t = Table::new(&["s"]);
        t.push(vec![Cell::from("x,y")]);
        assert!(t.to_csv().contains("\"x,y\""));
    }

    #[test]
    fn manifest_digests_verify() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::start(dir.path(), Format::Csv, "test", Value::Null).unwrap();
        run.write_bytes("a.txt", b"hello").unwrap();
        run.finish(&Ok(())).unwrap();
        let m = RunManifest::load(dir.path()).unwrap();
        assert_eq!(m.status, RunStatus::Complete);
        assert!(m.verify(dir.path()).unwrap().is_empty());
        std::fs::write(dir.path().join("a.txt"), b"tampered").unwrap();
        assert_eq!(m.verify(dir.path()).unwrap(), vec!["a.txt".to_string()]);
    }
}
