//! Append-only JSON-lines store for run records. Every reported number is
//! traceable to its `(master seed, config)` pair, and re-running a loaded
//! config reproduces the estimates exactly.

use serde::{Deserialize, Serialize};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt record at line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("schema version {found} at line {line}, this build reads {expected}")]
    SchemaMismatch {
        found: u32,
        expected: u32,
        line: usize,
    },
    #[error("no record with id {0}")]
    NotFound(String),
}

/// One persisted run: full config snapshot, estimates, diagnostics, wall
/// clock and code version.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunRecord {
    pub schema_version: u32,
    pub id: String,
    pub kind: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub estimates: serde_json::Value,
    pub diagnostics: serde_json::Value,
    pub wall_clock_secs: f64,
    pub code_version: String,
}

impl RunRecord {
    pub fn new(
        id: impl Into<String>,
        kind: impl Into<String>,
        master_seed: u64,
        config: serde_json::Value,
        estimates: serde_json::Value,
        diagnostics: serde_json::Value,
        wall_clock_secs: f64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id: id.into(),
            kind: kind.into(),
            master_seed,
            config,
            estimates,
            diagnostics,
            wall_clock_secs,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// JSON-lines store; single-writer append, any number of readers.
pub struct JsonlStore {
    path: PathBuf,
}

impl JsonlStore {
    pub fn open(path: impl AsRef<Path>) -> Self {
        Self {
            path: path.as_ref().to_path_buf(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &RunRecord) -> Result<(), StoreError> {
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|source| StoreError::Io {
                path: self.path.clone(),
                source,
            })?;
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(file, "{line}").map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })
    }

    /// All records, in append order; parse errors carry the 1-based line.
    pub fn load_all(&self) -> Result<Vec<RunRecord>, StoreError> {
        let file = std::fs::File::open(&self.path).map_err(|source| StoreError::Io {
            path: self.path.clone(),
            source,
        })?;
        let reader = BufReader::new(file);
        let mut out = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| StoreError::Io {
                path: self.path.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: RunRecord = serde_json::from_str(&line)
                .map_err(|source| StoreError::Parse { line: i + 1, source })?;
            if record.schema_version != SCHEMA_VERSION {
                return Err(StoreError::SchemaMismatch {
                    found: record.schema_version,
                    expected: SCHEMA_VERSION,
                    line: i + 1,
                });
            }
            out.push(record);
        }
        Ok(out)
    }

    /// Latest record with the given id.
    pub fn load(&self, id: &str) -> Result<RunRecord, StoreError> {
        let all = self.load_all()?;
        all.into_iter()
            .rev()
            .find(|r| r.id == id)
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn record(id: &str) -> RunRecord {
        RunRecord::new(
            id,
            "orthant",
            42,
            json!({"n": 2, "draws": 1000}),
            json!({"p_hat": 0.25}),
            json!({}),
            1.25,
        )
    }

    #[test]
    fn roundtrip_and_load_by_id() {
        let dir = tempfile::tempdir().unwrap();
        let store = JsonlStore::open(dir.path().join("runs.jsonl"));
        store.append(&record("a")).unwrap();
        store.append(&record("b")).unwrap();
        let b = store.load("b").unwrap();
        assert_eq!(b, record("b"));
        assert_eq!(store.load_all().unwrap().len(), 2);
        assert!(matches!(store.load("zzz"), Err(StoreError::NotFound(_))));
    }

    #[test]
    fn corrupt_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let store = JsonlStore::open(&path);
        store.append(&record("a")).unwrap();
        std::fs::write(
            &path,
            format!(
                "{}\n{{not json\n",
                serde_json::to_string(&record("a")).unwrap()
            ),
        )
        .unwrap();
        match store.load_all() {
            Err(StoreError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn schema_mismatch_is_explicit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.jsonl");
        let mut bad = record("a");
        bad.schema_version = 99;
        std::fs::write(&path, format!("{}\n", serde_json::to_string(&bad).unwrap())).unwrap();
        let store = JsonlStore::open(&path);
        assert!(matches!(
            store.load_all(),
            Err(StoreError::SchemaMismatch { found: 99, .. })
        ));
    }
}
