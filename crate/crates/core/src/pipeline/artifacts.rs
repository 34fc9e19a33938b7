//! Versioned JSON and JSONL artifact files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::StageError;

/// Written into every artifact record; readers reject other values.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct VersionedRef<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    inner: &'a T,
}

#[derive(Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    inner: T,
}

fn create(path: &Path) -> Result<BufWriter<File>, StageError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| StageError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| StageError::io(path, e))?))
}

fn open(path: &Path) -> Result<BufReader<File>, StageError> {
    if !path.exists() {
        return Err(StageError::MissingArtifact(path.to_path_buf()));
    }
    Ok(BufReader::new(File::open(path).map_err(|e| StageError::io(path, e))?))
}

fn check_version(path: &Path, found: u32) -> Result<(), StageError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(StageError::Schema {
            path: path.to_path_buf(),
            msg: format!("schema_version {found}, expected {SCHEMA_VERSION}"),
        })
    }
}

fn json_error(path: &Path, e: impl std::fmt::Display) -> StageError {
    StageError::Schema {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), StageError> {
    let mut w = create(path)?;
    for item in items {
        let rec = VersionedRef {
            schema_version: SCHEMA_VERSION,
            inner: item,
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| json_error(path, e))?;
        w.write_all(b"\n").map_err(|e| StageError::io(path, e))?;
    }
    w.flush().map_err(|e| StageError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StageError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| StageError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Versioned<T> =
            serde_json::from_str(&line).map_err(|e| json_error(path, format!("line {}: {e}", i + 1)))?;
        check_version(path, rec.schema_version)?;
        out.push(rec.inner);
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, item: &T) -> Result<(), StageError> {
    let mut w = create(path)?;
    let rec = VersionedRef {
        schema_version: SCHEMA_VERSION,
        inner: item,
    };
    serde_json::to_writer_pretty(&mut w, &rec).map_err(|e| json_error(path, e))?;
    w.write_all(b"\n").map_err(|e| StageError::io(path, e))?;
    w.flush().map_err(|e| StageError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, StageError> {
    let rec: Versioned<T> = serde_json::from_reader(open(path)?).map_err(|e| json_error(path, e))?;
    check_version(path, rec.schema_version)?;
    Ok(rec.inner)
}

/// Large objects skip the flatten buffer: the version key is a plain field
/// of the record type itself.
pub fn write_json_plain<T: Serialize>(path: &Path, item: &T) -> Result<(), StageError> {
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, item).map_err(|e| json_error(path, e))?;
    w.write_all(b"\n").map_err(|e| StageError::io(path, e))?;
    w.flush().map_err(|e| StageError::io(path, e))
}

pub fn read_json_plain<T: DeserializeOwned>(path: &Path) -> Result<T, StageError> {
    serde_json::from_reader(open(path)?).map_err(|e| json_error(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), StageError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| StageError::io(path, e))?;
    w.flush().map_err(|e| StageError::io(path, e))
}

/// Artifact locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn tables(&self) -> PathBuf {
        self.root.join("ingest/tables.json")
    }
    pub fn statements(&self) -> PathBuf {
        self.root.join("ingest/statements.jsonl")
    }
    pub fn gold(&self) -> PathBuf {
        self.root.join("ingest/gold.jsonl")
    }
    pub fn candidates(&self) -> PathBuf {
        self.root.join("synthesize/candidates.jsonl")
    }
    pub fn selector(&self) -> PathBuf {
        self.root.join("select/selector.json")
    }
    pub fn selector_trace(&self) -> PathBuf {
        self.root.join("select/trace.json")
    }
    pub fn selected(&self) -> PathBuf {
        self.root.join("select/selected.jsonl")
    }
    pub fn pseudo(&self) -> PathBuf {
        self.root.join("build-pseudo/pseudo.jsonl")
    }
    pub fn pseudo_drops(&self) -> PathBuf {
        self.root.join("build-pseudo/drops.json")
    }
    pub fn augmented(&self) -> PathBuf {
        self.root.join("augment/pseudo_augmented.jsonl")
    }
    pub fn decompositions(&self) -> PathBuf {
        self.root.join("decompose/decompositions.jsonl")
    }
    pub fn evidence(&self) -> PathBuf {
        self.root.join("solve/evidence.jsonl")
    }
    pub fn model_evidence(&self) -> PathBuf {
        self.root.join("train-fusion/fusion_evidence.json")
    }
    pub fn model_baseline(&self) -> PathBuf {
        self.root.join("train-fusion/fusion_baseline.json")
    }
    pub fn fusion_trace(&self) -> PathBuf {
        self.root.join("train-fusion/trace.json")
    }
    pub fn predictions(&self) -> PathBuf {
        self.root.join("verify/predictions.jsonl")
    }
    pub fn metrics(&self) -> PathBuf {
        self.root.join("evaluate/metrics.json")
    }
    pub fn report_json(&self) -> PathBuf {
        self.root.join("report/report.json")
    }
    pub fn report_text(&self) -> PathBuf {
        self.root.join("report/report.txt")
    }
}
