//! Result files. Every CSV file starts with `# svarsoft <kind> v<N>`; every JSON
//! document carries the same string in its `schema` field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Result, SvarError};

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_tag(kind: &str) -> String {
    format!("svarsoft {kind} v{SCHEMA_VERSION}")
}

/// Owns the output directory; all files of a run are written through it.
#[derive(Debug)]
pub struct OutputWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

/// A CSV file being streamed to disk.
pub struct TableWriter {
    path: PathBuf,
    inner: csv::Writer<BufWriter<File>>,
}

impl TableWriter {
    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| SvarError::io(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> SvarError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SvarError::io(path, io),
        other => SvarError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

impl OutputWriter {
    /// Creates the directory and removes an error record left by an earlier run.
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| SvarError::io(dir, e))?;
        let stale = dir.join(ERROR_FILE);
        if stale.exists() {
            std::fs::remove_file(&stale).map_err(|e| SvarError::io(&stale, e))?;
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn table(&mut self, name: &str, kind: &str, columns: &[&str]) -> Result<TableWriter> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| SvarError::io(&path, e))?;
        let mut buf = BufWriter::new(file);
        writeln!(buf, "# {}", schema_tag(kind)).map_err(|e| SvarError::io(&path, e))?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(buf);
        inner.write_record(columns).map_err(|e| csv_error(&path, e))?;
        self.written.push(path.clone());
        Ok(TableWriter { path, inner })
    }

    /// Writes `value` with `schema` inserted as the first field.
    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, value: &T) -> Result<()> {
        let path = self.dir.join(name);
        let body = serde_json::to_value(value).expect("output types serialise");
        let mut doc = serde_json::Map::new();
        doc.insert("schema".into(), Value::String(schema_tag(kind)));
        match body {
            Value::Object(map) => doc.extend(map),
            other => {
                doc.insert("value".into(), other);
            }
        }
        let text = serde_json::to_string_pretty(&Value::Object(doc)).expect("json values serialise");
        std::fs::write(&path, text + "\n").map_err(|e| SvarError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn text(&mut self, name: &str, kind: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, format!("# {}\n{body}", schema_tag(kind))).map_err(|e| SvarError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

pub const ERROR_FILE: &str = "error.json";

/// Machine-readable error record; returns the path written.
pub fn write_error_record(dir: &Path, error: &SvarError, exit_code: i32) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(ERROR_FILE);
    std::fs::write(&path, error_json(error, exit_code) + "\n")?;
    Ok(path)
}

pub fn error_json(error: &SvarError, exit_code: i32) -> String {
    let doc = json!({
        "schema": schema_tag("error"),
        "kind": error.kind(),
        "message": error.to_string(),
        "exit_code": exit_code,
    });
    serde_json::to_string_pretty(&doc).expect("json values serialise")
}

/// Shortest decimal form that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
