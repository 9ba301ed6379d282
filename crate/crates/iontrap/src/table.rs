//! Result tables (CSV) and run metadata (JSON), written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::RunError;

/// Named real columns of equal length.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl ResultTable {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: headers.iter().map(|h| (h.to_string(), Vec::new())).collect(),
        }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width for table `{}`", self.name);
        for ((_, col), &v) in self.columns.iter_mut().zip(row) {
            col.push(v);
        }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |(_, c)| c.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_slice())
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// CSV bytes: header row, 17 significant digits, LF line endings.
    pub fn to_csv(&self) -> Result<Vec<u8>, RunError> {
        let n = self.rows();
        if self.columns.iter().any(|(_, c)| c.len() != n) {
            return Err(RunError::numerical("column lengths", format!("table `{}` is ragged", self.name)));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|(h, _)| h.as_str()))
            .map_err(csv_error)?;
        for i in 0..n {
            w.write_record(self.columns.iter().map(|(_, c)| format_float(c[i])))
                .map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| RunError::Io(e.into_error()))
    }
}

fn csv_error(e: csv::Error) -> RunError {
    RunError::Io(std::io::Error::other(e))
}

/// Decimal with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| RunError::Io(e.error))?;
    Ok(())
}

/// Writes every table and `metadata.json` into `out`; returns the paths.
pub fn write_outputs(out: &Path, tables: &[ResultTable], metadata: &Value) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for t in tables {
        let path = out.join(t.file_name());
        write_atomic(&path, &t.to_csv()?)?;
        written.push(path);
    }
    let mut meta = metadata.clone();
    meta["tables"] = tables
        .iter()
        .map(|t| {
            json!({
                "name": t.name,
                "file": t.file_name(),
                "rows": t.rows(),
                "columns": t.columns.iter().map(|(h, _)| h.clone()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut text = serde_json::to_vec_pretty(&meta).map_err(|e| RunError::Io(e.into()))?;
    text.push(b'\n');
    let path = out.join("metadata.json");
    write_atomic(&path, &text)?;
    written.push(path);
    Ok(written)
}
