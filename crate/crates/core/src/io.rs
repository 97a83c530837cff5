//! CSV fixtures and atomic file output.
//!
//! The on-disk format is deliberately plain: comma-separated numeric rows,
//! no header row. Writers prepend one comment line starting with `#` that
//! carries the schema tag and payload kind; readers skip `#` lines and blank
//! lines, so files with or without the tag both parse. Floats are written
//! with Rust's shortest round-trip formatting, which makes write→read
//! lossless bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{BatchKind, SampleBatch};

/// Schema tag emitted as the first comment line of every CSV this crate
/// writes, and as the `schema` field of JSON reports.
pub const CSV_SCHEMA: &str = "covgraph-csv/1";

/// Writes `bytes` to `path` atomically: the content lands in a temporary
/// file in the same directory which is then renamed over the target, so a
/// crash never leaves a half-written file at `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let tmp: PathBuf = {
        let mut name = path
            .file_name()
            .ok_or_else(|| Error::InvalidArgument(format!("invalid path {}", path.display())))?
            .to_os_string();
        name.push(format!(".tmp-{}", std::process::id()));
        match dir {
            Some(d) => d.join(name),
            None => PathBuf::from(name),
        }
    };
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(e)
    })
}

fn format_rows(rows: usize, cols: usize, get: impl Fn(usize, usize) -> f64, tag: &str) -> String {
    let mut out = String::with_capacity(rows * cols * 20 + 64);
    out.push_str(&format!("# {CSV_SCHEMA} {tag}\n"));
    for r in 0..rows {
        for c in 0..cols {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", get(r, c)));
        }
        out.push('\n');
    }
    out
}

/// Parses a numeric CSV into row-major rows. `skip_header` drops the first
/// non-comment line unconditionally (for files with a textual header row).
fn parse_rows(path: &Path, skip_header: bool) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut skipped_header = !skip_header;
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !skipped_header {
            skipped_header = true;
            continue;
        }
        let mut row = Vec::new();
        for (colno, field) in trimmed.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                path: name.clone(),
                row: lineno + 1,
                col: colno + 1,
                msg: format!("expected a number, got {:?}", field.trim()),
            })?;
            row.push(v);
        }
        if let Some(w) = width {
            if row.len() != w {
                return Err(Error::Parse {
                    path: name,
                    row: lineno + 1,
                    col: row.len(),
                    msg: format!("ragged row: expected {w} fields, got {}", row.len()),
                });
            }
        } else {
            width = Some(row.len());
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{name}: no data rows found"
        )));
    }
    Ok(rows)
}

/// Reads a dense matrix (row-major CSV rows, `#` comments skipped).
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let rows = parse_rows(path, false)?;
    let (r, c) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Writes a dense matrix as CSV rows, atomically.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let text = format_rows(m.nrows(), m.ncols(), |i, j| m[(i, j)], "matrix");
    atomic_write(path, text.as_bytes())
}

/// Reads a sample batch: each CSV row is one sample vector.
pub fn read_batch_csv(path: &Path, kind: BatchKind, skip_header: bool) -> Result<SampleBatch> {
    let rows = parse_rows(path, skip_header)?;
    let (n, dim) = (rows.len(), rows[0].len());
    // Samples live in columns internally.
    let data = DMatrix::from_fn(dim, n, |i, s| rows[s][i]);
    SampleBatch::new(data, kind)
}

/// Writes a sample batch with samples as rows, atomically.
pub fn write_batch_csv(path: &Path, batch: &SampleBatch) -> Result<()> {
    let d = batch.data();
    let text = format_rows(batch.n(), batch.dim(), |s, i| d[(i, s)], batch.kind().as_str());
    atomic_write(path, text.as_bytes())
}

/// Serializes a JSON-serializable report and writes it atomically, with a
/// trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidArgument(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}
