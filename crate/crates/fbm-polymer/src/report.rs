//! Output plumbing for the command-line tool: CSV (RFC 4180 via the `csv`
//! crate) and JSON lines (one object per line). Files are written atomically
//! — content goes to `<path>.partial` first and is renamed into place — so a
//! crash never leaves a truncated file at the target path. Append mode
//! verifies that the existing file carries the same configuration digest
//! before adding rows.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PolymerError, Result};

/// Serialization format for result rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// RFC 4180 CSV with a header row.
    Csv,
    /// One JSON object per line.
    Json,
}

impl OutputFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Render rows to a string: CSV with a header, or JSON lines.
pub fn render_rows<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<String> {
    render_rows_inner(rows, format, true)
}

fn render_rows_inner<T: Serialize>(
    rows: &[T],
    format: OutputFormat,
    csv_header: bool,
) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(csv_header)
                .from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            let bytes = w.into_inner().map_err(|e| {
                PolymerError::Serialization(format!("csv buffer flush failed: {e}"))
            })?;
            String::from_utf8(bytes)
                .map_err(|e| PolymerError::Serialization(format!("non-utf8 csv output: {e}")))
        }
        OutputFormat::Json => {
            let mut out = String::new();
            for row in rows {
                out.push_str(&serde_json::to_string(row)?);
                out.push('\n');
            }
            Ok(out)
        }
    }
}

/// Digest values found in an existing output file (the `digest` column or
/// field of every row).
fn existing_digests(path: &Path, format: OutputFormat) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| {
        PolymerError::InvalidConfig(format!("cannot read {} for append: {e}", path.display()))
    })?;
    match format {
        OutputFormat::Csv => {
            let mut reader = csv::Reader::from_reader(text.as_bytes());
            let idx = reader
                .headers()?
                .iter()
                .position(|h| h == "digest")
                .ok_or_else(|| {
                    PolymerError::InvalidConfig(format!(
                        "{} has no digest column; refusing to append",
                        path.display()
                    ))
                })?;
            let mut out = Vec::new();
            for record in reader.records() {
                let record = record?;
                out.push(record.get(idx).unwrap_or("").to_string());
            }
            Ok(out)
        }
        OutputFormat::Json => {
            let mut out = Vec::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let value: serde_json::Value = serde_json::from_str(line)?;
                let digest = value.get("digest").and_then(|d| d.as_str()).ok_or_else(|| {
                    PolymerError::InvalidConfig(format!(
                        "{} has a row without a digest field; refusing to append",
                        path.display()
                    ))
                })?;
                out.push(digest.to_string());
            }
            Ok(out)
        }
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

/// Write `content` to `path` atomically (stage to `<path>.partial`, rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let staged = partial_path(path);
    fs::write(&staged, content)?;
    fs::rename(&staged, path)?;
    Ok(())
}

/// Write rows to `path` (or stdout when `None`). Rows must serialize a
/// `digest` field; in append mode the existing file's digests must all equal
/// `digest`, new rows are added below them, and the whole file is rewritten
/// atomically.
pub fn write_rows<T: Serialize>(
    rows: &[T],
    format: OutputFormat,
    out: Option<&Path>,
    append: bool,
    digest: &str,
) -> Result<()> {
    let Some(path) = out else {
        print!("{}", render_rows(rows, format)?);
        return Ok(());
    };
    if append && path.exists() {
        let seen = existing_digests(path, format)?;
        if let Some(bad) = seen.iter().find(|d| d.as_str() != digest) {
            return Err(PolymerError::InvalidConfig(format!(
                "{} was produced with configuration digest {bad}, current run has {digest}; \
                 refusing to mix incompatible results",
                path.display()
            )));
        }
        let old = fs::read_to_string(path)?;
        let fresh = render_rows_inner(rows, format, false)?;
        let mut combined = old;
        if !combined.ends_with('\n') && !combined.is_empty() {
            combined.push('\n');
        }
        combined.push_str(&fresh);
        write_atomic(path, &combined)
    } else {
        write_atomic(path, &render_rows(rows, format)?)
    }
}

/// Reduced numeric columns for plotting. CSV output always includes the
/// header row, so an empty result still produces a well-formed file.
pub fn write_plot_data(
    path: &Path,
    format: OutputFormat,
    headers: &[&str],
    rows: &[Vec<f64>],
) -> Result<()> {
    if rows.iter().any(|r| r.len() != headers.len()) {
        return Err(PolymerError::Serialization(
            "plot rows must match the header width".into(),
        ));
    }
    let content = match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(headers)?;
            for row in rows {
                w.write_record(row.iter().map(|v| ryu_format(*v)))?;
            }
            let bytes = w.into_inner().map_err(|e| {
                PolymerError::Serialization(format!("csv buffer flush failed: {e}"))
            })?;
            String::from_utf8(bytes)
                .map_err(|e| PolymerError::Serialization(format!("non-utf8 csv output: {e}")))?
        }
        OutputFormat::Json => {
            let mut out = String::new();
            for row in rows {
                let obj: serde_json::Map<String, serde_json::Value> = headers
                    .iter()
                    .zip(row)
                    .map(|(h, v)| ((*h).to_string(), serde_json::json!(v)))
                    .collect();
                out.push_str(&serde_json::to_string(&serde_json::Value::Object(obj))?);
                out.push('\n');
            }
            out
        }
    };
    write_atomic(path, &content)
}

/// Shortest round-trip decimal rendering of an f64, matching what the row
/// serializers emit (non-finite values become "null").
fn ryu_format(v: f64) -> String {
    serde_json::to_string(&v).expect("f64 serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;
    use tempfile::tempdir;

    #[derive(Serialize)]
    struct Row {
        t: f64,
        value: f64,
        note: String,
        digest: String,
    }

    fn rows(digest: &str) -> Vec<Row> {
        vec![
            Row {
                t: 1.0,
                value: 0.5,
                note: "plain".into(),
                digest: digest.into(),
            },
            Row {
                t: 2.0,
                value: -1.25,
                note: "quote,me".into(),
                digest: digest.into(),
            },
        ]
    }

    #[test]
    fn csv_has_header_and_quotes_commas() {
        let text = render_rows(&rows("abc"), OutputFormat::Csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,value,note,digest");
        assert!(text.contains("\"quote,me\""), "{text}");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn json_is_one_object_per_line() {
        let text = render_rows(&rows("abc"), OutputFormat::Json).unwrap();
        assert_eq!(text.lines().count(), 2);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["digest"], "abc");
        }
    }

    #[test]
    fn write_is_atomic_and_leaves_no_partial() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_rows(&rows("abc"), OutputFormat::Csv, Some(&path), false, "abc").unwrap();
        assert!(path.exists());
        assert!(!partial_path(&path).exists());
    }

    #[test]
    fn append_checks_digest_compatibility() {
        let dir = tempdir().unwrap();
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let path = dir.path().join(format!("out.{}", format.as_str()));
            write_rows(&rows("abc"), format, Some(&path), false, "abc").unwrap();
            write_rows(&rows("abc"), format, Some(&path), true, "abc").unwrap();
            let text = fs::read_to_string(&path).unwrap();
            let expected = match format {
                OutputFormat::Csv => 5, // header + 4 rows
                OutputFormat::Json => 4,
            };
            assert_eq!(text.lines().count(), expected, "{text}");
            let err = write_rows(&rows("zzz"), format, Some(&path), true, "zzz");
            assert!(err.is_err(), "digest mismatch must refuse to append");
        }
    }

    #[test]
    fn append_to_missing_file_writes_fresh() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("new.csv");
        write_rows(&rows("abc"), OutputFormat::Csv, Some(&path), true, "abc").unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn plot_data_empty_is_header_only() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("plot.csv");
        write_plot_data(&path, OutputFormat::Csv, &["t", "value"], &[]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim_end(), "t,value");
        let jpath = dir.path().join("plot.jsonl");
        write_plot_data(&jpath, OutputFormat::Json, &["t", "value"], &[vec![1.0, 2.0]]).unwrap();
        let text = fs::read_to_string(&jpath).unwrap();
        let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
        assert_eq!(v["t"], 1.0);
    }
}
