//! CSV serialization of sampled functions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats with 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes columns of equal length under `header`.
pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    assert_eq!(header.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = String::with_capacity(rows * 24 * columns.len() + 64);
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..rows {
        for (j, col) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", fmt_f64(col[i]));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a two-column CSV whose header is `<first>,value`.
pub fn read_two_columns(path: &Path, first: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != first || &headers[1] != "value" {
        return Err(Error::Parse(format!(
            "{}: expected header `{first},value`, found `{}`",
            path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), line + 2)))
        };
        xs.push(parse(&record[0])?);
        vs.push(parse(&record[1])?);
    }
    Ok((xs, vs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_bits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let xs = [0.1, 1.0 / 3.0, 2.5e-300];
        let vs = [std::f64::consts::PI, -0.0, 1e300];
        write_columns(&path, &["x", "value"], &[&xs, &vs]).unwrap();
        let (rx, rv) = read_two_columns(&path, "x").unwrap();
        assert_eq!(rx, xs);
        assert_eq!(rv, vs);
        assert!(read_two_columns(&path, "lambda").is_err());
    }
}
