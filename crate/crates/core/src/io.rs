//! CSV and binary matrix files, two-column signal files and JSON helpers.
//!
//! Binary layout, all little-endian: the 5 ASCII bytes `CDIF1`, `u64` rows,
//! `u64` cols, then `rows × cols` `f64` values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 5] = b"CDIF1";

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Headerless row-major CSV. Floats use the shortest round-tripping form.
/// A matrix without columns gives an empty file.
pub fn write_matrix_csv(path: &Path, m: MatRef<'_, f64>) -> Result<()> {
    if m.ncols() == 0 {
        return std::fs::write(path, b"").map_err(|e| Error::io(path, e));
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    let mut row = Vec::with_capacity(m.ncols());
    for i in 0..m.nrows() {
        row.clear();
        row.extend((0..m.ncols()).map(|j| m[(i, j)].to_string()));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => parse_error(path, line, format!("{kind:?}")),
    }
}

/// Reads a headerless numeric CSV into rows, reporting 1-based line numbers.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(BufReader::new(file));
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(rec.len());
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, line, format!("column {}: '{field}' is not a number", k + 1)))?;
            if !v.is_finite() {
                return Err(parse_error(path, line, format!("column {}: non-finite value", k + 1)));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let rows = read_csv_rows(path)?;
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Two channels from a two-column CSV.
pub fn read_signal_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = read_csv_rows(path)?;
    if let Some(r) = rows.first() {
        if r.len() != 2 {
            return Err(parse_error(path, 1, format!("expected 2 columns, found {}", r.len())));
        }
    }
    Ok(rows.iter().map(|r| (r[0], r[1])).unzip())
}

pub fn write_signal_csv(path: &Path, s1: &[f64], s2: &[f64]) -> Result<()> {
    let m = Mat::from_fn(s1.len().min(s2.len()), 2, |i, j| if j == 0 { s1[i] } else { s2[i] });
    write_matrix_csv(path, m.as_ref())
}

pub fn write_matrix_bin(path: &Path, m: MatRef<'_, f64>) -> Result<()> {
    let mut w = create(path)?;
    let mut buf = Vec::with_capacity(21 + 8 * m.nrows() * m.ncols());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
    w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_matrix_bin(path: &Path) -> Result<Matrix> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::InvalidData(format!("{}: {msg}", path.display()));
    if bytes.len() < 21 || &bytes[..5] != MAGIC {
        return Err(bad("missing CDIF1 header"));
    }
    let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, cols) = (word(5) as usize, word(13) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(21))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(bad(&format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let at = |i: usize, j: usize| {
        let o = 21 + 8 * (i * cols + j);
        f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
    };
    Ok(Mat::from_fn(rows, cols, at))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidData(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs_diff;

    fn sample() -> Matrix {
        Mat::from_fn(3, 2, |i, j| (i as f64 + 0.1) * if j == 0 { 1.0 } else { -1e-7 })
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        let m = sample();
        write_matrix_csv(&p, m.as_ref()).unwrap();
        let back = read_matrix_csv(&p).unwrap();
        assert_eq!(max_abs_diff(m.as_ref(), back.as_ref()), 0.0);
    }

    #[test]
    fn bin_round_trip_and_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        let m = sample();
        write_matrix_bin(&p, m.as_ref()).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..5], b"CDIF1");
        assert_eq!(bytes.len(), 21 + 6 * 8);
        assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 3);
        // second payload value is row 0, column 1
        assert_eq!(f64::from_le_bytes(bytes[29..37].try_into().unwrap()), m[(0, 1)]);
        let back = read_matrix_bin(&p).unwrap();
        assert_eq!(max_abs_diff(m.as_ref(), back.as_ref()), 0.0);
        std::fs::write(&p, &bytes[..30]).unwrap();
        assert!(read_matrix_bin(&p).is_err());
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        std::fs::write(&p, "1,2\n3,4\n5,oops\n").unwrap();
        match read_signal_csv(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&p, "1,2\n3\n").unwrap();
        assert!(matches!(read_signal_csv(&p), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn signal_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_signal_csv(&p, &[1.0, 2.5], &[-3.0, 4.0]).unwrap();
        assert_eq!(read_signal_csv(&p).unwrap(), (vec![1.0, 2.5], vec![-3.0, 4.0]));
    }
}
