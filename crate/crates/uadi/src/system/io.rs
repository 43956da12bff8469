//! Plain-text matrix files and system manifests.
//!
//! * coordinate files: header `rows cols nnz`, then `nnz` lines `i j value`
//!   with 1-based indices;
//! * array files: header `rows cols`, then `rows·cols` values in
//!   column-major order;
//! * manifest: `key=value` lines with keys `E`, `A`, `B`, `C`, `D`, `label`;
//!   relative paths resolve against the manifest's directory.
//!
//! Lines starting with `%` or `#` are comments. Values are written in Rust's
//! shortest round-trip float form, so a write/read cycle is bit-exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::StateSpaceSystem;
use crate::error::{Result, UadiError};
use crate::linalg::{Mat, SparseSquareMatrix};

fn data_tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%') && !l.starts_with('#'))
        .flat_map(str::split_whitespace)
}

fn parse_usize(tok: Option<&str>, what: &str, file: &Path) -> Result<usize> {
    let tok = tok.ok_or_else(|| UadiError::ParseError(format!("{}: missing {what}", file.display())))?;
    tok.parse()
        .map_err(|_| UadiError::ParseError(format!("{}: bad {what} `{tok}`", file.display())))
}

fn parse_f64(tok: Option<&str>, file: &Path) -> Result<f64> {
    let tok = tok.ok_or_else(|| UadiError::ParseError(format!("{}: truncated data", file.display())))?;
    tok.parse()
        .map_err(|_| UadiError::ParseError(format!("{}: bad value `{tok}`", file.display())))
}

/// Reads a square coordinate-format matrix.
pub fn read_coordinate(path: &Path) -> Result<SparseSquareMatrix> {
    let text = fs::read_to_string(path)?;
    let mut t = data_tokens(&text);
    let rows = parse_usize(t.next(), "row count", path)?;
    let cols = parse_usize(t.next(), "column count", path)?;
    let nnz = parse_usize(t.next(), "nonzero count", path)?;
    if rows != cols {
        return Err(UadiError::ParseError(format!(
            "{}: pencil matrix must be square, got {rows}x{cols}",
            path.display()
        )));
    }
    let mut trip = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let i = parse_usize(t.next(), "row index", path)?;
        let j = parse_usize(t.next(), "column index", path)?;
        let v = parse_f64(t.next(), path)?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(UadiError::ParseError(format!(
                "{}: index ({i}, {j}) out of range",
                path.display()
            )));
        }
        trip.push((i - 1, j - 1, v));
    }
    if t.next().is_some() {
        return Err(UadiError::ParseError(format!("{}: trailing data", path.display())));
    }
    SparseSquareMatrix::from_triplets(rows, &trip)
}

/// Reads a dense array-format matrix.
pub fn read_array(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path)?;
    let mut t = data_tokens(&text);
    let rows = parse_usize(t.next(), "row count", path)?;
    let cols = parse_usize(t.next(), "column count", path)?;
    let mut vals = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        vals.push(parse_f64(t.next(), path)?);
    }
    if t.next().is_some() {
        return Err(UadiError::ParseError(format!("{}: trailing data", path.display())));
    }
    Ok(Mat::from_column_slice(rows, cols, &vals))
}

/// Writes a coordinate-format file (1-based indices).
pub fn write_coordinate(path: &Path, m: &SparseSquareMatrix) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", m.n(), m.n(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    fs::write(path, s)?;
    Ok(())
}

/// Writes an array-format file.
pub fn write_array(path: &Path, m: &Mat) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", m.nrows(), m.ncols());
    for v in m.iter() {
        let _ = writeln!(s, "{v:e}");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Loads a system from a manifest file, or from `manifest.txt` inside a
/// directory.
pub fn load_system(path: impl AsRef<Path>) -> Result<StateSpaceSystem> {
    let path = path.as_ref();
    let manifest = if path.is_dir() {
        path.join("manifest.txt")
    } else {
        path.to_path_buf()
    };
    let base = manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let text = fs::read_to_string(&manifest)?;
    let mut kv = HashMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            UadiError::ParseError(format!("{}:{}: expected key=value", manifest.display(), ln + 1))
        })?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let file = |key: &str| -> Result<PathBuf> {
        let v = kv
            .get(key)
            .ok_or_else(|| UadiError::MissingMatrix(key.to_string()))?;
        let p = Path::new(v);
        Ok(if p.is_absolute() { p.to_path_buf() } else { base.join(p) })
    };
    let e = read_coordinate(&file("E")?)?;
    let a = read_coordinate(&file("A")?)?;
    let b = read_array(&file("B")?)?;
    let c = read_array(&file("C")?)?;
    let d = if kv.contains_key("D") {
        Some(read_array(&file("D")?)?)
    } else {
        None
    };
    let label = kv
        .get("label")
        .cloned()
        .unwrap_or_else(|| manifest.display().to_string());
    StateSpaceSystem::new(e, a, b, c, d, label)
}

/// Writes `E.mtx`, `A.mtx`, `B.txt`, `C.txt`, `D.txt` and `manifest.txt`
/// into `dir` (created if needed). Returns the manifest path.
pub fn save_system(sys: &StateSpaceSystem, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    write_coordinate(&dir.join("E.mtx"), &sys.e)?;
    write_coordinate(&dir.join("A.mtx"), &sys.a)?;
    write_array(&dir.join("B.txt"), &sys.b)?;
    write_array(&dir.join("C.txt"), &sys.c)?;
    write_array(&dir.join("D.txt"), &sys.d)?;
    let manifest = dir.join("manifest.txt");
    fs::write(
        &manifest,
        format!(
            "label={}\nE=E.mtx\nA=A.mtx\nB=B.txt\nC=C.txt\nD=D.txt\n",
            sys.label
        ),
    )?;
    Ok(manifest)
}
