//! Matrix Market I/O.
//!
//! Matrices are written as `coordinate real general` with 1-based indices;
//! dense vectors as `array real general`. The reader also accepts
//! `symmetric` and `skew-symmetric` coordinate files and `integer` values.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{KrylovError, Result};
use crate::sparse::SparseMatrix;

const MATRIX_HEADER: &str = "%%MatrixMarket matrix coordinate real general";
const ARRAY_HEADER: &str = "%%MatrixMarket matrix array real general";

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn bad(msg: impl Into<String>) -> KrylovError {
    KrylovError::MatrixMarket(msg.into())
}

fn data_lines<R: Read>(reader: R) -> Result<(String, Vec<String>)> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))??;
    let mut rest = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        rest.push(t.to_string());
    }
    Ok((header, rest))
}

pub fn read_matrix<R: Read>(reader: R) -> Result<SparseMatrix> {
    let (header, lines) = data_lines(reader)?;
    let h: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_lowercase())
        .collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(bad(format!("unrecognised header: {header}")));
    }
    if h[2] != "coordinate" {
        return Err(bad("only coordinate matrices are supported"));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(bad(format!("unsupported field type {}", h[3])));
    }
    let symmetry = match h[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(bad(format!("unsupported symmetry {other}"))),
    };
    let mut it = lines.iter();
    let size = it.next().ok_or_else(|| bad("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad size line: {size}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(bad(format!("bad size line: {size}")));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    let mut trip = Vec::with_capacity(nnz * 2);
    for k in 0..nnz {
        let line = it
            .next()
            .ok_or_else(|| bad(format!("expected {nnz} entries, found {k}")))?;
        let mut t = line.split_whitespace();
        let mut field = || {
            t.next()
                .ok_or_else(|| bad(format!("short entry line: {line}")))
        };
        let i: usize = field()?
            .parse()
            .map_err(|_| bad(format!("bad row in: {line}")))?;
        let j: usize = field()?
            .parse()
            .map_err(|_| bad(format!("bad column in: {line}")))?;
        let v: f64 = field()?
            .parse()
            .map_err(|_| bad(format!("bad value in: {line}")))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(bad(format!("index out of range: {line}")));
        }
        trip.push((i - 1, j - 1, v));
        if i != j {
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => trip.push((j - 1, i - 1, v)),
                Symmetry::Skew => trip.push((j - 1, i - 1, -v)),
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, &trip)
}

pub fn write_matrix<W: Write>(a: &SparseMatrix, mut out: W) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{MATRIX_HEADER}").unwrap();
    writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz()).unwrap();
    for i in 0..a.n_rows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(s, "{} {} {:e}", i + 1, j + 1, v).unwrap();
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_vector<W: Write>(v: &[f64], mut out: W) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{ARRAY_HEADER}").unwrap();
    writeln!(s, "{} 1", v.len()).unwrap();
    for x in v {
        writeln!(s, "{x:e}").unwrap();
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn read_vector<R: Read>(reader: R) -> Result<Vec<f64>> {
    let (header, lines) = data_lines(reader)?;
    let h = header.to_lowercase();
    if !h.starts_with("%%matrixmarket matrix array") {
        return Err(bad(format!("not an array file: {header}")));
    }
    let mut it = lines.iter();
    let size = it.next().ok_or_else(|| bad("missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad size line: {size}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 2 || dims[1] != 1 {
        return Err(bad("only column vectors are supported"));
    }
    let v = it
        .take(dims[0])
        .map(|l| l.parse::<f64>().map_err(|_| bad(format!("bad value: {l}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != dims[0] {
        return Err(bad(format!(
            "expected {} values, found {}",
            dims[0],
            v.len()
        )));
    }
    Ok(v)
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    read_matrix(std::fs::File::open(path)?)
}

pub fn write_matrix_file(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix(a, std::fs::File::create(path)?)
}
