//! Matrix Market coordinate files and plain-text vectors.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::sparse::SpdMatrix;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a real coordinate matrix. `symmetric` files list one triangle;
/// `general` files must already be symmetric.
pub fn parse_matrix_market(text: &str) -> Result<SpdMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if h[3] != "real" && h[3] != "integer" && h[3] != "double" {
        return Err(parse_err(1, format!("unsupported field '{}'", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "symmetric" => true,
        "general" => false,
        s => return Err(parse_err(1, format!("unsupported symmetry '{s}'"))),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if tok.len() != 3 {
                    return Err(parse_err(ln + 1, "size line needs 'rows cols nnz'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| parse_err(ln + 1, e.to_string()));
                let (r, c, nz) = (p(tok[0])?, p(tok[1])?, p(tok[2])?);
                if r != c {
                    return Err(parse_err(ln + 1, "matrix is not square"));
                }
                size = Some((r, c, nz));
                trip.reserve(if symmetric { 2 * nz } else { nz });
            }
            Some((n, _, _)) => {
                if tok.len() < 3 {
                    return Err(parse_err(ln + 1, "entry line needs 'i j value'"));
                }
                let i: usize = tok[0].parse().map_err(|_| parse_err(ln + 1, "bad row index"))?;
                let j: usize = tok[1].parse().map_err(|_| parse_err(ln + 1, "bad column index"))?;
                let v: f64 = tok[2].parse().map_err(|_| parse_err(ln + 1, "bad value"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(ln + 1, format!("index ({i}, {j}) out of range")));
                }
                trip.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    trip.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (n, _, nz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    let listed = if symmetric {
        trip.iter().filter(|t| t.0 >= t.1).count()
    } else {
        trip.len()
    };
    if listed != nz {
        return Err(parse_err(0, format!("header announces {nz} entries, found {listed}")));
    }
    SpdMatrix::from_triplets(n, trip)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SpdMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Lower triangle, `symmetric` kind, round-trip precision.
pub fn format_matrix_market(s: &SpdMatrix) -> String {
    let lower: Vec<(usize, usize, f64)> = s.csr().triplets().filter(|t| t.0 >= t.1).collect();
    let mut out = String::with_capacity(32 * (lower.len() + 2));
    out.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{} {} {}\n", s.n(), s.n(), lower.len()));
    for (i, j, v) in lower {
        out.push_str(&format!("{} {} {:.17e}\n", i + 1, j + 1, v));
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, s: &SpdMatrix) -> Result<()> {
    fs::write(path, format_matrix_market(s))?;
    Ok(())
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'))
        .map(|(k, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|_| parse_err(k + 1, format!("not a number: '{}'", l.trim())))
        })
        .collect()
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn write_vector(path: impl AsRef<Path>, x: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for v in x {
        writeln!(f, "{v:.17e}")?;
    }
    f.flush()?;
    Ok(())
}
