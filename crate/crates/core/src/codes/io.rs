//! `QCODE v1` text format.
//!
//! ```text
//! QCODE v1 n=<n> k=<k> d=<d> m=<m>
//! H
//! <set column indices of row 0, space separated>
//! ...
//! L
//! <X̄_1> ... <X̄_k> <Z̄_1> ... <Z̄_k>
//! ```
//!
//! Columns `0..n` are the X part, `n..2n` the Z part. An unknown distance is
//! written `d=?`; an all-zero row is written `-`. Lines starting with `#`
//! are ignored by the loader and never written by the exporter.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};

/// Files describing a code that is not built in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeFileBundle {
    /// A single `QCODE v1` file.
    Qcode(PathBuf),
    /// Separate row files (one line of column indices per row) plus metadata.
    Split {
        check: PathBuf,
        logical: PathBuf,
        n: usize,
        k: usize,
        d: Option<usize>,
    },
}

fn write_rows(out: &mut String, m: &Gf2Matrix) {
    for r in 0..m.rows() {
        let ones = m.row(r).ones();
        if ones.is_empty() {
            out.push('-');
        } else {
            let parts: Vec<String> = ones.iter().map(usize::to_string).collect();
            out.push_str(&parts.join(" "));
        }
        out.push('\n');
    }
}

pub fn to_qcode_string(code: &StabilizerCode) -> String {
    let mut out = String::new();
    let d = code.d().map_or("?".to_string(), |d| d.to_string());
    writeln!(out, "QCODE v1 n={} k={} d={} m={}", code.n(), code.k(), d, code.m()).unwrap();
    out.push_str("H\n");
    write_rows(&mut out, code.check_matrix());
    out.push_str("L\n");
    write_rows(&mut out, code.logical_matrix());
    out
}

pub fn write_qcode(code: &StabilizerCode, path: &Path) -> Result<()> {
    std::fs::write(path, to_qcode_string(code))?;
    Ok(())
}

fn parse_row(line: &str, line_no: usize, cols: usize) -> Result<BitVec> {
    let mut row = BitVec::zeros(cols);
    if line.trim() == "-" {
        return Ok(row);
    }
    for tok in line.split_whitespace() {
        let c: usize = tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad column index {tok:?}"),
        })?;
        if c >= cols {
            return Err(Error::Parse {
                line: line_no,
                message: format!("column {c} out of range (2n = {cols})"),
            });
        }
        if row.get(c) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("column {c} repeated"),
            });
        }
        row.set(c, true);
    }
    Ok(row)
}

struct Header {
    n: usize,
    k: usize,
    d: Option<usize>,
    m: usize,
}

fn parse_header(line: &str) -> Result<Header> {
    let err = |message: String| Error::Parse { line: 1, message };
    let mut parts = line.split_whitespace();
    if parts.next() != Some("QCODE") || parts.next() != Some("v1") {
        return Err(err("expected header `QCODE v1 ...`".into()));
    }
    let (mut n, mut k, mut d, mut m) = (None, None, None, None);
    for kv in parts {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| err(format!("bad header field {kv:?}")))?;
        let num = || {
            value
                .parse::<usize>()
                .map_err(|_| err(format!("bad value in {kv:?}")))
        };
        match key {
            "n" => n = Some(num()?),
            "k" => k = Some(num()?),
            "m" => m = Some(num()?),
            "d" => d = Some(if value == "?" { None } else { Some(num()?) }),
            _ => return Err(err(format!("unknown header field {key:?}"))),
        }
    }
    match (n, k, d, m) {
        (Some(n), Some(k), Some(d), Some(m)) => Ok(Header { n, k, d, m }),
        _ => Err(err("header needs n, k, d and m".into())),
    }
}

/// Parses `QCODE v1` text and verifies every code invariant.
pub fn parse_qcode(text: &str, name: &str) -> Result<StabilizerCode> {
    let (h, l, header) = parse_qcode_matrices(text)?;
    StabilizerCode::new(name, h, l, header.d)
}

/// Parses the matrices without verifying invariants; used by `code verify`
/// to report every failure rather than the first.
pub fn parse_qcode_unchecked(text: &str) -> Result<(Gf2Matrix, Gf2Matrix, Option<usize>)> {
    let (h, l, header) = parse_qcode_matrices(text)?;
    Ok((h, l, header.d))
}

fn parse_qcode_matrices(text: &str) -> Result<(Gf2Matrix, Gf2Matrix, Header)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim_start().starts_with('#'));
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header = parse_header(first)?;
    let cols = 2 * header.n;
    let mut h = Gf2Matrix::zeros(0, cols);
    let mut l = Gf2Matrix::zeros(0, cols);
    let mut section = None;
    for (no, line) in lines {
        match line.trim() {
            "H" => section = Some('H'),
            "L" => section = Some('L'),
            "" => continue,
            body => match section {
                Some('H') => h.push_row(parse_row(body, no, cols)?),
                Some('L') => l.push_row(parse_row(body, no, cols)?),
                _ => {
                    return Err(Error::Parse {
                        line: no,
                        message: "row before any `H` or `L` section".into(),
                    })
                }
            },
        }
    }
    if h.rows() != header.m {
        return Err(Error::Parse {
            line: 1,
            message: format!("header says m={} but H has {} rows", header.m, h.rows()),
        });
    }
    if l.rows() != 2 * header.k {
        return Err(Error::Parse {
            line: 1,
            message: format!("header says k={} but L has {} rows", header.k, l.rows()),
        });
    }
    Ok((h, l, header))
}

pub fn load_qcode(path: &Path) -> Result<StabilizerCode> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map_or_else(|| "imported".to_string(), |s| s.to_string_lossy().into_owned());
    parse_qcode(&text, &name)
}

fn read_rows(path: &Path, cols: usize) -> Result<Gf2Matrix> {
    let text = std::fs::read_to_string(path)?;
    let mut m = Gf2Matrix::zeros(0, cols);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        m.push_row(parse_row(line, i + 1, cols)?);
    }
    Ok(m)
}

/// Loads a code from a bundle, verifying all invariants. The declared
/// distance is stored as metadata only.
pub fn load_code(bundle: &CodeFileBundle) -> Result<StabilizerCode> {
    match bundle {
        CodeFileBundle::Qcode(path) => load_qcode(path),
        CodeFileBundle::Split {
            check,
            logical,
            n,
            k,
            d,
        } => {
            let h = read_rows(check, 2 * n)?;
            let l = read_rows(logical, 2 * n)?;
            if l.rows() != 2 * k {
                return Err(Error::InvalidCode(format!(
                    "expected {} logical rows, found {}",
                    2 * k,
                    l.rows()
                )));
            }
            let name = check
                .file_stem()
                .map_or_else(|| "imported".to_string(), |s| s.to_string_lossy().into_owned());
            StabilizerCode::new(name, h, l, *d)
        }
    }
}
