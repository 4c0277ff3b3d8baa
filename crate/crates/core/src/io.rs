//! Plain-text fixture formats for matrices and vector families.
//!
//! Matrix file:
//!
//! ```text
//! # optional comments
//! 2 3
//! 1,0 0,0 0.5,-1
//! 0,0 1,0 0,0
//! ```
//!
//! Family file:
//!
//! ```text
//! weights 0.5 0.5 1
//! block 1 0 1
//! block 1 2
//! vectors 3 2
//! 1,0 0,0
//! ...
//! ```
//!
//! `block <measure> <indices..>` lines are optional. Floats are written with
//! Rust's shortest round-trip formatting, so write-then-read is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::frame::VectorFamily;
use crate::spaces::MeasureSpace;
use crate::{CMatrix, C64};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid count `{tok}`")))
}

fn parse_complex(tok: &str, line: usize) -> Result<C64> {
    let (re, im) = tok
        .split_once(',')
        .ok_or_else(|| parse_err(line, format!("expected `re,im`, found `{tok}`")))?;
    Ok(C64::new(parse_f64(re, line)?, parse_f64(im, line)?))
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn write_rows(out: &mut String, m: &CMatrix) {
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
}

fn read_rows<'a, I>(lines: &mut I, rows: usize, cols: usize, header_line: usize) -> Result<CMatrix>
where
    I: Iterator<Item = (usize, &'a str)>,
{
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        let (ln, text) = lines
            .next()
            .ok_or_else(|| parse_err(header_line, format!("expected {rows} rows, found {i}")))?;
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != cols {
            return Err(parse_err(ln, format!("expected {cols} entries, found {}", toks.len())));
        }
        for (j, tok) in toks.iter().enumerate() {
            m[(i, j)] = parse_complex(tok, ln)?;
        }
    }
    Ok(m)
}

pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    write_rows(&mut out, m);
    out
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty matrix file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(ln, "expected `<rows> <cols>`"));
    }
    let (rows, cols) = (parse_usize(dims[0], ln)?, parse_usize(dims[1], ln)?);
    let m = read_rows(&mut lines, rows, cols, ln)?;
    if let Some((extra, _)) = lines.next() {
        return Err(parse_err(extra, "trailing content after matrix"));
    }
    Ok(m)
}

pub fn write_family(psi: &VectorFamily) -> String {
    let sp = psi.space();
    let mut out = String::from("weights");
    for w in sp.weights() {
        let _ = write!(out, " {w}");
    }
    out.push('\n');
    if let Some(part) = sp.partition() {
        for (block, mu) in part.blocks().iter().zip(part.block_measures()) {
            let _ = write!(out, "block {mu}");
            for i in block {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
        }
    }
    let _ = writeln!(out, "vectors {} {}", psi.len(), psi.dim());
    write_rows(&mut out, psi.vectors());
    out
}

pub fn parse_family(text: &str) -> Result<VectorFamily> {
    let mut lines = content_lines(text);
    let mut weights: Option<Vec<f64>> = None;
    let mut blocks = Vec::new();
    let mut measures = Vec::new();
    let mut last_line = 1;
    while let Some((ln, line)) = lines.next() {
        last_line = ln;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("weights") => {
                weights = Some(toks.map(|t| parse_f64(t, ln)).collect::<Result<_>>()?);
            }
            Some("block") => {
                let mu = toks.next().ok_or_else(|| parse_err(ln, "block without measure"))?;
                measures.push(parse_f64(mu, ln)?);
                blocks.push(toks.map(|t| parse_usize(t, ln)).collect::<Result<Vec<_>>>()?);
            }
            Some("vectors") => {
                let dims: Vec<&str> = toks.collect();
                if dims.len() != 2 {
                    return Err(parse_err(ln, "expected `vectors <m> <d>`"));
                }
                let (m, d) = (parse_usize(dims[0], ln)?, parse_usize(dims[1], ln)?);
                let w = weights.take().ok_or_else(|| parse_err(ln, "`weights` must precede `vectors`"))?;
                if w.len() != m {
                    return Err(parse_err(ln, format!("{} weights for {m} vectors", w.len())));
                }
                let vectors = read_rows(&mut lines, m, d, ln)?;
                if let Some((extra, _)) = lines.next() {
                    return Err(parse_err(extra, "trailing content after vectors"));
                }
                let mut space = MeasureSpace::new(w).map_err(|e| parse_err(ln, e.to_string()))?;
                if !blocks.is_empty() {
                    space = space
                        .with_partition_measures(blocks, measures)
                        .map_err(|e| parse_err(ln, e.to_string()))?;
                }
                return VectorFamily::new(space, vectors).map_err(|e| parse_err(ln, e.to_string()));
            }
            Some(other) => return Err(parse_err(ln, format!("unknown directive `{other}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }
    Err(parse_err(last_line, "missing `vectors` section"))
}

pub fn load_matrix(path: &Path) -> Result<CMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn save_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    std::fs::write(path, write_matrix(m))?;
    Ok(())
}

pub fn load_family(path: &Path) -> Result<VectorFamily> {
    parse_family(&std::fs::read_to_string(path)?)
}

pub fn save_family(path: &Path, psi: &VectorFamily) -> Result<()> {
    std::fs::write(path, write_family(psi))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{random_matrix, random_space, rng_for};

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let m = random_matrix(&mut rng_for(1, 0), 3, 4);
        let back = parse_matrix(&write_matrix(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn family_round_trip_with_partition() {
        let sp = MeasureSpace::blocks_of(&[0.3, 1.7], 3).unwrap();
        let psi = VectorFamily::new(sp, random_matrix(&mut rng_for(2, 0), 6, 2)).unwrap();
        let back = parse_family(&write_family(&psi)).unwrap();
        assert_eq!(psi, back);
        let mut rng = rng_for(3, 0);
        let plain = VectorFamily::new(random_space(&mut rng, 5), random_matrix(&mut rng, 5, 3)).unwrap();
        assert_eq!(plain, parse_family(&write_family(&plain)).unwrap());
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse_matrix("# c\n2 2\n1,0 0,0\n1,x 0,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        let err = parse_matrix("2 2\n1,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_family("weights 1 1\nvectors 3 1\n1,0\n1,0\n1,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_family("weights 1 -1\nvectors 2 1\n1,0\n1,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(parse_family("frobnicate\n").is_err());
        assert!(parse_family("weights 1\n").is_err());
    }
}
