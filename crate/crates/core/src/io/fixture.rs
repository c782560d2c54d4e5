//! Plain-text label volumes.
//!
//! The first line is `w h d dx dy dz`; the remaining whitespace-separated
//! tokens are the `w*h*d` labels in storage order (x fastest). Spacing is
//! written in shortest round-trip form, so write then read is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::{Dims, LabelVolume, Spacing};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FixtureError {
    #[error("line {line}, column {column}: invalid token {token:?}")]
    BadToken {
        line: usize,
        column: usize,
        token: String,
    },
    #[error("header must have 6 fields (w h d dx dy dz), found {0}")]
    BadHeader(usize),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("expected {expected} labels, found {got}")]
    CountMismatch { expected: usize, got: usize },
}

pub fn read_fixture(path: impl AsRef<Path>) -> Result<LabelVolume> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_fixture(&text)?)
}

pub fn write_fixture(volume: &LabelVolume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_fixture(volume)).map_err(|e| Error::io(path, e))
}

/// One row of `w` labels per line.
pub fn format_fixture(volume: &LabelVolume) -> String {
    let d = volume.dims();
    let s = volume.spacing();
    let mut out = format!("{} {} {} {:?} {:?} {:?}\n", d.w, d.h, d.d, s.dx, s.dy, s.dz);
    for row in volume.labels().chunks(d.w) {
        for (k, l) in row.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{l}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Tokens with 1-based line and column numbers.
fn tokens(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().flat_map(|(ln, line)| {
        let mut out = Vec::new();
        let mut start = None;
        for (col, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(col),
                (true, Some(s)) => {
                    out.push((ln + 1, s + 1, &line[s..col]));
                    start = None;
                }
                _ => {}
            }
        }
        out
    })
}

pub fn parse_fixture(text: &str) -> Result<LabelVolume, FixtureError> {
    let mut toks = tokens(text).peekable();
    let header: Vec<_> = match toks.peek() {
        Some(&(first_line, _, _)) => {
            let mut h = Vec::new();
            while let Some(&(line, _, _)) = toks.peek() {
                if line != first_line {
                    break;
                }
                h.push(toks.next().unwrap());
            }
            h
        }
        None => Vec::new(),
    };
    if header.len() != 6 {
        return Err(FixtureError::BadHeader(header.len()));
    }
    let bad = |&(line, column, tok): &(usize, usize, &str)| FixtureError::BadToken {
        line,
        column,
        token: tok.to_string(),
    };
    let mut size = [0usize; 3];
    for (k, t) in header[..3].iter().enumerate() {
        size[k] = t.2.parse().map_err(|_| bad(t))?;
    }
    let mut sp = [0f64; 3];
    for (k, t) in header[3..].iter().enumerate() {
        sp[k] = t.2.parse().map_err(|_| bad(t))?;
    }
    let dims = Dims::new(size[0], size[1], size[2])
        .map_err(|e| FixtureError::InvalidHeader(e.to_string()))?;
    let spacing =
        Spacing::new(sp[0], sp[1], sp[2]).map_err(|e| FixtureError::InvalidHeader(e.to_string()))?;

    let mut labels = Vec::with_capacity(dims.len());
    for t in toks {
        labels.push(t.2.parse::<u32>().map_err(|_| bad(&t))?);
    }
    if labels.len() != dims.len() {
        return Err(FixtureError::CountMismatch {
            expected: dims.len(),
            got: labels.len(),
        });
    }
    Ok(LabelVolume::new(dims, labels, spacing).expect("length checked"))
}
