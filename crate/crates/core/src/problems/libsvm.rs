//! Strict reader for the libsvm / svmlight sparse text format:
//! `<label> <index>:<value> ...` with 1-based, strictly increasing indices.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_line(line_no: usize, line: &str) -> Result<(f64, Vec<(usize, f64)>)> {
    if line.trim_start().starts_with('#') {
        return Err(parse_err(line_no, "comments are not allowed"));
    }
    let mut tokens = line.split_ascii_whitespace();
    let label_tok = tokens.next().ok_or_else(|| parse_err(line_no, "missing label"))?;
    let label: f64 = label_tok
        .parse()
        .ok()
        .filter(|v: &f64| v.is_finite())
        .ok_or_else(|| parse_err(line_no, format!("malformed label '{label_tok}'")))?;
    let mut entries = Vec::new();
    let mut last = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| parse_err(line_no, format!("malformed token '{tok}'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| parse_err(line_no, format!("malformed index in '{tok}'")))?;
        if idx < 1 {
            return Err(parse_err(line_no, format!("index {idx} is below 1")));
        }
        if idx <= last {
            return Err(parse_err(line_no, format!("non-increasing index at line {line_no}")));
        }
        let val: f64 = val
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(line_no, format!("malformed value in '{tok}'")))?;
        last = idx;
        entries.push((idx, val));
    }
    Ok((label, entries))
}

/// Parses libsvm text into a dense dataset; `d` is the largest index seen.
pub fn parse_libsvm<R: Read>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut dim = 0usize;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| parse_err(line_no, e.to_string()))?;
        let (label, entries) = parse_line(line_no, &line)?;
        if let Some(&(idx, _)) = entries.last() {
            dim = dim.max(idx);
        }
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = dim.max(1);
    let mut features = vec![0.0; rows.len() * dim];
    let mut targets = Vec::with_capacity(rows.len());
    for (r, (label, entries)) in rows.into_iter().enumerate() {
        for (idx, val) in entries {
            features[r * dim + idx - 1] = val;
        }
        targets.push(label);
    }
    Dataset::new(features, dim, targets)
}

pub fn parse_libsvm_str(text: &str) -> Result<Dataset> {
    parse_libsvm(text.as_bytes())
}

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    parse_libsvm(file)
}
