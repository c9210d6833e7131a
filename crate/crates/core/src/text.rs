//! Line-level parsers for the dense and sparse text formats.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::object::{LabelType, NO_LABEL};

const LABEL_PREFIX: &str = "label:";

/// Splits an optional `label:<int>` prefix off a line. Returns `NO_LABEL` when absent.
pub fn split_label(line: &str) -> Result<(LabelType, &str)> {
    let line = line.trim_end_matches(['\r', '\n']).trim();
    let Some(rest) = line.strip_prefix(LABEL_PREFIX) else {
        return Ok((NO_LABEL, line));
    };
    let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
    let (num, tail) = rest.split_at(end);
    let label: i64 = num
        .parse()
        .map_err(|_| Error::parse(alloc::format!("bad label '{num}'")))?;
    if label < 0 || label > i32::MAX as i64 {
        return Err(Error::parse(alloc::format!("label must be non-negative, got {label}")));
    }
    Ok((label as LabelType, tail.trim_start()))
}

fn tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
}

fn parse_real(tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(alloc::format!("malformed number '{tok}'")))?;
    if !v.is_finite() {
        return Err(Error::parse(alloc::format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

/// Parses values of a dense line without a label prefix.
pub fn parse_dense_values(body: &str) -> Result<Vec<f64>> {
    let vals = tokens(body).map(parse_real).collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::parse("empty vector"));
    }
    Ok(vals)
}

/// `label:3 1.0 2.0` → `(3, [1.0, 2.0])`.
pub fn parse_dense_line(line: &str) -> Result<(LabelType, Vec<f64>)> {
    let (label, body) = split_label(line)?;
    Ok((label, parse_dense_values(body)?))
}

/// Parses `id value id value ...` pairs, returning them sorted by id.
pub fn parse_sparse_values(body: &str) -> Result<Vec<(u32, f64)>> {
    let toks: Vec<&str> = tokens(body).collect();
    if toks.len() % 2 != 0 {
        return Err(Error::parse("odd number of tokens in a sparse vector"));
    }
    let mut pairs = Vec::with_capacity(toks.len() / 2);
    for ch in toks.chunks_exact(2) {
        let id: u32 = ch[0]
            .parse()
            .map_err(|_| Error::parse(alloc::format!("bad element id '{}'", ch[0])))?;
        pairs.push((id, parse_real(ch[1])?));
    }
    pairs.sort_unstable_by_key(|p| p.0);
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateId(w[0].0));
    }
    Ok(pairs)
}

pub fn parse_sparse_line(line: &str) -> Result<(LabelType, Vec<(u32, f64)>)> {
    let (label, body) = split_label(line)?;
    Ok((label, parse_sparse_values(body)?))
}

/// Prefix to prepend when writing a record back to text.
pub fn label_prefix(label: LabelType) -> alloc::string::String {
    if label == NO_LABEL {
        alloc::string::String::new()
    } else {
        let mut s = LABEL_PREFIX.to_string();
        s.push_str(&label.to_string());
        s.push(' ');
        s
    }
}
