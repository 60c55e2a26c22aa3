//! Text formats for point sets and affine sets.
//!
//! ```text
//! q p e modulus-code
//! a-code b-code
//! a-code b-code
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Affine files use the
//! same layout and additionally require `a ≠ 0`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::affgroup::{AffElement, AffSet};
use crate::ff::FieldSpec;
use crate::plane::PlanePointSet;

/// A parse failure with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, t)| (line[..byte].chars().count() + 1, t))
        .collect()
}

fn number(lineno: usize, (col, tok): (usize, &str)) -> Result<u64, ParseError> {
    tok.parse().map_err(|_| {
        err(
            lineno,
            col,
            format!("expected a non-negative integer, found {tok:?}"),
        )
    })
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Parses a header and its coordinate pairs.
pub fn parse_pairs(text: &str) -> Result<(FieldSpec, Vec<(u64, u64)>), ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "missing header line"))?;
    let toks = tokens(header);
    if toks.len() != 4 {
        return Err(err(hline, 1, "header must be \"q p e modulus-code\""));
    }
    let nums = toks
        .iter()
        .map(|&t| number(hline, t))
        .collect::<Result<Vec<_>, _>>()?;
    let (q, p, e, code) = (nums[0], nums[1], nums[2], nums[3]);
    let e32 = u32::try_from(e).map_err(|_| err(hline, toks[2].0, "degree out of range"))?;
    let spec = FieldSpec::from_descriptor(p, e32, code)
        .map_err(|x| err(hline, toks[1].0, x.to_string()))?;
    if spec.q() as u64 != q {
        return Err(err(
            hline,
            toks[0].0,
            format!("q = {q} but p^e = {}", spec.q()),
        ));
    }

    let mut seen = BTreeSet::new();
    let mut pairs = Vec::new();
    for (lineno, line) in lines {
        let toks = tokens(line);
        if toks.len() != 2 {
            let col = toks.get(2).map_or(1, |t| t.0);
            return Err(err(lineno, col, "expected two codes \"a b\""));
        }
        let mut vals = [0u64; 2];
        for (slot, &t) in vals.iter_mut().zip(&toks) {
            let v = number(lineno, t)?;
            if v >= q {
                return Err(err(lineno, t.0, format!("code {v} is not below q = {q}")));
            }
            *slot = v;
        }
        if !seen.insert((vals[0], vals[1])) {
            return Err(err(
                lineno,
                1,
                format!("duplicate entry {} {}", vals[0], vals[1]),
            ));
        }
        pairs.push((vals[0], vals[1]));
    }
    Ok((spec, pairs))
}

pub fn parse_point_set(text: &str) -> Result<PlanePointSet, ParseError> {
    let (spec, pairs) = parse_pairs(text)?;
    PlanePointSet::from_codes(&spec, &pairs).map_err(|e| err(1, 1, e.to_string()))
}

pub fn parse_aff_set(text: &str) -> Result<AffSet, ParseError> {
    let mut lines = content_lines(text).skip(1);
    let (spec, pairs) = parse_pairs(text)?;
    for &(a, _) in &pairs {
        let (lineno, _) = lines.next().expect("one content line per pair");
        if a == 0 {
            return Err(err(lineno, 1, "affine elements need a nonzero first code"));
        }
    }
    AffSet::from_codes(&spec, &pairs).map_err(|e| err(1, 1, e.to_string()))
}

fn header(spec: &FieldSpec) -> String {
    format!("{} {}\n", spec.q(), spec.descriptor())
}

pub fn write_pairs(spec: &FieldSpec, pairs: impl IntoIterator<Item = (u32, u32)>) -> String {
    let mut out = header(spec);
    for (a, b) in pairs {
        writeln!(out, "{a} {b}").expect("writing to a String");
    }
    out
}

pub fn write_point_set(set: &PlanePointSet) -> String {
    write_pairs(set.spec(), set.iter().map(|(a, b)| (a.code(), b.code())))
}

pub fn write_aff_set(set: &AffSet) -> String {
    write_pairs(
        set.spec(),
        set.iter().map(|g: AffElement| (g.a().code(), g.b().code())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_set_round_trip() {
        let text = "4 2 2 3\n0 0\n0 1\n1 0\n1 1\n";
        let set = parse_point_set(text).unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(write_point_set(&set), text);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# square\n4 2 2 3\n\n0 0\n  0 1  \n";
        assert_eq!(parse_point_set(text).unwrap().len(), 2);
    }

    #[test]
    fn diagnostics_carry_positions() {
        let e = parse_point_set("4 2 2 3\n0 0\n0 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));
        let e = parse_point_set("4 2 2 3\n0 x\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_point_set("4 2 2 3\n0 4\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse_point_set("4 2 2 7\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_point_set("9 2 2 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = parse_point_set("4 2 2 3\n1 2 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        assert!(parse_point_set("").is_err());
    }

    #[test]
    fn affine_files() {
        let text = "5 5 1 0\n1 0\n2 0\n3 0\n";
        let a = parse_aff_set(text).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(write_aff_set(&a), text);
        let e = parse_aff_set("5 5 1 0\n1 0\n\n0 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (4, 1));
    }
}
