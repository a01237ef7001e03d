//! Plain-text form files.
//!
//! ```text
//! # comment
//! degree 3
//! 1 2 3 1
//! 1 4 5 -1
//! ```
//!
//! One line per nonzero coefficient: the 1-based axes in increasing order,
//! then the value. Polynomial fields append seven exponents after the value
//! (see `poly::PolyFormField`).

use super::{KForm, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) struct RawTerm {
    pub index: MultiIndex,
    pub value: f64,
    pub exponents: Option<[u8; 7]>,
    pub line: usize,
}

pub(crate) fn parse_raw(text: &str) -> Result<(usize, Vec<RawTerm>)> {
    let mut degree: Option<usize> = None;
    let mut terms = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks[0] == "degree" {
            if degree.is_some() {
                return Err(Error::Parse { line, msg: "duplicate degree header".into() });
            }
            let d = toks
                .get(1)
                .and_then(|t| t.parse::<usize>().ok())
                .filter(|&d| d <= 7)
                .ok_or_else(|| Error::Parse { line, msg: "bad degree header".into() })?;
            degree = Some(d);
            continue;
        }
        let k = degree.ok_or_else(|| Error::Parse { line, msg: "coefficient before `degree` header".into() })?;
        if toks.len() != k + 1 && toks.len() != k + 8 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} or {} fields, got {}", k + 1, k + 8, toks.len()),
            });
        }
        let axes = toks[..k]
            .iter()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let index = MultiIndex::new(&axes).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let value: f64 = toks[k].parse().map_err(|_| Error::Parse { line, msg: format!("bad value `{}`", toks[k]) })?;
        if !value.is_finite() {
            return Err(Error::Parse { line, msg: "non-finite value".into() });
        }
        let exponents = if toks.len() == k + 8 {
            let mut e = [0u8; 7];
            for (slot, t) in e.iter_mut().zip(&toks[k + 1..]) {
                *slot = t.parse().map_err(|_| Error::Parse { line, msg: format!("bad exponent `{t}`") })?;
            }
            Some(e)
        } else {
            None
        };
        terms.push(RawTerm { index, value, exponents, line });
    }
    let degree = degree.ok_or_else(|| Error::Parse { line: 0, msg: "missing `degree` header".into() })?;
    Ok((degree, terms))
}

/// Parses a constant-coefficient form. Repeated indices accumulate.
pub fn parse_form<T: Scalar>(text: &str) -> Result<KForm<T>> {
    let (degree, terms) = parse_raw(text)?;
    let mut out = KForm::zero(degree);
    for t in terms {
        if t.exponents.is_some() {
            return Err(Error::Parse { line: t.line, msg: "polynomial term in a constant form file".into() });
        }
        let i = t.index.position();
        out.coeffs[i] = out.coeffs[i] + T::c(t.value);
    }
    Ok(out)
}

pub fn write_form<T: Scalar>(a: &KForm<T>) -> String {
    let mut s = format!("degree {}\n", a.degree());
    for (idx, c) in a.terms() {
        if idx.degree() == 0 {
            s.push_str(&format!("{}\n", c.to_f64_lossy()));
        } else {
            s.push_str(&format!("{} {}\n", idx, c.to_f64_lossy()));
        }
    }
    s
}
