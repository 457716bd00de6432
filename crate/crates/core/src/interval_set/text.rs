//! Canonical text form: `lo..hi, lo..hi, tail(one, 2, even)` or `empty`.
//!
//! Scalars are written exactly (`3/4`, `3/4-1*alpha`). Tail anchors are `one`,
//! `zero`, or `below c` / `above c` for other dyadic points. Parsing
//! normalizes, so printing a parsed canonical string reproduces it.

use std::str::FromStr;

use super::{Anchor, Interval, IntervalSet, Parity, ParityTail, Side};
use crate::error::{Error, Result};
use crate::scalar::{IrrationalTag, Rational, Scalar};

impl IntervalSet {
    /// Parses the canonical text form; `alpha` in endpoints resolves to `tag`.
    pub fn parse(text: &str, tag: Option<IrrationalTag>) -> Result<IntervalSet> {
        let text = text.trim();
        if text == "empty" || text.is_empty() {
            return Ok(IntervalSet::empty());
        }
        let mut intervals = Vec::new();
        let mut tails = Vec::new();
        for item in split_top_level(text)? {
            let item = item.trim();
            if let Some(body) = item.strip_prefix("tail(").and_then(|s| s.strip_suffix(')')) {
                tails.push(parse_tail(body)?);
            } else if let Some((lo, hi)) = item.split_once("..") {
                let iv = Interval::new(Scalar::parse(lo, tag)?, Scalar::parse(hi, tag)?)?;
                intervals.push(iv);
            } else {
                return Err(Error::Parse(format!("unrecognized set item `{item}`")));
            }
        }
        IntervalSet::from_parts(intervals, tails)
    }
}

impl FromStr for IntervalSet {
    type Err = Error;

    /// Parses a set whose endpoints are rational.
    fn from_str(s: &str) -> Result<Self> {
        IntervalSet::parse(s, None)
    }
}

fn split_top_level(text: &str) -> Result<Vec<&str>> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut items = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced `)` in `{text}`")));
                }
            }
            ',' if depth == 0 => {
                items.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced `(` in `{text}`")));
    }
    items.push(&text[start..]);
    Ok(items)
}

fn parse_tail(body: &str) -> Result<ParityTail> {
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    let [anchor, start, parity] = parts.as_slice() else {
        return Err(Error::Parse(format!("tail needs three fields: `{body}`")));
    };
    let anchor = parse_anchor(anchor)?;
    let start: u32 = start
        .parse()
        .map_err(|_| Error::Parse(format!("bad tail start `{start}`")))?;
    let parity = match *parity {
        "even" => Parity::Even,
        "odd" => Parity::Odd,
        other => return Err(Error::Parse(format!("bad parity `{other}`"))),
    };
    ParityTail::new(anchor, start, parity)
}

fn parse_anchor(text: &str) -> Result<Anchor> {
    match text {
        "one" => return Ok(Anchor::at_one()),
        "zero" => return Ok(Anchor::at_zero()),
        _ => {}
    }
    let (side, point) = if let Some(p) = text.strip_prefix("below ") {
        (Side::Below, p)
    } else if let Some(p) = text.strip_prefix("above ") {
        (Side::Above, p)
    } else {
        return Err(Error::Parse(format!("bad tail anchor `{text}`")));
    };
    let point = Rational::from_str(point.trim())
        .map_err(|_| Error::Parse(format!("bad anchor point `{point}`")))?;
    Anchor::new(point, side)
}
