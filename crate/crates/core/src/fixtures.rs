//! Published matrices bundled with the crate, in `+`/`-` figure format.

use crate::codebook::{CodeSet, SymbolMatrix};
use crate::error::{Error, Result};
use crate::field16::FieldElem;

pub const C4X5: &str = include_str!("../fixtures/c4x5.txt");
pub const C8X13_EQ10: &str = include_str!("../fixtures/c8x13_eq10.txt");
pub const C8X13_EQ14: &str = include_str!("../fixtures/c8x13_eq14.txt");
pub const C16X33_EQ10: &str = include_str!("../fixtures/c16x33_eq10.txt");
pub const C16X33_EQ14: &str = include_str!("../fixtures/c16x33_eq14.txt");
/// Two five-column sets that extend H8 to a UD 8×13 set.
pub const V1: &str = include_str!("../fixtures/v1.txt");
pub const V2: &str = include_str!("../fixtures/v2.txt");
pub const B8_CLASSES: &str = include_str!("../fixtures/b8_classes.txt");

pub fn parse(text: &str) -> CodeSet {
    CodeSet::from_figure(text).expect("bundled fixture parses")
}

fn parse_symbol(tok: &str) -> Result<FieldElem> {
    match tok {
        "0" => Ok(FieldElem::ZERO),
        "1" => Ok(FieldElem::ONE),
        t => t
            .strip_prefix('a')
            .and_then(|k| k.parse::<u32>().ok())
            .map(FieldElem::alpha_pow)
            .ok_or_else(|| Error::Parse(format!("bad symbol {t:?}"))),
    }
}

/// `(label, members)` for each listed class, in listing order.
pub fn b8_class_listing() -> Result<Vec<(String, SymbolMatrix)>> {
    let mut out = Vec::new();
    for line in B8_CLASSES.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (label, body) = line.split_once(':').ok_or_else(|| Error::Parse(line.to_string()))?;
        let rows = body
            .split('/')
            .map(|half| half.split_whitespace().map(parse_symbol).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        out.push((label.trim().to_string(), SymbolMatrix::from_rows(&rows)?));
    }
    Ok(out)
}
