//! Line-based text forms of motion fields and per-block decisions.
//!
//! ```text
//! mvfield <width> <height> <min_block> <d_max>
//! <dx> <dy>                      one line per base block, row-major
//!
//! mixfield <width> <height> <min_block> <d_max>
//! inter <dx> <dy> | intra        one line per base block, row-major
//! ```
//!
//! `max_block` is not stored and must be supplied when parsing.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::frame::GridGeometry;
use crate::mixed::Mode;
use crate::motion::{MotionField, MotionVector};

pub fn write_field(field: &MotionField) -> String {
    let g = field.geom();
    let mut s = format!("mvfield {} {} {} {}\n", g.width(), g.height(), g.min_block(), field.d_max());
    for v in field.vectors() {
        writeln!(s, "{} {}", v.dx, v.dy).unwrap();
    }
    s
}

pub fn write_modes(geom: &GridGeometry, d_max: u32, modes: &[Mode]) -> String {
    let mut s = format!("mixfield {} {} {} {}\n", geom.width(), geom.height(), geom.min_block(), d_max);
    for m in modes {
        match m {
            Mode::Inter(v) => writeln!(s, "inter {} {}", v.dx, v.dy).unwrap(),
            Mode::Intra => s.push_str("intra\n"),
        }
    }
    s
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| perr(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| perr(line, format!("bad {what}")))
}

struct Parsed<'a> {
    geom: GridGeometry,
    d_max: u32,
    body: Vec<(usize, Vec<&'a str>)>,
}

fn parse_common<'a>(text: &'a str, magic: &str, max_block: usize) -> Result<Parsed<'a>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (n, header) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some(magic) {
        return Err(perr(n, format!("expected `{magic}` header")));
    }
    let width = num(toks.next(), n, "width")?;
    let height = num(toks.next(), n, "height")?;
    let min_block = num(toks.next(), n, "min_block")?;
    let d_max = num(toks.next(), n, "d_max")?;
    if toks.next().is_some() {
        return Err(perr(n, "trailing tokens in header"));
    }
    let geom = GridGeometry::new(width, height, min_block, max_block)?;
    let body: Vec<_> = lines.map(|(i, l)| (i, l.split_whitespace().collect())).collect();
    if body.len() != geom.base_blocks() {
        return Err(perr(
            n,
            format!("{} entries for {} base blocks", body.len(), geom.base_blocks()),
        ));
    }
    Ok(Parsed { geom, d_max, body })
}

pub fn parse_field(text: &str, max_block: usize) -> Result<MotionField> {
    let p = parse_common(text, "mvfield", max_block)?;
    let vectors = p
        .body
        .iter()
        .map(|(n, toks)| {
            if toks.len() != 2 {
                return Err(perr(*n, "expected `<dx> <dy>`"));
            }
            Ok(MotionVector::new(num(Some(toks[0]), *n, "dx")?, num(Some(toks[1]), *n, "dy")?))
        })
        .collect::<Result<Vec<_>>>()?;
    MotionField::new(p.geom, p.d_max, vectors)
}

pub fn parse_modes(text: &str, max_block: usize) -> Result<(GridGeometry, u32, Vec<Mode>)> {
    let p = parse_common(text, "mixfield", max_block)?;
    let modes = p
        .body
        .iter()
        .map(|(n, toks)| match toks.as_slice() {
            ["intra"] => Ok(Mode::Intra),
            ["inter", dx, dy] => {
                let v = MotionVector::new(num(Some(dx), *n, "dx")?, num(Some(dy), *n, "dy")?);
                if !v.within(p.d_max) {
                    return Err(perr(*n, format!("vector {v} exceeds d_max {}", p.d_max)));
                }
                Ok(Mode::Inter(v))
            }
            _ => Err(perr(*n, "expected `inter <dx> <dy>` or `intra`")),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((p.geom, p.d_max, modes))
}

/// Which of the two formats a text starts with.
pub fn sniff(text: &str) -> Option<&'static str> {
    match text.split_whitespace().next() {
        Some("mvfield") => Some("mvfield"),
        Some("mixfield") => Some("mixfield"),
        _ => None,
    }
}
