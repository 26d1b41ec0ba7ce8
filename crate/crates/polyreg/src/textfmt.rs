//! Line-oriented text formats: schema sidecars, term sets and extracted
//! polynomials.
//!
//! Blank lines and lines starting with `#` are ignored everywhere.
//!
//! Schema sidecar, one column per line in column order:
//!
//! ```text
//! price = response_numeric
//! sqft = numeric
//! zone = categorical: north, south, west
//! ```
//!
//! Term set:
//!
//! ```text
//! polyreg-terms 1
//! width 4
//! spec 2 2
//! group zone 2 3
//! term 0^1
//! term 0^1 2^1
//! ```
//!
//! `group` lines list the indicator columns of one categorical source; the
//! remaining columns are numeric. Each `term` line is one monomial written
//! as `column^exponent` factors.
//!
//! Polynomials (one block per output unit), each line a coefficient
//! followed by `variable^exponent` factors:
//!
//! ```text
//! polyreg-poly 1
//! vars 2
//! output 0
//! 0.25
//! -1.5 0^2 1^1
//! ```

use std::fmt::Write as _;
use std::path::Path;

use polyreg_core::dataset::DummyGroup;
use polyreg_core::{ColumnKind, ColumnSpec, DummyGroups, Monomial, PolySpec, Schema, SymbolicPoly, TermSet};

use crate::error::{Error, Result};

const TERMS_MAGIC: &str = "polyreg-terms";
const POLY_MAGIC: &str = "polyreg-poly";

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_schema(text: &str, path: &Path) -> Result<Schema> {
    let mut specs = Vec::new();
    for (line, l) in content_lines(text) {
        let (name, rest) = l
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line, "expected `name = kind`"))?;
        let (kind, levels) = match rest.split_once(':') {
            Some((k, lv)) => (k.trim(), Some(lv)),
            None => (rest.trim(), None),
        };
        let kind: ColumnKind = kind
            .parse()
            .map_err(|e: polyreg_core::Error| Error::parse(path, line, e.to_string()))?;
        let levels: Vec<String> = levels
            .map(|lv| {
                lv.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .unwrap_or_default();
        if kind.has_levels() == levels.is_empty() {
            return Err(Error::parse(
                path,
                line,
                if levels.is_empty() {
                    format!("`{}` needs a level list", kind.as_str())
                } else {
                    format!("`{}` takes no levels", kind.as_str())
                },
            ));
        }
        specs.push(ColumnSpec {
            name: name.trim().to_string(),
            kind,
            levels,
        });
    }
    Schema::new(specs).map_err(|e| Error::parse(path, 0, e.to_string()))
}

pub fn format_schema(schema: &Schema) -> String {
    let mut out = String::new();
    for c in schema.columns() {
        if c.kind.has_levels() {
            let _ = writeln!(out, "{} = {}: {}", c.name, c.kind.as_str(), c.levels.join(", "));
        } else {
            let _ = writeln!(out, "{} = {}", c.name, c.kind.as_str());
        }
    }
    out
}

fn factors_text(factors: impl IntoIterator<Item = (usize, u32)>) -> String {
    factors
        .into_iter()
        .map(|(c, e)| format!("{c}^{e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_factor(tok: &str, path: &Path, line: usize) -> Result<(usize, u32)> {
    let (c, e) = tok
        .split_once('^')
        .ok_or_else(|| Error::parse(path, line, format!("expected `column^exponent`, got `{tok}`")))?;
    let c = c
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad column in `{tok}`")))?;
    let e = e
        .parse()
        .map_err(|_| Error::parse(path, line, format!("bad exponent in `{tok}`")))?;
    Ok((c, e))
}

fn expect_header(lines: &mut dyn Iterator<Item = (usize, &str)>, magic: &str, path: &Path) -> Result<()> {
    match lines.next() {
        Some((_, l)) if l == format!("{magic} 1") => Ok(()),
        Some((line, l)) => Err(Error::parse(path, line, format!("expected `{magic} 1`, got `{l}`"))),
        None => Err(Error::parse(path, 1, "empty file")),
    }
}

pub fn format_terms(terms: &TermSet) -> String {
    let mut out = format!("{TERMS_MAGIC} 1\nwidth {}\n", terms.width());
    let spec = terms.spec();
    let _ = writeln!(out, "spec {} {}", spec.degree(), spec.max_interact_degree());
    for g in &terms.groups().groups {
        let cols: Vec<String> = g.columns.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "group {} {}", g.source, cols.join(" "));
    }
    for m in terms.monomials() {
        let _ = writeln!(out, "term {}", factors_text(m.factors().iter().copied()));
    }
    out
}

pub fn parse_terms(text: &str, path: &Path) -> Result<TermSet> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, TERMS_MAGIC, path)?;
    let mut width = None;
    let mut spec = None;
    let mut groups = Vec::new();
    let mut monomials = Vec::new();
    for (line, l) in lines {
        let mut toks = l.split_whitespace();
        let key = toks.next().unwrap_or_default();
        let rest: Vec<&str> = toks.collect();
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(path, line, format!("`{s}` is not a nonnegative integer")))
        };
        match key {
            "width" if rest.len() == 1 => width = Some(num(rest[0])?),
            "spec" if rest.len() == 2 => {
                let s = PolySpec::new(num(rest[0])? as u32, num(rest[1])? as u32)
                    .map_err(|e| Error::parse(path, line, e.to_string()))?;
                spec = Some(s);
            }
            "group" if rest.len() >= 2 => groups.push(DummyGroup {
                source: rest[0].to_string(),
                columns: rest[1..].iter().map(|s| num(s)).collect::<Result<_>>()?,
            }),
            "term" if !rest.is_empty() => {
                let factors = rest
                    .iter()
                    .map(|t| parse_factor(t, path, line))
                    .collect::<Result<Vec<_>>>()?;
                monomials.push(Monomial::new(factors).map_err(|e| Error::parse(path, line, e.to_string()))?);
            }
            _ => return Err(Error::parse(path, line, format!("unrecognized line `{l}`"))),
        }
    }
    let width = width.ok_or_else(|| Error::parse(path, 0, "missing `width` line"))?;
    let spec = spec.ok_or_else(|| Error::parse(path, 0, "missing `spec` line"))?;
    let in_group: std::collections::BTreeSet<usize> = groups.iter().flat_map(|g| g.columns.iter().copied()).collect();
    let groups = DummyGroups {
        numeric_indices: (0..width).filter(|c| !in_group.contains(c)).collect(),
        groups,
    };
    TermSet::from_monomials(monomials, width, groups, spec).map_err(|e| Error::parse(path, 0, e.to_string()))
}

pub fn format_polys(polys: &[SymbolicPoly]) -> String {
    let vars = polys.first().map_or(0, SymbolicPoly::vars);
    let mut out = format!("{POLY_MAGIC} 1\nvars {vars}\n");
    for (k, p) in polys.iter().enumerate() {
        let _ = writeln!(out, "output {k}");
        for (e, c) in p.terms() {
            let factors = e.iter().enumerate().filter(|(_, &x)| x > 0).map(|(v, &x)| (v, x));
            let f = factors_text(factors);
            if f.is_empty() {
                let _ = writeln!(out, "{c:?}");
            } else {
                let _ = writeln!(out, "{c:?} {f}");
            }
        }
    }
    out
}

pub fn parse_polys(text: &str, path: &Path) -> Result<Vec<SymbolicPoly>> {
    let mut lines = content_lines(text);
    expect_header(&mut lines, POLY_MAGIC, path)?;
    let vars: usize = match lines.next() {
        Some((line, l)) => l
            .strip_prefix("vars ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::parse(path, line, "expected `vars <count>`"))?,
        None => return Err(Error::parse(path, 0, "missing `vars` line")),
    };
    let mut blocks: Vec<Vec<(Vec<u32>, f64)>> = Vec::new();
    for (line, l) in lines {
        if let Some(k) = l.strip_prefix("output ") {
            if k.trim().parse::<usize>().ok() != Some(blocks.len()) {
                return Err(Error::parse(path, line, "outputs must be numbered 0, 1, 2, ..."));
            }
            blocks.push(Vec::new());
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| Error::parse(path, line, "term before the first `output` line"))?;
        let mut toks = l.split_whitespace();
        let c: f64 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::parse(path, line, "expected a coefficient"))?;
        let mut e = vec![0u32; vars];
        for t in toks {
            let (v, x) = parse_factor(t, path, line)?;
            if v >= vars {
                return Err(Error::parse(path, line, format!("variable {v} out of range")));
            }
            e[v] += x;
        }
        block.push((e, c));
    }
    blocks
        .into_iter()
        .map(|b| SymbolicPoly::from_terms(vars, b).map_err(|e| Error::parse(path, 0, e.to_string())))
        .collect()
}
