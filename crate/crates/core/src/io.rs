//! Plain-text instance files and CSV output.
//!
//! All readers accept blank lines and `#` comments and report errors with
//! 1-based line numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bundle::{BaseSpace, Bundle, Section};
use crate::error::{parse_err, usage, Error, Result};
use crate::measure::{Fiber, FiberVector};
use crate::nfunction::{Kind, NFunction};
use crate::operators::{BundleOperator, FiberOperator};

/// Seventeen significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated table with a header row and LF line endings.
#[derive(Debug, Clone)]
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self {
            buf,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.columns, "CSV row width differs from header");
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        fs::write(path, &self.buf)?;
        Ok(())
    }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_floats(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("expected a finite number, got `{tok}`")))
        })
        .collect()
}

fn with_line(line: usize, e: Error) -> Error {
    match e {
        Error::Parse { .. } | Error::Io(_) => e,
        other => parse_err(line, other.to_string()),
    }
}

/// `nfunction tabulated tail_slope=<σ>` followed by `<t> <p>` lines.
pub fn parse_nfunction_file(text: &str) -> Result<NFunction> {
    let mut lines = content_lines(text);
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty N-function file"))?;
    let mut words = header.split_whitespace();
    if words.next() != Some("nfunction") || words.next() != Some("tabulated") {
        return Err(parse_err(hl, "header must read `nfunction tabulated tail_slope=<value>`"));
    }
    let slope = words
        .next()
        .and_then(|w| w.strip_prefix("tail_slope="))
        .ok_or_else(|| parse_err(hl, "header lacks `tail_slope=<value>`"))?;
    let slope: f64 = slope
        .parse()
        .map_err(|_| parse_err(hl, format!("bad tail_slope `{slope}`")))?;
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(parse_err(hl, format!("tail_slope = {slope} must be positive")));
    }
    if words.next().is_some() {
        return Err(parse_err(hl, "unexpected text after tail_slope"));
    }
    let mut knots = Vec::new();
    let mut last_line = hl;
    for (ln, l) in lines {
        let v = parse_floats(ln, l)?;
        if v.len() != 2 {
            return Err(parse_err(ln, format!("expected `<t> <p>`, got {} numbers", v.len())));
        }
        knots.push((v[0], v[1]));
        last_line = ln;
    }
    NFunction::tabulated(&knots, slope).map_err(|e| with_line(last_line, e))
}

pub fn read_nfunction_file(path: &Path) -> Result<NFunction> {
    parse_nfunction_file(&fs::read_to_string(path)?)
}

/// Serializes a tabulated N-function; other kinds have no file form.
pub fn format_nfunction_file(m: &NFunction) -> Result<String> {
    let Kind::Tabulated(d) = m.kind() else {
        return Err(usage(format!("only tabulated N-functions have a file form, got {m}")));
    };
    let mut out = format!("nfunction tabulated tail_slope={}\n", d.tail_slope());
    for (t, p) in d.knots() {
        writeln!(out, "{t} {p}").expect("write to String");
    }
    Ok(out)
}

/// A bundle with its named sections, in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleFile {
    pub bundle: Bundle,
    pub sections: Vec<(String, Section)>,
}

/// `@<ω>` followed by `:`.
fn parse_at(line: usize, s: &str) -> Result<(usize, &str)> {
    let s = s
        .trim()
        .strip_prefix('@')
        .ok_or_else(|| parse_err(line, "expected `@<base index>`"))?;
    let (idx, rest) = s
        .split_once(':')
        .ok_or_else(|| parse_err(line, "expected `:` after the base index"))?;
    let idx = idx
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("bad base index `{}`", idx.trim())))?;
    Ok((idx, rest))
}

pub fn parse_bundle_file(text: &str) -> Result<BundleFile> {
    let mut lines = content_lines(text);
    let (bl, first) = lines.next().ok_or_else(|| parse_err(1, "empty bundle file"))?;
    let base = first
        .strip_prefix("base:")
        .ok_or_else(|| parse_err(bl, "first line must be `base: <weights>`"))?;
    let base = BaseSpace::new(parse_floats(bl, base)?).map_err(|e| with_line(bl, e))?;
    let mut fibers = Vec::new();
    // (name, per-base vectors, line of first appearance)
    let mut sections: Vec<(String, Vec<Option<FiberVector>>, usize)> = Vec::new();
    for (ln, l) in lines {
        if let Some(rest) = l.strip_prefix("fiber") {
            let (id, weights) = rest
                .split_once(':')
                .ok_or_else(|| parse_err(ln, "expected `fiber <id>: <weights>`"))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| parse_err(ln, format!("bad fiber id `{}`", id.trim())))?;
            if id != fibers.len() {
                return Err(parse_err(ln, format!("expected fiber {}, got fiber {id}", fibers.len())));
            }
            if !sections.is_empty() {
                return Err(parse_err(ln, "fiber lines must precede section lines"));
            }
            fibers.push(Fiber::new(parse_floats(ln, weights)?).map_err(|e| with_line(ln, e))?);
        } else if let Some(rest) = l.strip_prefix("section") {
            let (name, rest) = rest
                .trim_start()
                .split_once(char::is_whitespace)
                .ok_or_else(|| parse_err(ln, "expected `section <name> @<index>: <values>`"))?;
            let (omega, values) = parse_at(ln, rest)?;
            if omega >= fibers.len() {
                return Err(parse_err(ln, format!("base index {omega} has no fiber")));
            }
            let values = parse_floats(ln, values)?;
            if values.len() != fibers[omega].atom_count() {
                return Err(parse_err(
                    ln,
                    format!(
                        "section `{name}` at base {omega} has {} values for {} atoms",
                        values.len(),
                        fibers[omega].atom_count()
                    ),
                ));
            }
            let entry = match sections.iter().position(|s| s.0 == name) {
                Some(i) => &mut sections[i],
                None => {
                    sections.push((name.to_string(), vec![None; fibers.len()], ln));
                    sections.last_mut().expect("just pushed")
                }
            };
            if entry.1[omega].is_some() {
                return Err(parse_err(ln, format!("section `{name}` repeats base index {omega}")));
            }
            entry.1[omega] = Some(FiberVector::new(values).map_err(|e| with_line(ln, e))?);
        } else {
            return Err(parse_err(ln, format!("unrecognized line `{l}`")));
        }
    }
    if fibers.len() != base.len() {
        return Err(parse_err(
            bl,
            format!("base has {} atoms but {} fibers follow", base.len(), fibers.len()),
        ));
    }
    let bundle = Bundle::new(base, fibers).map_err(|e| with_line(bl, e))?;
    let sections = sections
        .into_iter()
        .map(|(name, parts, ln)| {
            let parts = parts
                .into_iter()
                .enumerate()
                .map(|(w, p)| p.ok_or_else(|| parse_err(ln, format!("section `{name}` lacks base index {w}"))))
                .collect::<Result<_>>()?;
            Ok((name, Section::new(parts)))
        })
        .collect::<Result<_>>()?;
    Ok(BundleFile { bundle, sections })
}

pub fn read_bundle_file(path: &Path) -> Result<BundleFile> {
    parse_bundle_file(&fs::read_to_string(path)?)
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn format_bundle_file(bundle: &Bundle, sections: &[(String, Section)]) -> String {
    let mut out = format!("base: {}\n", join_floats(bundle.base().weights()));
    for (i, f) in bundle.fibers().iter().enumerate() {
        writeln!(out, "fiber {i}: {}", join_floats(f.weights())).expect("write to String");
    }
    for (name, s) in sections {
        for (w, c) in s.components().iter().enumerate() {
            writeln!(out, "section {name} @{w}: {}", join_floats(c.values())).expect("write to String");
        }
    }
    out
}

/// `operator @<ω>:` blocks of square rows and `fixedpoint @<ω>: <h>` lines,
/// one of each per base atom of `bundle`.
pub fn parse_operator_file(text: &str, bundle: &Bundle) -> Result<BundleOperator> {
    let b = bundle.base_len();
    let mut ops: Vec<Option<FiberOperator>> = vec![None; b];
    let mut fixed: Vec<Option<FiberVector>> = vec![None; b];
    let mut lines = content_lines(text).peekable();
    let mut last = 1;
    while let Some((ln, l)) = lines.next() {
        last = ln;
        if let Some(rest) = l.strip_prefix("operator") {
            let (omega, tail) = parse_at(ln, rest)?;
            if omega >= b {
                return Err(parse_err(ln, format!("base index {omega} has no fiber")));
            }
            if !tail.trim().is_empty() {
                return Err(parse_err(ln, "matrix rows go on the following lines"));
            }
            if ops[omega].is_some() {
                return Err(parse_err(ln, format!("operator for base index {omega} given twice")));
            }
            let n = bundle.fiber(omega).atom_count();
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let (rl, row) = lines
                    .next()
                    .ok_or_else(|| parse_err(ln, format!("operator @{omega} needs {n} rows")))?;
                let row = parse_floats(rl, row)?;
                if row.len() != n {
                    return Err(parse_err(rl, format!("row has {} entries, expected {n}", row.len())));
                }
                rows.push(row);
                last = rl;
            }
            ops[omega] = Some(FiberOperator::from_rows(&rows).map_err(|e| with_line(ln, e))?);
        } else if let Some(rest) = l.strip_prefix("fixedpoint") {
            let (omega, values) = parse_at(ln, rest)?;
            if omega >= b {
                return Err(parse_err(ln, format!("base index {omega} has no fiber")));
            }
            let values = parse_floats(ln, values)?;
            if values.len() != bundle.fiber(omega).atom_count() {
                return Err(parse_err(ln, "fixed point length differs from the fiber size"));
            }
            fixed[omega] = Some(FiberVector::new(values).map_err(|e| with_line(ln, e))?);
        } else {
            return Err(parse_err(ln, format!("unrecognized line `{l}`")));
        }
    }
    let ops = ops
        .into_iter()
        .enumerate()
        .map(|(w, o)| o.ok_or_else(|| parse_err(last, format!("missing `operator @{w}:` block"))))
        .collect::<Result<Vec<_>>>()?;
    let fixed = fixed
        .into_iter()
        .enumerate()
        .map(|(w, h)| h.ok_or_else(|| parse_err(last, format!("missing `fixedpoint @{w}:` line"))))
        .collect::<Result<Vec<_>>>()?;
    BundleOperator::new(ops, Section::new(fixed)).map_err(|e| with_line(last, e))
}

pub fn read_operator_file(path: &Path, bundle: &Bundle) -> Result<BundleOperator> {
    parse_operator_file(&fs::read_to_string(path)?, bundle)
}

pub fn format_operator_file(t: &BundleOperator) -> String {
    let mut out = String::new();
    for (w, op) in t.decompose() {
        writeln!(out, "operator @{w}:").expect("write to String");
        for row in op.rows() {
            writeln!(out, "{}", join_floats(row)).expect("write to String");
        }
        writeln!(out, "fixedpoint @{w}: {}", join_floats(t.fixed_point().component(w).values()))
            .expect("write to String");
    }
    out
}
