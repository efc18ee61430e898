//! Line-based text format for instances. Rationals are written as integers,
//! fractions "p/q" or finite decimals, and always parse exactly.

use std::fmt;

use num_traits::{One, Signed, Zero};

use super::{BimatrixGame, CostRow, GadgetMetadata, InstanceDocument};
use crate::game::ArithmeticMode;
use crate::{Int, Rational};

const HEADER: &str = "spliteq-instance v1";

/// Parse failure with the 1-based line and column it happened on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        column: 1,
        message: message.into(),
    })
}

fn err_at<T>(
    line: usize,
    raw: &str,
    token: &str,
    message: impl Into<String>,
) -> Result<T, ParseError> {
    let column = raw.find(token).map(|pos| pos + 1).unwrap_or(1);
    Err(ParseError {
        line,
        column,
        message: message.into(),
    })
}

/// Exact rational from "p/q", an integer, or a finite decimal.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: Int = num.trim().parse().ok()?;
        let d: Int = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.trim_start().starts_with('-');
        let w: Int = if whole.is_empty() || whole == "-" {
            Int::zero()
        } else {
            whole.parse().ok()?
        };
        let f: Int = frac.parse().ok()?;
        let scale = Int::from(10u32).pow(frac.len() as u32);
        let frac_part = Rational::new(f, scale);
        let whole_part = Rational::from_integer(w);
        return Some(if negative {
            whole_part - frac_part
        } else {
            whole_part + frac_part
        });
    }
    let n: Int = s.parse().ok()?;
    Some(Rational::from_integer(n))
}

/// Canonical rendering: integers bare, otherwise "p/q".
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Fixed-precision decimal rendering (round half away from zero).
pub fn decimal_string(q: &Rational, decimals: usize) -> String {
    let scale = Int::from(10u32).pow(decimals as u32);
    let scaled = q * Rational::from_integer(scale.clone());
    let num = scaled.numer() * 2 + scaled.denom() * if scaled.is_negative() { -1 } else { 1 };
    let rounded: Int = num / (scaled.denom() * 2);
    let neg = rounded.is_negative();
    let digits = rounded.magnitude().to_string();
    let digits = if digits.len() <= decimals {
        format!("{}{}", "0".repeat(decimals + 1 - digits.len()), digits)
    } else {
        digits
    };
    let split = digits.len() - decimals;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&digits[..split]);
    if decimals > 0 {
        out.push('.');
        out.push_str(&digits[split..]);
    }
    out
}

/// Parse an instance document. Unknown keys are rejected with their line.
pub fn parse(text: &str) -> Result<InstanceDocument, ParseError> {
    let mut doc = InstanceDocument {
        mode: ArithmeticMode::Exact,
        vertex_count: 0,
        vertex_names: Vec::new(),
        edges: Vec::new(),
        commodities: Vec::new(),
        costs: Vec::new(),
        meta: Vec::new(),
        gadget: None,
    };
    let mut saw_header = false;
    let mut gadget_dims: Option<(usize, Rational, Rational)> = None;
    let mut u_rows: Vec<Vec<u8>> = Vec::new();
    let mut v_rows: Vec<Vec<u8>> = Vec::new();
    let mut row_entries: Vec<(usize, usize)> = Vec::new();
    let mut col_entries: Vec<(usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.split_once('#') {
            Some((before, _)) => before.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if !saw_header {
            if line != HEADER {
                return err(lineno, format!("expected header '{HEADER}'"));
            }
            saw_header = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        let want = |n: usize| -> Result<(), ParseError> {
            if rest.len() != n {
                return err(
                    lineno,
                    format!("'{key}' expects {n} fields, got {}", rest.len()),
                );
            }
            Ok(())
        };
        let num = |s: &str| -> Result<usize, ParseError> {
            match s.parse() {
                Ok(v) => Ok(v),
                Err(_) => err_at(lineno, raw, s, format!("invalid integer '{s}'")),
            }
        };
        let rat = |s: &str| -> Result<Rational, ParseError> {
            match parse_rational(s) {
                Some(q) => Ok(q),
                None => err_at(lineno, raw, s, format!("invalid rational '{s}'")),
            }
        };
        match key {
            "mode" => {
                if rest.is_empty() {
                    return err(lineno, "'mode' expects exact|float [tolerance]");
                }
                doc.mode = match rest[0] {
                    "exact" => ArithmeticMode::Exact,
                    "float" => {
                        let tol = if rest.len() > 1 {
                            rest[1].parse().map_err(|_| ParseError {
                                line: lineno,
                                column: 1,
                                message: format!("invalid tolerance '{}'", rest[1]),
                            })?
                        } else {
                            ArithmeticMode::DEFAULT_FLOAT_TOLERANCE
                        };
                        ArithmeticMode::Float { tolerance: tol }
                    }
                    other => return err(lineno, format!("unknown mode '{other}'")),
                };
            }
            "vertices" => {
                want(1)?;
                doc.vertex_count = num(rest[0])?;
            }
            "vertex-name" => {
                want(2)?;
                doc.vertex_names.push((num(rest[0])?, rest[1].to_string()));
            }
            "edge" => {
                want(2)?;
                doc.edges.push((num(rest[0])?, num(rest[1])?));
            }
            "commodity" => {
                want(3)?;
                doc.commodities
                    .push((num(rest[0])?, num(rest[1])?, rat(rest[2])?));
            }
            "cost" => {
                want(4)?;
                doc.costs.push(CostRow {
                    edge: num(rest[0])?,
                    player: num(rest[1])?,
                    slope: rat(rest[2])?,
                    offset: rat(rest[3])?,
                });
            }
            "meta" => {
                if rest.len() < 2 {
                    return err(lineno, "'meta' expects key and value");
                }
                doc.meta.push((rest[0].to_string(), rest[1..].join(" ")));
            }
            "bimatrix" => {
                want(3)?;
                gadget_dims = Some((num(rest[0])?, rat(rest[1])?, rat(rest[2])?));
            }
            "bimatrix-u" | "bimatrix-v" => {
                want(1)?;
                let row: Vec<u8> = rest[0]
                    .bytes()
                    .map(|b| match b {
                        b'0' => Ok(0u8),
                        b'1' => Ok(1u8),
                        _ => err(lineno, "bimatrix rows are 0/1 strings"),
                    })
                    .collect::<Result<_, _>>()?;
                if key == "bimatrix-u" {
                    u_rows.push(row);
                } else {
                    v_rows.push(row);
                }
            }
            "gadget-row-entry" => {
                want(2)?;
                row_entries.push((num(rest[0])?, num(rest[1])?));
            }
            "gadget-col-entry" => {
                want(2)?;
                col_entries.push((num(rest[0])?, num(rest[1])?));
            }
            other => return err_at(lineno, raw, other, format!("unknown key '{other}'"))?,
        }
    }

    if !saw_header {
        return err(1, format!("missing header '{HEADER}'"));
    }
    if let Some((n, beta, delta)) = gadget_dims {
        if u_rows.len() != n || v_rows.len() != n {
            return err(0, "bimatrix payload row count mismatch");
        }
        if u_rows.iter().chain(&v_rows).any(|r| r.len() != n) {
            return err(0, "bimatrix payload column count mismatch");
        }
        let sort_entries = |mut v: Vec<(usize, usize)>| {
            v.sort();
            v.into_iter().map(|(_, e)| e).collect::<Vec<_>>()
        };
        doc.gadget = Some(GadgetMetadata {
            bimatrix: BimatrixGame {
                n,
                beta,
                delta,
                u: u_rows,
                v: v_rows,
            },
            row_entry_edges: sort_entries(row_entries),
            col_entry_edges: sort_entries(col_entries),
        });
    }
    doc.canonicalize();
    Ok(doc)
}

/// Serialize into the canonical text form.
pub fn serialize(doc: &InstanceDocument) -> String {
    let mut doc = doc.clone();
    doc.canonicalize();
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    match doc.mode {
        ArithmeticMode::Exact => out.push_str("mode exact\n"),
        ArithmeticMode::Float { tolerance } => {
            out.push_str(&format!("mode float {tolerance}\n"));
        }
    }
    out.push_str(&format!("vertices {}\n", doc.vertex_count));
    for (v, name) in &doc.vertex_names {
        out.push_str(&format!("vertex-name {v} {name}\n"));
    }
    for (t, h) in &doc.edges {
        out.push_str(&format!("edge {t} {h}\n"));
    }
    for (s, t, r) in &doc.commodities {
        out.push_str(&format!("commodity {s} {t} {}\n", format_rational(r)));
    }
    for row in &doc.costs {
        out.push_str(&format!(
            "cost {} {} {} {}\n",
            row.edge,
            row.player,
            format_rational(&row.slope),
            format_rational(&row.offset)
        ));
    }
    for (k, v) in &doc.meta {
        out.push_str(&format!("meta {k} {v}\n"));
    }
    if let Some(g) = &doc.gadget {
        out.push_str(&format!(
            "bimatrix {} {} {}\n",
            g.bimatrix.n,
            format_rational(&g.bimatrix.beta),
            format_rational(&g.bimatrix.delta)
        ));
        for row in &g.bimatrix.u {
            let s: String = row
                .iter()
                .map(|b| if *b == 1 { '1' } else { '0' })
                .collect();
            out.push_str(&format!("bimatrix-u {s}\n"));
        }
        for row in &g.bimatrix.v {
            let s: String = row
                .iter()
                .map(|b| if *b == 1 { '1' } else { '0' })
                .collect();
            out.push_str(&format!("bimatrix-v {s}\n"));
        }
        for (r, e) in g.row_entry_edges.iter().enumerate() {
            out.push_str(&format!("gadget-row-entry {r} {e}\n"));
        }
        for (c, e) in g.col_entry_edges.iter().enumerate() {
            out.push_str(&format!("gadget-col-entry {c} {e}\n"));
        }
    }
    out
}

/// Parse a whitespace-separated list of rationals (flow files).
pub fn parse_flow_values(text: &str) -> Result<Vec<Rational>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        };
        for tok in line.split_whitespace() {
            match parse_rational(tok) {
                Some(q) => out.push(q),
                None => {
                    return err_at(idx + 1, raw, tok, format!("invalid rational '{tok}'"));
                }
            }
        }
    }
    Ok(out)
}
