//! Plot-ready emission of parametric equilibria.

use super::format::{decimal_string, format_rational};
use crate::game::Game;
use crate::homotopy::PiecewiseAffineEquilibrium;
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    JsonLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberStyle {
    /// Exact fractions "p/q".
    Exact,
    /// Fixed-precision decimals, '.' separator, no locale.
    Decimals(usize),
}

fn render(style: NumberStyle, q: &Rational) -> String {
    match style {
        NumberStyle::Exact => format_rational(q),
        NumberStyle::Decimals(p) => decimal_string(q, p),
    }
}

/// One row per breakpoint: λ, per-(edge,player) flow, per-(vertex,player)
/// potential, and the fingerprint of the segment support governing the
/// interval that starts there (the last breakpoint repeats the final one).
pub fn emit_breakpoints(
    game: &Game<Rational>,
    f: &PiecewiseAffineEquilibrium,
    format: EmitFormat,
    style: NumberStyle,
) -> String {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let support_for = |idx: usize| -> String {
        let seg = f.segments.get(idx).or_else(|| f.segments.last());
        seg.map(|s| s.support.fingerprint()).unwrap_or_default()
    };
    match format {
        EmitFormat::Csv => {
            let mut out = String::new();
            out.push_str("lambda");
            for i in 0..k {
                for e in 0..m {
                    out.push_str(&format!(",x_e{e}_p{i}"));
                }
            }
            for i in 0..k {
                for v in 0..n {
                    out.push_str(&format!(",pi_v{v}_p{i}"));
                }
            }
            out.push_str(",support\n");
            for (idx, bp) in f.breakpoints.iter().enumerate() {
                out.push_str(&render(style, &bp.lambda));
                for val in &bp.flow.values {
                    out.push(',');
                    out.push_str(&render(style, val));
                }
                for val in &bp.potentials.values {
                    out.push(',');
                    out.push_str(&render(style, val));
                }
                out.push(',');
                out.push_str(&support_for(idx.min(f.segments.len().saturating_sub(1))));
                out.push('\n');
            }
            out
        }
        EmitFormat::JsonLike => {
            let mut out = String::from("[\n");
            for (idx, bp) in f.breakpoints.iter().enumerate() {
                let flows: Vec<String> = bp
                    .flow
                    .values
                    .iter()
                    .map(|v| format!("\"{}\"", render(style, v)))
                    .collect();
                let pis: Vec<String> = bp
                    .potentials
                    .values
                    .iter()
                    .map(|v| format!("\"{}\"", render(style, v)))
                    .collect();
                out.push_str(&format!(
                    "  {{\"lambda\": \"{}\", \"flow\": [{}], \"potential\": [{}], \"support\": \"{}\"}}{}\n",
                    render(style, &bp.lambda),
                    flows.join(", "),
                    pis.join(", "),
                    support_for(idx.min(f.segments.len().saturating_sub(1))),
                    if idx + 1 < f.breakpoints.len() { "," } else { "" }
                ));
            }
            out.push(']');
            out
        }
    }
}
