//! Instance documents, text serialization, generators and result emission.

pub mod emit;
pub mod format;
pub mod generate;

pub use emit::{emit_breakpoints, EmitFormat, NumberStyle};
pub use format::{parse, parse_flow_values, parse_rational, serialize, ParseError};
pub use generate::{
    extract_bimatrix_strategies, gen_example_8player, gen_gadget, gen_random, BimatrixExtraction,
    BimatrixGame, GadgetMetadata, GenError, RandomGameParams,
};

use crate::game::{ArithmeticMode, Commodity, CostCoefficients, Game, GraphModel};
use crate::Rational;

/// One row of the cost table.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub edge: usize,
    pub player: usize,
    pub slope: Rational,
    pub offset: Rational,
}

/// A parsed or generated instance plus its metadata; the canonical on-disk
/// representation round-trips through [`format::serialize`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDocument {
    pub mode: ArithmeticMode,
    pub vertex_count: usize,
    pub vertex_names: Vec<(usize, String)>,
    pub edges: Vec<(usize, usize)>,
    /// (source, sink, rate) per player.
    pub commodities: Vec<(usize, usize, Rational)>,
    pub costs: Vec<CostRow>,
    /// Free-form metadata key/value pairs (seed, generator, bigm, delta, …).
    pub meta: Vec<(String, String)>,
    /// Gadget payload when the instance came from a bimatrix reduction.
    pub gadget: Option<GadgetMetadata>,
}

impl InstanceDocument {
    /// Canonical form: sorted cost rows, names and metadata.
    pub fn canonicalize(&mut self) {
        self.costs.sort_by_key(|r| (r.edge, r.player));
        self.vertex_names.sort_by_key(|(v, _)| *v);
        self.meta.sort();
    }

    pub fn to_game(&self) -> Result<Game<Rational>, String> {
        let graph = GraphModel::new(self.vertex_count, self.edges.clone());
        let m = graph.edge_count();
        let k = self.commodities.len();
        let mut slopes = vec![None; m * k];
        let mut offsets = vec![None; m * k];
        for row in &self.costs {
            if row.edge >= m || row.player >= k {
                return Err(format!(
                    "cost row for edge {} player {} out of range",
                    row.edge, row.player
                ));
            }
            let idx = row.player * m + row.edge;
            if slopes[idx].is_some() {
                return Err(format!(
                    "duplicate cost row for edge {} player {}",
                    row.edge, row.player
                ));
            }
            slopes[idx] = Some(row.slope.clone());
            offsets[idx] = Some(row.offset.clone());
        }
        let slopes: Option<Vec<Rational>> = slopes.into_iter().collect();
        let offsets: Option<Vec<Rational>> = offsets.into_iter().collect();
        let (slopes, offsets) = match (slopes, offsets) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err("cost table does not cover all (edge, player) pairs".into()),
        };
        let commodities = self
            .commodities
            .iter()
            .map(|(s, t, r)| Commodity {
                source: *s,
                sink: *t,
                rate: r.clone(),
            })
            .collect();
        Ok(Game::new(
            graph,
            commodities,
            CostCoefficients::new(m, slopes, offsets),
            self.mode,
        ))
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[cfg(test)]
mod tests;
