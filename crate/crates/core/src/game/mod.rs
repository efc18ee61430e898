//! Problem instance data model and the independent equilibrium verifier.

mod graph;
mod ops;
mod verify;

pub use graph::GraphModel;
pub use ops::{aggregate_flow, excess, marginal_cost, player_cost};
pub use verify::{verify_equilibrium, PotentialCheck, VerificationReport};

use crate::scalar::Scalar;
use crate::Rational;

/// One player: route `rate` units from `source` to `sink`.
#[derive(Debug, Clone, PartialEq)]
pub struct Commodity<T: Scalar> {
    pub source: usize,
    pub sink: usize,
    pub rate: T,
}

/// Player-specific affine cost coefficients, player-major layout:
/// pair (edge e, player i) lives at index `i * m + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCoefficients<T: Scalar> {
    slopes: Vec<T>,
    offsets: Vec<T>,
    edge_count: usize,
}

impl<T: Scalar> CostCoefficients<T> {
    pub fn new(edge_count: usize, slopes: Vec<T>, offsets: Vec<T>) -> Self {
        assert_eq!(slopes.len(), offsets.len());
        assert!(edge_count > 0 && slopes.len() % edge_count == 0);
        assert!(
            slopes.iter().all(|a| *a > T::zero()),
            "cost slopes must be strictly positive"
        );
        assert!(
            offsets.iter().all(|b| *b >= T::zero()),
            "cost offsets must be nonnegative"
        );
        CostCoefficients {
            slopes,
            offsets,
            edge_count,
        }
    }

    #[inline]
    pub fn slope(&self, edge: usize, player: usize) -> &T {
        &self.slopes[player * self.edge_count + edge]
    }

    #[inline]
    pub fn offset(&self, edge: usize, player: usize) -> &T {
        &self.offsets[player * self.edge_count + edge]
    }

    pub fn offsets(&self) -> &[T] {
        &self.offsets
    }
}

/// Arithmetic mode of an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithmeticMode {
    /// Big-rational arithmetic, the reference semantics; tolerance 0.
    Exact,
    /// Floating arithmetic with the given verification tolerance.
    Float { tolerance: f64 },
}

impl ArithmeticMode {
    pub const DEFAULT_FLOAT_TOLERANCE: f64 = 1e-9;
}

/// An atomic splittable congestion game instance. Immutable after build.
#[derive(Debug, Clone)]
pub struct Game<T: Scalar> {
    pub graph: GraphModel,
    pub commodities: Vec<Commodity<T>>,
    pub costs: CostCoefficients<T>,
    pub mode: ArithmeticMode,
}

impl<T: Scalar> Game<T> {
    pub fn new(
        graph: GraphModel,
        commodities: Vec<Commodity<T>>,
        costs: CostCoefficients<T>,
        mode: ArithmeticMode,
    ) -> Self {
        assert!(!commodities.is_empty(), "need at least one player");
        for c in &commodities {
            assert!(c.source < graph.vertex_count && c.sink < graph.vertex_count);
            assert_ne!(c.source, c.sink, "source and sink must differ");
            assert!(c.rate >= T::zero());
        }
        assert_eq!(
            costs.slopes.len(),
            graph.edge_count() * commodities.len(),
            "cost table must cover every (edge, player) pair"
        );
        Game {
            graph,
            commodities,
            costs,
            mode,
        }
    }

    #[inline]
    pub fn num_players(&self) -> usize {
        self.commodities.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.graph.edge_count()
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.graph.vertex_count
    }

    /// Index of pair (edge, player) in player-major vectors.
    #[inline]
    pub fn pair_index(&self, edge: usize, player: usize) -> usize {
        player * self.num_edges() + edge
    }

    /// Index of (vertex, player) in player-major vertex vectors.
    #[inline]
    pub fn vertex_index(&self, vertex: usize, player: usize) -> usize {
        player * self.num_vertices() + vertex
    }

    pub fn is_player_independent(&self) -> bool {
        let (m, k) = (self.num_edges(), self.num_players());
        for e in 0..m {
            for i in 1..k {
                if self.costs.slope(e, i) != self.costs.slope(e, 0)
                    || self.costs.offset(e, i) != self.costs.offset(e, 0)
                {
                    return false;
                }
            }
        }
        true
    }

    /// Augment with high-offset edges until the graph is strongly connected.
    /// Original edges and indices are preserved as a prefix; added edges get
    /// slope 1 and offset `big_m` for every player.
    pub fn strongly_connect(&self, big_m: T) -> Game<T> {
        let mut graph = self.graph.clone();
        let mut slopes = self.costs.slopes.clone();
        let mut offsets = self.costs.offsets.clone();
        let k = self.num_players();
        loop {
            let comps = graph.strongly_connected_components();
            if comps.component_count <= 1 {
                break;
            }
            let order = comps.topological_component_order();
            let last = *order.last().unwrap();
            let first = order[0];
            let tail = comps.min_vertex_of(last);
            let head = comps.min_vertex_of(first);
            graph.push_edge(tail, head);
            let m_new = graph.edge_count();
            // splice the new pair columns into the player-major tables
            let mut new_slopes = Vec::with_capacity(m_new * k);
            let mut new_offsets = Vec::with_capacity(m_new * k);
            for i in 0..k {
                let old_m = m_new - 1;
                new_slopes.extend_from_slice(&slopes[i * old_m..(i + 1) * old_m]);
                new_slopes.push(T::one());
                new_offsets.extend_from_slice(&offsets[i * old_m..(i + 1) * old_m]);
                new_offsets.push(big_m.clone());
            }
            slopes = new_slopes;
            offsets = new_offsets;
        }
        Game {
            graph: graph.clone(),
            commodities: self.commodities.clone(),
            costs: CostCoefficients::new(graph.edge_count(), slopes, offsets),
            mode: self.mode,
        }
    }
}

impl Game<Rational> {
    /// Render the instance over `f64` for tolerance-based verification.
    pub fn to_float(&self) -> Game<f64> {
        let conv = |v: &Rational| crate::scalar::rational_to_f64(v);
        Game {
            graph: self.graph.clone(),
            commodities: self
                .commodities
                .iter()
                .map(|c| Commodity {
                    source: c.source,
                    sink: c.sink,
                    rate: conv(&c.rate),
                })
                .collect(),
            costs: CostCoefficients::new(
                self.num_edges(),
                self.costs.slopes.iter().map(conv).collect(),
                self.costs.offsets.iter().map(conv).collect(),
            ),
            mode: self.mode,
        }
    }
}

/// Player-major flow vector of length `m·k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProfile<T: Scalar> {
    pub values: Vec<T>,
}

impl<T: Scalar> FlowProfile<T> {
    pub fn zeros(len: usize) -> Self {
        FlowProfile {
            values: vec![T::zero(); len],
        }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        FlowProfile { values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The player's slice of the profile (player-major layout).
    pub fn player_block(&self, edge_count: usize, player: usize) -> &[T] {
        &self.values[player * edge_count..(player + 1) * edge_count]
    }
}

impl FlowProfile<Rational> {
    pub fn to_float(&self) -> FlowProfile<f64> {
        FlowProfile {
            values: self
                .values
                .iter()
                .map(crate::scalar::rational_to_f64)
                .collect(),
        }
    }
}

/// Player-major potential vector of length `n·k`, normalized so that every
/// player's source potential is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialVector<T: Scalar> {
    pub values: Vec<T>,
}

impl<T: Scalar> PotentialVector<T> {
    pub fn zeros(len: usize) -> Self {
        PotentialVector {
            values: vec![T::zero(); len],
        }
    }

    pub fn from_vec(values: Vec<T>) -> Self {
        PotentialVector { values }
    }

    pub fn player_block(&self, vertex_count: usize, player: usize) -> &[T] {
        &self.values[player * vertex_count..(player + 1) * vertex_count]
    }
}
