//! Instance generators: the 8-player example with a continuum of equilibria,
//! seeded random games, and the bimatrix-game hardness gadget.

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{CostRow, InstanceDocument};
use crate::game::{ArithmeticMode, FlowProfile, Game};
use crate::{rational_int, Int, Rational};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("infeasible shape: need m ≥ n − 1 (got n = {n}, m = {m})")]
    InfeasibleShape { n: usize, m: usize },
    #[error("gadget too large: {edges} edges exceeds budget {budget}")]
    SizeTooLarge { edges: usize, budget: usize },
}

/// Win-lose bimatrix game payload for the gadget generator.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    pub n: usize,
    pub u: Vec<Vec<u8>>,
    pub v: Vec<Vec<u8>>,
    /// approximation exponent: the gadget targets an n^{−β}-approximate
    /// equilibrium
    pub beta: Rational,
    /// small positive slope substituted for the construction's zero slopes
    pub delta: Rational,
}

/// Extraction data tying a gadget instance back to its bimatrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct GadgetMetadata {
    pub bimatrix: BimatrixGame,
    /// Edge s1 → (row r entry port); player 1's flow here is ȳ_r.
    pub row_entry_edges: Vec<usize>,
    /// Edge s2 → (column c entry port); player 2's flow here is z̄_c.
    pub col_entry_edges: Vec<usize>,
}

/// The 8-player ring instance: 4 vertices, 8 edges, demand 2 per player.
/// Each player sees cost 9x+3 on the direct edge joining source to sink,
/// x+6 on the three edges of the long path, and slope 1 / offset `big`
/// elsewhere.
pub fn gen_example_8player() -> InstanceDocument {
    let big = rational_int(1_000_000);
    // edges e1..e8 of the figure, zero-based
    let edges = vec![
        (0, 1), // e1
        (1, 0), // e2
        (1, 2), // e3
        (2, 1), // e4
        (2, 3), // e5
        (3, 2), // e6
        (3, 0), // e7
        (0, 3), // e8
    ];
    // (source, sink) per player 1..8
    let terminals = [
        (0, 3),
        (3, 2),
        (2, 1),
        (1, 0),
        (0, 1),
        (1, 2),
        (2, 3),
        (3, 0),
    ];
    // direct edge and long path (ordered source → sink) per player
    let direct = [7usize, 5, 3, 1, 0, 2, 4, 6];
    let long: [[usize; 3]; 8] = [
        [0, 2, 4],
        [6, 0, 2],
        [4, 6, 0],
        [2, 4, 6],
        [7, 5, 3],
        [1, 7, 5],
        [3, 1, 7],
        [5, 3, 1],
    ];

    let mut costs = Vec::new();
    for (i, _) in terminals.iter().enumerate() {
        for e in 0..edges.len() {
            let (a, b) = if e == direct[i] {
                (rational_int(9), rational_int(3))
            } else if long[i].contains(&e) {
                (rational_int(1), rational_int(6))
            } else {
                (rational_int(1), big.clone())
            };
            costs.push(CostRow {
                edge: e,
                player: i,
                slope: a,
                offset: b,
            });
        }
    }

    let mut doc = InstanceDocument {
        mode: ArithmeticMode::Exact,
        vertex_count: 4,
        vertex_names: (0..4).map(|v| (v, format!("v{}", v + 1))).collect(),
        edges,
        commodities: terminals
            .iter()
            .map(|&(s, t)| (s, t, rational_int(2)))
            .collect(),
        costs,
        meta: vec![
            ("bigm".into(), "1000000".into()),
            ("generator".into(), "example8".into()),
        ],
        gadget: None,
    };
    doc.canonicalize();
    doc
}

/// Parameters for the seeded random generator. Coefficients are sampled from
/// the dyadic grid with `grid_bits` fractional bits inside the given ranges.
#[derive(Debug, Clone)]
pub struct RandomGameParams {
    pub vertices: usize,
    pub edges: usize,
    pub players: usize,
    pub slope_range: (Rational, Rational),
    pub offset_range: (Rational, Rational),
    pub rate_range: (Rational, Rational),
    pub grid_bits: u32,
    /// Restrict to player-independent costs.
    pub player_independent: bool,
    /// Build a 2-vertex parallel-link network instead of a random digraph.
    pub parallel_links: bool,
}

impl Default for RandomGameParams {
    fn default() -> Self {
        RandomGameParams {
            vertices: 4,
            edges: 6,
            players: 2,
            slope_range: (rational_int(1), rational_int(4)),
            offset_range: (Rational::zero(), rational_int(8)),
            rate_range: (rational_int(1), rational_int(3)),
            grid_bits: 3,
            player_independent: false,
            parallel_links: false,
        }
    }
}

fn sample_dyadic(rng: &mut ChaCha8Rng, range: &(Rational, Rational), bits: u32) -> Rational {
    let scale = Int::from(1u64 << bits);
    let scale_q = Rational::from_integer(scale.clone());
    let lo = (&range.0 * &scale_q).ceil().to_integer();
    let hi = (&range.1 * &scale_q).floor().to_integer();
    if hi <= lo {
        return Rational::new(lo, scale);
    }
    let span = (&hi - &lo).to_u64().expect("range fits u64");
    let off = rng.random_range(0..=span);
    Rational::new(lo + Int::from(off), scale)
}

/// Deterministic random instance: spanning arborescence plus extra arcs,
/// commodities with sinks reachable from their sources.
pub fn gen_random(seed: u64, params: &RandomGameParams) -> Result<InstanceDocument, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, m, k) = if params.parallel_links {
        (2, params.edges.max(1), params.players)
    } else {
        (params.vertices, params.edges, params.players)
    };
    if !params.parallel_links && (n < 2 || m < n - 1) {
        return Err(GenError::InfeasibleShape { n, m });
    }

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m);
    if params.parallel_links {
        for _ in 0..m {
            edges.push((0, 1));
        }
    } else {
        // random spanning tree with random arc orientation, then extras
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for pos in 1..n {
            let a = order[pos];
            let b = order[rng.random_range(0..pos)];
            if rng.random_bool(0.5) {
                edges.push((a, b));
            } else {
                edges.push((b, a));
            }
        }
        while edges.len() < m {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((a, b));
            }
        }
    }

    // adjacency for reachability when drawing terminals
    let reachable = |edges: &[(usize, usize)], s: usize| -> Vec<bool> {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(a, b) in edges {
                if a == v && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    };

    let mut commodities = Vec::with_capacity(k);
    for _ in 0..k {
        let (s, t) = if params.parallel_links {
            (0, 1)
        } else {
            loop {
                let s = rng.random_range(0..n);
                let reach = reachable(&edges, s);
                let options: Vec<usize> = (0..n).filter(|&v| v != s && reach[v]).collect();
                if !options.is_empty() {
                    break (s, options[rng.random_range(0..options.len())]);
                }
            }
        };
        let r = sample_dyadic(&mut rng, &params.rate_range, params.grid_bits);
        commodities.push((s, t, r));
    }

    let mut costs = Vec::new();
    for e in 0..m {
        let shared_a = sample_dyadic(&mut rng, &params.slope_range, params.grid_bits);
        let shared_b = sample_dyadic(&mut rng, &params.offset_range, params.grid_bits);
        for i in 0..k {
            let (a, b) = if params.player_independent {
                (shared_a.clone(), shared_b.clone())
            } else {
                (
                    sample_dyadic(&mut rng, &params.slope_range, params.grid_bits),
                    sample_dyadic(&mut rng, &params.offset_range, params.grid_bits),
                )
            };
            let a = if a.is_zero() || a.is_negative() {
                Rational::new(Int::one(), Int::from(1u64 << params.grid_bits))
            } else {
                a
            };
            let b = if b.is_negative() { Rational::zero() } else { b };
            costs.push(CostRow {
                edge: e,
                player: i,
                slope: a,
                offset: b,
            });
        }
    }

    let mut doc = InstanceDocument {
        mode: ArithmeticMode::Exact,
        vertex_count: n,
        vertex_names: Vec::new(),
        edges,
        commodities,
        costs,
        meta: vec![
            ("generator".into(), "random".into()),
            ("seed".into(), seed.to_string()),
        ],
        gadget: None,
    };
    doc.canonicalize();
    Ok(doc)
}

/// T = ⌈2·n^{β+1}⌉ main edges of each type per gadget.
pub fn gadget_edge_multiplicity(n: usize, beta: &Rational) -> usize {
    if beta.denom().is_one() {
        let exp = beta.numer().to_u32().expect("small β") + 1;
        return 2 * n.pow(exp);
    }
    let b = beta.to_f64().unwrap_or(1.0);
    (2.0 * (n as f64).powf(b + 1.0)).ceil() as usize
}

/// Build the hardness-reduction gadget instance for a win-lose bimatrix game:
/// an n×n grid of gadgets with T type-1 and T type-2 main edges each,
/// auxiliary edges cheap for one player and offset 4n for the other, and
/// zero slopes replaced by δ. Demands are 1 for both players.
pub fn gen_gadget(bm: &BimatrixGame) -> Result<(InstanceDocument, GadgetMetadata), GenError> {
    assert!(bm.n >= 1 && bm.u.len() == bm.n && bm.v.len() == bm.n);
    assert!(bm.beta.is_positive() && bm.delta.is_positive());
    let n = bm.n;
    let t_mult = gadget_edge_multiplicity(n, &bm.beta);
    let edge_budget = 200_000;
    let projected = n * n * (8 * t_mult + 2) + 2 * n * (n + 1);
    if projected > edge_budget {
        return Err(GenError::SizeTooLarge {
            edges: projected,
            budget: edge_budget,
        });
    }

    // vertex layout: s1 t1 s2 t2, then per gadget (row-major):
    // [sr tr sc tc nr nc, sr_t.., tr_t.., sc_t.., tc_t..]
    let (s1, t1, s2, t2) = (0usize, 1usize, 2usize, 3usize);
    let per_gadget = 6 + 4 * t_mult;
    let gadget_base = |r: usize, c: usize| 4 + (r * n + c) * per_gadget;
    let port_sr = |r: usize, c: usize| gadget_base(r, c);
    let port_tr = |r: usize, c: usize| gadget_base(r, c) + 1;
    let port_sc = |r: usize, c: usize| gadget_base(r, c) + 2;
    let port_tc = |r: usize, c: usize| gadget_base(r, c) + 3;
    let node_nr = |r: usize, c: usize| gadget_base(r, c) + 4;
    let node_nc = |r: usize, c: usize| gadget_base(r, c) + 5;
    let main1_tail = |r: usize, c: usize, t: usize| gadget_base(r, c) + 6 + t;
    let main1_head = |r: usize, c: usize, t: usize| gadget_base(r, c) + 6 + t_mult + t;
    let main2_tail = |r: usize, c: usize, t: usize| gadget_base(r, c) + 6 + 2 * t_mult + t;
    let main2_head = |r: usize, c: usize, t: usize| gadget_base(r, c) + 6 + 3 * t_mult + t;
    let vertex_count = 4 + n * n * per_gadget;

    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Aux1,
        Aux2,
        Main1(usize, usize), // (r, c)
        Main2(usize, usize),
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut kinds: Vec<Kind> = Vec::new();
    let push = |edges: &mut Vec<(usize, usize)>, kinds: &mut Vec<Kind>, t, h, kind| {
        edges.push((t, h));
        kinds.push(kind);
        edges.len() - 1
    };

    // macro row chains (type-1 auxiliary)
    let mut row_entry_edges = Vec::with_capacity(n);
    for r in 0..n {
        row_entry_edges.push(push(&mut edges, &mut kinds, s1, port_sr(r, 0), Kind::Aux1));
        for c in 0..n - 1 {
            push(
                &mut edges,
                &mut kinds,
                port_tr(r, c),
                port_sr(r, c + 1),
                Kind::Aux1,
            );
        }
        push(&mut edges, &mut kinds, port_tr(r, n - 1), t1, Kind::Aux1);
    }
    // macro column chains (type-2 auxiliary)
    let mut col_entry_edges = Vec::with_capacity(n);
    for c in 0..n {
        col_entry_edges.push(push(&mut edges, &mut kinds, s2, port_sc(0, c), Kind::Aux2));
        for r in 0..n - 1 {
            push(
                &mut edges,
                &mut kinds,
                port_tc(r, c),
                port_sc(r + 1, c),
                Kind::Aux2,
            );
        }
        push(&mut edges, &mut kinds, port_tc(n - 1, c), t2, Kind::Aux2);
    }

    // gadget interiors
    for r in 0..n {
        for c in 0..n {
            for t in 0..t_mult {
                push(
                    &mut edges,
                    &mut kinds,
                    main1_tail(r, c, t),
                    main1_head(r, c, t),
                    Kind::Main1(r, c),
                );
            }
            for t in 0..t_mult {
                push(
                    &mut edges,
                    &mut kinds,
                    main2_tail(r, c, t),
                    main2_head(r, c, t),
                    Kind::Main2(r, c),
                );
            }
            // type-1 auxiliary wiring: fan out of s̄r onto the type-1 mains,
            // collect at nr, then thread all type-2 mains toward t̄r
            for t in 0..t_mult {
                push(
                    &mut edges,
                    &mut kinds,
                    port_sr(r, c),
                    main1_tail(r, c, t),
                    Kind::Aux1,
                );
            }
            for t in 0..t_mult {
                push(
                    &mut edges,
                    &mut kinds,
                    main1_head(r, c, t),
                    node_nr(r, c),
                    Kind::Aux1,
                );
            }
            push(
                &mut edges,
                &mut kinds,
                node_nr(r, c),
                main2_tail(r, c, 0),
                Kind::Aux1,
            );
            for t in 0..t_mult - 1 {
                push(
                    &mut edges,
                    &mut kinds,
                    main2_head(r, c, t),
                    main2_tail(r, c, t + 1),
                    Kind::Aux1,
                );
            }
            push(
                &mut edges,
                &mut kinds,
                main2_head(r, c, t_mult - 1),
                port_tr(r, c),
                Kind::Aux1,
            );
            // type-2 auxiliary wiring: thread all type-1 mains from s̄c,
            // fan over the type-2 mains from nc, collect at t̄c
            push(
                &mut edges,
                &mut kinds,
                port_sc(r, c),
                main1_tail(r, c, 0),
                Kind::Aux2,
            );
            for t in 0..t_mult - 1 {
                push(
                    &mut edges,
                    &mut kinds,
                    main1_head(r, c, t),
                    main1_tail(r, c, t + 1),
                    Kind::Aux2,
                );
            }
            push(
                &mut edges,
                &mut kinds,
                main1_head(r, c, t_mult - 1),
                node_nc(r, c),
                Kind::Aux2,
            );
            for t in 0..t_mult {
                push(
                    &mut edges,
                    &mut kinds,
                    node_nc(r, c),
                    main2_tail(r, c, t),
                    Kind::Aux2,
                );
            }
            for t in 0..t_mult - 1 {
                push(
                    &mut edges,
                    &mut kinds,
                    main2_head(r, c, t),
                    main2_head(r, c, t + 1),
                    Kind::Aux2,
                );
            }
            push(
                &mut edges,
                &mut kinds,
                main2_head(r, c, t_mult - 1),
                port_tc(r, c),
                Kind::Aux2,
            );
        }
    }

    let delta = bm.delta.clone();
    let four_n = rational_int(4 * n as i64);
    let mut costs = Vec::with_capacity(edges.len() * 2);
    for (e, kind) in kinds.iter().enumerate() {
        let (a1, b1, a2, b2) = match *kind {
            Kind::Aux1 => (
                delta.clone(),
                Rational::zero(),
                delta.clone(),
                four_n.clone(),
            ),
            Kind::Aux2 => (
                delta.clone(),
                four_n.clone(),
                delta.clone(),
                Rational::zero(),
            ),
            Kind::Main1(r, c) => {
                let a = if bm.u[r][c] == 1 {
                    delta.clone()
                } else {
                    Rational::one()
                };
                (a, Rational::zero(), delta.clone(), Rational::zero())
            }
            Kind::Main2(r, c) => {
                let a = if bm.v[r][c] == 1 {
                    delta.clone()
                } else {
                    Rational::one()
                };
                (delta.clone(), Rational::zero(), a, Rational::zero())
            }
        };
        costs.push(CostRow {
            edge: e,
            player: 0,
            slope: a1,
            offset: b1,
        });
        costs.push(CostRow {
            edge: e,
            player: 1,
            slope: a2,
            offset: b2,
        });
    }

    let meta_gadget = GadgetMetadata {
        bimatrix: bm.clone(),
        row_entry_edges,
        col_entry_edges,
    };
    let mut doc = InstanceDocument {
        mode: ArithmeticMode::Exact,
        vertex_count,
        vertex_names: vec![
            (s1, "s1".into()),
            (t1, "t1".into()),
            (s2, "s2".into()),
            (t2, "t2".into()),
        ],
        edges,
        commodities: vec![(s1, t1, Rational::one()), (s2, t2, Rational::one())],
        costs,
        meta: vec![("generator".into(), "gadget".into())],
        gadget: Some(meta_gadget.clone()),
    };
    doc.canonicalize();
    Ok((doc, meta_gadget))
}

/// Extracted mixed strategies plus the achieved approximation quality.
#[derive(Debug, Clone)]
pub struct BimatrixExtraction {
    pub y: Vec<Rational>,
    pub z: Vec<Rational>,
    /// max regret of either player against (y, z), from U and V directly
    pub epsilon: Rational,
}

/// Read off ȳ_r / z̄_c as the players' flows on the row/column entry edges
/// and compute the achieved ε against the bimatrix payoffs.
pub fn extract_bimatrix_strategies(
    meta: &GadgetMetadata,
    game: &Game<Rational>,
    x: &FlowProfile<Rational>,
) -> BimatrixExtraction {
    let n = meta.bimatrix.n;
    let y: Vec<Rational> = meta
        .row_entry_edges
        .iter()
        .map(|&e| x.values[game.pair_index(e, 0)].clone())
        .collect();
    let z: Vec<Rational> = meta
        .col_entry_edges
        .iter()
        .map(|&e| x.values[game.pair_index(e, 1)].clone())
        .collect();

    // payoffs: player 1 row payoff (U z)_r, player 2 column payoff (ȳᵀV)_c
    let uz: Vec<Rational> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| rational_int(meta.bimatrix.u[r][c] as i64) * &z[c])
                .sum()
        })
        .collect();
    let ytv: Vec<Rational> = (0..n)
        .map(|c| {
            (0..n)
                .map(|r| rational_int(meta.bimatrix.v[r][c] as i64) * &y[r])
                .sum()
        })
        .collect();
    let val1: Rational = (0..n).map(|r| &y[r] * &uz[r]).sum();
    let val2: Rational = (0..n).map(|c| &z[c] * &ytv[c]).sum();
    let best1 = uz.iter().max().cloned().unwrap_or_else(Rational::zero);
    let best2 = ytv.iter().max().cloned().unwrap_or_else(Rational::zero);
    let regret1 = best1 - val1;
    let regret2 = best2 - val2;
    let epsilon = if regret1 > regret2 { regret1 } else { regret2 };
    BimatrixExtraction { y, z, epsilon }
}
