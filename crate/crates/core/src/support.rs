//! Supports (per-edge active-player sets) and the structured coefficient
//! matrices they induce.
//!
//! All of Ω, K, Σ, A⁻¹, C̃ = (I − KΩ)A⁻¹, C = ΩC̃ and W = ΣC̃ couple pairs on
//! the same edge only, so they are never materialized: rows and products are
//! evaluated per edge from the scalar formula
//! `C̃[(e,i),(e,j)] = (δ_ij − ω_e^j/(κ_e+1)) / a_{e,j}`.

use num_traits::Zero;

use crate::game::{FlowProfile, Game, PotentialVector};
use crate::{rational_int, Rational};

/// Per-edge active player sets with the derived κ counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Support {
    active: Vec<bool>,
    kappa: Vec<u32>,
    edge_count: usize,
    player_count: usize,
}

impl Support {
    pub fn empty(edge_count: usize, player_count: usize) -> Self {
        Support {
            active: vec![false; edge_count * player_count],
            kappa: vec![0; edge_count],
            edge_count,
            player_count,
        }
    }

    pub fn from_active_pairs(
        edge_count: usize,
        player_count: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut s = Self::empty(edge_count, player_count);
        for (e, i) in pairs {
            if !s.is_active(e, i) {
                s.set(e, i, true);
            }
        }
        s
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn player_count(&self) -> usize {
        self.player_count
    }

    #[inline]
    fn idx(&self, e: usize, i: usize) -> usize {
        i * self.edge_count + e
    }

    #[inline]
    pub fn is_active(&self, e: usize, i: usize) -> bool {
        self.active[self.idx(e, i)]
    }

    /// ω^i_e as 0/1.
    #[inline]
    pub fn omega(&self, e: usize, i: usize) -> u32 {
        self.is_active(e, i) as u32
    }

    /// σ^i_e ∈ {+1, −1}.
    #[inline]
    pub fn sigma(&self, e: usize, i: usize) -> i32 {
        if self.is_active(e, i) {
            1
        } else {
            -1
        }
    }

    /// κ_e = |S_e|.
    #[inline]
    pub fn kappa(&self, e: usize) -> u32 {
        self.kappa[e]
    }

    pub fn active_players(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.player_count).filter(move |&i| self.is_active(e, i))
    }

    pub fn active_edges_of(&self, player: usize) -> Vec<usize> {
        (0..self.edge_count)
            .filter(|&e| self.is_active(e, player))
            .collect()
    }

    fn set(&mut self, e: usize, i: usize, value: bool) {
        let idx = self.idx(e, i);
        if self.active[idx] == value {
            return;
        }
        self.active[idx] = value;
        if value {
            self.kappa[e] += 1;
        } else {
            self.kappa[e] -= 1;
        }
    }

    /// The (e,i)-neighboring support: player i's membership in S_e toggled.
    pub fn toggled(&self, e: usize, i: usize) -> Support {
        let mut s = self.clone();
        let now = s.is_active(e, i);
        s.set(e, i, !now);
        s
    }

    /// Compact bitset fingerprint (player-major, lowest bit = pair 0), hex.
    pub fn fingerprint(&self) -> String {
        let bits = self.active.len();
        let nibbles = bits.div_ceil(4);
        let mut out = vec![0u8; nibbles];
        for (p, &a) in self.active.iter().enumerate() {
            if a {
                out[p / 4] |= 1 << (p % 4);
            }
        }
        out.iter()
            .rev()
            .map(|n| char::from_digit(*n as u32, 16).unwrap())
            .collect()
    }
}

/// Structured view of the coefficient matrices a support induces. Nothing is
/// materialized: Ω, Σ and κ live on the [`Support`], A⁻¹ on the game, and
/// the C̃/C/W rows are evaluated per edge on demand.
pub struct SupportMatrices<'a> {
    pub game: &'a Game<Rational>,
    pub support: &'a Support,
}

impl<'a> SupportMatrices<'a> {
    pub fn new(game: &'a Game<Rational>, support: &'a Support) -> Self {
        SupportMatrices { game, support }
    }

    /// Row of C̃ at (e,i) over the same-edge pairs (e,j).
    pub fn ctilde_row(&self, e: usize, i: usize) -> Vec<Rational> {
        ctilde_row(self.game, self.support, e, i)
    }

    /// Row of C = ΩC̃ at (e,i); zero for inactive pairs.
    pub fn c_row(&self, e: usize, i: usize) -> Vec<Rational> {
        if self.support.is_active(e, i) {
            self.ctilde_row(e, i)
        } else {
            vec![Rational::zero(); self.game.num_players()]
        }
    }

    /// Row of W = ΣC̃ at (e,i).
    pub fn w_row(&self, e: usize, i: usize) -> Vec<Rational> {
        let row = self.ctilde_row(e, i);
        if self.support.is_active(e, i) {
            row
        } else {
            row.into_iter().map(|v| -v).collect()
        }
    }

    /// x = C t.
    pub fn apply_c(&self, t: &[Rational]) -> Vec<Rational> {
        apply_c(self.game, self.support, t)
    }

    /// All W-row values against t.
    pub fn w_values(&self, t: &[Rational]) -> Vec<Rational> {
        w_values(self.game, self.support, t)
    }
}

/// Row of C̃ at pair (e,i): entries over the pairs (e,j), j = 0..k.
pub fn ctilde_row(game: &Game<Rational>, support: &Support, e: usize, i: usize) -> Vec<Rational> {
    let k = game.num_players();
    let den = rational_int(support.kappa(e) as i64 + 1);
    (0..k)
        .map(|j| {
            let delta = if i == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            };
            let omega_j = rational_int(support.omega(e, j) as i64);
            (delta - omega_j / den.clone()) / game.costs.slope(e, j).clone()
        })
        .collect()
}

/// Per-edge weighted active sums s_e = Σ_{j ∈ S_e} t[(e,j)] / a_{e,j}.
fn edge_active_sums(game: &Game<Rational>, support: &Support, t: &[Rational]) -> Vec<Rational> {
    let (m, k) = (game.num_edges(), game.num_players());
    let mut sums = vec![Rational::zero(); m];
    for e in 0..m {
        for j in 0..k {
            if support.is_active(e, j) {
                sums[e] += &t[game.pair_index(e, j)] / game.costs.slope(e, j);
            }
        }
    }
    sums
}

/// x = C t (rows of inactive pairs are zero).
pub fn apply_c(game: &Game<Rational>, support: &Support, t: &[Rational]) -> Vec<Rational> {
    let (m, k) = (game.num_edges(), game.num_players());
    let sums = edge_active_sums(game, support, t);
    let mut out = vec![Rational::zero(); m * k];
    for e in 0..m {
        let den = rational_int(support.kappa(e) as i64 + 1);
        for i in 0..k {
            if support.is_active(e, i) {
                let own = &t[game.pair_index(e, i)] / game.costs.slope(e, i);
                out[game.pair_index(e, i)] = own - &sums[e] / &den;
            }
        }
    }
    out
}

/// y = Cᵀ t.
pub fn apply_c_transposed(
    game: &Game<Rational>,
    support: &Support,
    t: &[Rational],
) -> Vec<Rational> {
    let (m, k) = (game.num_edges(), game.num_players());
    let mut out = vec![Rational::zero(); m * k];
    for e in 0..m {
        let den = rational_int(support.kappa(e) as i64 + 1);
        let mut active_sum = Rational::zero();
        for i in 0..k {
            if support.is_active(e, i) {
                active_sum += &t[game.pair_index(e, i)];
            }
        }
        for j in 0..k {
            if !support.is_active(e, j) {
                continue;
            }
            let v = &t[game.pair_index(e, j)] - &active_sum / &den;
            if !v.is_zero() {
                out[game.pair_index(e, j)] = v / game.costs.slope(e, j);
            }
        }
    }
    out
}

/// All W-row values w_{e,i}ᵀ t = σ^i_e · (t_{e,i}/a_{e,i} − s_e/(κ_e+1)).
pub fn w_values(game: &Game<Rational>, support: &Support, t: &[Rational]) -> Vec<Rational> {
    let (m, k) = (game.num_edges(), game.num_players());
    let sums = edge_active_sums(game, support, t);
    let mut out = vec![Rational::zero(); m * k];
    for e in 0..m {
        let den = rational_int(support.kappa(e) as i64 + 1);
        for i in 0..k {
            let own = &t[game.pair_index(e, i)] / game.costs.slope(e, i);
            let v = own - &sums[e] / &den;
            out[game.pair_index(e, i)] = if support.is_active(e, i) { v } else { -v };
        }
    }
    out
}

/// The W row for a single pair as a sparse (pair index, value) list.
pub fn w_row_sparse(
    game: &Game<Rational>,
    support: &Support,
    e: usize,
    i: usize,
) -> Vec<(usize, Rational)> {
    let row = ctilde_row(game, support, e, i);
    let sigma = support.sigma(e, i);
    row.into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| {
            let signed = if sigma > 0 { v } else { -v };
            (game.pair_index(e, j), signed)
        })
        .collect()
}

/// Potential differences along edges: t[(e,i)] = π_head − π_tail (per player).
pub fn potential_differences(
    game: &Game<Rational>,
    pi: &PotentialVector<Rational>,
) -> Vec<Rational> {
    let (m, k) = (game.num_edges(), game.num_players());
    let mut t = vec![Rational::zero(); m * k];
    for i in 0..k {
        for e in 0..m {
            let head = game.vertex_index(game.graph.head(e), i);
            let tail = game.vertex_index(game.graph.tail(e), i);
            t[game.pair_index(e, i)] = &pi.values[head] - &pi.values[tail];
        }
    }
    t
}

/// Gᵀπ − b, the argument of the induced-flow map.
pub fn shifted_differences(game: &Game<Rational>, pi: &PotentialVector<Rational>) -> Vec<Rational> {
    let mut t = potential_differences(game, pi);
    for i in 0..game.num_players() {
        for e in 0..game.num_edges() {
            t[game.pair_index(e, i)] -= game.costs.offset(e, i);
        }
    }
    t
}

/// Induced flow ν_S(π) = C(Gᵀπ − b). May be negative or infeasible.
pub fn induced_flow(
    game: &Game<Rational>,
    support: &Support,
    pi: &PotentialVector<Rational>,
) -> FlowProfile<Rational> {
    let t = shifted_differences(game, pi);
    FlowProfile::from_vec(apply_c(game, support, &t))
}

/// Total flow on `edge` from the closed form x̄_e = u_{e,i}ᵀ K Ω A⁻¹ (Gᵀπ − b),
/// identical for every player i.
pub fn total_flow_check(
    game: &Game<Rational>,
    support: &Support,
    pi: &PotentialVector<Rational>,
    edge: usize,
) -> Rational {
    let t = shifted_differences(game, pi);
    let mut sum = Rational::zero();
    for j in 0..game.num_players() {
        if support.is_active(edge, j) {
            sum += &t[game.pair_index(edge, j)] / game.costs.slope(edge, j);
        }
    }
    sum / rational_int(support.kappa(edge) as i64 + 1)
}

/// A support is total when every player's active subgraph connects all
/// vertices (ignoring edge direction).
pub fn is_total(game: &Game<Rational>, support: &Support) -> bool {
    total_violation(game, support).is_none()
}

/// First player whose active subgraph is disconnected, if any.
pub fn total_violation(game: &Game<Rational>, support: &Support) -> Option<usize> {
    let n = game.num_vertices();
    for i in 0..game.num_players() {
        let edges: Vec<(usize, usize)> = support
            .active_edges_of(i)
            .iter()
            .map(|&e| (game.graph.tail(e), game.graph.head(e)))
            .collect();
        if undirected_components(n, &edges, None)
            .iter()
            .any(|&c| c != 0)
        {
            return Some(i);
        }
    }
    None
}

/// Component labels of the undirected graph on `n` vertices after removing
/// the edges at positions `skip` (labels are renumbered from the smallest
/// vertex in each component; vertex 0 is always in component 0).
fn undirected_components(
    n: usize,
    edges: &[(usize, usize)],
    skip: Option<(usize, usize)>,
) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, v: usize) -> usize {
        let mut v = v;
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (idx, &(a, b)) in edges.iter().enumerate() {
        if let Some((s1, s2)) = skip {
            if idx == s1 || idx == s2 {
                continue;
            }
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[v] = label[r];
    }
    out
}

/// Whether edge `e` is closer to `anchor` than `e_far` in the directed graph
/// given by `edges`: there is a vertex cut V′ with anchor outside, whose only
/// entering edge is `e` and only leaving edge is `e_far`.
pub fn edge_closer_than(
    n: usize,
    edges: &[(usize, usize)],
    anchor: usize,
    e: usize,
    e_far: usize,
) -> bool {
    if e == e_far {
        return false;
    }
    let comps = undirected_components(n, edges, Some((e, e_far)));
    let inside = [comps[edges[e].1], comps[edges[e_far].0]];
    let outside = [comps[edges[e].0], comps[edges[e_far].1], comps[anchor]];
    inside.iter().all(|c| !outside.contains(c))
}

/// All ordered serial-dependent pairs (closer, farther) relative to `anchor`.
pub fn serial_dependent_pairs(
    n: usize,
    edges: &[(usize, usize)],
    anchor: usize,
) -> Vec<(usize, usize)> {
    let m = edges.len();
    let mut out = Vec::new();
    for e in 0..m {
        for f in 0..m {
            if e != f && edge_closer_than(n, edges, anchor, e, f) {
                out.push((e, f));
            }
        }
    }
    out
}

/// Shortest-path supports: for every player and every serial-dependent pair
/// (e, e') of the full graph with e closer to the player's source, e must be
/// active for that player.
pub fn is_shortest_path_support(game: &Game<Rational>, support: &Support) -> bool {
    if !is_total(game, support) {
        return false;
    }
    let n = game.num_vertices();
    let edges = game.graph.edges();
    for (i, com) in game.commodities.iter().enumerate() {
        for (closer, _farther) in serial_dependent_pairs(n, edges, com.source) {
            if !support.is_active(closer, i) {
                return false;
            }
        }
    }
    true
}

/// A violated λ-potential condition.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaPotentialViolation {
    /// Lπ − d ≠ λΔy at (vertex, player); value is the residual excess.
    Laplace {
        vertex: usize,
        player: usize,
        residual: Rational,
    },
    /// W-row (edge, player) of W(Gᵀπ − b) is negative.
    Constraint {
        edge: usize,
        player: usize,
        value: Rational,
    },
}

/// Check both λ-potential conditions exactly: the Laplace equation
/// Lπ − d = λΔy and the inequalities W(Gᵀπ − b) ≥ 0.
pub fn check_lambda_potential(
    game: &Game<Rational>,
    support: &Support,
    pi: &PotentialVector<Rational>,
    lambda: &Rational,
) -> (bool, Vec<LambdaPotentialViolation>) {
    let mut violations = Vec::new();

    // Lπ − d equals G·ν(π) identically, so compare the induced excess with
    // the demand pattern (+λr at sources under the game-core convention).
    let flow = induced_flow(game, support, pi);
    let y = crate::game::excess(game, &flow);
    for (i, com) in game.commodities.iter().enumerate() {
        for v in 0..game.num_vertices() {
            let mut expected = Rational::zero();
            if v == com.source {
                expected = lambda * &com.rate;
            } else if v == com.sink {
                expected = -(lambda * &com.rate);
            }
            let residual = &y[game.vertex_index(v, i)] - &expected;
            if !residual.is_zero() {
                violations.push(LambdaPotentialViolation::Laplace {
                    vertex: v,
                    player: i,
                    residual,
                });
            }
        }
    }

    let t = shifted_differences(game, pi);
    let w = w_values(game, support, &t);
    for i in 0..game.num_players() {
        for e in 0..game.num_edges() {
            let v = &w[game.pair_index(e, i)];
            if *v < Rational::zero() {
                violations.push(LambdaPotentialViolation::Constraint {
                    edge: e,
                    player: i,
                    value: v.clone(),
                });
            }
        }
    }

    (violations.is_empty(), violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{ArithmeticMode, Commodity, CostCoefficients, Game, GraphModel};
    use crate::{rational_int as q, Rational};
    use num_traits::One;

    fn qr(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn single_edge_game(players: usize, slope: i64) -> Game<Rational> {
        let graph = GraphModel::new(2, vec![(0, 1)]);
        let coms = (0..players)
            .map(|_| Commodity {
                source: 0,
                sink: 1,
                rate: q(1),
            })
            .collect();
        let costs =
            CostCoefficients::new(1, vec![q(slope); players], vec![Rational::zero(); players]);
        Game::new(graph, coms, costs, ArithmeticMode::Exact)
    }

    #[test]
    fn ctilde_single_edge_cases() {
        // one player, active: C̃ = (κ+1−ω)/((κ+1)a) = 1/2, C = 1/2, W = 1/2
        let game = single_edge_game(1, 1);
        let s = Support::from_active_pairs(1, 1, [(0usize, 0usize)]);
        assert_eq!(ctilde_row(&game, &s, 0, 0), vec![qr(1, 2)]);
        let t = vec![Rational::one()];
        assert_eq!(apply_c(&game, &s, &t), vec![qr(1, 2)]);
        assert_eq!(w_values(&game, &s, &t), vec![qr(1, 2)]);

        // inactive: C̃ = 1, C = 0, W = −1
        let s = Support::empty(1, 1);
        assert_eq!(ctilde_row(&game, &s, 0, 0), vec![q(1)]);
        assert_eq!(apply_c(&game, &s, &t), vec![q(0)]);
        assert_eq!(w_values(&game, &s, &t), vec![q(-1)]);
    }

    #[test]
    fn ctilde_two_players_both_active() {
        // κ = 2: diagonal 2/3, cross coupling −1/3
        let game = single_edge_game(2, 1);
        let s = Support::from_active_pairs(1, 2, [(0usize, 0usize), (0, 1)]);
        assert_eq!(ctilde_row(&game, &s, 0, 0), vec![qr(2, 3), qr(-1, 3)]);
        assert_eq!(ctilde_row(&game, &s, 0, 1), vec![qr(-1, 3), qr(2, 3)]);
    }

    #[test]
    fn toggle_is_involution_and_tracks_kappa() {
        let s = Support::from_active_pairs(3, 2, [(0usize, 0usize), (1, 1)]);
        let t = s.toggled(2, 0);
        assert_eq!(t.kappa(2), 1);
        assert_eq!(t.toggled(2, 0), s);
        let u = s.toggled(0, 0);
        assert_eq!(u.kappa(0), 0);
    }

    #[test]
    fn totality_of_figure_game() {
        // triangle s → t, s → v, v → t: the support with only {(s,t),(v,t)}
        // active is total but not shortest-path ((s,v) must be active)
        let graph = GraphModel::new(3, vec![(0, 2), (0, 1), (1, 2)]);
        let game = Game::new(
            graph,
            vec![Commodity {
                source: 0,
                sink: 2,
                rate: q(1),
            }],
            CostCoefficients::new(1 * 3, vec![q(1); 3], vec![q(0); 3]),
            ArithmeticMode::Exact,
        );
        let s = Support::from_active_pairs(3, 1, [(0usize, 0usize), (2, 0)]);
        assert!(is_total(&game, &s));
        assert!(!is_shortest_path_support(&game, &s));
        let with_sv = s.toggled(1, 0);
        assert!(is_shortest_path_support(&game, &with_sv));

        // all edges active on a strongly connected graph is total
        let all = Support::from_active_pairs(3, 1, (0..3).map(|e| (e, 0)));
        assert!(is_total(&game, &all));
        // dropping everything at the middle vertex breaks totality
        let broken = Support::from_active_pairs(3, 1, [(0usize, 0usize)]);
        assert!(!is_total(&game, &broken));
    }

    #[test]
    fn serial_dependence_on_figure_graph() {
        // s → v → t with the direct edge s → t: (s,v) and (v,t) are
        // serial-dependent, (s,v) closer to s
        let edges = vec![(0usize, 1usize), (1, 2), (0, 2)];
        let pairs = serial_dependent_pairs(3, &edges, 0);
        assert!(pairs.contains(&(0, 1)));
        assert!(!pairs.contains(&(1, 0)));

        // pure parallel links: no serial dependence
        let edges = vec![(0usize, 1usize), (0, 1), (0, 1)];
        assert!(serial_dependent_pairs(2, &edges, 0).is_empty());
    }

    #[test]
    fn serial_dependence_path_graph_brute_force() {
        // path a→b→c→d anchored at a; brute-force subset oracle
        let edges = vec![(0usize, 1usize), (1, 2), (2, 3)];
        let n = 4;
        let anchor = 0;
        let mut expected = Vec::new();
        for e in 0..3 {
            for f in 0..3 {
                if e == f {
                    continue;
                }
                // enumerate all vertex subsets V′ and check the cut shape
                let mut found = false;
                for mask in 1u32..(1 << n) {
                    if mask & (1 << anchor) != 0 {
                        continue;
                    }
                    let inside = |v: usize| mask & (1 << v) != 0;
                    let mut enter = Vec::new();
                    let mut leave = Vec::new();
                    for (idx, &(t, h)) in edges.iter().enumerate() {
                        match (inside(t), inside(h)) {
                            (false, true) => enter.push(idx),
                            (true, false) => leave.push(idx),
                            _ => {}
                        }
                    }
                    if enter == vec![e] && leave == vec![f] {
                        found = true;
                        break;
                    }
                }
                if found {
                    expected.push((e, f));
                }
            }
        }
        expected.sort_unstable();
        let mut got = serial_dependent_pairs(n, &edges, anchor);
        got.sort_unstable();
        assert_eq!(got, expected);
        assert_eq!(got, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn induced_flow_kernel_shift_invariance() {
        // shifting a player's potential by a constant leaves the flow fixed
        let game = crate::io::gen_example_8player().to_game().unwrap();
        let support = crate::pivot::start_support(&game);
        let n = game.num_vertices();
        let mut pi = crate::game::PotentialVector::zeros(n * game.num_players());
        for (i, v) in pi.values.iter_mut().enumerate() {
            *v = Rational::new(((i * 7 + 3) % 11).into(), 4.into());
        }
        let base = induced_flow(&game, &support, &pi);
        let mut shifted = pi.clone();
        for v in 0..n {
            shifted.values[game.vertex_index(v, 2)] += q(17);
        }
        let moved = induced_flow(&game, &support, &shifted);
        assert_eq!(base.values, moved.values);
    }

    #[test]
    fn excess_of_induced_flow_matches_laplacian_form() {
        // G·ν(π) = Lπ − d for arbitrary π (head-positive convention)
        let game = crate::io::gen_example_8player().to_game().unwrap();
        let support = crate::pivot::start_support(&game);
        let lap = crate::laplacian::BlockLaplacian::build(&game, support.clone()).unwrap();
        let nk = game.num_vertices() * game.num_players();
        let mut pi = crate::game::PotentialVector::zeros(nk);
        for (i, v) in pi.values.iter_mut().enumerate() {
            *v = Rational::new(((i * 5 + 1) % 13).into(), 3.into());
        }
        // normalize into the potential space: zero at every player's source
        for (i, com) in game.commodities.iter().enumerate() {
            pi.values[game.vertex_index(com.source, i)] = Rational::zero();
        }
        let x = induced_flow(&game, &support, &pi);
        // head-positive excess is the negation of the game-core convention
        let y_out = crate::game::excess(&game, &x);
        let dense = lap.reduced_dense(&game);
        let red = lap.reduction();
        let pi_red = red.reduce(&pi.values);
        let dim = pi_red.len();
        let d_red = red.reduce(&lap.offset);
        for r in 0..dim {
            let mut acc = Rational::zero();
            for c in 0..dim {
                acc += &dense[r * dim + c] * &pi_red[c];
            }
            acc -= &d_red[r];
            let full_idx = red.full_of[r];
            assert_eq!(acc, -y_out[full_idx].clone());
        }
    }

    #[test]
    fn total_flow_check_matches_aggregate() {
        let game = crate::io::gen_example_8player().to_game().unwrap();
        let support = crate::pivot::start_support(&game);
        let nk = game.num_vertices() * game.num_players();
        let mut pi = crate::game::PotentialVector::zeros(nk);
        for (i, v) in pi.values.iter_mut().enumerate() {
            *v = Rational::new(((i * 3 + 2) % 9).into(), 2.into());
        }
        let x = induced_flow(&game, &support, &pi);
        let totals = crate::game::aggregate_flow(&game, &x);
        for e in 0..game.num_edges() {
            assert_eq!(total_flow_check(&game, &support, &pi, e), totals[e]);
        }
    }
}
