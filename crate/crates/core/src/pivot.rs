//! Support pivoting: λ-ranges with exact lexicographic tie-breaking,
//! continuative-neighbor selection, traversal of weakly a-degenerate
//! supports along the nullspace direction, and start/succ/pred.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::SolveError;
use crate::game::{Game, PotentialVector};
use crate::laplacian::{incidence_apply_transposed, BlockLaplacian, UpdateOutcome};
use crate::support::{self, Support};
use crate::{Int, Rational};

/// How a λ-bound is attained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TightBound {
    /// Clamped at λ = 0 (lower bounds only).
    Clamp0,
    /// Clamped at λ = 1 (upper bounds only).
    Clamp1,
    /// Held by the constraint of this (edge, player) pair.
    Pair { edge: usize, player: usize },
}

/// Lexicographic key of a constraint under the implicit ε-perturbation of the
/// offsets: the base ratio λ̄ plus the coefficient row of the polynomial
/// μ̄(ε) in ε, ε², …, ε^{mk}. Total order among the pairs of one support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexKey {
    pub base: Rational,
    pub coeffs: Vec<Rational>,
}

impl PartialOrd for LexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.base.cmp(&other.base) {
            Ordering::Equal => self.coeffs.cmp(&other.coeffs),
            ord => ord,
        }
    }
}

/// One node of the pivot path: a support with its λ-range, boundary
/// potentials and tight-constraint bookkeeping.
#[derive(Debug, Clone)]
pub struct SupportState {
    pub lap: BlockLaplacian,
    pub lambda_min: Rational,
    pub lambda_max: Rational,
    pub tight_min: TightBound,
    pub tight_max: TightBound,
    pub pi_min: PotentialVector<Rational>,
    pub pi_max: PotentialVector<Rational>,
}

impl SupportState {
    pub fn support(&self) -> &Support {
        &self.lap.support
    }

    pub fn sigma(&self) -> i8 {
        self.lap.sigma
    }

    /// The λ-range with the pair (or clamp) attaining each bound.
    pub fn lambda_range(&self) -> (&Rational, &Rational, &TightBound, &TightBound) {
        (
            &self.lambda_min,
            &self.lambda_max,
            &self.tight_min,
            &self.tight_max,
        )
    }
}

/// Result of a succ/pred step.
pub enum Step {
    /// The requested boundary potential already is a 0- or 1-potential.
    Terminal,
    /// Ordinary pivot into a non-degenerate neighbor.
    Pivot(Box<SupportState>),
    /// The neighbor was weakly a-degenerate and was traversed along its
    /// nullspace direction; `plateau` records the walk.
    DegenerateHop {
        plateau: Box<PlateauRecord>,
        next: Box<SupportState>,
    },
}

/// A traversal of an a-degenerate support at fixed λ*: a continuum of
/// equilibria between two boundary potentials.
#[derive(Debug, Clone)]
pub struct PlateauRecord {
    pub support: Support,
    pub lambda: Rational,
    pub pi_entry: PotentialVector<Rational>,
    pub pi_exit: PotentialVector<Rational>,
    /// Normalized nullspace direction Δπᴺ (first nonzero coordinate +1).
    pub direction: Vec<Rational>,
    /// Flow direction of the walk, the circulation C Gᵀ Δπᴺ.
    pub circulation: Vec<Rational>,
    /// Signed walk length: π_exit = π_entry + ξ·Δπᴺ.
    pub xi: Rational,
}

/// λ-range data of a support: bounds with tight pairs, from the constraint
/// system f_p(λ) = λ·(w_pᵀGᵀΔπ) + w_pᵀ(Gᵀd̄ − b) ≥ 0. Pairs with positive
/// direction derivative bound λ from below, negative ones from above.
///
/// The scan works on integer numerators over shared denominators; ratios are
/// compared by cross-multiplication so no reductions happen per pair.
pub fn compute_state(
    game: &Game<Rational>,
    lap: BlockLaplacian,
) -> Result<SupportState, SolveError> {
    if lap.sigma == 0 {
        return Err(SolveError::DegenerateSupport {
            defect: lap.rank_defect,
        });
    }
    let (g_num, g_den) = scaled_direction_values(game, &lap);
    let (h_num, h_den) = scaled_offset_values(game, &lap);

    // bounds as unreduced fractions (numerator, positive denominator)
    let mut lambda_min = (Int::zero(), Int::one());
    let mut tight_min = TightBound::Clamp0;
    let mut min_ties: Vec<usize> = Vec::new();
    let mut lambda_max = (Int::one(), Int::one());
    let mut tight_max = TightBound::Clamp1;
    let mut max_ties: Vec<usize> = Vec::new();

    let (m, k) = (game.num_edges(), game.num_players());
    for p in 0..m * k {
        if g_num[p].is_zero() {
            if h_num[p].is_negative() {
                return Err(SolveError::Infeasible(format!(
                    "constraint ({}, {}) negative with zero direction derivative",
                    p % m,
                    p / m
                )));
            }
            continue;
        }
        // ratio −h_p/g_p with the shared positive denominators expanded:
        // ratio = (−h_num · den_g) / (g_num · den_h)
        let mut num = -&h_num[p] * &g_den;
        let mut den = &g_num[p] * &h_den;
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        if g_num[p].is_positive() {
            // lower bound λ ≥ ratio
            match cmp_frac(&num, &den, &lambda_min.0, &lambda_min.1) {
                Ordering::Greater => {
                    lambda_min = (num, den);
                    min_ties = vec![p];
                }
                Ordering::Equal => min_ties.push(p),
                Ordering::Less => {}
            }
        } else {
            // upper bound λ ≤ ratio
            match cmp_frac(&num, &den, &lambda_max.0, &lambda_max.1) {
                Ordering::Less => {
                    lambda_max = (num, den);
                    max_ties = vec![p];
                }
                Ordering::Equal => max_ties.push(p),
                Ordering::Greater => {}
            }
        }
    }

    let lambda_min = Rational::new(lambda_min.0, lambda_min.1);
    let lambda_max = Rational::new(lambda_max.0, lambda_max.1);
    if lambda_min > lambda_max {
        return Err(SolveError::Infeasible(format!(
            "empty λ-range [{}, {}]",
            lambda_min, lambda_max
        )));
    }

    // A bound attained exactly at 0 or 1 by a constraint still records its
    // tight pair; terminal detection goes by the λ value, not the bound kind.
    // At the λ ∈ {0, 1} clamps, cross-player lexicographic ties are the
    // harmless value-zero case (no pivot ever leaves through a clamp), so
    // selection failures there fall back to the clamp marker.
    if !min_ties.is_empty() {
        match select_tight_pair(game, &lap, &g_num, &g_den, &min_ties, true) {
            Ok(p) => {
                tight_min = TightBound::Pair {
                    edge: p % m,
                    player: p / m,
                };
            }
            Err(err) => {
                if !lambda_min.is_zero() {
                    return Err(err);
                }
            }
        }
    }
    if !max_ties.is_empty() {
        match select_tight_pair(game, &lap, &g_num, &g_den, &max_ties, false) {
            Ok(p) => {
                tight_max = TightBound::Pair {
                    edge: p % m,
                    player: p / m,
                };
            }
            Err(err) => {
                if !lambda_max.is_one() {
                    return Err(err);
                }
            }
        }
    }

    let pi_min = lap.solve_potential(&lambda_min)?;
    let pi_max = lap.solve_potential(&lambda_max)?;
    Ok(SupportState {
        lap,
        lambda_min,
        lambda_max,
        tight_min,
        tight_max,
        pi_min,
        pi_max,
    })
}

/// Compare fractions n1/d1 and n2/d2 with positive denominators.
fn cmp_frac(n1: &Int, d1: &Int, n2: &Int, d2: &Int) -> Ordering {
    (n1 * d2).cmp(&(n2 * d1))
}

/// Per-pair coefficients c/a_{e,j} and c/((κ_e+1)·a_{e,j}) are integers by
/// the choice of the game scale c; this applies the W matrix to an integer
/// pair vector, returning c·(W t) as integers.
fn w_values_scaled(game: &Game<Rational>, support: &Support, t_num: &[Int]) -> Vec<Int> {
    let (m, k) = (game.num_edges(), game.num_players());
    let c = crate::laplacian::game_scale(game);
    let c_q = Rational::from_integer(c.clone());
    let int_of = |q: Rational| -> Int {
        debug_assert!(q.denom().is_one());
        q.numer().clone()
    };
    let mut out = vec![Int::zero(); m * k];
    for e in 0..m {
        let kap = crate::rational_int(support.kappa(e) as i64 + 1);
        let mut s_num = Int::zero();
        for j in 0..k {
            if support.is_active(e, j) {
                let coeff = int_of(&c_q / (&kap * game.costs.slope(e, j)));
                s_num += coeff * &t_num[game.pair_index(e, j)];
            }
        }
        for i in 0..k {
            let own_coeff = int_of(&c_q / game.costs.slope(e, i));
            let v = own_coeff * &t_num[game.pair_index(e, i)] - &s_num;
            out[game.pair_index(e, i)] = if support.is_active(e, i) { v } else { -v };
        }
    }
    out
}

/// g_p = w_pᵀGᵀΔπ as (integer numerators, shared positive denominator).
fn scaled_direction_values(game: &Game<Rational>, lap: &BlockLaplacian) -> (Vec<Int>, Int) {
    let (dpi_num, dpi_den) = lap
        .potential_direction_scaled
        .as_ref()
        .expect("non-degenerate");
    let t_num = incidence_transposed_int(game, dpi_num);
    let g = w_values_scaled(game, &lap.support, &t_num);
    let den = dpi_den * crate::laplacian::game_scale(game);
    (g, den)
}

/// h_p = w_pᵀ(Gᵀd̄ − b) as (integer numerators, shared positive denominator).
fn scaled_offset_values(game: &Game<Rational>, lap: &BlockLaplacian) -> (Vec<Int>, Int) {
    let (dbar_num, dbar_den) = lap
        .offset_potential_scaled
        .as_ref()
        .expect("non-degenerate");
    let (m, k) = (game.num_edges(), game.num_players());
    let mut b_lcm = Int::one();
    for i in 0..k {
        for e in 0..m {
            b_lcm = b_lcm.lcm(game.costs.offset(e, i).denom());
        }
    }
    let gt = incidence_transposed_int(game, dbar_num);
    let mut t_num = Vec::with_capacity(m * k);
    for i in 0..k {
        for e in 0..m {
            let b = game.costs.offset(e, i);
            let b_scaled = b.numer() * (&b_lcm / b.denom());
            t_num.push(&b_lcm * &gt[game.pair_index(e, i)] - dbar_den * b_scaled);
        }
    }
    let h = w_values_scaled(game, &lap.support, &t_num);
    let den = dbar_den * b_lcm * crate::laplacian::game_scale(game);
    (h, den)
}

fn incidence_transposed_int(game: &Game<Rational>, y: &[Int]) -> Vec<Int> {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let mut out = vec![Int::zero(); m * k];
    for i in 0..k {
        for e in 0..m {
            out[game.pair_index(e, i)] =
                &y[i * n + game.graph.head(e)] - &y[i * n + game.graph.tail(e)];
        }
    }
    out
}

/// Full lexicographic key of one pair (needs g_p ≠ 0).
pub fn lex_key(game: &Game<Rational>, lap: &BlockLaplacian, g_p: &Rational, pair: usize) -> LexKey {
    let (m, k) = (game.num_edges(), game.num_players());
    let e = pair % m;
    let i = pair / m;
    // coefficient row: wᵀ(I − Gᵀ L* G C) / g
    let q = lap.normal_vector(game, e, i);
    let s = lap.solve_transposed(&q);
    let u = incidence_apply_transposed(game, &s);
    let ctu = support::apply_c_transposed(game, &lap.support, &u);
    let w_sparse = support::w_row_sparse(game, &lap.support, e, i);
    let mut coeffs = vec![Rational::zero(); m * k];
    for (idx, v) in w_sparse {
        coeffs[idx] = v;
    }
    for p in 0..m * k {
        let val = (&coeffs[p] - &ctu[p]) / g_p;
        coeffs[p] = val;
    }
    // base ratio is filled by the caller when needed; keys compared among
    // base-tied candidates carry the shared base
    LexKey {
        base: Rational::zero(),
        coeffs,
    }
}

/// Among base-tied candidates pick the winner of the perturbed bound:
/// the greatest perturbation key for lower bounds, the least for upper
/// bounds; exact lexicographic ties fall to the serial-dependent
/// farthest-edge rule.
fn select_tight_pair(
    game: &Game<Rational>,
    lap: &BlockLaplacian,
    g_num: &[Int],
    g_den: &Int,
    ties: &[usize],
    lower_side: bool,
) -> Result<usize, SolveError> {
    if ties.len() == 1 {
        return Ok(ties[0]);
    }
    let mut keyed: Vec<(usize, LexKey)> = ties
        .iter()
        .map(|&p| {
            let g_p = Rational::new(g_num[p].clone(), g_den.clone());
            (p, lex_key(game, lap, &g_p, p))
        })
        .collect();
    keyed.sort_by(|a, b| a.1.cmp(&b.1));
    let best_key = if lower_side {
        keyed.last().unwrap().1.clone()
    } else {
        keyed.first().unwrap().1.clone()
    };
    let winners: Vec<usize> = keyed
        .iter()
        .filter(|(_, key)| *key == best_key)
        .map(|(p, _)| *p)
        .collect();
    if winners.len() == 1 {
        return Ok(winners[0]);
    }
    farthest_edge_winner(game, lap.support.clone(), &winners)
}

/// Exact lexicographic ties only happen among serial-dependent active pairs
/// of a single player; the shortest-path state set requires toggling the edge
/// farthest from that player's source.
fn farthest_edge_winner(
    game: &Game<Rational>,
    support: Support,
    winners: &[usize],
) -> Result<usize, SolveError> {
    let m = game.num_edges();
    let player = winners[0] / m;
    if winners.iter().any(|&p| p / m != player) {
        return Err(SolveError::AssertionViolation(
            "lexicographic tie across players".into(),
        ));
    }
    if winners.iter().any(|&p| !support.is_active(p % m, player)) {
        return Err(SolveError::AssertionViolation(
            "lexicographic tie on an inactive pair".into(),
        ));
    }
    let active = support.active_edges_of(player);
    let sub_edges: Vec<(usize, usize)> = active
        .iter()
        .map(|&e| (game.graph.tail(e), game.graph.head(e)))
        .collect();
    let pos_of = |e: usize| active.iter().position(|&x| x == e).unwrap();
    let source = game.commodities[player].source;
    let n = game.num_vertices();
    'outer: for &cand in winners {
        let ce = pos_of(cand % m);
        for &other in winners {
            if other == cand {
                continue;
            }
            let oe = pos_of(other % m);
            if !support::edge_closer_than(n, &sub_edges, source, oe, ce) {
                continue 'outer;
            }
        }
        return Ok(cand);
    }
    Err(SolveError::AssertionViolation(
        "no farthest edge among serial-dependent tie".into(),
    ))
}

/// The support with the player's membership toggled on one edge.
pub fn neighbor(support: &Support, e: usize, i: usize) -> Support {
    support.toggled(e, i)
}

/// Shortest-path start support of the zero flow: per player the tree of
/// lexicographically perturbed shortest paths under edge lengths b_{e,i}.
/// Requires a strongly connected graph.
pub fn start_support(game: &Game<Rational>) -> Support {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..k {
        let source = game.commodities[i].source;
        // distance = (rational base, sorted pair positions of the ε-powers)
        let mut dist: Vec<Option<(Rational, Vec<usize>)>> = vec![None; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        dist[source] = Some((Rational::zero(), Vec::new()));
        for _round in 0..n {
            let mut changed = false;
            for e in 0..m {
                let t = game.graph.tail(e);
                let h = game.graph.head(e);
                let Some((base, coeffs)) = dist[t].clone() else {
                    continue;
                };
                let pos = game.pair_index(e, i);
                let cand_base = base + game.costs.offset(e, i);
                let mut cand_coeffs = coeffs;
                let ins = cand_coeffs.binary_search(&pos).unwrap_err();
                cand_coeffs.insert(ins, pos);
                let better = match &dist[h] {
                    None => true,
                    Some(cur) => lex_dist_less(&(cand_base.clone(), cand_coeffs.clone()), cur),
                };
                if better {
                    dist[h] = Some((cand_base, cand_coeffs));
                    parent[h] = Some(e);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for v in 0..n {
            if v == source {
                continue;
            }
            let e = parent[v].expect("strongly connected graph reaches every vertex");
            pairs.push((e, i));
        }
    }
    Support::from_active_pairs(m, k, pairs)
}

/// Compare perturbed path lengths: base first, then the ε-power sets
/// lexicographically (a power present beats one absent at the first
/// differing position, making that path longer).
fn lex_dist_less(a: &(Rational, Vec<usize>), b: &(Rational, Vec<usize>)) -> bool {
    match a.0.cmp(&b.0) {
        Ordering::Less => return true,
        Ordering::Greater => return false,
        Ordering::Equal => {}
    }
    // difference polynomial: first differing power decides; the side that
    // contains it has the larger length
    let mut ia = 0;
    let mut ib = 0;
    loop {
        match (a.1.get(ia), b.1.get(ib)) {
            (None, None) => return false, // equal
            (Some(_), None) => return false,
            (None, Some(_)) => return true,
            (Some(&pa), Some(&pb)) => match pa.cmp(&pb) {
                Ordering::Equal => {
                    ia += 1;
                    ib += 1;
                }
                // a holds the smaller power: a is larger
                Ordering::Less => return false,
                Ordering::Greater => return true,
            },
        }
    }
}

/// Build the start state (σ must come out +1).
pub fn start_state(game: &Game<Rational>) -> Result<SupportState, SolveError> {
    let support = start_support(game);
    let lap = BlockLaplacian::build(game, support)?;
    if lap.sigma != 1 {
        return Err(SolveError::AssertionViolation(format!(
            "start support has orientation {} instead of +1",
            lap.sigma
        )));
    }
    let state = compute_state(game, lap)?;
    if !state.lambda_min.is_zero() {
        return Err(SolveError::AssertionViolation(
            "start support does not reach λ = 0".into(),
        ));
    }
    Ok(state)
}

/// Which λ-bound of a state to cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

/// The selected continuative neighbor across one side of the state's
/// λ-range: the lexicographically chosen tight pair toggled. Errors with
/// [`SolveError::ClampedBoundary`] when that bound is the 0/1 clamp.
pub fn continuative_neighbor(state: &SupportState, side: BoundSide) -> Result<Support, SolveError> {
    let tight = match side {
        BoundSide::Lower => &state.tight_min,
        BoundSide::Upper => &state.tight_max,
    };
    match tight {
        TightBound::Pair { edge, player } => Ok(state.support().toggled(*edge, *player)),
        TightBound::Clamp0 => Err(SolveError::ClampedBoundary { side: "0" }),
        TightBound::Clamp1 => Err(SolveError::ClampedBoundary { side: "1" }),
    }
}

/// succ: terminal when π^max is a 1-potential, else the oriented continuative
/// neighbor across the σ-dependent boundary.
pub fn succ(game: &Game<Rational>, state: &SupportState) -> Result<Step, SolveError> {
    if state.lambda_max.is_one() {
        return Ok(Step::Terminal);
    }
    let upper = state.sigma() > 0;
    advance(game, state, upper)
}

/// pred: terminal when π^min is a 0-potential.
pub fn pred(game: &Game<Rational>, state: &SupportState) -> Result<Step, SolveError> {
    if state.lambda_min.is_zero() {
        return Ok(Step::Terminal);
    }
    let upper = state.sigma() < 0;
    advance(game, state, upper)
}

/// Cross the chosen boundary of `state`.
fn advance(game: &Game<Rational>, state: &SupportState, upper: bool) -> Result<Step, SolveError> {
    let (bound_lambda, bound_pi, tight) = if upper {
        (&state.lambda_max, &state.pi_max, &state.tight_max)
    } else {
        (&state.lambda_min, &state.pi_min, &state.tight_min)
    };
    let (e, i) = match tight {
        TightBound::Pair { edge, player } => (*edge, *player),
        TightBound::Clamp0 => return Err(SolveError::ClampedBoundary { side: "0" }),
        TightBound::Clamp1 => return Err(SolveError::ClampedBoundary { side: "1" }),
    };
    match state.lap.rank_one_update(game, e, i)? {
        UpdateOutcome::Ok(lap) => {
            check_sign_relation(game, state, &lap, e, i)?;
            let next = compute_state(game, lap)?;
            Ok(Step::Pivot(Box::new(next)))
        }
        UpdateOutcome::Degenerate { nullspace } => {
            let (plateau, next) = traverse_degenerate(
                game,
                state,
                (e, i),
                bound_lambda.clone(),
                bound_pi.clone(),
                nullspace,
            )?;
            Ok(Step::DegenerateHop {
                plateau: Box::new(plateau),
                next: Box::new(next),
            })
        }
    }
}

/// Orientation sign relation between the direction derivatives of the
/// shared constraint across a pivot, checked exactly on every executed pivot:
/// sgn(w_{S,e,i}ᵀGᵀΔπ_S) = −σ_S·σ_{S'}·sgn(w_{S',e,i}ᵀGᵀΔπ_{S'}).
fn check_sign_relation(
    game: &Game<Rational>,
    state: &SupportState,
    next_lap: &BlockLaplacian,
    e: usize,
    i: usize,
) -> Result<(), SolveError> {
    let g_here = constraint_direction(game, &state.lap, e, i);
    let g_there = constraint_direction(game, next_lap, e, i);
    let lhs = sign_of(&g_here);
    let rhs = -(state.lap.sigma as i32) * (next_lap.sigma as i32) * sign_of(&g_there);
    if lhs != rhs {
        return Err(SolveError::AssertionViolation(format!(
            "orientation sign relation violated at pivot ({e}, {i})"
        )));
    }
    Ok(())
}

/// w_{e,i}ᵀ Gᵀ Δπ for one pair.
fn constraint_direction(
    game: &Game<Rational>,
    lap: &BlockLaplacian,
    e: usize,
    i: usize,
) -> Rational {
    let dpi = lap.potential_direction.as_ref().expect("non-degenerate");
    let t = incidence_apply_transposed(game, dpi);
    let w = support::w_row_sparse(game, &lap.support, e, i);
    let mut acc = Rational::zero();
    for (idx, v) in w {
        acc += v * &t[idx];
    }
    acc
}

fn sign_of(v: &Rational) -> i32 {
    if v.is_zero() {
        0
    } else if *v > Rational::zero() {
        1
    } else {
        -1
    }
}

/// Walk a weakly a-degenerate neighbor S′ along its nullspace direction from
/// the shared boundary potential to the opposite ξ-bound, and exit into the
/// lexicographically selected non-degenerate neighbor there.
///
/// Ties among exit candidates are broken by the implicit ε-perturbation: the
/// perturbed anchor potential is π* + (Δπ_prev·μ̄row + L*GC of the entering
/// state)·ε⃗, making each candidate's perturbed ξ-ratio exactly linear in the
/// ε powers. The walk exits at the first perturbed crossing.
fn traverse_degenerate(
    game: &Game<Rational>,
    state: &SupportState,
    entering: (usize, usize),
    lambda_star: Rational,
    pi_star: PotentialVector<Rational>,
    direction: Vec<Rational>,
) -> Result<(PlateauRecord, SupportState), SolveError> {
    let degenerate = state.support().toggled(entering.0, entering.1);
    let (m, k) = (game.num_edges(), game.num_players());

    // constraint system along the walk: f_p(ξ) = h_p + ξ·g_p ≥ 0
    let dir_pot = PotentialVector::from_vec(direction.clone());
    let t_dir = incidence_apply_transposed(game, &dir_pot.values);
    let g = support::w_values(game, &degenerate, &t_dir);
    let t_base = support::shifted_differences(game, &pi_star);
    let h = support::w_values(game, &degenerate, &t_base);

    let p_enter = game.pair_index(entering.0, entering.1);
    if !h[p_enter].is_zero() {
        return Err(SolveError::AssertionViolation(
            "entering constraint not tight on the degenerate support".into(),
        ));
    }
    if g[p_enter].is_zero() {
        return Err(SolveError::AssertionViolation(
            "entering constraint parallel to the nullspace direction".into(),
        ));
    }

    // walk away from the entering hyperplane: ξ keeps f_{p*} ≥ 0
    let walk_positive = g[p_enter] > Rational::zero();
    let zero = Rational::zero();
    let mut xi_bound: Option<Rational> = None;
    let mut ties: Vec<usize> = Vec::new();
    for p in 0..m * k {
        if p == p_enter || g[p].is_zero() {
            continue;
        }
        let binding = if walk_positive {
            g[p] < zero
        } else {
            g[p] > zero
        };
        if !binding {
            continue;
        }
        let ratio = -&h[p] / &g[p];
        let improves = match &xi_bound {
            None => true,
            Some(cur) => {
                if walk_positive {
                    ratio < *cur
                } else {
                    ratio > *cur
                }
            }
        };
        if improves {
            xi_bound = Some(ratio.clone());
            ties = vec![p];
        } else if xi_bound.as_ref() == Some(&ratio) {
            ties.push(p);
        }
    }
    let xi = xi_bound.ok_or_else(|| {
        SolveError::AssertionViolation("unbounded nullspace walk; circulation never blocks".into())
    })?;

    let pi_exit = PotentialVector::from_vec(
        pi_star
            .values
            .iter()
            .zip(&direction)
            .map(|(a, b)| a + &xi * b)
            .collect(),
    );

    let exit_pair = if ties.len() == 1 {
        ties[0]
    } else {
        select_plateau_exit(game, state, p_enter, &degenerate, &g, &ties, walk_positive)?
    };

    let next_support = degenerate.toggled(exit_pair % m, exit_pair / m);
    let lap = BlockLaplacian::build(game, next_support)?;
    if lap.sigma == 0 {
        if lap.rank_defect > 1 {
            return Err(SolveError::RankDefectTooLarge {
                defect: lap.rank_defect,
            });
        }
        return Err(SolveError::AssertionViolation(
            "degenerate traversal exited into another degenerate support".into(),
        ));
    }
    let next = compute_state(game, lap)?;
    if lambda_star < next.lambda_min || lambda_star > next.lambda_max {
        return Err(SolveError::AssertionViolation(
            "plateau exit support does not cover λ*".into(),
        ));
    }

    let circulation = support::apply_c(game, &degenerate, &t_dir);
    let plateau = PlateauRecord {
        support: degenerate,
        lambda: lambda_star,
        pi_entry: pi_star,
        pi_exit,
        direction,
        circulation,
        xi,
    };
    Ok((plateau, next))
}

/// Lexicographic selection among base-tied plateau exit candidates. The
/// candidate rows are ρ_p = w_pᵀ(I − GᵀP)/g_p with P the ε-derivative of the
/// anchor potential, P = Δπ_prev·μ̄row(entering) + L*_prev G C_prev; the walk
/// exits at the perturbed minimum (positive walk) or maximum (negative walk).
fn select_plateau_exit(
    game: &Game<Rational>,
    state: &SupportState,
    p_enter: usize,
    degenerate: &Support,
    g: &[Rational],
    ties: &[usize],
    walk_positive: bool,
) -> Result<usize, SolveError> {
    let (m, k) = (game.num_edges(), game.num_players());
    let prev_lap = &state.lap;
    let dpi_prev = prev_lap.potential_direction.as_ref().unwrap();

    // μ̄ coefficient row of the entering ratio on the previous support
    let t_dir_prev = incidence_apply_transposed(game, dpi_prev);
    let g_prev = support::w_values(game, &prev_lap.support, &t_dir_prev);
    let mu_row = lex_key(game, prev_lap, &g_prev[p_enter], p_enter).coeffs;

    let mut keyed: Vec<(usize, Vec<Rational>)> = Vec::with_capacity(ties.len());
    for &p in ties {
        let (e, i) = (p % m, p / m);
        let w_sparse = support::w_row_sparse(game, degenerate, e, i);
        let mut w_dense = vec![Rational::zero(); m * k];
        for (idx, v) in &w_sparse {
            w_dense[*idx] = v.clone();
        }
        // q = G w (on the degenerate support's row)
        let mut q = vec![Rational::zero(); game.num_vertices() * k];
        for (idx, v) in &w_sparse {
            let (ee, ii) = (idx % m, idx / m);
            let n = game.num_vertices();
            q[ii * n + game.graph.head(ee)] += v;
            q[ii * n + game.graph.tail(ee)] -= v;
        }
        // qᵀ P = (qᵀΔπ_prev)·μ̄row + (L*ᵀq)ᵀ G C_prev
        let mut q_dpi = Rational::zero();
        for (a, b) in q.iter().zip(dpi_prev) {
            if !a.is_zero() && !b.is_zero() {
                q_dpi += a * b;
            }
        }
        let s = prev_lap.solve_transposed(&q);
        let u = incidence_apply_transposed(game, &s);
        let ctu = support::apply_c_transposed(game, &prev_lap.support, &u);
        let mut row = Vec::with_capacity(m * k);
        for idx in 0..m * k {
            let v = (&w_dense[idx] - &q_dpi * &mu_row[idx] - &ctu[idx]) / &g[p];
            row.push(v);
        }
        keyed.push((p, row));
    }
    keyed.sort_by(|a, b| a.1.cmp(&b.1));
    let best = if walk_positive {
        keyed.first().unwrap().1.clone()
    } else {
        keyed.last().unwrap().1.clone()
    };
    let winners: Vec<usize> = keyed
        .iter()
        .filter(|(_, row)| *row == best)
        .map(|(p, _)| *p)
        .collect();
    if winners.len() == 1 {
        return Ok(winners[0]);
    }
    farthest_edge_winner(game, degenerate.clone(), &winners)
}

/// Compute λ-range and tight pairs for a freshly built Laplacian; public
/// entry point combining build and range computation.
pub fn state_for_support(
    game: &Game<Rational>,
    support: Support,
) -> Result<SupportState, SolveError> {
    let lap = BlockLaplacian::build(game, support)?;
    compute_state(game, lap)
}

/// Nullspace segment data of a weakly a-degenerate support entered at π*:
/// exposed for tests.
pub fn nullspace_walk_bounds(
    game: &Game<Rational>,
    degenerate: &Support,
    pi_star: &PotentialVector<Rational>,
    direction: &[Rational],
) -> (Option<Rational>, Option<Rational>) {
    let (m, k) = (game.num_edges(), game.num_players());
    let dir_pot = PotentialVector::from_vec(direction.to_vec());
    let t_dir = incidence_apply_transposed(game, &dir_pot.values);
    let g = support::w_values(game, degenerate, &t_dir);
    let t_base = support::shifted_differences(game, pi_star);
    let h = support::w_values(game, degenerate, &t_base);
    let zero = Rational::zero();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for p in 0..m * k {
        if g[p].is_zero() {
            continue;
        }
        let ratio = -&h[p] / &g[p];
        if g[p] > zero {
            if lo.as_ref().map(|c| ratio > *c).unwrap_or(true) {
                lo = Some(ratio);
            }
        } else if hi.as_ref().map(|c| ratio < *c).unwrap_or(true) {
            hi = Some(ratio);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{gen_random, RandomGameParams};
    use crate::laplacian::BlockLaplacian;
    use crate::{rational_int as q, Rational};

    fn random_games(count: u64) -> impl Iterator<Item = Game<Rational>> {
        (0..count).map(|seed| {
            let params = RandomGameParams {
                vertices: 5,
                edges: 9,
                players: 3,
                ..Default::default()
            };
            gen_random(seed, &params).unwrap().to_game().unwrap()
        })
    }

    #[test]
    fn update_equals_fresh_rebuild_on_executed_pivots() {
        let mut pivots_checked = 0u32;
        for game in random_games(60) {
            let game = if game.graph.is_strongly_connected() {
                game
            } else {
                game.strongly_connect(q(1_000_000))
            };
            let mut state = match start_state(&game) {
                Ok(s) => s,
                Err(_) => continue,
            };
            for _ in 0..40 {
                let (e, i) = match if state.sigma() > 0 {
                    &state.tight_max
                } else {
                    &state.tight_min
                } {
                    TightBound::Pair { edge, player } => (*edge, *player),
                    _ => break,
                };
                match state.lap.rank_one_update(&game, e, i).unwrap() {
                    crate::laplacian::UpdateOutcome::Ok(updated) => {
                        let fresh =
                            BlockLaplacian::build(&game, state.support().toggled(e, i)).unwrap();
                        assert_eq!(updated.sigma, fresh.sigma);
                        assert_eq!(
                            updated.potential_direction, fresh.potential_direction,
                            "Δπ differs from fresh rebuild"
                        );
                        assert_eq!(updated.offset_potential, fresh.offset_potential);
                        pivots_checked += 1;
                        match succ(&game, &state).unwrap() {
                            Step::Pivot(next) => state = *next,
                            _ => break,
                        }
                    }
                    crate::laplacian::UpdateOutcome::Degenerate { .. } => break,
                }
                if state.lambda_max == Rational::one() {
                    break;
                }
            }
        }
        assert!(
            pivots_checked >= 100,
            "only {pivots_checked} pivots exercised"
        );
    }

    #[test]
    fn toggle_twice_restores_laplacian() {
        let game = crate::io::gen_example_8player().to_game().unwrap();
        let s0 = start_support(&game);
        let lap = BlockLaplacian::build(&game, s0.clone()).unwrap();
        let once = match lap.rank_one_update(&game, 4, 0).unwrap() {
            crate::laplacian::UpdateOutcome::Ok(l) => l,
            _ => panic!("unexpected degenerate"),
        };
        let back = match once.rank_one_update(&game, 4, 0).unwrap() {
            crate::laplacian::UpdateOutcome::Ok(l) => l,
            _ => panic!("unexpected degenerate"),
        };
        assert_eq!(back.sigma, lap.sigma);
        assert_eq!(back.potential_direction, lap.potential_direction);
        assert_eq!(back.offset_potential, lap.offset_potential);
        assert_eq!(back.support, s0);
    }

    #[test]
    fn lex_key_total_order() {
        let game = crate::io::gen_example_8player().to_game().unwrap();
        let lap = BlockLaplacian::build(&game, start_support(&game)).unwrap();
        let dpi = lap.potential_direction.clone().unwrap();
        let t_dir = crate::laplacian::incidence_apply_transposed(&game, &dpi);
        let g = crate::support::w_values(&game, &lap.support, &t_dir);
        let mk = game.num_edges() * game.num_players();
        let mut keys: Vec<(usize, LexKey)> = (0..mk)
            .filter(|&p| !g[p].is_zero())
            .map(|p| (p, lex_key(&game, &lap, &g[p], p)))
            .collect();
        keys.sort_by(|a, b| a.1.cmp(&b.1));
        // antisymmetry and transitivity over the sorted sequence
        for w in keys.windows(2) {
            assert!(w[0].1 <= w[1].1);
            if w[0].1 == w[1].1 {
                // equality only between keys of identical coefficient rows
                assert_eq!(w[0].1.coeffs, w[1].1.coeffs);
            }
        }
        for triple in keys.windows(3) {
            if triple[0].1 < triple[1].1 && triple[1].1 < triple[2].1 {
                assert!(triple[0].1 < triple[2].1);
            }
        }
    }

    #[test]
    fn boundary_tightness_along_traces() {
        for game in random_games(25) {
            let game = if game.graph.is_strongly_connected() {
                game
            } else {
                game.strongly_connect(q(1_000_000))
            };
            let mut state = match start_state(&game) {
                Ok(s) => s,
                Err(_) => continue,
            };
            for _ in 0..30 {
                // the tight pair's W-row vanishes at the boundary potential;
                // every other row is nonnegative there
                for (upper, tight, pi) in [
                    (false, state.tight_min.clone(), state.pi_min.clone()),
                    (true, state.tight_max.clone(), state.pi_max.clone()),
                ] {
                    let t = crate::support::shifted_differences(&game, &pi);
                    let w = crate::support::w_values(&game, state.support(), &t);
                    for v in &w {
                        assert!(
                            *v >= Rational::zero(),
                            "negative W-row at a boundary potential"
                        );
                    }
                    if let TightBound::Pair { edge, player } = tight {
                        let idx = game.pair_index(edge, player);
                        assert!(
                            w[idx].is_zero(),
                            "tight row nonzero at bound (upper={upper})"
                        );
                    }
                }
                match succ(&game, &state).unwrap() {
                    Step::Pivot(next) => state = *next,
                    Step::DegenerateHop { next, .. } => state = *next,
                    Step::Terminal => break,
                }
            }
        }
    }

    #[test]
    fn continuative_neighbor_flows_agree_at_shared_boundary() {
        let mut checked = 0;
        for game in random_games(60) {
            let game = if game.graph.is_strongly_connected() {
                game
            } else {
                game.strongly_connect(q(1_000_000))
            };
            let mut state = match start_state(&game) {
                Ok(s) => s,
                Err(_) => continue,
            };
            for _ in 0..25 {
                let boundary_pi = if state.sigma() > 0 {
                    state.pi_max.clone()
                } else {
                    state.pi_min.clone()
                };
                match succ(&game, &state).unwrap() {
                    Step::Pivot(next) => {
                        let here =
                            crate::support::induced_flow(&game, state.support(), &boundary_pi);
                        let there =
                            crate::support::induced_flow(&game, next.support(), &boundary_pi);
                        assert_eq!(here.values, there.values, "flow jump across pivot");
                        checked += 1;
                        state = *next;
                    }
                    Step::DegenerateHop { next, .. } => state = *next,
                    Step::Terminal => break,
                }
            }
        }
        assert!(checked >= 50, "only {checked} shared boundaries checked");
    }

    #[test]
    fn start_state_positive_orientation_on_random_games() {
        let mut checked = 0;
        for seed in 0..100u64 {
            let params = RandomGameParams {
                vertices: 5,
                edges: 8,
                players: 2,
                ..Default::default()
            };
            let game = gen_random(seed, &params).unwrap().to_game().unwrap();
            let game = if game.graph.is_strongly_connected() {
                game
            } else {
                game.strongly_connect(q(1_000_000))
            };
            let state = start_state(&game).expect("start state");
            assert_eq!(state.sigma(), 1);
            assert!(state.lambda_min.is_zero());
            checked += 1;
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn single_edge_game_spans_whole_range() {
        let graph = crate::game::GraphModel::new(2, vec![(0, 1)]);
        let game = Game::new(
            graph,
            vec![crate::game::Commodity {
                source: 0,
                sink: 1,
                rate: q(1),
            }],
            crate::game::CostCoefficients::new(1, vec![q(1)], vec![Rational::zero()]),
            crate::game::ArithmeticMode::Exact,
        );
        let game = game.strongly_connect(q(1_000_000));
        let state = start_state(&game).unwrap();
        assert!(state.lambda_min.is_zero());
        assert_eq!(state.lambda_max, q(1));
        assert!(matches!(succ(&game, &state).unwrap(), Step::Terminal));
        assert!(matches!(pred(&game, &state).unwrap(), Step::Terminal));
    }
}
