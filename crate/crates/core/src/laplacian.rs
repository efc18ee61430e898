//! Block Laplacian L = G C Gᵀ of a support, its source-reduced factorization
//! and generalized-inverse action, orientation sign, and rank-one updates.
//!
//! Inside this module the incidence matrix uses the head-positive convention
//! (column of edge e: +1 at the head, −1 at the tail), which is the one that
//! makes `Gᵀπ` the vector of potential increases `π_w − π_v` along edges and
//! matches the excess direction Δy having −r_i at sources. The game-core
//! `excess` convention is the negation; only `d` and Δy feel the difference
//! since L itself is sign-invariant.
//!
//! The reduced matrix L̂ (all k source rows and columns deleted) is held as an
//! integer matrix `M = scale · L̂` with a game-wide scale, factored once
//! fraction-free; the inverse lives in adjugate form and every pivot updates
//! it with exact integer arithmetic.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::SolveError;
use crate::game::{Game, PotentialVector};
use crate::linalg::{AdjugateInverse, FractionFreeLu, IntMatrix};
use crate::support::{self, Support};
use crate::{Int, Rational};

/// Index bookkeeping for deleting every player's source row/column.
#[derive(Debug, Clone)]
pub struct SourceReduction {
    /// full (vertex, player) index → reduced index, None at sources
    pub reduced_of: Vec<Option<usize>>,
    /// reduced index → full index
    pub full_of: Vec<usize>,
}

impl SourceReduction {
    pub fn new(game: &Game<Rational>) -> Self {
        let (n, k) = (game.num_vertices(), game.num_players());
        let mut reduced_of = vec![None; n * k];
        let mut full_of = Vec::with_capacity(k * (n - 1));
        for i in 0..k {
            let s = game.commodities[i].source;
            for v in 0..n {
                if v != s {
                    let full = game.vertex_index(v, i);
                    reduced_of[full] = Some(full_of.len());
                    full_of.push(full);
                }
            }
        }
        SourceReduction {
            reduced_of,
            full_of,
        }
    }

    pub fn reduce(&self, full: &[Rational]) -> Vec<Rational> {
        self.full_of.iter().map(|&f| full[f].clone()).collect()
    }

    pub fn embed(&self, reduced: Vec<Rational>) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.reduced_of.len()];
        for (r, &f) in self.full_of.iter().enumerate() {
            out[f] = reduced[r].clone();
        }
        out
    }
}

/// Game-wide integer scale that clears every denominator appearing in any
/// support's L̂ and in all rank-one update outer products:
/// `lcm_{j=1..k}(j·(j+1)) · lcm(numer(a_{e,i}))`. Entry denominators divide
/// (κ_e+1)·numer(a); an update's outer product adds a factor (κ'_e+1) with
/// κ' = κ ± 1, and the product of two consecutive integers divides the lcm
/// term. Keeping the scale small matters: det(scale·L̂) carries scale^dim,
/// which dominates integer growth.
pub fn game_scale(game: &Game<Rational>) -> Int {
    let k = game.num_players() as i64;
    let mut l = Int::one();
    for j in 1..=k {
        l = l.lcm(&Int::from(j * (j + 1)));
    }
    let mut a = Int::one();
    for i in 0..game.num_players() {
        for e in 0..game.num_edges() {
            a = a.lcm(game.costs.slope(e, i).numer());
        }
    }
    l * a
}

/// What a rank-one update produced.
pub enum UpdateOutcome {
    /// The neighbor is non-degenerate; its Laplacian with updated inverse.
    Ok(BlockLaplacian),
    /// The neighbor is weakly a-degenerate. Carries the normalized nullspace
    /// direction (full n·k coordinates, zeros at sources, first nonzero +1).
    Degenerate { nullspace: Vec<Rational> },
}

/// Block Laplacian of a total support, with the reduced inverse when the
/// support is non-a-degenerate.
#[derive(Debug, Clone)]
pub struct BlockLaplacian {
    pub support: Support,
    /// sgn(det L̂): ±1, or 0 for a-degenerate supports.
    pub sigma: i8,
    /// Rank defect of L̂ (0 when nonsingular).
    pub rank_defect: usize,
    /// Normalized nullspace direction when the defect is exactly 1.
    pub nullspace: Option<Vec<Rational>>,
    /// Offset d = G C b (full n·k, head-positive convention).
    pub offset: Vec<Rational>,
    /// Excess direction Δy (−r_i at s_i, +r_i at t_i).
    pub excess_direction: Vec<Rational>,
    /// Δπ = L* Δy (full n·k, zeros at sources); present iff σ ≠ 0.
    pub potential_direction: Option<Vec<Rational>>,
    /// d̄ = L* d; present iff σ ≠ 0.
    pub offset_potential: Option<Vec<Rational>>,
    /// Δπ as integer numerators over a shared positive denominator; the
    /// pivot hot path works on these to avoid per-entry reductions.
    pub potential_direction_scaled: Option<(Vec<Int>, Int)>,
    /// d̄ in the same shared-denominator form.
    pub offset_potential_scaled: Option<(Vec<Int>, Int)>,
    reduction: SourceReduction,
    scale: Int,
    inverse: Option<AdjugateInverse>,
}

impl BlockLaplacian {
    /// Assemble and factor from scratch. Errors on non-total supports.
    pub fn build(game: &Game<Rational>, support: Support) -> Result<BlockLaplacian, SolveError> {
        if let Some(player) = support::total_violation(game, &support) {
            return Err(SolveError::NonTotalSupport { player });
        }
        let reduction = SourceReduction::new(game);
        let scale = game_scale(game);
        let dim = reduction.full_of.len();
        let (n, k) = (game.num_vertices(), game.num_players());

        // M = scale · L̂, assembled per edge from the structured C entries
        let scale_q = Rational::from_integer(scale.clone());
        let mut m = IntMatrix::zeros(dim, dim);
        for e in 0..game.num_edges() {
            let head = game.graph.head(e);
            let tail = game.graph.tail(e);
            for i in support.active_players(e).collect::<Vec<_>>() {
                let row = support::ctilde_row(game, &support, e, i);
                for (j, coeff) in row.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    let scaled = coeff * &scale_q;
                    debug_assert!(
                        scaled.denom().is_one(),
                        "game scale must clear denominators"
                    );
                    let c = scaled.numer().clone();
                    let hi = reduction.reduced_of[i * n + head];
                    let ti = reduction.reduced_of[i * n + tail];
                    let hj = reduction.reduced_of[j * n + head];
                    let tj = reduction.reduced_of[j * n + tail];
                    if let (Some(a), Some(b)) = (hi, hj) {
                        *m.at_mut(a, b) += &c;
                    }
                    if let (Some(a), Some(b)) = (ti, tj) {
                        *m.at_mut(a, b) += &c;
                    }
                    if let (Some(a), Some(b)) = (hi, tj) {
                        *m.at_mut(a, b) -= &c;
                    }
                    if let (Some(a), Some(b)) = (ti, hj) {
                        *m.at_mut(a, b) -= &c;
                    }
                }
            }
        }

        let lu = FractionFreeLu::factor(m);
        let rank_defect = dim - lu.rank;
        let _ = k;

        let mut lap = BlockLaplacian {
            support,
            sigma: 0,
            rank_defect,
            nullspace: None,
            offset: Vec::new(),
            excess_direction: Vec::new(),
            potential_direction: None,
            offset_potential: None,
            potential_direction_scaled: None,
            offset_potential_scaled: None,
            reduction,
            scale,
            inverse: None,
        };
        lap.offset = lap.compute_offset(game);
        lap.excess_direction = excess_direction(game);

        if rank_defect == 0 {
            let inverse = AdjugateInverse::from_lu(&lu);
            lap.sigma = if inverse.denom.is_positive() { 1 } else { -1 };
            lap.inverse = Some(inverse);
            lap.populate_solutions();
        } else if rank_defect == 1 {
            let kernel = lu.kernel_vector().expect("defect 1 has a kernel vector");
            let kernel: Vec<Rational> = kernel.into_iter().map(Rational::from_integer).collect();
            lap.nullspace = Some(normalize_direction(lap.reduction.embed(kernel)));
        }
        Ok(lap)
    }

    fn compute_offset(&self, game: &Game<Rational>) -> Vec<Rational> {
        let cb = support::apply_c(game, &self.support, game.costs.offsets());
        incidence_apply(game, &cb)
    }

    fn populate_solutions(&mut self) {
        let dy = self.reduction.reduce(&self.excess_direction);
        let d = self.reduction.reduce(&self.offset);
        let dpi = self.solve_reduced_scaled(&dy);
        let dbar = self.solve_reduced_scaled(&d);
        self.potential_direction = Some(self.embed_scaled(&dpi));
        self.offset_potential = Some(self.embed_scaled(&dbar));
        self.potential_direction_scaled = Some((self.embed_ints(dpi.0), dpi.1));
        self.offset_potential_scaled = Some((self.embed_ints(dbar.0), dbar.1));
    }

    fn embed_scaled(&self, scaled: &(Vec<Int>, Int)) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.reduction.reduced_of.len()];
        for (r, &f) in self.reduction.full_of.iter().enumerate() {
            out[f] = Rational::new(scaled.0[r].clone(), scaled.1.clone());
        }
        out
    }

    fn embed_ints(&self, reduced: Vec<Int>) -> Vec<Int> {
        let mut out = vec![Int::zero(); self.reduction.reduced_of.len()];
        for (r, v) in reduced.into_iter().enumerate() {
            out[self.reduction.full_of[r]] = v;
        }
        out
    }

    /// Solve L̂ x = rhs with the result as integer numerators over one shared
    /// positive denominator (no per-entry reduction).
    fn solve_reduced_scaled(&self, rhs: &[Rational]) -> (Vec<Int>, Int) {
        let inv = self
            .inverse
            .as_ref()
            .expect("solve on degenerate Laplacian");
        let (ints, s) = crate::linalg::clear_vec(rhs);
        let (mut num, den) = inv.apply(&ints);
        // x = scale · (N b) / (D · s); fold the scale into the numerators
        for v in &mut num {
            *v *= &self.scale;
        }
        let mut full_den = &den * &s;
        if full_den.is_negative() {
            full_den = -full_den;
            for v in &mut num {
                let neg = -std::mem::take(v);
                *v = neg;
            }
        }
        (num, full_den)
    }

    /// Apply L̂⁻¹ to a reduced rational vector.
    fn solve_reduced(&self, rhs: &[Rational]) -> Vec<Rational> {
        let inv = self
            .inverse
            .as_ref()
            .expect("solve on degenerate Laplacian");
        let (ints, s) = crate::linalg::clear_vec(rhs);
        let (num, den) = inv.apply(&ints);
        // L̂⁻¹ = scale · M⁻¹, so x = scale · (N b) / (D · s)
        let full_den = &den * &s;
        num.into_iter()
            .map(|v| Rational::new(v * &self.scale, full_den.clone()))
            .collect()
    }

    /// Apply L̂⁻ᵀ to a reduced rational vector.
    fn solve_reduced_transposed(&self, rhs: &[Rational]) -> Vec<Rational> {
        let inv = self
            .inverse
            .as_ref()
            .expect("solve on degenerate Laplacian");
        let (ints, s) = crate::linalg::clear_vec(rhs);
        let (num, den) = inv.apply_transposed(&ints);
        let full_den = &den * &s;
        num.into_iter()
            .map(|v| Rational::new(v * &self.scale, full_den.clone()))
            .collect()
    }

    /// L* b for a full-length rhs: reduce, solve, embed zeros at sources.
    pub fn solve(&self, rhs_full: &[Rational]) -> Vec<Rational> {
        let reduced = self.reduction.reduce(rhs_full);
        self.reduction.embed(self.solve_reduced(&reduced))
    }

    /// L*ᵀ b for a full-length rhs.
    pub fn solve_transposed(&self, rhs_full: &[Rational]) -> Vec<Rational> {
        let reduced = self.reduction.reduce(rhs_full);
        self.reduction
            .embed(self.solve_reduced_transposed(&reduced))
    }

    /// The unique λ-potential solution π = λΔπ + d̄ in the potential space.
    pub fn solve_potential(
        &self,
        lambda: &Rational,
    ) -> Result<PotentialVector<Rational>, SolveError> {
        let dpi = self
            .potential_direction
            .as_ref()
            .ok_or(SolveError::DegenerateSupport {
                defect: self.rank_defect,
            })?;
        let dbar = self.offset_potential.as_ref().unwrap();
        let values = dpi.iter().zip(dbar).map(|(a, b)| lambda * a + b).collect();
        Ok(PotentialVector::from_vec(values))
    }

    /// Normal vector q = G w_{S,e,i} of the (e,i) constraint hyperplane,
    /// full n·k coordinates.
    pub fn normal_vector(&self, game: &Game<Rational>, e: usize, i: usize) -> Vec<Rational> {
        let w = support::w_row_sparse(game, &self.support, e, i);
        incidence_apply_sparse(game, &w)
    }

    /// "Light" normal vector w' = G (I − Ω' K') u_{e,i} of the toggled
    /// support S' = N(S, e, i), full n·k coordinates.
    pub fn light_normal_vector(&self, game: &Game<Rational>, e: usize, i: usize) -> Vec<Rational> {
        let toggled = self.support.toggled(e, i);
        let den = crate::rational_int(toggled.kappa(e) as i64 + 1);
        let mut sparse: Vec<(usize, Rational)> = Vec::new();
        for j in 0..game.num_players() {
            let mut v = Rational::zero();
            if j == i {
                v += Rational::one();
            }
            if toggled.is_active(e, j) {
                v -= Rational::one() / &den;
            }
            if !v.is_zero() {
                sparse.push((game.pair_index(e, j), v));
            }
        }
        incidence_apply_sparse(game, &sparse)
    }

    /// Rank-one pivot to the (e,i)-neighbor: L_{S'} = L_S − w' qᵀ with the
    /// Sherman–Morrison inverse update, or the degenerate marker when the
    /// update factor 1 − qᵀL*w' vanishes. (The sign of the outer product is
    /// calibrated so that a fresh rebuild of the neighbor agrees entrywise;
    /// the toggled pair's σ flips between the supports.)
    pub fn rank_one_update(
        &self,
        game: &Game<Rational>,
        e: usize,
        i: usize,
    ) -> Result<UpdateOutcome, SolveError> {
        let inv = self.inverse.as_ref().ok_or(SolveError::DegenerateSupport {
            defect: self.rank_defect,
        })?;
        let q: Vec<Rational> = self
            .normal_vector(game, e, i)
            .into_iter()
            .map(|v| -v)
            .collect();
        let wp = self.light_normal_vector(game, e, i);
        let q_red = self.reduction.reduce(&q);
        let wp_red = self.reduction.reduce(&wp);

        // integer scaling of the outer product: w' has denominators dividing
        // κ'_e + 1 (the toggled edge's new count), q the rest of the scale
        let toggled_kappa = self.support.toggled(e, i).kappa(e) as i64;
        let lfac = Int::from(toggled_kappa + 1);
        let vfac = &self.scale / &lfac;
        debug_assert!((&self.scale % &lfac).is_zero());
        let lfac_q = Rational::from_integer(lfac.clone());
        let vfac_q = Rational::from_integer(vfac);
        let u_int: Vec<Int> = wp_red
            .iter()
            .map(|x| {
                let s = x * &lfac_q;
                debug_assert!(s.denom().is_one());
                s.numer().clone()
            })
            .collect();
        let v_int: Vec<Int> = q_red
            .iter()
            .map(|x| {
                let s = x * &vfac_q;
                debug_assert!(s.denom().is_one());
                s.numer().clone()
            })
            .collect();

        let toggled = self.support.toggled(e, i);
        match inv.rank_one_update(&u_int, &v_int) {
            Ok(new_inv) => {
                let mut lap = BlockLaplacian {
                    support: toggled,
                    sigma: if new_inv.denom.is_positive() { 1 } else { -1 },
                    rank_defect: 0,
                    nullspace: None,
                    offset: Vec::new(),
                    excess_direction: self.excess_direction.clone(),
                    potential_direction: None,
                    offset_potential: None,
                    potential_direction_scaled: None,
                    offset_potential_scaled: None,
                    reduction: self.reduction.clone(),
                    scale: self.scale.clone(),
                    inverse: Some(new_inv),
                };
                lap.offset = lap.compute_offset(game);
                lap.populate_solutions();
                Ok(UpdateOutcome::Ok(lap))
            }
            Err(nu) => {
                // kernel of L̂_{S'} is spanned by L̂_S⁻¹ ŵ' ∝ N u
                let dir: Vec<Rational> = nu.into_iter().map(Rational::from_integer).collect();
                let full = normalize_direction(self.reduction.embed(dir));
                Ok(UpdateOutcome::Degenerate { nullspace: full })
            }
        }
    }

    /// Dense reduced L̂ entries as rationals (row-major); for tests and the
    /// entrywise update-consistency oracle.
    pub fn reduced_dense(&self, game: &Game<Rational>) -> Vec<Rational> {
        let dim = self.reduction.full_of.len();
        let n = game.num_vertices();
        let mut out = vec![Rational::zero(); dim * dim];
        for e in 0..game.num_edges() {
            let head = game.graph.head(e);
            let tail = game.graph.tail(e);
            for i in self.support.active_players(e).collect::<Vec<_>>() {
                let row = support::ctilde_row(game, &self.support, e, i);
                for (j, coeff) in row.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    let hi = self.reduction.reduced_of[i * n + head];
                    let ti = self.reduction.reduced_of[i * n + tail];
                    let hj = self.reduction.reduced_of[j * n + head];
                    let tj = self.reduction.reduced_of[j * n + tail];
                    if let (Some(a), Some(b)) = (hi, hj) {
                        out[a * dim + b] += coeff;
                    }
                    if let (Some(a), Some(b)) = (ti, tj) {
                        out[a * dim + b] += coeff;
                    }
                    if let (Some(a), Some(b)) = (hi, tj) {
                        out[a * dim + b] -= coeff;
                    }
                    if let (Some(a), Some(b)) = (ti, hj) {
                        out[a * dim + b] -= coeff;
                    }
                }
            }
        }
        out
    }

    pub fn reduction(&self) -> &SourceReduction {
        &self.reduction
    }
}

/// Δy in the head-positive convention: −r_i at s_i, +r_i at t_i.
pub fn excess_direction(game: &Game<Rational>) -> Vec<Rational> {
    let (n, k) = (game.num_vertices(), game.num_players());
    let mut dy = vec![Rational::zero(); n * k];
    for (i, com) in game.commodities.iter().enumerate() {
        dy[game.vertex_index(com.source, i)] = -com.rate.clone();
        dy[game.vertex_index(com.sink, i)] = com.rate.clone();
    }
    dy
}

/// y = G t for a dense pair vector t (head-positive convention).
pub fn incidence_apply(game: &Game<Rational>, t: &[Rational]) -> Vec<Rational> {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let mut out = vec![Rational::zero(); n * k];
    for i in 0..k {
        for e in 0..m {
            let v = &t[game.pair_index(e, i)];
            if v.is_zero() {
                continue;
            }
            out[i * n + game.graph.head(e)] += v;
            out[i * n + game.graph.tail(e)] -= v;
        }
    }
    out
}

fn incidence_apply_sparse(game: &Game<Rational>, t: &[(usize, Rational)]) -> Vec<Rational> {
    let (n, m) = (game.num_vertices(), game.num_edges());
    let mut out = vec![Rational::zero(); n * game.num_players()];
    for (pair, v) in t {
        let e = pair % m;
        let i = pair / m;
        out[i * n + game.graph.head(e)] += v;
        out[i * n + game.graph.tail(e)] -= v;
    }
    out
}

/// Gᵀ y: potential differences y_head − y_tail per (edge, player).
pub fn incidence_apply_transposed(game: &Game<Rational>, y: &[Rational]) -> Vec<Rational> {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let mut out = vec![Rational::zero(); m * k];
    for i in 0..k {
        for e in 0..m {
            out[game.pair_index(e, i)] =
                &y[i * n + game.graph.head(e)] - &y[i * n + game.graph.tail(e)];
        }
    }
    out
}

/// Scale so the first nonzero coordinate becomes +1.
pub fn normalize_direction(mut v: Vec<Rational>) -> Vec<Rational> {
    if let Some(first) = v.iter().find(|x| !x.is_zero()).cloned() {
        for x in &mut v {
            *x = &*x / &first;
        }
    }
    v
}

impl BlockLaplacian {
    /// Bit length of the current reduced determinant (diagnostics).
    pub fn denom_bits(&self) -> u64 {
        self.inverse
            .as_ref()
            .map(|inv| inv.denom.bits())
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{gen_random, RandomGameParams};
    use crate::pivot;
    use crate::support::Support;
    use num_traits::Signed as _;
    use rand::{Rng, SeedableRng};

    // player-independent games: L symmetric, PSD, and every total support
    // positively oriented
    #[test]
    fn player_independent_laplacians_are_symmetric_psd_with_positive_sign() {
        let params = RandomGameParams {
            vertices: 4,
            edges: 6,
            players: 2,
            player_independent: true,
            ..Default::default()
        };
        let game = gen_random(5, &params).unwrap().to_game().unwrap();
        let game = if game.graph.is_strongly_connected() {
            game
        } else {
            game.strongly_connect(crate::rational_int(1_000_000))
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (m, k) = (game.num_edges(), game.num_players());
        let mut sampled = 0;
        let mut attempts = 0;
        while sampled < 8 && attempts < 200 {
            attempts += 1;
            let pairs: Vec<(usize, usize)> = (0..m * k)
                .filter(|_| rng.random_bool(0.7))
                .map(|p| (p % m, p / m))
                .collect();
            let support = Support::from_active_pairs(m, k, pairs);
            let lap = match BlockLaplacian::build(&game, support) {
                Ok(l) => l,
                Err(_) => continue,
            };
            sampled += 1;
            assert_eq!(lap.sigma, 1, "total support with non-positive orientation");
            let dense = lap.reduced_dense(&game);
            let dim = lap.reduction().full_of.len();
            for r in 0..dim {
                for c in 0..dim {
                    assert_eq!(dense[r * dim + c], dense[c * dim + r], "L̂ not symmetric");
                }
            }
            // vᵀ L̂ v ≥ 0 on random rational vectors
            for _ in 0..1000 {
                let v: Vec<Rational> = (0..dim)
                    .map(|_| {
                        Rational::new(
                            Int::from(rng.random_range(-8i64..=8)),
                            Int::from(rng.random_range(1i64..=4)),
                        )
                    })
                    .collect();
                let mut acc = Rational::zero();
                for r in 0..dim {
                    for c in 0..dim {
                        if !dense[r * dim + c].is_zero() {
                            acc += &dense[r * dim + c] * &v[r] * &v[c];
                        }
                    }
                }
                assert!(!acc.is_negative(), "vᵀL̂v < 0 on a player-independent game");
            }
        }
        assert!(sampled >= 4, "too few total supports sampled");
    }

    // λ-potential conditions hold on [λmin, λmax] and fail outside
    #[test]
    fn lambda_potential_interval_is_sharp() {
        let params = RandomGameParams {
            vertices: 4,
            edges: 7,
            players: 2,
            ..Default::default()
        };
        let mut checked = 0;
        for seed in 0..20u64 {
            let game = gen_random(seed, &params).unwrap().to_game().unwrap();
            let game = if game.graph.is_strongly_connected() {
                game
            } else {
                game.strongly_connect(crate::rational_int(1_000_000))
            };
            let state = match pivot::start_state(&game) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let step = Rational::new(Int::from(1), Int::from(16));
            let mut lam = Rational::zero();
            while lam <= crate::rational_int(1) {
                let pi = state.lap.solve_potential(&lam).unwrap();
                let (ok, _) =
                    crate::support::check_lambda_potential(&game, &state.lap.support, &pi, &lam);
                let inside = lam >= state.lambda_min && lam <= state.lambda_max;
                assert_eq!(ok, inside, "seed {seed}, λ = {lam}");
                checked += 1;
                lam += &step;
            }
        }
        assert!(checked > 100);
    }
}
