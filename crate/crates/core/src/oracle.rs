//! Independent equilibrium computation for small instances, used to validate
//! the homotopy solver. Deliberately separate algorithms: water-filling and
//! path-space projected gradient in floats, plus an exhaustive support scan
//! with its own rational elimination. No code shared with the solver's
//! linear algebra.

use num_traits::{One, Signed, Zero};

use crate::error::OracleError;
use crate::game::{FlowProfile, Game};
use crate::Rational;

/// Oracle mode selector (CLI surface).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    BestResponse,
    PotentialMin,
    ExhaustiveSupport,
}

/// Iteration limits and tolerances for the iterative oracles.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub mode: OracleMode,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_iterations: 200_000,
            tolerance: 1e-11,
            mode: OracleMode::BestResponse,
        }
    }
}

/// Enumerate simple s→t paths as edge-index sequences (DFS, capped).
pub fn enumerate_paths(game: &Game<f64>, s: usize, t: usize, cap: usize) -> Vec<Vec<usize>> {
    let n = game.num_vertices();
    let mut out = Vec::new();
    let mut stack_path: Vec<usize> = Vec::new();
    let mut on_path = vec![false; n];
    fn dfs(
        game: &Game<f64>,
        v: usize,
        t: usize,
        on_path: &mut Vec<bool>,
        stack_path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        if v == t {
            out.push(stack_path.clone());
            return;
        }
        on_path[v] = true;
        for e in 0..game.num_edges() {
            if game.graph.tail(e) == v && !on_path[game.graph.head(e)] {
                stack_path.push(e);
                dfs(game, game.graph.head(e), t, on_path, stack_path, out, cap);
                stack_path.pop();
            }
        }
        on_path[v] = false;
    }
    dfs(game, s, t, &mut on_path, &mut stack_path, &mut out, cap);
    out
}

fn is_parallel_link_for(game: &Game<f64>, player: usize) -> bool {
    let s = game.commodities[player].source;
    let t = game.commodities[player].sink;
    (0..game.num_edges()).all(|e| {
        let (a, b) = (game.graph.tail(e), game.graph.head(e));
        (a == s && b == t) || (a == t && b == s)
    })
}

/// Water-filling on parallel links: minimize Σ a_e x_e² + o_e x_e over the
/// simplex of rate `total`, where o_e = a_e·(others' flow) + b_e. Links are
/// opened in order of effective offset while the marginal level exceeds the
/// next offset.
pub fn water_filling(slopes: &[f64], offsets: &[f64], total: f64) -> Vec<f64> {
    let m = slopes.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| offsets[a].partial_cmp(&offsets[b]).unwrap());
    let mut flows = vec![0.0; m];
    if total <= 0.0 {
        return flows;
    }
    let mut inv_sum = 0.0; // Σ 1/(2a) over the open set
    let mut ratio_sum = 0.0; // Σ o/(2a)
    let mut open = 0;
    let mut level = 0.0;
    for step in 0..m {
        let e = order[step];
        inv_sum += 1.0 / (2.0 * slopes[e]);
        ratio_sum += offsets[e] / (2.0 * slopes[e]);
        open = step + 1;
        level = (total + ratio_sum) / inv_sum;
        let next_offset = if step + 1 < m {
            offsets[order[step + 1]]
        } else {
            f64::INFINITY
        };
        if level <= next_offset {
            break;
        }
    }
    for &e in order.iter().take(open) {
        flows[e] = ((level - offsets[e]) / (2.0 * slopes[e])).max(0.0);
    }
    flows
}

/// Exact best response of one player with the others fixed: closed-form
/// water-filling on parallel links, projected gradient with decreasing steps
/// in path space otherwise.
pub fn best_response(
    game: &Game<f64>,
    x: &FlowProfile<f64>,
    player: usize,
    lambda: f64,
    config: &OracleConfig,
) -> Result<Vec<f64>, OracleError> {
    let m = game.num_edges();
    let rate = lambda * game.commodities[player].rate;
    if is_parallel_link_for(game, player) {
        let s = game.commodities[player].source;
        let mut slopes = Vec::new();
        let mut offsets = Vec::new();
        let mut forward = Vec::new();
        for e in 0..m {
            if game.graph.tail(e) == s {
                let a = *game.costs.slope(e, player);
                let others: f64 = (0..game.num_players())
                    .filter(|&j| j != player)
                    .map(|j| x.values[game.pair_index(e, j)])
                    .sum();
                slopes.push(a);
                offsets.push(a * others + game.costs.offset(e, player));
                forward.push(e);
            }
        }
        let flows = water_filling(&slopes, &offsets, rate);
        let mut out = vec![0.0; m];
        for (idx, &e) in forward.iter().enumerate() {
            out[e] = flows[idx];
        }
        return Ok(out);
    }

    // general graphs: projected gradient over the path simplex
    let s = game.commodities[player].source;
    let t = game.commodities[player].sink;
    let paths = enumerate_paths(game, s, t, 20_000);
    if paths.is_empty() {
        return Err(OracleError::NoConverge {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let others: Vec<f64> = (0..m)
        .map(|e| {
            (0..game.num_players())
                .filter(|&j| j != player)
                .map(|j| x.values[game.pair_index(e, j)])
                .sum()
        })
        .collect();
    let np = paths.len();
    let mut z = vec![rate / np as f64; np];
    let mut edge_flow = vec![0.0; m];
    let path_marginals = |z: &[f64], edge_flow: &mut Vec<f64>| -> Vec<f64> {
        for v in edge_flow.iter_mut() {
            *v = 0.0;
        }
        for (p, path) in paths.iter().enumerate() {
            for &e in path {
                edge_flow[e] += z[p];
            }
        }
        paths
            .iter()
            .map(|path| {
                path.iter()
                    .map(|&e| {
                        let a = *game.costs.slope(e, player);
                        let b = *game.costs.offset(e, player);
                        a * (edge_flow[e] + others[e]) + b + a * edge_flow[e]
                    })
                    .sum()
            })
            .collect()
    };
    let base_step = 1.0 / (1.0 + slope_scale(game, player) * np as f64);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    for it in 1..=config.max_iterations {
        iterations = it;
        let grad = path_marginals(&z, &mut edge_flow);
        // optimality: used paths at the minimum marginal
        let min_all = grad.iter().cloned().fold(f64::INFINITY, f64::min);
        residual = grad
            .iter()
            .zip(&z)
            .filter(|(_, &zp)| zp > 1e-12)
            .map(|(g, _)| g - min_all)
            .fold(0.0, f64::max);
        if residual <= config.tolerance {
            break;
        }
        let step = base_step / (it as f64).sqrt();
        let moved: Vec<f64> = z.iter().zip(&grad).map(|(zp, g)| zp - step * g).collect();
        z = project_simplex(&moved, rate);
    }
    if residual > config.tolerance.max(1e-8) {
        return Err(OracleError::NoConverge {
            iterations,
            residual,
        });
    }
    let mut out = vec![0.0; m];
    for (p, path) in paths.iter().enumerate() {
        for &e in path {
            out[e] += z[p];
        }
    }
    Ok(out)
}

fn slope_scale(game: &Game<f64>, player: usize) -> f64 {
    (0..game.num_edges())
        .map(|e| *game.costs.slope(e, player))
        .fold(1.0, f64::max)
}

/// Euclidean projection onto {z ≥ 0, Σz = total}.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    if total <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, &val) in sorted.iter().enumerate() {
        acc += val;
        let cand = (acc - total) / (i + 1) as f64;
        if i + 1 == sorted.len() || sorted[i + 1] <= cand {
            theta = cand;
            if i + 1 < sorted.len() && sorted[i + 1] > cand {
                continue;
            }
            break;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Round-robin best responses until a fixed point. Convergence is not
/// guaranteed in general and failure is reported honestly.
pub fn oracle_equilibrium(
    game: &Game<f64>,
    lambda: f64,
    config: &OracleConfig,
) -> Result<FlowProfile<f64>, OracleError> {
    let (m, k) = (game.num_edges(), game.num_players());
    let mut x = FlowProfile::zeros(m * k);
    let rounds = config.max_iterations.min(10_000).max(1);
    let mut change = f64::INFINITY;
    for _ in 0..rounds {
        change = 0.0f64;
        for i in 0..k {
            let br = best_response(game, &x, i, lambda, config)?;
            for e in 0..m {
                let idx = game.pair_index(e, i);
                change = change.max((x.values[idx] - br[e]).abs());
                x.values[idx] = br[e];
            }
        }
        if change <= config.tolerance.max(1e-12) {
            return Ok(x);
        }
    }
    Err(OracleError::NoConverge {
        iterations: rounds,
        residual: change,
    })
}

/// Minimizer of the convex potential Φ(x) = Σ_e a_e(x̄_e² + Σ_i (x_e^i)²)/2
/// + b_e x̄_e whose KKT conditions are the equilibrium conditions for
/// player-independent costs. Path-space FISTA plus an active-set polish.
pub fn potential_minimizer(
    game: &Game<f64>,
    lambda: f64,
    config: &OracleConfig,
) -> Result<FlowProfile<f64>, OracleError> {
    let (m, k) = (game.num_edges(), game.num_players());
    for e in 0..m {
        for i in 1..k {
            if game.costs.slope(e, i) != game.costs.slope(e, 0)
                || game.costs.offset(e, i) != game.costs.offset(e, 0)
            {
                return Err(OracleError::UnsupportedCosts);
            }
        }
    }
    let paths: Vec<Vec<Vec<usize>>> = (0..k)
        .map(|i| {
            enumerate_paths(
                game,
                game.commodities[i].source,
                game.commodities[i].sink,
                20_000,
            )
        })
        .collect();
    if paths.iter().any(|p| p.is_empty()) {
        return Err(OracleError::NoConverge {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let rates: Vec<f64> = game.commodities.iter().map(|c| lambda * c.rate).collect();

    // z: concatenated path flows per player
    let sizes: Vec<usize> = paths.iter().map(|p| p.len()).collect();
    let offsets_z: Vec<usize> = sizes
        .iter()
        .scan(0, |acc, &s| {
            let v = *acc;
            *acc += s;
            Some(v)
        })
        .collect();
    let total_paths: usize = sizes.iter().sum();
    let mut z = vec![0.0; total_paths];
    for i in 0..k {
        for p in 0..sizes[i] {
            z[offsets_z[i] + p] = rates[i] / sizes[i] as f64;
        }
    }

    let edge_flows = |z: &[f64]| -> Vec<f64> {
        let mut per_pair = vec![0.0; m * k];
        for i in 0..k {
            for (p, path) in paths[i].iter().enumerate() {
                let zp = z[offsets_z[i] + p];
                for &e in path {
                    per_pair[i * m + e] += zp;
                }
            }
        }
        per_pair
    };
    let grad = |z: &[f64]| -> Vec<f64> {
        let per_pair = edge_flows(z);
        let mut totals = vec![0.0; m];
        for i in 0..k {
            for e in 0..m {
                totals[e] += per_pair[i * m + e];
            }
        }
        let mut g = vec![0.0; total_paths];
        for i in 0..k {
            for (p, path) in paths[i].iter().enumerate() {
                g[offsets_z[i] + p] = path
                    .iter()
                    .map(|&e| {
                        let a = *game.costs.slope(e, 0);
                        let b = *game.costs.offset(e, 0);
                        a * totals[e] + b + a * per_pair[i * m + e]
                    })
                    .sum();
            }
        }
        g
    };

    // FISTA with a conservative fixed step
    let max_a = (0..m).map(|e| *game.costs.slope(e, 0)).fold(0.0, f64::max);
    let max_len = paths.iter().flatten().map(|p| p.len()).max().unwrap_or(1);
    let lip = max_a * (k as f64 + 1.0) * max_len as f64 * total_paths as f64;
    let step = 1.0 / lip.max(1e-9);
    let mut y = z.clone();
    let mut t_acc = 1.0;
    for _ in 0..config.max_iterations.min(50_000) {
        let g = grad(&y);
        let mut z_new = vec![0.0; total_paths];
        for i in 0..k {
            let lo = offsets_z[i];
            let hi = lo + sizes[i];
            let moved: Vec<f64> = (lo..hi).map(|p| y[p] - step * g[p]).collect();
            let proj = project_simplex(&moved, rates[i]);
            z_new[lo..hi].copy_from_slice(&proj);
        }
        let t_new = (1.0 + (1.0_f64 + 4.0 * t_acc * t_acc).sqrt()) / 2.0;
        for p in 0..total_paths {
            y[p] = z_new[p] + ((t_acc - 1.0) / t_new) * (z_new[p] - z[p]);
        }
        z = z_new;
        t_acc = t_new;
        // cheap stationarity check every so often
        let g_now = grad(&z);
        let mut worst = 0.0f64;
        for i in 0..k {
            let lo = offsets_z[i];
            let hi = lo + sizes[i];
            let min_all = (lo..hi).map(|p| g_now[p]).fold(f64::INFINITY, f64::min);
            for p in lo..hi {
                if z[p] > 1e-10 {
                    worst = worst.max(g_now[p] - min_all);
                }
            }
        }
        if worst < 1e-9 {
            break;
        }
    }

    // active-set polish: exact equality-KKT solve on the supported paths
    for _ in 0..60 {
        let g_now = grad(&z);
        let mut active: Vec<Vec<usize>> = Vec::with_capacity(k);
        for i in 0..k {
            let lo = offsets_z[i];
            let hi = lo + sizes[i];
            let min_all = (lo..hi).map(|p| g_now[p]).fold(f64::INFINITY, f64::min);
            let mut act: Vec<usize> = (lo..hi)
                .filter(|&p| z[p] > 1e-9 || g_now[p] <= min_all + 1e-9)
                .collect();
            if act.is_empty() {
                act.push(lo);
            }
            active.push(act);
        }
        match solve_restricted_kkt(game, &paths, &offsets_z, &active, &rates, m, k) {
            Some(candidate) => {
                let negative = candidate.iter().any(|&v| v < -1e-10);
                if !negative {
                    // accept if no inactive path strictly improves
                    let g_cand = grad(&candidate);
                    let mut ok = true;
                    for i in 0..k {
                        let lo = offsets_z[i];
                        let hi = lo + sizes[i];
                        let level = active[i]
                            .iter()
                            .map(|&p| g_cand[p])
                            .fold(f64::NEG_INFINITY, f64::max);
                        for p in lo..hi {
                            if !active[i].contains(&p) && g_cand[p] < level - 1e-9 {
                                ok = false;
                            }
                        }
                    }
                    z = candidate;
                    if ok {
                        break;
                    }
                } else {
                    // drop the most negative path and keep iterating from z
                    let mut worst = (0usize, 0.0f64);
                    for (p, &v) in candidate.iter().enumerate() {
                        if v < worst.1 {
                            worst = (p, v);
                        }
                    }
                    z[worst.0] = 0.0;
                }
            }
            None => break,
        }
    }

    let per_pair = edge_flows(&z);
    Ok(FlowProfile::from_vec(per_pair))
}

/// Solve the equality-constrained quadratic minimization of Φ restricted to
/// the active paths (z_off = 0, per-player sum fixed). Returns the full z.
fn solve_restricted_kkt(
    game: &Game<f64>,
    paths: &[Vec<Vec<usize>>],
    offsets_z: &[usize],
    active: &[Vec<usize>],
    rates: &[f64],
    m: usize,
    k: usize,
) -> Option<Vec<f64>> {
    // unknowns: active path flows + one multiplier per player
    let na: usize = active.iter().map(|a| a.len()).sum();
    let dim = na + k;
    let mut a = vec![vec![0.0f64; dim]; dim];
    let mut b = vec![0.0f64; dim];
    let flat: Vec<(usize, usize)> = active
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |&p| (i, p)))
        .collect();
    let path_of = |i: usize, p: usize| &paths[i][p - offsets_z[i]];
    // stationarity: Σ_e∈P a_e (x̄_e + x^i_e) + b_e = μ_i  →  H z − μ = −c
    for (r, &(i, p)) in flat.iter().enumerate() {
        let path_p = path_of(i, p);
        for (c, &(j, q)) in flat.iter().enumerate() {
            let path_q = path_of(j, q);
            let mut h = 0.0;
            for &e in path_p {
                if path_q.contains(&e) {
                    let factor = if i == j { 2.0 } else { 1.0 };
                    h += factor * game.costs.slope(e, 0);
                }
            }
            a[r][c] = h;
        }
        a[r][na + i] = -1.0;
        b[r] = -path_p
            .iter()
            .map(|&e| *game.costs.offset(e, 0))
            .sum::<f64>();
    }
    for i in 0..k {
        for (c, &(j, _)) in flat.iter().enumerate() {
            if j == i {
                a[na + i][c] = 1.0;
            }
        }
        b[na + i] = rates[i];
    }
    let sol = gauss_f64(&mut a, &mut b)?;
    let total: usize = paths.iter().map(|p| p.len()).sum();
    let mut z = vec![0.0; total];
    for (r, &(_, p)) in flat.iter().enumerate() {
        z[p] = sol[r];
    }
    let _ = m;
    Some(z)
}

/// Small dense float solve with partial pivoting; oracle-local.
fn gauss_f64(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Outcome of solving one support's KKT system exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportSolveOutcome {
    /// Unique equilibrium with this support; `strict` when all active flows
    /// are positive and all inactive constraints hold strictly.
    Unique {
        flow: FlowProfile<Rational>,
        strict: bool,
    },
    /// Singular but consistent system: a continuum of equilibria.
    Continuum,
    /// No equilibrium with this support.
    Infeasible,
}

/// Exact rational Gauss–Jordan, oracle-local; distinguishes a unique
/// solution, inconsistency, and underdetermined-but-consistent systems.
enum ExactSolve {
    Unique(Vec<Rational>),
    Inconsistent,
    Underdetermined,
}

fn gauss_exact(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> ExactSolve {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut piv_of_col = vec![usize::MAX; cols];
    let mut used = vec![false; rows];
    for c in 0..cols {
        let Some(r) = (0..rows).find(|&r| !used[r] && !a[r][c].is_zero()) else {
            continue;
        };
        used[r] = true;
        piv_of_col[c] = r;
        let p = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = &*x / &p;
        }
        b[r] = &b[r] / &p;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &a[r][j];
                    a[i][j] = &a[i][j] - &sub;
                }
                let sub = &f * &b[r];
                b[i] = &b[i] - &sub;
            }
        }
    }
    for r in 0..rows {
        if !used[r] && !b[r].is_zero() {
            return ExactSolve::Inconsistent;
        }
    }
    if piv_of_col.iter().any(|&p| p == usize::MAX) {
        return ExactSolve::Underdetermined;
    }
    let mut x = vec![Rational::zero(); cols];
    for c in 0..cols {
        x[c] = b[piv_of_col[c]].clone();
    }
    ExactSolve::Unique(x)
}

/// Fast float screen for [`solve_support`]: returns false only when the
/// support's KKT system is comfortably infeasible in f64 (margin −1e-6), so
/// no exact-feasible support is ever discarded.
fn support_plausible_f64(game: &Game<f64>, lambda: f64, support: &crate::support::Support) -> bool {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let vars = m * k + n * k;
    let xi = |e: usize, i: usize| i * m + e;
    let pv = |v: usize, i: usize| m * k + i * n + v;
    let mut a = vec![vec![0.0f64; vars]; vars];
    let mut b = vec![0.0f64; vars];
    let mut row = 0;
    for i in 0..k {
        for e in 0..m {
            if support.is_active(e, i) {
                let s = *game.costs.slope(e, i);
                for j in 0..k {
                    a[row][xi(e, j)] += s;
                }
                a[row][xi(e, i)] += s;
                a[row][pv(game.graph.head(e), i)] -= 1.0;
                a[row][pv(game.graph.tail(e), i)] += 1.0;
                b[row] = -*game.costs.offset(e, i);
            } else {
                a[row][xi(e, i)] = 1.0;
            }
            row += 1;
        }
    }
    for (i, com) in game.commodities.iter().enumerate() {
        for v in 0..n {
            if v == com.source {
                continue;
            }
            for e in 0..m {
                if game.graph.tail(e) == v {
                    a[row][xi(e, i)] += 1.0;
                }
                if game.graph.head(e) == v {
                    a[row][xi(e, i)] -= 1.0;
                }
            }
            if v == com.sink {
                b[row] = -lambda * com.rate;
            }
            row += 1;
        }
        a[row][pv(com.source, i)] = 1.0;
        row += 1;
    }
    let sol = match gauss_f64(&mut a, &mut b) {
        Some(s) => s,
        None => return true, // near-singular: let the exact path decide
    };
    let slack = 1e-6;
    for i in 0..k {
        for e in 0..m {
            if support.is_active(e, i) {
                if sol[xi(e, i)] < -slack {
                    return false;
                }
            } else {
                let total: f64 = (0..k).map(|j| sol[xi(e, j)]).sum();
                let mu = game.costs.slope(e, i) * total + game.costs.offset(e, i);
                let diff = sol[pv(game.graph.head(e), i)] - sol[pv(game.graph.tail(e), i)];
                if diff > mu + slack {
                    return false;
                }
            }
        }
    }
    true
}

/// Solve the equilibrium system of one support at demand λ·r exactly:
/// unknowns (x, π), equations: tight marginals on active pairs, zero flow on
/// inactive pairs, conservation, and source normalization.
pub fn solve_support(
    game: &Game<Rational>,
    lambda: &Rational,
    support: &crate::support::Support,
) -> SupportSolveOutcome {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let vars = m * k + n * k; // x then π
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();
    let xi = |e: usize, i: usize| i * m + e;
    let pv = |v: usize, i: usize| m * k + i * n + v;

    for i in 0..k {
        for e in 0..m {
            let mut row = vec![Rational::zero(); vars];
            if support.is_active(e, i) {
                // a(x̄ + x^i) + b = π_head − π_tail
                let a = game.costs.slope(e, i).clone();
                for j in 0..k {
                    row[xi(e, j)] += &a;
                }
                row[xi(e, i)] += &a;
                row[pv(game.graph.head(e), i)] -= Rational::one();
                row[pv(game.graph.tail(e), i)] += Rational::one();
                rows.push(row);
                rhs.push(-game.costs.offset(e, i).clone());
            } else {
                row[xi(e, i)] = Rational::one();
                rows.push(row);
                rhs.push(Rational::zero());
            }
        }
    }
    for (i, com) in game.commodities.iter().enumerate() {
        for v in 0..n {
            if v == com.source {
                continue;
            }
            let mut row = vec![Rational::zero(); vars];
            for e in 0..m {
                if game.graph.tail(e) == v {
                    row[xi(e, i)] += Rational::one();
                }
                if game.graph.head(e) == v {
                    row[xi(e, i)] -= Rational::one();
                }
            }
            rows.push(row);
            rhs.push(if v == com.sink {
                -(lambda * &com.rate)
            } else {
                Rational::zero()
            });
        }
        let mut row = vec![Rational::zero(); vars];
        row[pv(com.source, i)] = Rational::one();
        rows.push(row);
        rhs.push(Rational::zero());
    }

    match gauss_exact(rows, rhs) {
        ExactSolve::Inconsistent => SupportSolveOutcome::Infeasible,
        ExactSolve::Underdetermined => SupportSolveOutcome::Continuum,
        ExactSolve::Unique(sol) => {
            let x = FlowProfile::from_vec(sol[..m * k].to_vec());
            let pi = &sol[m * k..];
            // feasibility: x ≥ 0 on active pairs, π_w − π_v ≤ μ on inactive
            let mut strict = true;
            for i in 0..k {
                for e in 0..m {
                    if support.is_active(e, i) {
                        let v = &x.values[xi(e, i)];
                        if v.is_negative() {
                            return SupportSolveOutcome::Infeasible;
                        }
                        if v.is_zero() {
                            strict = false;
                        }
                    } else {
                        let total: Rational = (0..k).map(|j| x.values[xi(e, j)].clone()).sum();
                        let mu = game.costs.slope(e, i) * &total + game.costs.offset(e, i);
                        let diff =
                            &pi[i * n + game.graph.head(e)] - &pi[i * n + game.graph.tail(e)];
                        if diff > mu {
                            return SupportSolveOutcome::Infeasible;
                        }
                        if diff == mu {
                            strict = false;
                        }
                    }
                }
            }
            SupportSolveOutcome::Unique { flow: x, strict }
        }
    }
}

/// Result of the exhaustive scan over total supports.
#[derive(Debug, Clone)]
pub struct ScanResult {
    /// Support-distinct equilibria merged by exact flow equality.
    pub equilibria: Vec<FlowProfile<Rational>>,
    /// Number of a-degenerate feasible supports (continuum of equilibria).
    pub continuum_supports: usize,
    /// Some equilibrium sat on a support boundary (non-strict).
    pub any_nonstrict: bool,
}

/// Budget guard for the exhaustive scan.
pub const SCAN_BUDGET_MK: usize = 18;

/// Enumerate all total supports, solve each system, keep feasible solutions.
pub fn exhaustive_support_scan(
    game: &Game<Rational>,
    lambda: &Rational,
) -> Result<ScanResult, OracleError> {
    let (m, k) = (game.num_edges(), game.num_players());
    if m * k > SCAN_BUDGET_MK {
        return Err(OracleError::BudgetExceeded {
            mk: m * k,
            limit: SCAN_BUDGET_MK,
        });
    }
    // per-player subsets whose edges connect all vertices
    let n = game.num_vertices();
    let mut per_player: Vec<Vec<u32>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut valid = Vec::new();
        for mask in 0u32..(1 << m) {
            let edges: Vec<(usize, usize)> = (0..m)
                .filter(|e| mask & (1 << e) != 0)
                .map(|e| (game.graph.tail(e), game.graph.head(e)))
                .collect();
            if connects_all(n, &edges) {
                valid.push(mask);
            }
        }
        per_player.push(valid);
    }

    let mut result = ScanResult {
        equilibria: Vec::new(),
        continuum_supports: 0,
        any_nonstrict: false,
    };
    let fgame = float_view(game);
    let flambda = crate::scalar::rational_to_f64(lambda);
    let mut stack = vec![0usize; k];
    'outer: loop {
        let support = crate::support::Support::from_active_pairs(
            m,
            k,
            (0..k).flat_map(|i| {
                let mask = per_player[i][stack[i]];
                (0..m)
                    .filter(move |e| mask & (1 << e) != 0)
                    .map(move |e| (e, i))
            }),
        );
        if !support_plausible_f64(&fgame, flambda, &support) {
            for i in 0..k {
                stack[i] += 1;
                if stack[i] < per_player[i].len() {
                    continue 'outer;
                }
                stack[i] = 0;
            }
            break;
        }
        match solve_support(game, lambda, &support) {
            SupportSolveOutcome::Unique { flow, strict } => {
                if !strict {
                    result.any_nonstrict = true;
                }
                if !result.equilibria.iter().any(|f| *f == flow) {
                    result.equilibria.push(flow);
                }
            }
            SupportSolveOutcome::Continuum => result.continuum_supports += 1,
            SupportSolveOutcome::Infeasible => {}
        }
        // advance the odometer
        for i in 0..k {
            stack[i] += 1;
            if stack[i] < per_player[i].len() {
                continue 'outer;
            }
            stack[i] = 0;
        }
        break;
    }
    Ok(result)
}

fn connects_all(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, v: usize) -> usize {
        let mut v = v;
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    let mut comps = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}


/// f64 rendering used by the scan's screening pass.
fn float_view(game: &Game<Rational>) -> Game<f64> {
    game.to_float()
}

#[cfg(test)]
mod ring_tests {
    use super::*;
    use crate::io::gen_example_8player;

    // best-response dynamics from the zero profile on the 8-player ring
    // reach some equilibrium; the verifier is the judge
    #[test]
    fn br_dynamics_on_ring_instance_verify() {
        let game = gen_example_8player().to_game().unwrap().to_float();
        let mut config = OracleConfig::default();
        config.tolerance = 1e-9;
        config.max_iterations = 400_000;
        let x = oracle_equilibrium(&game, 1.0, &config).expect("dynamics converge");
        let report = crate::game::verify_equilibrium(&game, &x, &1.0, &1e-6);
        assert!(report.pass, "oracle output fails verification: {report:?}");
    }
}
