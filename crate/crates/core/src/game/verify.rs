//! Independent Nash-equilibrium verifier.
//!
//! Checks feasibility for demand λ·r and reconstructs per-player potentials
//! as single-source shortest paths under the marginal-cost edge lengths. The
//! equilibrium characterization then reduces to: every used edge is tight on
//! its player's shortest-path potential. This shares no linear algebra with
//! the solver.

use super::{aggregate_flow, excess, ops::marginal_cost_with_total, FlowProfile, Game};
use crate::scalar::Scalar;

/// Outcome of a potential-condition check for one (edge, player) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialCheck<T: Scalar> {
    pub edge: usize,
    pub player: usize,
    /// |π_w − π_v − μ| on a used edge, or the amount by which π_w − π_v
    /// exceeds μ on an unused edge (0 when satisfied).
    pub residual: T,
}

/// Structured verification result. `pass` never throws on a non-equilibrium.
#[derive(Debug, Clone)]
pub struct VerificationReport<T: Scalar> {
    pub pass: bool,
    /// (player, vertex, residual) conservation violations beyond tolerance.
    pub conservation: Vec<(usize, usize, T)>,
    /// (edge, player, value) entries with flow below −tolerance.
    pub negativity: Vec<(usize, usize, T)>,
    /// Violated equality/inequality potential conditions.
    pub potential: Vec<PotentialCheck<T>>,
    /// The shortest-path potentials used for the check, player-major n·k.
    pub potentials: Vec<T>,
}

/// Verify that `x` is a Nash equilibrium for demands `λ·r` within `tolerance`
/// (exact mode uses tolerance 0).
pub fn verify_equilibrium<T: Scalar>(
    game: &Game<T>,
    x: &FlowProfile<T>,
    lambda: &T,
    tolerance: &T,
) -> VerificationReport<T> {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let mut report = VerificationReport {
        pass: true,
        conservation: Vec::new(),
        negativity: Vec::new(),
        potential: Vec::new(),
        potentials: vec![T::zero(); n * k],
    };

    // (a) flow conservation: y must equal λ·r at sources, −λ·r at sinks, 0 elsewhere
    let y = excess(game, x);
    for (i, com) in game.commodities.iter().enumerate() {
        let want = lambda.clone() * com.rate.clone();
        for v in 0..n {
            let mut expected = T::zero();
            if v == com.source {
                expected = want.clone();
            } else if v == com.sink {
                expected = -want.clone();
            }
            let residual = (y[game.vertex_index(v, i)].clone() - expected).abs_val();
            if residual > *tolerance {
                report.conservation.push((i, v, residual));
            }
        }
    }

    // (b) nonnegativity
    for i in 0..k {
        for e in 0..m {
            let v = &x.values[game.pair_index(e, i)];
            if *v < -tolerance.clone() {
                report.negativity.push((e, i, v.clone()));
            }
        }
    }

    // (c) potential existence per player via shortest paths on marginal costs
    let totals = aggregate_flow(game, x);
    for (i, com) in game.commodities.iter().enumerate() {
        let mut lengths = Vec::with_capacity(m);
        for e in 0..m {
            lengths.push(marginal_cost_with_total(game, x, &totals[e], e, i));
        }
        let dist = shortest_paths(game, com.source, &lengths);
        for v in 0..n {
            if let Some(d) = &dist[v] {
                report.potentials[game.vertex_index(v, i)] = d.clone();
            }
        }
        for e in 0..m {
            let used = x.values[game.pair_index(e, i)] > *tolerance;
            let tail = game.graph.tail(e);
            let head = game.graph.head(e);
            match (&dist[tail], &dist[head]) {
                (Some(dt), Some(dh)) => {
                    // shortest-path property gives dh ≤ dt + μ already; a used
                    // edge must additionally be tight
                    if used {
                        let residual = (dh.clone() - dt.clone() - lengths[e].clone()).abs_val();
                        if residual > *tolerance {
                            report.potential.push(PotentialCheck {
                                edge: e,
                                player: i,
                                residual,
                            });
                        }
                    }
                }
                _ => {
                    if used {
                        // flow on an edge not reachable from the source
                        report.potential.push(PotentialCheck {
                            edge: e,
                            player: i,
                            residual: x.values[game.pair_index(e, i)].clone(),
                        });
                    }
                }
            }
        }
    }

    report.pass = report.conservation.is_empty()
        && report.negativity.is_empty()
        && report.potential.is_empty();
    report
}

/// Bellman–Ford from `source`; lengths are marginal costs (nonnegative in
/// valid instances, but the float path may carry tiny negatives).
fn shortest_paths<T: Scalar>(
    game: &Game<impl Scalar>,
    source: usize,
    lengths: &[T],
) -> Vec<Option<T>> {
    let n = game.num_vertices();
    let m = game.num_edges();
    let mut dist: Vec<Option<T>> = vec![None; n];
    dist[source] = Some(T::zero());
    for _ in 0..n {
        let mut changed = false;
        for e in 0..m {
            let t = game.graph.tail(e);
            let h = game.graph.head(e);
            if let Some(dt) = dist[t].clone() {
                let cand = dt + lengths[e].clone();
                let better = match &dist[h] {
                    None => true,
                    Some(dh) => cand < *dh,
                };
                if better {
                    dist[h] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}
