//! Flow and cost arithmetic on game instances.

use super::{FlowProfile, Game};
use crate::scalar::Scalar;

/// Total flow per edge: x̄_e = Σ_i x_e^i.
///
/// Panics on a length mismatch, which is a caller bug, not input data.
pub fn aggregate_flow<T: Scalar>(game: &Game<T>, x: &FlowProfile<T>) -> Vec<T> {
    let (m, k) = (game.num_edges(), game.num_players());
    assert_eq!(x.len(), m * k, "flow profile has wrong dimension");
    let mut total = vec![T::zero(); m];
    for i in 0..k {
        for e in 0..m {
            total[e] = total[e].clone() + x.values[game.pair_index(e, i)].clone();
        }
    }
    total
}

/// Marginal total cost μ^i_e(x) = a_{e,i}·x̄_e + b_{e,i} + a_{e,i}·x_e^i.
pub fn marginal_cost<T: Scalar>(
    game: &Game<T>,
    x: &FlowProfile<T>,
    edge: usize,
    player: usize,
) -> T {
    let total = aggregate_edge_flow(game, x, edge);
    marginal_cost_with_total(game, x, &total, edge, player)
}

pub(crate) fn marginal_cost_with_total<T: Scalar>(
    game: &Game<T>,
    x: &FlowProfile<T>,
    total_on_edge: &T,
    edge: usize,
    player: usize,
) -> T {
    let a = game.costs.slope(edge, player).clone();
    let b = game.costs.offset(edge, player).clone();
    let own = x.values[game.pair_index(edge, player)].clone();
    a.clone() * total_on_edge.clone() + b + a * own
}

fn aggregate_edge_flow<T: Scalar>(game: &Game<T>, x: &FlowProfile<T>, edge: usize) -> T {
    let mut t = T::zero();
    for i in 0..game.num_players() {
        t = t + x.values[game.pair_index(edge, i)].clone();
    }
    t
}

/// Player i's total cost C_i(x) = Σ_e x_e^i · (a_{e,i}·x̄_e + b_{e,i}).
pub fn player_cost<T: Scalar>(game: &Game<T>, x: &FlowProfile<T>, player: usize) -> T {
    let m = game.num_edges();
    let mut cost = T::zero();
    for e in 0..m {
        let own = x.values[game.pair_index(e, player)].clone();
        if own == T::zero() {
            continue;
        }
        let total = aggregate_edge_flow(game, x, e);
        let a = game.costs.slope(e, player).clone();
        let b = game.costs.offset(e, player).clone();
        cost = cost + own * (a * total + b);
    }
    cost
}

/// Excess y = G·x with the Γ convention +1 on leaving edges, so an s-t flow of
/// rate r has y_s = +r and y_t = −r. Player-major, length n·k.
pub fn excess<T: Scalar>(game: &Game<T>, x: &FlowProfile<T>) -> Vec<T> {
    let (n, m, k) = (game.num_vertices(), game.num_edges(), game.num_players());
    let mut y = vec![T::zero(); n * k];
    for i in 0..k {
        for e in 0..m {
            let v = x.values[game.pair_index(e, i)].clone();
            if v == T::zero() {
                continue;
            }
            let t = game.graph.tail(e);
            let h = game.graph.head(e);
            y[game.vertex_index(t, i)] = y[game.vertex_index(t, i)].clone() + v.clone();
            y[game.vertex_index(h, i)] = y[game.vertex_index(h, i)].clone() - v;
        }
    }
    y
}
