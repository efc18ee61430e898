//! End-to-end checks against the 8-player ring instance whose full
//! trajectory is known in closed form: shortest-path start, a degenerate
//! plateau with a continuum of equilibria at λ = 1/2, and the long-path
//! equilibrium at λ = 1.

use num_traits::{One, Zero};
use spliteq_core::game::{FlowProfile, PotentialVector};
use spliteq_core::io::gen_example_8player;
use spliteq_core::laplacian::BlockLaplacian;
use spliteq_core::support::{self, Support};
use spliteq_core::{homotopy, pivot, ExactGame, Rational};

fn q(v: i64) -> Rational {
    Rational::from_integer(v.into())
}

fn qr(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn game() -> ExactGame {
    gen_example_8player().to_game().unwrap()
}

/// Vertex order per player i: their own source-rotated frame.
/// Player 1 (index 0) has frame v1,v2,v3,v4 = vertices 0,1,2,3.
fn frame(player: usize) -> [usize; 4] {
    // source vertices per player: 0,3,2,1,0,1,2,3
    let sources = [0usize, 3, 2, 1, 0, 1, 2, 3];
    let s = sources[player];
    // direction of the long path: players 0..3 go forward (v1→v2→v3→v4
    // pattern), players 4..7 go backward around the ring
    if player < 4 {
        [s, (s + 1) % 4, (s + 2) % 4, (s + 3) % 4]
    } else {
        [s, (s + 3) % 4, (s + 2) % 4, (s + 1) % 4]
    }
}

/// Potential vector where every player's frame carries the same values.
fn symmetric_potential(game: &ExactGame, values: [Rational; 4]) -> PotentialVector<Rational> {
    let n = game.num_vertices();
    let mut out = vec![Rational::zero(); n * game.num_players()];
    for i in 0..game.num_players() {
        let fr = frame(i);
        for (slot, v) in fr.iter().enumerate() {
            out[game.vertex_index(*v, i)] = values[slot].clone();
        }
    }
    PotentialVector::from_vec(out)
}

/// Active pairs of the start support S⁰: per player the direct edge plus the
/// first two long-path legs.
fn support_s0(game: &ExactGame) -> Support {
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
    let mut pairs = Vec::new();
    for i in 0..8 {
        pairs.push((direct[i], i));
        pairs.push((long[i][0], i));
        pairs.push((long[i][1], i));
    }
    Support::from_active_pairs(game.num_edges(), game.num_players(), pairs)
}

/// S¹: all long-path legs active on top of S⁰ (the a-degenerate support).
fn support_s1(game: &ExactGame) -> Support {
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
    let mut s = support_s0(game);
    for i in 0..8 {
        s = s.toggled(long[i][2], i);
    }
    s
}

/// S²: only the long paths active (direct edges deactivated from S¹).
fn support_s2(game: &ExactGame) -> Support {
    let direct = [7usize, 5, 3, 1, 0, 2, 4, 6];
    let mut s = support_s1(game);
    for i in 0..8 {
        s = s.toggled(direct[i], i);
    }
    s
}

#[test]
fn start_support_matches_figure() {
    let game = game();
    let s = pivot::start_support(&game);
    assert_eq!(s, support_s0(&game));
}

#[test]
fn start_potential_and_direction() {
    let game = game();
    let state = pivot::start_state(&game).unwrap();
    let pi0 = symmetric_potential(&game, [q(0), q(6), q(12), q(3)]);
    assert_eq!(state.lap.offset_potential.as_ref().unwrap(), &pi0.values);
    let dpi0 = symmetric_potential(&game, [q(0), q(2), q(4), q(36)]);
    assert_eq!(
        state.lap.potential_direction.as_ref().unwrap(),
        &dpi0.values
    );
    assert_eq!(state.lambda_min, q(0));
    assert_eq!(state.lambda_max, qr(1, 2));
    // the tight pair at λ^max activates some player's last long-path leg
    let long_last = [
        (4usize, 0usize),
        (2, 1),
        (0, 2),
        (6, 3),
        (3, 4),
        (5, 5),
        (7, 6),
        (1, 7),
    ];
    match &state.tight_max {
        pivot::TightBound::Pair { edge, player } => {
            assert!(long_last.contains(&(*edge, *player)));
        }
        other => panic!("expected a tight pair, got {other:?}"),
    }
}

#[test]
fn solve_potential_on_s0_gives_pi1() {
    let game = game();
    let lap = BlockLaplacian::build(&game, support_s0(&game)).unwrap();
    assert_eq!(lap.sigma, 1);
    let pi1 = lap.solve_potential(&qr(1, 2)).unwrap();
    let expected = symmetric_potential(&game, [q(0), q(7), q(14), q(21)]);
    assert_eq!(pi1.values, expected.values);
}

#[test]
fn s1_is_weakly_degenerate_with_known_nullspace() {
    let game = game();
    let lap = BlockLaplacian::build(&game, support_s1(&game)).unwrap();
    assert_eq!(lap.sigma, 0);
    // "the Laplacian matrix has rank 23": k(n−1) = 24 minus defect 1
    assert_eq!(lap.rank_defect, 1);
    let dir = lap.nullspace.as_ref().unwrap();
    let expected = symmetric_potential(&game, [q(0), q(1), q(2), q(3)]);
    assert_eq!(dir, &expected.values);
}

#[test]
fn s2_solves_to_pi3_and_final_flow() {
    let game = game();
    let lap = BlockLaplacian::build(&game, support_s2(&game)).unwrap();
    assert_eq!(lap.sigma, 1);
    let dpi2 = symmetric_potential(&game, [q(0), q(8), q(16), q(24)]);
    assert_eq!(lap.potential_direction.as_ref().unwrap(), &dpi2.values);
    let pi3 = lap.solve_potential(&q(1)).unwrap();
    let expected = symmetric_potential(&game, [q(0), q(14), q(28), q(42)]);
    assert_eq!(pi3.values, expected.values);

    let flow = support::induced_flow(&game, &support_s2(&game), &pi3);
    // player 1 routes 2 units along e1, e3, e5
    let p0 = flow.player_block(game.num_edges(), 0);
    let expect0: Vec<Rational> = [2, 0, 2, 0, 2, 0, 0, 0].iter().map(|&v| q(v)).collect();
    assert_eq!(p0, &expect0[..]);
    // aggregate on e1 is 6: players 1, 2, 3 each route 2
    let totals = spliteq_core::game::aggregate_flow(&game, &flow);
    assert_eq!(totals[0], q(6));
}

#[test]
fn check_lambda_potential_on_worked_values() {
    let game = game();
    let s0 = support_s0(&game);
    let pi1 = symmetric_potential(&game, [q(0), q(7), q(14), q(21)]);
    let (ok, _) = support::check_lambda_potential(&game, &s0, &pi1, &qr(1, 2));
    assert!(ok);

    // a bumped potential fails the Laplace residual
    let mut bumped = pi1.clone();
    bumped.values[game.vertex_index(3, 0)] += qr(1, 1000);
    let (ok, violations) = support::check_lambda_potential(&game, &s0, &bumped, &qr(1, 2));
    assert!(!ok);
    assert!(violations
        .iter()
        .any(|v| matches!(v, support::LambdaPotentialViolation::Laplace { .. })));

    // π³ is not a 1-potential for S⁰: the direct edges go negative (−3/4)
    let pi3 = symmetric_potential(&game, [q(0), q(14), q(28), q(42)]);
    let (ok, violations) = support::check_lambda_potential(&game, &s0, &pi3, &q(1));
    assert!(!ok);
    let hit = violations.iter().find_map(|v| match v {
        support::LambdaPotentialViolation::Constraint {
            edge: 7,
            player: 0,
            value,
        } => Some(value.clone()),
        _ => None,
    });
    assert_eq!(hit, Some(qr(-3, 4)));
}

#[test]
fn golden_trace() {
    let game = game();
    let f = homotopy::trace(&game).unwrap();

    // breakpoints at λ = 0, 1/2 (plateau pair), 1
    let lambdas: Vec<Rational> = f.breakpoints.iter().map(|b| b.lambda.clone()).collect();
    assert_eq!(lambdas, vec![q(0), qr(1, 2), qr(1, 2), q(1)]);

    let pi0 = symmetric_potential(&game, [q(0), q(6), q(12), q(3)]);
    let pi1 = symmetric_potential(&game, [q(0), q(7), q(14), q(21)]);
    let pi2 = symmetric_potential(&game, [q(0), q(10), q(20), q(30)]);
    let pi3 = symmetric_potential(&game, [q(0), q(14), q(28), q(42)]);
    assert_eq!(f.breakpoints[0].potentials.values, pi0.values);
    assert_eq!(f.breakpoints[1].potentials.values, pi1.values);
    assert_eq!(f.breakpoints[2].potentials.values, pi2.values);
    assert_eq!(f.breakpoints[3].potentials.values, pi3.values);

    // flows: 0 → one unit on the direct edge → long paths
    assert!(f.breakpoints[0].flow.values.iter().all(|v| v.is_zero()));
    let x1 = f.breakpoints[1].flow.player_block(8, 0);
    let expect_x1: Vec<Rational> = [0, 0, 0, 0, 0, 0, 0, 1].iter().map(|&v| q(v)).collect();
    assert_eq!(x1, &expect_x1[..]);
    let x2 = f.breakpoints[2].flow.player_block(8, 0);
    let expect_x2: Vec<Rational> = [1, 0, 1, 0, 1, 0, 0, 0].iter().map(|&v| q(v)).collect();
    assert_eq!(x2, &expect_x2[..]);
    let x3 = f.breakpoints[3].flow.player_block(8, 0);
    let expect_x3: Vec<Rational> = [2, 0, 2, 0, 2, 0, 0, 0].iter().map(|&v| q(v)).collect();
    assert_eq!(x3, &expect_x3[..]);

    assert_eq!(f.degenerate_count, 1);
    assert!(f.lambda_bar.is_one());

    // every breakpoint verifies exactly
    for bp in &f.breakpoints {
        let report =
            spliteq_core::game::verify_equilibrium(&game, &bp.flow, &bp.lambda, &Rational::zero());
        assert!(
            report.pass,
            "breakpoint at λ = {} fails: {report:?}",
            bp.lambda
        );
    }
}

#[test]
fn plateau_direction_and_circulation() {
    let game = game();
    let f = homotopy::trace(&game).unwrap();
    // the plateau is recorded as the zero-length segment at 1/2
    let plateau = f
        .segments
        .iter()
        .find(|s| s.lambda_lo == s.lambda_hi)
        .expect("plateau segment");
    assert_eq!(plateau.lambda_lo, qr(1, 2));
    assert_eq!(plateau.support, support_s1(&game));

    // eval at the plateau returns the left value x¹
    let at_half = homotopy::eval(&f, &qr(1, 2));
    assert_eq!(at_half.values, f.breakpoints[1].flow.values);

    // midpoint of the first segment: player 1 routes 1/2 on the direct edge
    let quarter = homotopy::eval(&f, &qr(1, 4));
    let p0 = quarter.player_block(8, 0);
    assert_eq!(p0[7], qr(1, 2));
    assert!(p0[..7].iter().all(|v| v.is_zero()));
}

#[test]
fn degenerate_traversal_endpoints() {
    let game = game();
    let s1 = support_s1(&game);
    let pi1 = symmetric_potential(&game, [q(0), q(7), q(14), q(21)]);
    let dir = symmetric_potential(&game, [q(0), q(1), q(2), q(3)]);
    let (lo, hi) = pivot::nullspace_walk_bounds(&game, &s1, &pi1, &dir.values);
    // from π¹ the walk spans ξ ∈ [0, 3] reaching π² = π¹ + 3Δπᴺ
    assert_eq!(lo, Some(q(0)));
    assert_eq!(hi, Some(q(3)));

    // circulation of the walk: (1/3, 0, 1/3, 0, 1/3, 0, 0, −1/3) per player
    let t = spliteq_core::laplacian::incidence_apply_transposed(&game, &dir.values);
    let circ = support::apply_c(&game, &s1, &t);
    let c0 = &circ[..8];
    let expected: Vec<Rational> = [
        qr(1, 3),
        q(0),
        qr(1, 3),
        q(0),
        qr(1, 3),
        q(0),
        q(0),
        qr(-1, 3),
    ]
    .to_vec();
    assert_eq!(c0, &expected[..]);

    // all blend flows x(α) are equilibria for demand r/2
    for alpha in [q(0), qr(1, 4), qr(1, 2), q(1)] {
        let pi = PotentialVector::from_vec(
            pi1.values
                .iter()
                .zip(&dir.values)
                .map(|(a, b)| a + q(3) * &alpha * b)
                .collect(),
        );
        let x = support::induced_flow(&game, &s1, &pi);
        let report =
            spliteq_core::game::verify_equilibrium(&game, &x, &qr(1, 2), &Rational::zero());
        assert!(report.pass, "blend α = {alpha} fails");
    }
}

#[test]
fn succ_pred_involution_along_golden_path() {
    let game = game();
    let mut state = pivot::start_state(&game).unwrap();
    let mut visited = 0u32;
    loop {
        match pivot::succ(&game, &state).unwrap() {
            pivot::Step::Terminal => break,
            pivot::Step::Pivot(next) => {
                // pred must take us straight back
                match pivot::pred(&game, &next).unwrap() {
                    pivot::Step::Pivot(back) => {
                        assert_eq!(back.support(), state.support());
                        assert_eq!(back.lambda_min, state.lambda_min);
                        assert_eq!(back.lambda_max, state.lambda_max);
                    }
                    pivot::Step::DegenerateHop { next: back, .. } => {
                        assert_eq!(back.support(), state.support());
                    }
                    pivot::Step::Terminal => panic!("pred lost the path"),
                }
                state = *next;
            }
            pivot::Step::DegenerateHop { next, .. } => {
                match pivot::pred(&game, &next).unwrap() {
                    pivot::Step::DegenerateHop { next: back, .. } => {
                        assert_eq!(back.support(), state.support());
                    }
                    _ => panic!("pred did not reverse the degenerate hop"),
                }
                state = *next;
            }
        }
        visited += 1;
        assert!(visited < 200, "runaway pivot loop");
    }
    assert!(state.lambda_max.is_one());
}
