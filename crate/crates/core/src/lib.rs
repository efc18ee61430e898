//! Exact solver for Nash equilibria of atomic splittable congestion games
//! with player-specific affine edge costs.
//!
//! The central object is a support-pivoting homotopy that follows the
//! equilibrium as the demand multiplier `λ` sweeps `[0, 1]`, producing the
//! complete piecewise-affine equilibrium function `f(λ)`. All pivoting
//! decisions (determinant signs, tie detection, lexicographic perturbation)
//! run in exact big-rational arithmetic; a float mode exists for rendering
//! and tolerance-based verification.

pub mod error;
pub mod game;
pub mod homotopy;
pub mod io;
pub mod laplacian;
pub mod linalg;
pub mod oracle;
pub mod pivot;
pub mod scalar;
pub mod support;

pub use error::SolveError;
pub use game::{
    ArithmeticMode, Commodity, CostCoefficients, FlowProfile, Game, GraphModel, PotentialVector,
    VerificationReport,
};
pub use homotopy::{eval, solve_at, solve_player_independent, trace, PiecewiseAffineEquilibrium};
pub use support::Support;

/// Exact scalar used by the solver.
pub type Rational = num_rational::BigRational;
/// Integer type backing [`Rational`].
pub type Int = num_bigint::BigInt;

/// Game over exact rationals, the reference arithmetic.
pub type ExactGame = Game<Rational>;
/// Game over `f64`, used for tolerance-based verification and rendering.
pub type FloatGame = Game<f64>;
/// Flow profile over exact rationals.
pub type ExactFlow = FlowProfile<Rational>;
/// Potential vector over exact rationals.
pub type ExactPotential = PotentialVector<Rational>;

pub(crate) fn rational_int(v: i64) -> Rational {
    Rational::from_integer(Int::from(v))
}
