//! Error types shared by the solver modules.

use thiserror::Error;

/// Errors raised by the support algebra, pivot engine and homotopy driver.
#[derive(Debug, Error)]
pub enum SolveError {
    /// A support-dependent operation was called on a support that is not
    /// total (some player's active subgraph does not connect all vertices).
    #[error("support is not total for player {player}")]
    NonTotalSupport { player: usize },

    /// The block Laplacian of the support is singular beyond the per-player
    /// constant shifts, so potentials are not unique.
    #[error("support is a-degenerate (rank defect {defect})")]
    DegenerateSupport { defect: usize },

    /// A neighbor of a non-degenerate support dropped rank by more than one.
    /// This cannot happen when entering from a non-degenerate state; seeing
    /// it means the pivot path left its invariants.
    #[error("rank defect {defect} exceeds 1 at a degenerate neighbor")]
    RankDefectTooLarge { defect: usize },

    /// Asked for the continuative neighbor across a boundary that is clamped
    /// at λ = 0 or λ = 1 rather than held by a tight constraint.
    #[error("λ-bound is clamped at {side}; no continuative neighbor")]
    ClampedBoundary { side: &'static str },

    /// The pivot loop exceeded its configured budget.
    #[error("pivot budget of {budget} exceeded")]
    PivotBudgetExceeded { budget: u64 },

    /// An internal consistency check failed. Signals an implementation bug,
    /// never a property of the instance.
    #[error("assertion violated: {0}")]
    AssertionViolation(String),

    /// A support expected to be feasible admits no λ-potential.
    #[error("infeasible support: {0}")]
    Infeasible(String),
}

/// Errors raised by the independent oracle module.
#[derive(Debug, Error)]
pub enum OracleError {
    /// Iterative dynamics did not reach the requested tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual})")]
    NoConverge { iterations: usize, residual: f64 },

    /// Operation requires player-independent costs.
    #[error("costs are player-specific; operation needs player-independent costs")]
    UnsupportedCosts,

    /// The exhaustive scan budget (mk ≤ {limit}) was exceeded.
    #[error("support scan budget exceeded: mk = {mk} > {limit}")]
    BudgetExceeded { mk: usize, limit: usize },
}
