//! Dynamic-programming operators and the solution algorithms built on them.

mod evaluation;
mod howard;
mod operators;
mod policy_sets;
mod truncation;
mod value_iteration;

pub use evaluation::{evaluate_finite_horizon, evaluate_stationary};
pub use howard::{howard_solve, HowardOptions, HowardReport, HowardStep};
pub use operators::{
    apply_s, argmax_within, bellman_residual, bellman_t, policy_t, ActionValues, Backup,
};
pub use policy_sets::{policy_iteration_sets, MaximiserSets};
pub use truncation::{truncate, truncation_solve, TruncationOptions, TruncationReport};
pub use value_iteration::{
    value_iterate, value_iterate_from, SolveOptions, SolveReport, Status, TraceRecord,
};

use crate::discount::DiscountError;
use crate::model::{ModelError, ValueTable};
use thiserror::Error;

/// Default gap separating a strict improvement from a floating-point tie.
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discount(#[from] DiscountError),
    #[error("value entry {state} is {value}, outside the domain of δ")]
    Domain { state: usize, value: f64 },
    #[error("IterationCap: no convergence after {iterations} iterations")]
    IterationCap { iterations: usize, best: ValueTable },
    #[error("NotConverged: an optimal value table is required")]
    NotConverged,
    #[error("CycleError: policy at outer iteration {iteration} repeats an earlier one; gap_tol may be too small")]
    Cycle { iteration: usize },
    #[error("MonotonicityViolation: v at state {state} rose by {increase:e} from K = {k_prev} to K = {k_next}")]
    Monotonicity {
        state: usize,
        k_prev: f64,
        k_next: f64,
        increase: f64,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// Absolute tolerance no smaller than a few ulps of `scale`.
pub(crate) fn effective_tol(tol: f64, scale: f64) -> f64 {
    tol.max(64.0 * f64::EPSILON * scale)
}
