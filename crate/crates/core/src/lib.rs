//! Markov decision processes with non-linear discounting of future utility.
//!
//! Finite models are built or loaded into [`FiniteModel`], paired with a
//! [`DiscountFunction`], and solved by value iteration, Howard improvement or
//! the truncation scheme for utilities unbounded below. Brute-force
//! evaluators in [`oracle`] are kept independent of the solver so that one
//! can check the other.

pub mod discount;
pub mod export;
pub mod io;
pub mod model;
pub mod models;
pub mod oracle;
pub mod par;
pub mod random;
pub mod solver;

pub use discount::{DiscountError, DiscountFunction};
pub use model::{
    validate_model, weighted_diff, weighted_norm, FiniteModel, Mode, ModelConstants, ModelError,
    StateInfo, StationaryPolicy, ValueTable,
};
pub use solver::{SolveOptions, SolveReport, SolverError, Status};
