use super::operators::bellman_t;
use super::{effective_tol, SolverError};
use crate::discount::{check_drift, gamma_tilde_iterates, DiscountFunction, GammaIterates};
use crate::model::{
    validate_model, weighted_diff, weighted_norm, FiniteModel, Mode, ModelConstants,
    StationaryPolicy, ValueTable,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iters: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    IterationCap,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::IterationCap => "iteration_cap",
        })
    }
}

/// One value-iteration sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    /// `‖v_n − v_{n−1}‖_ω`.
    pub succ_diff: f64,
    /// Certified bound on `‖v_n − v*‖_ω`.
    pub apriori_bound: f64,
    /// `‖T v_n − v_n‖_ω`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub value: ValueTable,
    pub policy: StationaryPolicy,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub status: Status,
    pub constants: ModelConstants,
    pub iterates: GammaIterates,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::INFINITY, |r| r.residual)
    }
}

/// Constants, drift check and `L̃(z)` shared by the bounded-mode solvers.
pub(crate) fn prepare(
    model: &FiniteModel,
    d: &DiscountFunction,
    tol: f64,
) -> Result<(ModelConstants, GammaIterates), SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::Argument(format!("tol = {tol} must be positive")));
    }
    let constants = validate_model(model, Mode::Bounded)?;
    check_drift(d, constants.alpha)?;
    let iter_tol = (tol * 1e-2).max(1e-12 * constants.z);
    let iterates = gamma_tilde_iterates(d, constants.alpha, constants.z, iter_tol)?;
    Ok((constants, iterates))
}

/// Value iteration `v_{n+1} = T v_n` from `v_0 = 0`.
pub fn value_iterate(
    model: &FiniteModel,
    d: &DiscountFunction,
    opts: SolveOptions,
) -> Result<SolveReport, SolverError> {
    value_iterate_from(model, d, ValueTable::zeros(model.n_states()), opts)
}

/// Value iteration from an arbitrary finite start.
///
/// The a-priori column is `γ̃^(n)(‖v_0‖_ω) + γ̃^(n)(L̃(z))`, which reduces to the
/// usual tail bound when `v_0 = 0`.
pub fn value_iterate_from(
    model: &FiniteModel,
    d: &DiscountFunction,
    v0: ValueTable,
    opts: SolveOptions,
) -> Result<SolveReport, SolverError> {
    let (constants, iterates) = prepare(model, d, opts.tol)?;
    let alpha = constants.alpha;
    let mut start_gap = weighted_norm(&v0, model)?;
    let mut tail = iterates.l_tilde;

    let mut v = v0;
    let mut backup = bellman_t(model, d, &v)?;
    let mut trace = Vec::new();
    let mut status = Status::IterationCap;
    for n in 1..=opts.max_iters {
        let next = backup.value;
        let succ_diff = weighted_diff(&next, &v, model)?;
        v = next;
        backup = bellman_t(model, d, &v)?;
        let residual = weighted_diff(&backup.value, &v, model)?;
        start_gap = d.gamma_tilde(alpha, start_gap);
        tail = d.gamma_tilde(alpha, tail);
        let apriori_bound = start_gap + tail;
        trace.push(TraceRecord {
            iter: n,
            succ_diff,
            apriori_bound,
            residual,
        });
        let eff = effective_tol(opts.tol, weighted_norm(&v, model)?);
        if apriori_bound < opts.tol || (succ_diff < eff && residual < eff) {
            status = Status::Converged;
            break;
        }
    }
    Ok(SolveReport {
        policy: backup.greedy_policy(),
        iterations: trace.len(),
        value: v,
        trace,
        status,
        constants,
        iterates,
    })
}
