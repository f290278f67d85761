use super::operators::policy_t;
use super::value_iteration::{prepare, SolveOptions};
use super::{effective_tol, SolverError};
use crate::discount::DiscountFunction;
use crate::model::{weighted_diff, weighted_norm, FiniteModel, StationaryPolicy, ValueTable};

/// Fixed point of `T_f`, reached by iterating from `0`.
pub fn evaluate_stationary(
    model: &FiniteModel,
    d: &DiscountFunction,
    f: &StationaryPolicy,
    opts: SolveOptions,
) -> Result<ValueTable, SolverError> {
    let (constants, iterates) = prepare(model, d, opts.tol)?;
    let mut tail = iterates.l_tilde;
    let mut v = ValueTable::zeros(model.n_states());
    for _ in 0..opts.max_iters {
        let next = policy_t(model, d, f, &v)?;
        let diff = weighted_diff(&next, &v, model)?;
        v = next;
        tail = d.gamma_tilde(constants.alpha, tail);
        if tail < opts.tol || diff < effective_tol(opts.tol, weighted_norm(&v, model)?) {
            return Ok(v);
        }
    }
    Err(SolverError::IterationCap {
        iterations: opts.max_iters,
        best: v,
    })
}

/// `U_n = T_{π_1} ⋯ T_{π_n} 0` for a Markov policy sequence.
pub fn evaluate_finite_horizon(
    model: &FiniteModel,
    d: &DiscountFunction,
    policy_seq: &[StationaryPolicy],
    n: usize,
) -> Result<ValueTable, SolverError> {
    if policy_seq.len() < n {
        return Err(SolverError::Argument(format!(
            "horizon {n} needs {n} decision rules, got {}",
            policy_seq.len()
        )));
    }
    let mut w = ValueTable::zeros(model.n_states());
    for f in policy_seq[..n].iter().rev() {
        w = policy_t(model, d, f, &w)?;
    }
    Ok(w)
}
