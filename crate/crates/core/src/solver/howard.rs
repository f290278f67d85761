use super::evaluation::evaluate_stationary;
use super::operators::apply_s;
use super::value_iteration::{prepare, SolveOptions, Status};
use super::{SolverError, DEFAULT_GAP_TOL};
use crate::discount::DiscountFunction;
use crate::model::{weighted_diff, FiniteModel, StationaryPolicy, ValueTable};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HowardOptions {
    /// Settings for each policy evaluation.
    pub eval: SolveOptions,
    pub gap_tol: f64,
    pub max_outer: usize,
}

impl Default for HowardOptions {
    fn default() -> Self {
        HowardOptions {
            eval: SolveOptions {
                tol: 1e-11,
                max_iters: 1_000_000,
            },
            gap_tol: DEFAULT_GAP_TOL,
            max_outer: 1_000,
        }
    }
}

/// One evaluate-improve round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HowardStep {
    pub policy: StationaryPolicy,
    pub value: ValueTable,
    /// States whose improvement set was nonempty.
    pub improved_states: Vec<usize>,
    /// `max_x (max_a Sv(x,a) − U_f(x)) / ω(x)`; the Bellman residual of `U_f`.
    pub improvement: f64,
    /// `‖U_{f_k} − U_{f_{k−1}}‖_ω`, zero in the first round.
    pub value_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HowardReport {
    pub value: ValueTable,
    pub policy: StationaryPolicy,
    pub iterations: usize,
    pub status: Status,
    pub steps: Vec<HowardStep>,
}

/// Policy improvement starting from `f0`.
///
/// A state is switched only when some action beats the current value by more
/// than `gap_tol`; it then moves to the lowest-index maximiser of `S U_f`.
pub fn howard_solve(
    model: &FiniteModel,
    d: &DiscountFunction,
    f0: &StationaryPolicy,
    opts: HowardOptions,
) -> Result<HowardReport, SolverError> {
    prepare(model, d, opts.eval.tol)?;
    if f0.len() != model.n_states() {
        return Err(SolverError::Argument(format!(
            "policy covers {} states, model has {}",
            f0.len(),
            model.n_states()
        )));
    }
    let mut seen: HashSet<StationaryPolicy> = HashSet::new();
    let mut steps: Vec<HowardStep> = Vec::new();
    let mut f = f0.clone();
    let mut last_value: Option<ValueTable> = None;
    seen.insert(f.clone());
    for k in 1..=opts.max_outer {
        let u = evaluate_stationary(model, d, &f, opts.eval)?;
        let sv = apply_s(model, d, &u)?;
        let mut next = f.as_slice().to_vec();
        let mut improved_states = Vec::new();
        let mut improvement = f64::NEG_INFINITY;
        for x in 0..model.n_states() {
            let adm = model.admissible(x);
            let (mut best_a, mut best) = (adm[0], sv[x][0]);
            for (k, &a) in adm.iter().enumerate().skip(1) {
                let s = sv[x][k];
                if s > best || (s == best && a < best_a) {
                    best = s;
                    best_a = a;
                }
            }
            improvement = improvement.max((best - u[x]) / model.weight(x));
            if best > u[x] + opts.gap_tol {
                next[x] = best_a;
                improved_states.push(x);
            }
        }
        let value_change = match &last_value {
            Some(prev) => weighted_diff(&u, prev, model)?,
            None => 0.0,
        };
        last_value = Some(u.clone());
        steps.push(HowardStep {
            policy: f.clone(),
            value: u.clone(),
            improved_states: improved_states.clone(),
            improvement,
            value_change,
        });
        if improved_states.is_empty() {
            return Ok(HowardReport {
                value: u,
                policy: f,
                iterations: k,
                status: Status::Converged,
                steps,
            });
        }
        let g = StationaryPolicy::from_vec_unchecked(next);
        if !seen.insert(g.clone()) {
            return Err(SolverError::Cycle { iteration: k });
        }
        f = g;
    }
    Err(SolverError::IterationCap {
        iterations: opts.max_outer,
        best: last_value.unwrap_or_else(|| ValueTable::zeros(model.n_states())),
    })
}
