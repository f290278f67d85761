use super::operators::{apply_s, argmax_within};
use super::value_iteration::SolveReport;
use super::SolverError;
use crate::discount::DiscountFunction;
use crate::model::{FiniteModel, ValueTable};
use serde::{Deserialize, Serialize};

/// Maximiser sets along value iteration and at the optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximiserSets {
    pub gap_tol: f64,
    /// `per_iteration[n-1][x]` is `A*_n(x)`, the maximisers of `S V_{n−1}`.
    pub per_iteration: Vec<Vec<Vec<usize>>>,
    /// `A*(x)`, the maximisers of `S v*`.
    pub limit: Vec<Vec<usize>>,
    /// First iteration of the window used to approximate "infinitely often".
    pub tail_start: usize,
    /// Actions present in every `A*_n(x)` of the window.
    pub recurring: Vec<Vec<usize>>,
    /// Actions present in at least one `A*_n(x)` of the window.
    pub tail_union: Vec<Vec<usize>>,
    /// Per state: `recurring(x) ⊆ A*(x)`.
    pub recurring_included: Vec<bool>,
    /// Per state: `tail_union(x) ⊆ A*(x)`.
    pub union_included: Vec<bool>,
}

impl MaximiserSets {
    pub fn all_recurring_included(&self) -> bool {
        self.recurring_included.iter().all(|&b| b)
    }
}

fn subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|a| big.contains(a))
}

/// Records `A*_n` for `n = 1..=n_max` and compares its tail with `A*`.
///
/// The tail window is the second half of the run, `n > n_max / 2`.
pub fn policy_iteration_sets(
    model: &FiniteModel,
    d: &DiscountFunction,
    optimum: &SolveReport,
    n_max: usize,
    gap_tol: f64,
) -> Result<MaximiserSets, SolverError> {
    if !optimum.converged() {
        return Err(SolverError::NotConverged);
    }
    if n_max == 0 {
        return Err(SolverError::Argument("n_max must be at least 1".into()));
    }
    let maximisers = |v: &ValueTable| -> Result<Vec<Vec<usize>>, SolverError> {
        let sv = apply_s(model, d, v)?;
        Ok((0..model.n_states())
            .map(|x| argmax_within(model, x, &sv[x], gap_tol))
            .collect())
    };

    let mut per_iteration = Vec::with_capacity(n_max);
    let mut v = ValueTable::zeros(model.n_states());
    for _ in 0..n_max {
        let sv = apply_s(model, d, &v)?;
        let sets: Vec<Vec<usize>> = (0..model.n_states())
            .map(|x| argmax_within(model, x, &sv[x], gap_tol))
            .collect();
        v = ValueTable::new(
            sv.iter()
                .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .collect(),
        );
        per_iteration.push(sets);
    }
    let limit = maximisers(&optimum.value)?;

    let tail_start = n_max / 2 + 1;
    let window = &per_iteration[tail_start - 1..];
    let mut recurring = Vec::with_capacity(model.n_states());
    let mut tail_union = Vec::with_capacity(model.n_states());
    for x in 0..model.n_states() {
        let mut inter = window[0][x].clone();
        let mut union = window[0][x].clone();
        for sets in &window[1..] {
            inter.retain(|a| sets[x].contains(a));
            for &a in &sets[x] {
                if !union.contains(&a) {
                    union.push(a);
                }
            }
        }
        union.sort_unstable();
        recurring.push(inter);
        tail_union.push(union);
    }
    let recurring_included = (0..model.n_states())
        .map(|x| subset(&recurring[x], &limit[x]))
        .collect();
    let union_included = (0..model.n_states())
        .map(|x| subset(&tail_union[x], &limit[x]))
        .collect();
    Ok(MaximiserSets {
        gap_tol,
        per_iteration,
        limit,
        tail_start,
        recurring,
        tail_union,
        recurring_included,
        union_included,
    })
}
