use super::SolverError;
use crate::discount::DiscountFunction;
use crate::model::{weighted_diff, FiniteModel, StationaryPolicy, ValueTable};
use crate::par::map_states;

/// `Sv(x, a)` for every admissible pair, stored by slot like the model tables.
pub type ActionValues = Vec<Vec<f64>>;

/// Result of one Bellman backup.
#[derive(Debug, Clone, PartialEq)]
pub struct Backup {
    pub value: ValueTable,
    /// Every action attaining the maximum exactly, in ascending index order.
    pub argmax: Vec<Vec<usize>>,
}

impl Backup {
    /// Lowest-index maximiser in every state.
    pub fn greedy_policy(&self) -> StationaryPolicy {
        StationaryPolicy::from_vec_unchecked(self.argmax.iter().map(|s| s[0]).collect())
    }
}

fn discounted(model: &FiniteModel, d: &DiscountFunction, v: &ValueTable) -> Result<Vec<f64>, SolverError> {
    if v.len() != model.n_states() {
        return Err(crate::model::ModelError::Length {
            expected: model.n_states(),
            got: v.len(),
        }
        .into());
    }
    v.iter()
        .enumerate()
        .map(|(x, &value)| {
            if value.is_nan() || value == f64::INFINITY {
                Err(SolverError::Domain { state: x, value })
            } else {
                Ok(d.delta(value))
            }
        })
        .collect()
}

/// `u(x,a) + Σ_y δ(v(y)) q(y|x,a)`, skipping zero-probability successors so
/// that a `-∞` value off the support does not poison the sum.
#[inline]
fn s_value(model: &FiniteModel, dv: &[f64], x: usize, slot: usize) -> f64 {
    let mut acc = 0.0;
    for (p, &w) in model.row(x, slot).iter().zip(dv) {
        if *p > 0.0 {
            acc += p * w;
        }
    }
    model.utility(x, slot) + acc
}

pub fn apply_s(
    model: &FiniteModel,
    d: &DiscountFunction,
    v: &ValueTable,
) -> Result<ActionValues, SolverError> {
    let dv = discounted(model, d, v)?;
    Ok(map_states(model.n_states(), |x| {
        (0..model.admissible(x).len())
            .map(|k| s_value(model, &dv, x, k))
            .collect()
    }))
}

/// Actions whose value is within `gap` of the row maximum, ascending.
pub fn argmax_within(model: &FiniteModel, x: usize, row: &[f64], gap: f64) -> Vec<usize> {
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut set: Vec<usize> = model
        .admissible(x)
        .iter()
        .zip(row)
        .filter(|(_, &s)| s == best || s >= best - gap)
        .map(|(&a, _)| a)
        .collect();
    set.sort_unstable();
    set
}

pub fn bellman_t(
    model: &FiniteModel,
    d: &DiscountFunction,
    v: &ValueTable,
) -> Result<Backup, SolverError> {
    let dv = discounted(model, d, v)?;
    let per_state = map_states(model.n_states(), |x| {
        let adm = model.admissible(x);
        let mut best = f64::NEG_INFINITY;
        let mut set: Vec<usize> = Vec::with_capacity(1);
        for (k, &a) in adm.iter().enumerate() {
            let s = s_value(model, &dv, x, k);
            if s > best {
                best = s;
                set.clear();
                set.push(a);
            } else if s == best {
                set.push(a);
            }
        }
        if set.is_empty() {
            // every action is -∞ and compares equal only via `==`, handled above;
            // NaN cannot occur because the domain check rejects it
            set.extend_from_slice(adm);
        }
        set.sort_unstable();
        (best, set)
    });
    let (value, argmax): (Vec<f64>, Vec<Vec<usize>>) = per_state.into_iter().unzip();
    Ok(Backup {
        value: ValueTable::new(value),
        argmax,
    })
}

pub fn policy_t(
    model: &FiniteModel,
    d: &DiscountFunction,
    f: &StationaryPolicy,
    v: &ValueTable,
) -> Result<ValueTable, SolverError> {
    if f.len() != model.n_states() {
        return Err(SolverError::Argument(format!(
            "policy covers {} states, model has {}",
            f.len(),
            model.n_states()
        )));
    }
    let dv = discounted(model, d, v)?;
    let values = map_states(model.n_states(), |x| {
        let slot = model
            .slot(x, f.action(x))
            .expect("stationary policy is admissible");
        s_value(model, &dv, x, slot)
    });
    Ok(ValueTable::new(values))
}

/// `‖Tv − v‖_ω`.
pub fn bellman_residual(
    model: &FiniteModel,
    d: &DiscountFunction,
    v: &ValueTable,
) -> Result<f64, SolverError> {
    let tv = bellman_t(model, d, v)?;
    Ok(weighted_diff(&tv.value, v, model)?)
}
