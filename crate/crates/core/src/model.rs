//! Finite MDP tables, weighted-norm arithmetic and the utility/drift checker.
//!
//! Extended reals are plain `f64` with `f64::NEG_INFINITY` as the only
//! admissible infinite value. It may appear in utilities (unbounded-below
//! mode) and in value tables, never in transition or weight tables.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Index;
use thiserror::Error;

/// Allowed deviation of a transition row sum from one.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Floor used for `b` and `c` when the tables give a non-positive maximum.
pub const POSITIVE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("ShapeError: {0}")]
    Shape(String),
    #[error("StochasticityError: transition row q[{state}][{action}] sums to {sum} (tolerance {ROW_SUM_TOL:e})")]
    Stochasticity { state: usize, action: usize, sum: f64 },
    #[error("StochasticityError: q[{state}][{action}][{next}] = {value} is not a probability")]
    Probability {
        state: usize,
        action: usize,
        next: usize,
        value: f64,
    },
    #[error("WeightError: weight of state {state} is {value}, expected a finite value >= 1")]
    Weight { state: usize, value: f64 },
    #[error("BoundError: utility u[{state}][{action}] = {value} is not allowed in {mode} mode")]
    Bound {
        state: usize,
        action: usize,
        value: f64,
        mode: Mode,
    },
    #[error("value table entry {state} is {value}; a finite table is required")]
    NonFinite { state: usize, value: f64 },
    #[error("table has {got} entries but the model has {expected} states")]
    Length { expected: usize, got: usize },
    #[error("action {action} is not admissible in state {state}")]
    Inadmissible { state: usize, action: usize },
}

/// Whether utilities are bounded below by `-b·ω` or may reach `-∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Bounded,
    UnboundedBelow,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bounded => "bounded",
            Mode::UnboundedBelow => "unbounded_below",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bounded" => Ok(Mode::Bounded),
            "unbounded_below" => Ok(Mode::UnboundedBelow),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// A state of the discretized model: a display label and an optional grid coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateInfo {
    pub label: String,
    pub coord: Option<f64>,
}

impl StateInfo {
    pub fn labelled(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            coord: None,
        }
    }

    pub fn at(coord: f64) -> Self {
        Self {
            label: format_coord(coord),
            coord: Some(coord),
        }
    }
}

fn format_coord(x: f64) -> String {
    let s = format!("{x}");
    if s.len() > 12 {
        format!("{x:.6}")
    } else {
        s
    }
}

/// Dense finite MDP.
///
/// Per-state tables are stored by *slot*: `transition[x][k]` and
/// `utility[x][k]` belong to the action `admissible[x][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModel {
    states: Vec<StateInfo>,
    actions: Vec<String>,
    admissible: Vec<Vec<usize>>,
    transition: Vec<Vec<Vec<f64>>>,
    utility: Vec<Vec<f64>>,
    weight: Vec<f64>,
}

impl FiniteModel {
    /// Assembles a model, checking table shapes and action indices only.
    /// Numeric checks live in [`validate_model`].
    pub fn new(
        states: Vec<StateInfo>,
        actions: Vec<String>,
        admissible: Vec<Vec<usize>>,
        transition: Vec<Vec<Vec<f64>>>,
        utility: Vec<Vec<f64>>,
        weight: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        if n == 0 {
            return Err(ModelError::Shape("model has no states".into()));
        }
        if actions.is_empty() {
            return Err(ModelError::Shape("model has no actions".into()));
        }
        for (name, len) in [
            ("admissible", admissible.len()),
            ("transition", transition.len()),
            ("utility", utility.len()),
            ("weight", weight.len()),
        ] {
            if len != n {
                return Err(ModelError::Shape(format!(
                    "{name} has {len} rows for {n} states"
                )));
            }
        }
        for x in 0..n {
            let adm = &admissible[x];
            if adm.is_empty() {
                return Err(ModelError::Shape(format!("state {x} has no admissible action")));
            }
            for (k, &a) in adm.iter().enumerate() {
                if a >= actions.len() {
                    return Err(ModelError::Shape(format!(
                        "state {x} lists action {a} but only {} actions exist",
                        actions.len()
                    )));
                }
                if adm[..k].contains(&a) {
                    return Err(ModelError::Shape(format!(
                        "state {x} lists action {a} twice"
                    )));
                }
            }
            if transition[x].len() != adm.len() || utility[x].len() != adm.len() {
                return Err(ModelError::Shape(format!(
                    "state {x}: {} admissible actions but {} transition rows and {} utilities",
                    adm.len(),
                    transition[x].len(),
                    utility[x].len()
                )));
            }
            for (k, row) in transition[x].iter().enumerate() {
                if row.len() != n {
                    return Err(ModelError::Shape(format!(
                        "transition row q[{x}][{}] has {} entries for {n} states",
                        adm[k],
                        row.len()
                    )));
                }
            }
        }
        Ok(Self {
            states,
            actions,
            admissible,
            transition,
            utility,
            weight,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[StateInfo] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn admissible(&self, x: usize) -> &[usize] {
        &self.admissible[x]
    }

    /// Slot of action `a` in state `x`, if admissible.
    pub fn slot(&self, x: usize, a: usize) -> Option<usize> {
        self.admissible[x].iter().position(|&b| b == a)
    }

    pub fn row(&self, x: usize, slot: usize) -> &[f64] {
        &self.transition[x][slot]
    }

    pub fn utility(&self, x: usize, slot: usize) -> f64 {
        self.utility[x][slot]
    }

    pub fn utilities(&self, x: usize) -> &[f64] {
        &self.utility[x]
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weight[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    /// Copy of the model with every utility passed through `f`.
    pub fn map_utility(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> FiniteModel {
        let mut out = self.clone();
        for x in 0..out.n_states() {
            for k in 0..out.admissible[x].len() {
                let a = out.admissible[x][k];
                out.utility[x][k] = f(x, a, out.utility[x][k]);
            }
        }
        out
    }

    /// Relabels states so that new state `i` is old state `perm[i]`.
    pub fn permute_states(&self, perm: &[usize]) -> Result<FiniteModel, ModelError> {
        let n = self.n_states();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(ModelError::Shape("not a permutation of the state indices".into()));
        }
        let mut inverse = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let transition = perm
            .iter()
            .map(|&old| {
                self.transition[old]
                    .iter()
                    .map(|row| {
                        let mut r = vec![0.0; n];
                        for (y_old, &p) in row.iter().enumerate() {
                            r[inverse[y_old]] = p;
                        }
                        r
                    })
                    .collect()
            })
            .collect();
        FiniteModel::new(
            perm.iter().map(|&old| self.states[old].clone()).collect(),
            self.actions.clone(),
            perm.iter().map(|&old| self.admissible[old].clone()).collect(),
            transition,
            perm.iter().map(|&old| self.utility[old].clone()).collect(),
            perm.iter().map(|&old| self.weight[old]).collect(),
        )
    }
}

/// Per-state extended-real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable(Vec<f64>);

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// True when no entry is `-∞` (or otherwise non-finite).
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }
}

impl Index<usize> for ValueTable {
    type Output = f64;

    fn index(&self, x: usize) -> &f64 {
        &self.0[x]
    }
}

impl From<Vec<f64>> for ValueTable {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// One admissible action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StationaryPolicy(Vec<usize>);

impl StationaryPolicy {
    pub fn new(model: &FiniteModel, choice: Vec<usize>) -> Result<Self, ModelError> {
        if choice.len() != model.n_states() {
            return Err(ModelError::Length {
                expected: model.n_states(),
                got: choice.len(),
            });
        }
        for (x, &a) in choice.iter().enumerate() {
            if model.slot(x, a).is_none() {
                return Err(ModelError::Inadmissible { state: x, action: a });
            }
        }
        Ok(Self(choice))
    }

    /// Picks the lowest-index admissible action everywhere.
    pub fn lowest_index(model: &FiniteModel) -> Self {
        Self(
            (0..model.n_states())
                .map(|x| *model.admissible(x).iter().min().expect("nonempty"))
                .collect(),
        )
    }

    pub(crate) fn from_vec_unchecked(choice: Vec<usize>) -> Self {
        Self(choice)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn action(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Bound and drift constants read off the model tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// Lower multiplier: `u ≥ -b·ω`. `+∞` in unbounded-below mode.
    pub b: f64,
    /// Upper multiplier: `u ≤ c·ω`.
    pub c: f64,
    /// `max{b, c}`.
    pub z: f64,
    /// Weight drift: `Σ_y ω(y) q(y|x,a) ≤ α·ω(x)`.
    pub alpha: f64,
    pub mode: Mode,
}

fn check_len(v: &[f64], model: &FiniteModel) -> Result<(), ModelError> {
    if v.len() != model.n_states() {
        return Err(ModelError::Length {
            expected: model.n_states(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `max_x |v(x)| / ω(x)`.
pub fn weighted_norm(v: &ValueTable, model: &FiniteModel) -> Result<f64, ModelError> {
    check_len(v.as_slice(), model)?;
    let mut norm = 0.0_f64;
    for (x, (&value, &w)) in v.iter().zip(model.weights()).enumerate() {
        if !value.is_finite() {
            return Err(ModelError::NonFinite { state: x, value });
        }
        norm = norm.max(value.abs() / w);
    }
    Ok(norm)
}

/// Weighted norm of `v1 - v2`.
pub fn weighted_diff(
    v1: &ValueTable,
    v2: &ValueTable,
    model: &FiniteModel,
) -> Result<f64, ModelError> {
    check_len(v1.as_slice(), model)?;
    check_len(v2.as_slice(), model)?;
    let mut norm = 0.0_f64;
    for x in 0..model.n_states() {
        for value in [v1[x], v2[x]] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { state: x, value });
            }
        }
        norm = norm.max((v1[x] - v2[x]).abs() / model.weight(x));
    }
    Ok(norm)
}

/// Checks stochasticity, weights and utility bounds; returns `b`, `c`, `z`, `α`.
pub fn validate_model(model: &FiniteModel, mode: Mode) -> Result<ModelConstants, ModelError> {
    for (x, &w) in model.weights().iter().enumerate() {
        if !(w.is_finite() && w >= 1.0) {
            return Err(ModelError::Weight { state: x, value: w });
        }
    }

    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut alpha = 0.0_f64;
    for x in 0..model.n_states() {
        let wx = model.weight(x);
        for (k, &a) in model.admissible(x).iter().enumerate() {
            let row = model.row(x, k);
            let mut sum = 0.0;
            let mut drift = 0.0;
            for (y, &p) in row.iter().enumerate() {
                if !(p.is_finite() && p >= 0.0) {
                    return Err(ModelError::Probability {
                        state: x,
                        action: a,
                        next: y,
                        value: p,
                    });
                }
                sum += p;
                drift += p * model.weight(y);
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ModelError::Stochasticity { state: x, action: a, sum });
            }
            alpha = alpha.max(drift / wx);

            let u = model.utility(x, k);
            let allowed = u.is_finite() || (u == f64::NEG_INFINITY && mode == Mode::UnboundedBelow);
            if !allowed {
                return Err(ModelError::Bound {
                    state: x,
                    action: a,
                    value: u,
                    mode,
                });
            }
            upper = upper.max(u / wx);
            lower = lower.max(-u / wx);
        }
    }

    let c = if upper > 0.0 { upper } else { POSITIVE_FLOOR };
    let b = match mode {
        Mode::UnboundedBelow => f64::INFINITY,
        Mode::Bounded if lower > 0.0 => lower,
        Mode::Bounded => POSITIVE_FLOOR,
    };
    Ok(ModelConstants {
        b,
        c,
        z: b.max(c),
        alpha,
        mode,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two states, one action each, with the given weights and utilities.
    pub(crate) fn two_state(weights: [f64; 2]) -> FiniteModel {
        FiniteModel::new(
            vec![StateInfo::labelled("s0"), StateInfo::labelled("s1")],
            vec!["a".into()],
            vec![vec![0], vec![0]],
            vec![vec![vec![0.5, 0.5]], vec![vec![0.0, 1.0]]],
            vec![vec![1.0], vec![-1.0]],
            weights.to_vec(),
        )
        .unwrap()
    }

    pub(crate) fn self_loop(u: f64) -> FiniteModel {
        FiniteModel::new(
            vec![StateInfo::labelled("only")],
            vec!["stay".into()],
            vec![vec![0]],
            vec![vec![vec![1.0]]],
            vec![vec![u]],
            vec![1.0],
        )
        .unwrap()
    }

    #[test]
    fn norm_examples() {
        let m = two_state([1.0, 2.0]);
        assert_eq!(weighted_norm(&ValueTable::zeros(2), &m).unwrap(), 0.0);
        assert_eq!(weighted_norm(&ValueTable::new(vec![1.0, 2.0]), &m).unwrap(), 1.0);
        assert_eq!(weighted_norm(&ValueTable::new(vec![3.0, -4.0]), &m).unwrap(), 3.0);
        assert!(matches!(
            weighted_norm(&ValueTable::new(vec![0.0, f64::NEG_INFINITY]), &m),
            Err(ModelError::NonFinite { state: 1, .. })
        ));
    }

    #[test]
    fn diff_examples() {
        let m = two_state([1.0, 2.0]);
        let w = ValueTable::new(vec![1.0, 2.0]);
        assert_eq!(weighted_diff(&w, &w, &m).unwrap(), 0.0);
        assert_eq!(weighted_diff(&w, &ValueTable::zeros(2), &m).unwrap(), 1.0);
        let v1 = ValueTable::new(vec![1.0, 1.0]);
        let v2 = ValueTable::new(vec![0.0, 3.0]);
        assert_eq!(weighted_diff(&v1, &v2, &m).unwrap(), 1.0);
    }

    #[test]
    fn single_self_loop_constants() {
        let k = validate_model(&self_loop(1.0), Mode::Bounded).unwrap();
        assert_eq!(k.c, 1.0);
        assert_eq!(k.alpha, 1.0);
        assert!(k.b > 0.0);
        assert_eq!(k.z, 1.0);
    }

    #[test]
    fn rejects_bad_rows_and_weights() {
        let mut m = two_state([1.0, 1.0]);
        m.transition[0][0] = vec![0.45, 0.45];
        assert!(matches!(
            validate_model(&m, Mode::Bounded),
            Err(ModelError::Stochasticity { state: 0, action: 0, .. })
        ));
        let m = two_state([1.0, 0.5]);
        assert!(matches!(
            validate_model(&m, Mode::Bounded),
            Err(ModelError::Weight { state: 1, .. })
        ));
    }

    #[test]
    fn minus_infinity_only_when_unbounded() {
        let m = self_loop(f64::NEG_INFINITY);
        assert!(matches!(
            validate_model(&m, Mode::Bounded),
            Err(ModelError::Bound { .. })
        ));
        let k = validate_model(&m, Mode::UnboundedBelow).unwrap();
        assert_eq!(k.b, f64::INFINITY);
        assert_eq!(k.c, POSITIVE_FLOOR);
        assert_eq!(k.z, f64::INFINITY);
    }

    #[test]
    fn c_floor_when_utilities_nonpositive() {
        let k = validate_model(&self_loop(0.0), Mode::Bounded).unwrap();
        assert_eq!(k.c, POSITIVE_FLOOR);
        assert_eq!(k.b, POSITIVE_FLOOR);
    }

    #[test]
    fn shape_errors() {
        let err = FiniteModel::new(
            vec![StateInfo::labelled("s")],
            vec!["a".into()],
            vec![vec![]],
            vec![vec![]],
            vec![vec![]],
            vec![1.0],
        );
        assert!(matches!(err, Err(ModelError::Shape(_))));
    }

    #[test]
    fn policy_must_be_admissible() {
        let m = two_state([1.0, 1.0]);
        assert!(StationaryPolicy::new(&m, vec![0, 0]).is_ok());
        assert!(matches!(
            StationaryPolicy::new(&m, vec![0, 1]),
            Err(ModelError::Inadmissible { state: 1, action: 1 })
        ));
    }
}
