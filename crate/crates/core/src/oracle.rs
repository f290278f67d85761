//! Brute-force reference evaluators.
//!
//! Nothing here calls into [`crate::solver`]: the history tree, the pathwise
//! recursion and classical value iteration are written directly against the
//! model tables so they can serve as independent witnesses.

use crate::discount::DiscountFunction;
use crate::model::{FiniteModel, ModelError, StationaryPolicy, ValueTable};
use crate::par::map_items;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

/// Largest history tree the oracles will materialise.
pub const MAX_TREE_NODES: usize = 1_000_000;

/// Branches whose path probability falls below this are dropped.
pub const PRUNE_BELOW: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("TreeTooLarge: history tree exceeds {limit} nodes")]
    TreeTooLarge { limit: usize },
    #[error("IterationCap: classical value iteration did not settle in {iterations} sweeps")]
    IterationCap { iterations: usize },
    #[error("NotContracting: β·max(1, α) = {rho} is not below 1")]
    NotContracting { rho: f64 },
    #[error("history policy has no admissible action for history {history:?}")]
    Undefined { history: Vec<usize> },
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// A decision rule for every history `(x1, a1, …, xk)` up to a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryPolicy {
    horizon: usize,
    table: HashMap<Vec<usize>, usize>,
}

impl HistoryPolicy {
    /// Tabulates `rule` over every reachable history of length ≤ `horizon`
    /// started anywhere in the state space.
    pub fn from_fn(
        model: &FiniteModel,
        horizon: usize,
        mut rule: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self, OracleError> {
        let mut table = HashMap::new();
        let mut frontier: Vec<Vec<usize>> = (0..model.n_states()).map(|x| vec![x]).collect();
        for stage in 1..=horizon {
            let mut next = Vec::new();
            for h in frontier {
                let x = *h.last().unwrap();
                let a = rule(&h);
                let Some(slot) = model.slot(x, a) else {
                    return Err(ModelError::Inadmissible { state: x, action: a }.into());
                };
                if stage < horizon {
                    for (y, &p) in model.row(x, slot).iter().enumerate() {
                        if p > 0.0 {
                            if table.len() + next.len() >= MAX_TREE_NODES {
                                return Err(OracleError::TreeTooLarge {
                                    limit: MAX_TREE_NODES,
                                });
                            }
                            let mut child = h.clone();
                            child.push(a);
                            child.push(y);
                            next.push(child);
                        }
                    }
                }
                table.insert(h, a);
                if table.len() > MAX_TREE_NODES {
                    return Err(OracleError::TreeTooLarge {
                        limit: MAX_TREE_NODES,
                    });
                }
            }
            frontier = next;
        }
        Ok(HistoryPolicy { horizon, table })
    }

    /// The Markov policy `(π_1, …, π_n)`, written out history by history.
    pub fn markov(model: &FiniteModel, seq: &[StationaryPolicy]) -> Result<Self, OracleError> {
        Self::from_fn(model, seq.len(), |h| seq[h.len() / 2].action(h[h.len() - 1]))
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn action(&self, history: &[usize]) -> Option<usize> {
        self.table.get(history).copied()
    }

    fn lookup(&self, history: &[usize]) -> Result<usize, OracleError> {
        self.action(history).ok_or_else(|| OracleError::Undefined {
            history: history.to_vec(),
        })
    }
}

/// An oracle value with the probability mass ignored by pruning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleValue {
    pub value: f64,
    pub pruned_mass: f64,
    pub nodes: usize,
}

struct Node {
    state: usize,
    slot: usize,
    children: Vec<(f64, usize)>,
}

fn check_horizon(model: &FiniteModel, hp: &HistoryPolicy, n: usize, x0: usize) -> Result<(), OracleError> {
    if n == 0 {
        return Err(OracleError::Argument("horizon must be at least 1".into()));
    }
    if n > hp.horizon() {
        return Err(OracleError::Argument(format!(
            "policy covers {} stages, {n} requested",
            hp.horizon()
        )));
    }
    if x0 >= model.n_states() {
        return Err(OracleError::Argument(format!("no state {x0}")));
    }
    Ok(())
}

/// Breadth-first materialisation of the history subtree rooted at `root`.
fn build_tree(
    model: &FiniteModel,
    hp: &HistoryPolicy,
    n: usize,
    root: Vec<usize>,
    root_prob: f64,
    budget: &AtomicUsize,
) -> Result<(Vec<Node>, f64), OracleError> {
    let mut nodes: Vec<Node> = Vec::new();
    let mut frontier = vec![root];
    let mut probs = vec![root_prob];
    let mut pruned = 0.0;
    let mut parents: Vec<Option<(usize, f64)>> = vec![None];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        let mut next_probs = Vec::new();
        let mut next_parents = Vec::new();
        for ((h, prob), parent) in frontier.into_iter().zip(probs).zip(parents) {
            if budget.fetch_add(1, Ordering::Relaxed) >= MAX_TREE_NODES {
                return Err(OracleError::TreeTooLarge {
                    limit: MAX_TREE_NODES,
                });
            }
            let x = *h.last().unwrap();
            let a = hp.lookup(&h)?;
            let slot = model
                .slot(x, a)
                .ok_or(ModelError::Inadmissible { state: x, action: a })?;
            let id = nodes.len();
            nodes.push(Node {
                state: x,
                slot,
                children: Vec::new(),
            });
            if let Some((p, q)) = parent {
                nodes[p].children.push((q, id));
            }
            if h.len() / 2 + 1 < n {
                for (y, &q) in model.row(x, slot).iter().enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    if prob * q < PRUNE_BELOW {
                        pruned += prob * q;
                        continue;
                    }
                    let mut child = h.clone();
                    child.push(a);
                    child.push(y);
                    next.push(child);
                    next_probs.push(prob * q);
                    next_parents.push(Some((id, q)));
                }
            }
        }
        frontier = next;
        probs = next_probs;
        parents = next_parents;
    }
    Ok((nodes, pruned))
}

/// `U_n(x0, π)` by recursion over the explicit history tree:
/// a leaf is worth `u`, an interior node `u + Σ_y q·δ(child)`.
pub fn enumerate_histories_un(
    model: &FiniteModel,
    d: &DiscountFunction,
    hp: &HistoryPolicy,
    n: usize,
    x0: usize,
) -> Result<OracleValue, OracleError> {
    check_horizon(model, hp, n, x0)?;
    let budget = AtomicUsize::new(0);
    let (nodes, pruned_mass) = build_tree(model, hp, n, vec![x0], 1.0, &budget)?;
    // Children always follow their parent, so a reverse sweep sees leaves first.
    let mut value = vec![0.0; nodes.len()];
    for id in (0..nodes.len()).rev() {
        let node = &nodes[id];
        let cont: f64 = node
            .children
            .iter()
            .map(|&(q, c)| q * d.delta(value[c]))
            .sum();
        value[id] = model.utility(node.state, node.slot) + cont;
    }
    Ok(OracleValue {
        value: value[0],
        pruned_mass,
        nodes: nodes.len(),
    })
}

/// `R_n(x0, π) = E[r_n]` with `r_1 = u(x1,a1)` and
/// `r_{k+1}(x1,a1,…) = u(x1,a1) + δ(r_k(x2,a2,…))`, evaluated path by path.
pub fn pathwise_rn(
    model: &FiniteModel,
    d: &DiscountFunction,
    hp: &HistoryPolicy,
    n: usize,
    x0: usize,
) -> Result<OracleValue, OracleError> {
    check_horizon(model, hp, n, x0)?;
    let a0 = hp.lookup(&[x0])?;
    let slot0 = model
        .slot(x0, a0)
        .ok_or(ModelError::Inadmissible { state: x0, action: a0 })?;
    if n == 1 {
        return Ok(OracleValue {
            value: model.utility(x0, slot0),
            pruned_mass: 0.0,
            nodes: 1,
        });
    }
    let budget = AtomicUsize::new(1);
    let branches: Vec<(usize, f64)> = model
        .row(x0, slot0)
        .iter()
        .enumerate()
        .filter(|(_, &q)| q > 0.0)
        .map(|(y, &q)| (y, q))
        .collect();
    // Each first-stage branch is walked independently and merged in index order.
    let parts = map_items(&branches, |&(y, q)| {
        let mut acc = PathAcc::default();
        let mut history = vec![x0, a0, y];
        let mut path = vec![(x0, slot0)];
        walk_paths(model, d, hp, n, q, &mut history, &mut path, &budget, &mut acc)?;
        Ok::<_, OracleError>(acc)
    });
    let mut total = PathAcc::default();
    for part in parts {
        let part = part?;
        total.value += part.value;
        total.pruned += part.pruned;
        total.paths += part.paths;
    }
    Ok(OracleValue {
        value: total.value,
        pruned_mass: total.pruned,
        nodes: budget.load(Ordering::Relaxed),
    })
}

#[derive(Default)]
struct PathAcc {
    value: f64,
    pruned: f64,
    paths: usize,
}

#[allow(clippy::too_many_arguments)]
fn walk_paths(
    model: &FiniteModel,
    d: &DiscountFunction,
    hp: &HistoryPolicy,
    n: usize,
    prob: f64,
    history: &mut Vec<usize>,
    path: &mut Vec<(usize, usize)>,
    budget: &AtomicUsize,
    acc: &mut PathAcc,
) -> Result<(), OracleError> {
    if budget.fetch_add(1, Ordering::Relaxed) >= MAX_TREE_NODES {
        return Err(OracleError::TreeTooLarge {
            limit: MAX_TREE_NODES,
        });
    }
    let x = *history.last().unwrap();
    let a = hp.lookup(history)?;
    let slot = model
        .slot(x, a)
        .ok_or(ModelError::Inadmissible { state: x, action: a })?;
    path.push((x, slot));
    if path.len() == n {
        let mut r = 0.0;
        for (k, &(s, sl)) in path.iter().enumerate().rev() {
            let u = model.utility(s, sl);
            r = if k + 1 == path.len() { u } else { u + d.delta(r) };
        }
        acc.value += prob * r;
        acc.paths += 1;
    } else {
        for (y, &q) in model.row(x, slot).iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            if prob * q < PRUNE_BELOW {
                acc.pruned += prob * q;
                continue;
            }
            history.push(a);
            history.push(y);
            walk_paths(model, d, hp, n, prob * q, history, path, budget, acc)?;
            history.pop();
            history.pop();
        }
    }
    path.pop();
    Ok(())
}

/// Expected total discounted reward with factor `beta`, by plain value
/// iteration stopped once `ρⁿ‖v_1‖_ω / (1 − ρ) < tol`, `ρ = β·max(1, α)`.
pub fn classical_discounted_vi(
    model: &FiniteModel,
    beta: f64,
    tol: f64,
    max_iters: usize,
) -> Result<(ValueTable, StationaryPolicy), OracleError> {
    if !(0.0..1.0).contains(&beta) {
        return Err(OracleError::Argument(format!("β = {beta} must lie in [0, 1)")));
    }
    let s = model.n_states();
    let w = model.weights();
    let mut alpha: f64 = 0.0;
    for x in 0..s {
        for k in 0..model.admissible(x).len() {
            let drift: f64 = model.row(x, k).iter().zip(w).map(|(q, wy)| q * wy).sum();
            alpha = alpha.max(drift / w[x]);
        }
    }
    let rho = beta * alpha.max(1.0);
    if rho >= 1.0 {
        return Err(OracleError::NotContracting { rho });
    }
    let sweep = |v: &[f64]| -> (Vec<f64>, Vec<usize>) {
        let mut out = Vec::with_capacity(s);
        let mut arg = Vec::with_capacity(s);
        for x in 0..s {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = usize::MAX;
            for (k, &a) in model.admissible(x).iter().enumerate() {
                let ev: f64 = model
                    .row(x, k)
                    .iter()
                    .zip(v)
                    .filter(|(q, _)| **q > 0.0)
                    .map(|(q, vy)| q * vy)
                    .sum();
                let val = model.utility(x, k) + beta * ev;
                if val > best || (val == best && a < best_a) {
                    best = val;
                    best_a = a;
                }
            }
            out.push(best);
            arg.push(best_a);
        }
        (out, arg)
    };
    let norm = |v: &[f64]| v.iter().zip(w).map(|(a, b)| a.abs() / b).fold(0.0, f64::max);

    let (mut v, _) = sweep(&vec![0.0; s]);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(OracleError::Argument("utilities must be finite".into()));
    }
    let scale = norm(&v);
    let mut bound = scale / (1.0 - rho);
    for _ in 1..max_iters {
        let (next, _) = sweep(&v);
        bound *= rho;
        let floor = 64.0 * f64::EPSILON * norm(&next);
        let settled = norm(
            &next
                .iter()
                .zip(&v)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        ) * rho
            / (1.0 - rho)
            <= floor;
        v = next;
        if bound < tol || settled {
            let (_, arg_final) = sweep(&v);
            return Ok((
                ValueTable::new(v),
                StationaryPolicy::from_vec_unchecked(arg_final),
            ));
        }
    }
    Err(OracleError::IterationCap {
        iterations: max_iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::self_loop;
    use crate::model::StateInfo;

    fn pair() -> FiniteModel {
        FiniteModel::new(
            vec![StateInfo::labelled("a"), StateInfo::labelled("b")],
            vec!["p".into(), "q".into()],
            vec![vec![0, 1], vec![0, 1]],
            vec![
                vec![vec![0.5, 0.5], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.25, 0.75]],
            ],
            vec![vec![1.0, -2.0], vec![-1.0, 3.0]],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn one_stage_is_utility() {
        let m = pair();
        let d = DiscountFunction::log_blend(0.5).unwrap();
        let hp = HistoryPolicy::from_fn(&m, 1, |_| 1).unwrap();
        assert_eq!(enumerate_histories_un(&m, &d, &hp, 1, 0).unwrap().value, -2.0);
        assert_eq!(pathwise_rn(&m, &d, &hp, 1, 1).unwrap().value, 3.0);
    }

    #[test]
    fn two_stage_by_hand() {
        let m = pair();
        let d = DiscountFunction::sign_effect(0.5, 0.9).unwrap();
        let hp = HistoryPolicy::from_fn(&m, 2, |_| 0).unwrap();
        // U_2(a) = 1 + ½δ(1) + ½δ(−1); R_2(a) is the same for one-step paths.
        let u2 = enumerate_histories_un(&m, &d, &hp, 2, 0).unwrap().value;
        assert!((u2 - (1.0 + 0.5 * 0.9 - 0.5 * 0.5)).abs() < 1e-15);
        let r2 = pathwise_rn(&m, &d, &hp, 2, 0).unwrap().value;
        assert!((r2 - u2).abs() < 1e-15);
    }

    #[test]
    fn aggregations_split_at_three_stages() {
        // From x2 = a the paths continue to values of both signs.
        let m = pair().map_utility(|x, a, u| if (x, a) == (0, 0) { 0.2 } else { u });
        let d = DiscountFunction::sign_effect(0.5, 0.9).unwrap();
        let hp = HistoryPolicy::from_fn(&m, 3, |_| 0).unwrap();
        let u = enumerate_histories_un(&m, &d, &hp, 3, 0).unwrap().value;
        let r = pathwise_rn(&m, &d, &hp, 3, 0).unwrap().value;
        assert!((u - r).abs() > 1e-6, "{u} vs {r}");
    }

    #[test]
    fn markov_policy_rejects_inadmissible() {
        let m = FiniteModel::new(
            vec![StateInfo::labelled("s")],
            vec!["x".into(), "y".into()],
            vec![vec![1]],
            vec![vec![vec![1.0]]],
            vec![vec![0.0]],
            vec![1.0],
        )
        .unwrap();
        assert!(HistoryPolicy::from_fn(&m, 2, |_| 0).is_err());
    }

    #[test]
    fn classical_geometric_series() {
        let (v, f) = classical_discounted_vi(&self_loop(1.0), 0.5, 1e-12, 10_000).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12);
        assert_eq!(f.as_slice(), &[0]);
        let (v0, _) = classical_discounted_vi(&self_loop(0.0), 0.5, 1e-12, 10_000).unwrap();
        assert_eq!(v0[0], 0.0);
    }

    #[test]
    fn tree_guard() {
        let spec = crate::random::RandomModelSpec::new(20, 1).sparsity(0.0);
        let m = crate::random::random_model(&spec, 1);
        let hp = HistoryPolicy::markov(&m, &vec![StationaryPolicy::lowest_index(&m); 4]).unwrap();
        let d = DiscountFunction::linear(0.5).unwrap();
        assert!(enumerate_histories_un(&m, &d, &hp, 4, 0).is_ok());
        let hp6 = HistoryPolicy::from_fn(&m, 6, |_| 0);
        assert!(matches!(hp6, Err(OracleError::TreeTooLarge { .. })));
    }
}
