use super::operators::bellman_t;
use super::value_iteration::{value_iterate, SolveOptions, SolveReport, Status};
use super::SolverError;
use crate::discount::DiscountFunction;
use crate::model::{validate_model, FiniteModel, Mode, StationaryPolicy, ValueTable};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationOptions {
    pub k_schedule: Vec<f64>,
    pub solve: SolveOptions,
    /// Largest tolerated increase of `v^{*,K}` from one K to the next.
    pub monotone_tol: f64,
    /// Per-state stabilisation threshold, scaled by `ω(x)`.
    pub stable_tol: f64,
}

impl Default for TruncationOptions {
    fn default() -> Self {
        TruncationOptions {
            k_schedule: (0..=16).map(|i| f64::from(1u32 << i)).collect(),
            solve: SolveOptions {
                tol: 1e-11,
                max_iters: 1_000_000,
            },
            monotone_tol: 1e-10,
            stable_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub k_schedule: Vec<f64>,
    /// `v^{*,K}` for each K in the schedule.
    pub values: Vec<ValueTable>,
    pub statuses: Vec<Status>,
    pub iterations: Vec<usize>,
    /// Values at the largest K.
    pub limit: ValueTable,
    /// Last two tables agree within `stable_tol · ω(x)`.
    pub stabilized: Vec<bool>,
    /// Lowest-index maximiser of the untruncated backup of `limit`.
    pub policy: StationaryPolicy,
    /// Largest observed increase between consecutive K (≤ 0 when strictly monotone).
    pub max_increase: f64,
    pub monotone: bool,
}

impl TruncationReport {
    pub fn all_converged(&self) -> bool {
        self.statuses.iter().all(|s| *s == Status::Converged)
    }
}

/// `u^K = max(u, 1 − K)`.
pub fn truncate(model: &FiniteModel, k: f64) -> FiniteModel {
    model.map_utility(|_, _, u| u.max(1.0 - k))
}

/// Solves the clamped problems along the K schedule and certifies monotonicity.
pub fn truncation_solve(
    model: &FiniteModel,
    d: &DiscountFunction,
    opts: &TruncationOptions,
) -> Result<TruncationReport, SolverError> {
    validate_model(model, Mode::UnboundedBelow)?;
    let ks = &opts.k_schedule;
    if ks.is_empty() {
        return Err(SolverError::Argument("empty K schedule".into()));
    }
    if ks.iter().any(|k| !k.is_finite()) || ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::Argument(
            "K schedule must be finite and strictly increasing".into(),
        ));
    }
    let mut reports: Vec<SolveReport> = Vec::with_capacity(ks.len());
    let mut max_increase = f64::NEG_INFINITY;
    for (i, &k) in ks.iter().enumerate() {
        let r = value_iterate(&truncate(model, k), d, opts.solve)?;
        if let Some(prev) = reports.last() {
            for x in 0..model.n_states() {
                let inc = r.value[x] - prev.value[x];
                max_increase = max_increase.max(inc);
                if inc > opts.monotone_tol {
                    return Err(SolverError::Monotonicity {
                        state: x,
                        k_prev: ks[i - 1],
                        k_next: k,
                        increase: inc,
                    });
                }
            }
        }
        reports.push(r);
    }
    let limit = reports.last().unwrap().value.clone();
    let stabilized = match reports.len() {
        1 => vec![false; model.n_states()],
        n => (0..model.n_states())
            .map(|x| {
                (reports[n - 1].value[x] - reports[n - 2].value[x]).abs()
                    <= opts.stable_tol * model.weight(x)
            })
            .collect(),
    };
    let policy = bellman_t(model, d, &limit)?.greedy_policy();
    Ok(TruncationReport {
        k_schedule: ks.clone(),
        statuses: reports.iter().map(|r| r.status).collect(),
        iterations: reports.iter().map(|r| r.iterations).collect(),
        values: reports.into_iter().map(|r| r.value).collect(),
        limit,
        stabilized,
        policy,
        max_increase: if ks.len() > 1 { max_increase } else { 0.0 },
        monotone: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StateInfo;

    /// State 0 may take a forbidden action `a0` worth −∞ that leads to the
    /// rewarding state 1, or a safe action `a1` worth −1 that self-loops.
    fn forbidden() -> FiniteModel {
        FiniteModel::new(
            vec![StateInfo::labelled("x0"), StateInfo::labelled("x1")],
            vec!["a0".into(), "a1".into()],
            vec![vec![0, 1], vec![1]],
            vec![vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![vec![0.0, 1.0]]],
            vec![vec![f64::NEG_INFINITY, -1.0], vec![1.0]],
            vec![1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn forbidden_action_is_abandoned() {
        let d = DiscountFunction::linear(0.5).unwrap();
        let opts = TruncationOptions {
            k_schedule: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            ..Default::default()
        };
        let r = truncation_solve(&forbidden(), &d, &opts).unwrap();
        // v(x1) = 2; v^K(x0) = max(1 − K + 1, −2).
        let expected = [1.0, 0.0, -2.0, -2.0, -2.0];
        for (v, e) in r.values.iter().zip(expected) {
            assert!((v[0] - e).abs() < 1e-9, "{} vs {e}", v[0]);
            assert!((v[1] - 2.0).abs() < 1e-9);
        }
        assert_eq!(r.policy.as_slice(), &[1, 1]);
        assert!(r.stabilized.iter().all(|&s| s));
        assert!(r.max_increase <= 1e-10);
    }

    #[test]
    fn schedule_must_increase() {
        let d = DiscountFunction::linear(0.5).unwrap();
        let opts = TruncationOptions {
            k_schedule: vec![2.0, 1.0],
            ..Default::default()
        };
        assert!(truncation_solve(&forbidden(), &d, &opts).is_err());
    }
}
