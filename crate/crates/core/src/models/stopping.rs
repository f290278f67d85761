use super::ModelsError;
use crate::discount::DiscountFunction;
use crate::model::{FiniteModel, StateInfo, ValueTable};
use crate::solver::{apply_s, value_iterate, SolveOptions, SolveReport};
use serde::{Deserialize, Serialize};

/// Action index for continuing.
pub const CONTINUE: usize = 0;
/// Action index for stopping.
pub const STOP: usize = 1;

/// Data of a stopping problem on finitely many states.
///
/// Continuing at `x` pays `C(x)` and moves by `q_rows[x]`; stopping pays
/// `R(x)` and enters an absorbing state worth nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingSpec {
    pub x_values: Vec<f64>,
    pub q_rows: Vec<Vec<f64>>,
    pub reward: Vec<f64>,
    pub cost: Vec<f64>,
    /// ω on the non-absorbing states; defaults to the constant
    /// `max(1, max|R|, max|C|)`, which keeps the drift constant at 1.
    pub weight: Option<Vec<f64>>,
}

pub fn build_stopping(spec: &StoppingSpec) -> Result<FiniteModel, ModelsError> {
    let n = spec.x_values.len();
    if n == 0 {
        return Err(ModelsError::Param("stopping model needs at least one state".into()));
    }
    for (name, len) in [
        ("q_rows", spec.q_rows.len()),
        ("reward", spec.reward.len()),
        ("cost", spec.cost.len()),
    ] {
        if len != n {
            return Err(ModelsError::Param(format!("{name} has {len} entries, expected {n}")));
        }
    }
    let scale = spec
        .reward
        .iter()
        .chain(&spec.cost)
        .map(|v| v.abs())
        .fold(1.0, f64::max);
    let weight = match &spec.weight {
        Some(w) if w.len() != n => {
            return Err(ModelsError::Param(format!("weight has {} entries, expected {n}", w.len())))
        }
        Some(w) => w.clone(),
        None => vec![scale; n],
    };
    for x in 0..n {
        if spec.reward[x].abs() > weight[x] || spec.cost[x].abs() > weight[x] {
            return Err(ModelsError::Bound(format!(
                "|R| or |C| exceeds ω at state {x}: R = {}, C = {}, ω = {}",
                spec.reward[x], spec.cost[x], weight[x]
            )));
        }
    }
    let absorbing = n;
    let mut transition = Vec::with_capacity(n + 1);
    let mut utility = Vec::with_capacity(n + 1);
    let mut admissible = Vec::with_capacity(n + 1);
    for x in 0..n {
        if spec.q_rows[x].len() != n {
            return Err(ModelsError::Param(format!(
                "q row {x} has {} entries, expected {n}",
                spec.q_rows[x].len()
            )));
        }
        let mut cont = spec.q_rows[x].clone();
        cont.push(0.0);
        let mut stop = vec![0.0; n + 1];
        stop[absorbing] = 1.0;
        transition.push(vec![cont, stop]);
        utility.push(vec![spec.cost[x], spec.reward[x]]);
        admissible.push(vec![CONTINUE, STOP]);
    }
    let mut sink = vec![0.0; n + 1];
    sink[absorbing] = 1.0;
    transition.push(vec![sink]);
    utility.push(vec![0.0]);
    admissible.push(vec![CONTINUE]);

    let mut states: Vec<StateInfo> = spec.x_values.iter().map(|&x| StateInfo::at(x)).collect();
    states.push(StateInfo::labelled("inf"));
    let mut weights = weight;
    weights.push(1.0);
    Ok(FiniteModel::new(
        states,
        vec!["continue".into(), "stop".into()],
        admissible,
        transition,
        utility,
        weights,
    )?)
}

/// Offers i.i.d. on a grid of `[m, M]`, each round of waiting costs `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseSelling {
    pub offers: Vec<f64>,
    pub probs: Vec<f64>,
    pub cost: f64,
}

impl HouseSelling {
    /// `n` equally spaced, equally likely offers from `m` to `M`.
    pub fn uniform(m: f64, big_m: f64, n: usize, cost: f64) -> Result<Self, ModelsError> {
        if !(0.0 < m && m < big_m) {
            return Err(ModelsError::Param(format!("need 0 < m < M, got m = {m}, M = {big_m}")));
        }
        if n < 2 {
            return Err(ModelsError::Grid("offer grid needs at least 2 points".into()));
        }
        let step = (big_m - m) / (n - 1) as f64;
        let offers = (0..n)
            .map(|i| if i + 1 == n { big_m } else { m + i as f64 * step })
            .collect();
        Ok(HouseSelling {
            offers,
            probs: vec![1.0 / n as f64; n],
            cost,
        })
    }

    pub fn stopping_spec(&self) -> Result<StoppingSpec, ModelsError> {
        let n = self.offers.len();
        if n == 0 || self.probs.len() != n {
            return Err(ModelsError::Param("offers and probabilities must match".into()));
        }
        if self.offers.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(ModelsError::Param("offers must be positive".into()));
        }
        if !(self.cost.is_finite() && self.cost >= 0.0) {
            return Err(ModelsError::Param(format!("cost {} must be nonnegative", self.cost)));
        }
        Ok(StoppingSpec {
            x_values: self.offers.clone(),
            q_rows: vec![self.probs.clone(); n],
            reward: self.offers.clone(),
            cost: vec![-self.cost; n],
            weight: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppingAnalysis {
    /// `C* = Σ_y δ(v*(y)) q(y)`.
    pub c_star: f64,
    /// Largest deviation of the per-state continuation constant from `c_star`.
    pub c_star_spread: f64,
    /// Accept an offer `x` iff `x ≥ threshold`.
    pub threshold: f64,
    /// Per offer: stopping is optimal.
    pub stop_region: Vec<bool>,
    pub region_is_up_set: bool,
    /// Probability that a fresh offer is accepted.
    pub accept_prob: f64,
    /// The stopping time is geometric, hence finite almost surely.
    pub geometric_stop: bool,
    pub value: ValueTable,
    pub report: SolveReport,
}

/// Solves the house-selling problem and extracts its threshold structure.
pub fn solve_house_selling(
    problem: &HouseSelling,
    d: &DiscountFunction,
    opts: SolveOptions,
) -> Result<StoppingAnalysis, ModelsError> {
    let spec = problem.stopping_spec()?;
    let model = build_stopping(&spec)?;
    let report = value_iterate(&model, d, opts)?;
    let n = problem.offers.len();
    let sv = apply_s(&model, d, &report.value)?;
    let per_state: Vec<f64> = (0..n).map(|x| sv[x][CONTINUE] - spec.cost[x]).collect();
    let c_star: f64 = (0..n)
        .filter(|&y| problem.probs[y] > 0.0)
        .map(|y| problem.probs[y] * d.delta(report.value[y]))
        .sum();
    let c_star_spread = per_state
        .iter()
        .map(|c| (c - c_star).abs())
        .fold(0.0, f64::max);
    let threshold = -problem.cost + c_star;
    let stop_region: Vec<bool> = (0..n).map(|x| sv[x][STOP] >= sv[x][CONTINUE]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| problem.offers[a].total_cmp(&problem.offers[b]));
    let region_is_up_set = order
        .windows(2)
        .all(|w| !stop_region[w[0]] || stop_region[w[1]]);
    let accept_prob: f64 = (0..n)
        .filter(|&x| stop_region[x])
        .map(|x| problem.probs[x])
        .sum();
    Ok(StoppingAnalysis {
        c_star,
        c_star_spread,
        threshold,
        stop_region,
        region_is_up_set,
        accept_prob,
        geometric_stop: accept_prob > 0.0,
        value: report.value.clone(),
        report,
    })
}
