//! Discretised application models and the optimal-stopping analysis layer.

mod chain;
mod growth;
mod inventory;
mod presets;
mod stopping;

pub use chain::{build_chain_counterexample, ChainFamily};
pub use growth::{build_growth1, build_growth2, growth2_alpha, Growth1Params, Growth2Params};
pub use inventory::{build_inventory, InventoryParams};
pub use presets::{house_selling_problem, preset, Preset, PRESETS};
pub use stopping::{
    build_stopping, solve_house_selling, HouseSelling, StoppingAnalysis, StoppingSpec,
};

use crate::discount::{DiscountError, DiscountFunction};
use crate::model::{FiniteModel, ModelError};
use crate::solver::SolverError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discount(#[from] DiscountError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("GridError: {0}")]
    Grid(String),
    #[error("MeanShockError: mean shock {mean} exceeds 1")]
    MeanShock { mean: f64 },
    #[error("ShockError: {0}")]
    Shock(String),
    #[error("ParamError: {0}")]
    Param(String),
    #[error("ParamError: α = {alpha} gives α(1−ε) = {product} ≥ 1; need ε > {eps_min}")]
    Drift {
        alpha: f64,
        product: f64,
        eps_min: f64,
    },
    #[error("BoundError: {0}")]
    Bound(String),
}

/// A built model, its natural discount function, and builder diagnostics
/// such as the measured drift constant.
#[derive(Debug, Clone)]
pub struct Application {
    pub model: FiniteModel,
    pub discount: DiscountFunction,
    pub diagnostics: BTreeMap<String, f64>,
}

/// Finite distribution on nonnegative support points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockDistribution {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl ShockDistribution {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self, ModelsError> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(ModelsError::Shock(format!(
                "{} support points with {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if support.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(ModelsError::Shock("support must be finite and nonnegative".into()));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(ModelsError::Shock("probabilities must be nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > crate::model::ROW_SUM_TOL {
            return Err(ModelsError::Shock(format!("probabilities sum to {sum}")));
        }
        Ok(ShockDistribution { support, probs })
    }

    pub fn uniform(support: Vec<f64>) -> Result<Self, ModelsError> {
        let n = support.len().max(1) as f64;
        let probs = vec![1.0 / n; support.len()];
        Self::new(support, probs)
    }

    pub fn point(at: f64) -> Result<Self, ModelsError> {
        Self::new(vec![at], vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(s, p)| s * p).sum()
    }

    /// `E g(ξ)`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(&s, &p)| p * g(s))
            .sum()
    }
}

/// How a continuous successor is placed on the state grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Split mass between the two neighbouring grid points, preserving the mean.
    #[default]
    Linear,
    /// Move all mass to the nearest grid point, ties to the even index.
    Nearest,
}

impl std::str::FromStr for Projection {
    type Err = ModelsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Projection::Linear),
            "nearest" => Ok(Projection::Nearest),
            other => Err(ModelsError::Param(format!("unknown projection {other:?}"))),
        }
    }
}

/// Uniform grid on `[0, hi]`; mass beyond `hi` accumulates on the last point.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Grid {
    pub points: Vec<f64>,
    step: f64,
}

impl Grid {
    pub fn uniform(hi: f64, n: usize) -> Result<Self, ModelsError> {
        if n < 2 {
            return Err(ModelsError::Grid(format!("grid needs at least 2 points, got {n}")));
        }
        if !(hi.is_finite() && hi > 0.0) {
            return Err(ModelsError::Grid(format!("upper end {hi} must be positive")));
        }
        let step = hi / (n - 1) as f64;
        let points = (0..n).map(|i| if i + 1 == n { hi } else { i as f64 * step }).collect();
        Ok(Grid { points, step })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Adds `mass` at position `z` into `row` under `how`.
    pub fn deposit(&self, row: &mut [f64], z: f64, mass: f64, how: Projection) {
        let last = self.len() - 1;
        let t = (z.max(0.0) / self.step).min(last as f64);
        match how {
            Projection::Nearest => {
                let i = t.round_ties_even() as usize;
                row[i.min(last)] += mass;
            }
            Projection::Linear => {
                let i = (t.floor() as usize).min(last);
                let frac = t - i as f64;
                if i == last || frac < 1e-12 {
                    row[i] += mass;
                } else if frac > 1.0 - 1e-12 {
                    row[i + 1] += mass;
                } else {
                    row[i] += mass * (1.0 - frac);
                    row[i + 1] += mass * frac;
                }
            }
        }
    }
}

/// `max Σ ω(y)q / ω(x)` over the built tables.
pub(crate) fn measured_alpha(model: &FiniteModel) -> f64 {
    let w = model.weights();
    let mut alpha: f64 = 0.0;
    for x in 0..model.n_states() {
        for k in 0..model.admissible(x).len() {
            let s: f64 = model.row(x, k).iter().zip(w).map(|(q, wy)| q * wy).sum();
            alpha = alpha.max(s / w[x]);
        }
    }
    alpha
}
