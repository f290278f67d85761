use super::{measured_alpha, Application, Grid, ModelsError, Projection, ShockDistribution};
use crate::discount::DiscountFunction;
use crate::model::{FiniteModel, StateInfo};
use std::collections::BTreeMap;

/// Consumption-savings model with `u = √a` and `x' = (x − a)·ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Growth1Params {
    pub x_max: f64,
    pub grid_n: usize,
    pub shocks: ShockDistribution,
    pub eps: f64,
    pub projection: Projection,
}

impl Default for Growth1Params {
    fn default() -> Self {
        Growth1Params {
            x_max: 4.0,
            grid_n: 41,
            shocks: ShockDistribution::uniform(vec![0.5, 1.5]).expect("valid shocks"),
            eps: 0.5,
            projection: Projection::Linear,
        }
    }
}

/// Production model with `u = a^σ`, `y = x − a`, `x' = y^θ ξ + (1 − ρ) y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Growth2Params {
    pub x_max: f64,
    pub grid_n: usize,
    pub rho: f64,
    pub theta: f64,
    pub sigma: f64,
    pub r: f64,
    pub eps: f64,
    pub shocks: ShockDistribution,
    pub projection: Projection,
}

impl Default for Growth2Params {
    fn default() -> Self {
        Growth2Params {
            x_max: 10.0,
            grid_n: 41,
            rho: 0.5,
            theta: 0.5,
            sigma: 0.5,
            r: 4.0,
            eps: 0.35,
            shocks: ShockDistribution::uniform(vec![0.5, 1.5]).expect("valid shocks"),
            projection: Projection::Linear,
        }
    }
}

/// States and actions share the grid; `A(x)` is every grid point ≤ `x`.
fn consumption_model(
    grid: &Grid,
    shocks: &ShockDistribution,
    projection: Projection,
    utility: impl Fn(f64) -> f64,
    next: impl Fn(f64, f64) -> f64,
    weight: impl Fn(f64) -> f64,
) -> Result<FiniteModel, ModelsError> {
    let n = grid.len();
    let pts = &grid.points;
    let mut admissible = Vec::with_capacity(n);
    let mut transition = Vec::with_capacity(n);
    let mut utilities = Vec::with_capacity(n);
    for (i, &x) in pts.iter().enumerate() {
        admissible.push((0..=i).collect());
        let mut rows = Vec::with_capacity(i + 1);
        let mut us = Vec::with_capacity(i + 1);
        for &a in &pts[..=i] {
            let mut row = vec![0.0; n];
            for (&s, &p) in shocks.support().iter().zip(shocks.probs()) {
                if p > 0.0 {
                    grid.deposit(&mut row, next((x - a).max(0.0), s), p, projection);
                }
            }
            rows.push(row);
            us.push(utility(a));
        }
        transition.push(rows);
        utilities.push(us);
    }
    let states = pts.iter().map(|&x| StateInfo::at(x)).collect();
    let actions = pts.iter().map(|a| format!("consume={a}")).collect();
    let weights = pts.iter().map(|&x| weight(x)).collect();
    Ok(FiniteModel::new(
        states, actions, admissible, transition, utilities, weights,
    )?)
}

pub fn build_growth1(p: &Growth1Params) -> Result<Application, ModelsError> {
    let mean = p.shocks.mean();
    if mean > 1.0 + 1e-12 {
        return Err(ModelsError::MeanShock { mean });
    }
    let grid = Grid::uniform(p.x_max, p.grid_n)?;
    let model = consumption_model(
        &grid,
        &p.shocks,
        p.projection,
        f64::sqrt,
        |y, s| y * s,
        |x| (x + 1.0).sqrt(),
    )?;
    let discount = DiscountFunction::log_blend(p.eps)?;
    let alpha = measured_alpha(&model);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("alpha_measured".into(), alpha);
    diagnostics.insert("alpha_continuum".into(), 1.0);
    diagnostics.insert("projection_slack".into(), (alpha - 1.0).max(0.0));
    diagnostics.insert("mean_shock".into(), mean);
    Ok(Application {
        model,
        discount,
        diagnostics,
    })
}

/// `α = (1 + (s̄/ρ)^{1/(1−θ)} / r)^σ`.
pub fn growth2_alpha(mean_shock: f64, rho: f64, theta: f64, sigma: f64, r: f64) -> f64 {
    (1.0 + (mean_shock / rho).powf(1.0 / (1.0 - theta)) / r).powf(sigma)
}

pub fn build_growth2(p: &Growth2Params) -> Result<Application, ModelsError> {
    for (name, v) in [("rho", p.rho), ("theta", p.theta), ("sigma", p.sigma)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(ModelsError::Param(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    if !(p.r >= 1.0 && p.r.is_finite()) {
        return Err(ModelsError::Param(format!("r = {} must be at least 1", p.r)));
    }
    let mean = p.shocks.mean();
    let alpha = growth2_alpha(mean, p.rho, p.theta, p.sigma, p.r);
    let product = alpha * (1.0 - p.eps);
    if product >= 1.0 {
        return Err(ModelsError::Drift {
            alpha,
            product,
            eps_min: 1.0 - 1.0 / alpha,
        });
    }
    let discount = DiscountFunction::log_blend2(p.eps)?;
    let grid = Grid::uniform(p.x_max, p.grid_n)?;
    let (sigma, theta, rho, r) = (p.sigma, p.theta, p.rho, p.r);
    let model = consumption_model(
        &grid,
        &p.shocks,
        p.projection,
        |a| a.powf(sigma),
        |y, s| y.powf(theta) * s + (1.0 - rho) * y,
        |x| (x + r).powf(sigma),
    )?;
    let measured = measured_alpha(&model);
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("alpha_formula".into(), alpha);
    diagnostics.insert("alpha_measured".into(), measured);
    diagnostics.insert("eps_min".into(), 1.0 - 1.0 / alpha);
    diagnostics.insert("mean_shock".into(), mean);
    Ok(Application {
        model,
        discount,
        diagnostics,
    })
}
