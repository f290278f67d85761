use super::{Application, Grid, ModelsError, Projection, ShockDistribution};
use crate::discount::DiscountFunction;
use crate::model::{FiniteModel, StateInfo};
use std::collections::BTreeMap;

/// Periodic-review inventory: sell `min(x, Δ)` at price `p`, then order `a`
/// at cost `C(a)`. Stock beyond capacity is lost.
#[derive(Debug, Clone, PartialEq)]
pub struct InventoryParams {
    pub stock_max: f64,
    pub grid_n: usize,
    pub demand: ShockDistribution,
    pub price: f64,
    /// Order sizes; one action each.
    pub orders: Vec<f64>,
    /// `C(a)` for every order size; the first order must be 0 with cost 0.
    pub order_costs: Vec<f64>,
    /// Upper bound `â` on order sizes.
    pub a_hat: f64,
}

impl Default for InventoryParams {
    fn default() -> Self {
        let orders: Vec<f64> = (0..=5).map(f64::from).collect();
        let order_costs = orders
            .iter()
            .map(|&a| if a > 0.0 { 0.5 + 0.4 * a } else { 0.0 })
            .collect();
        InventoryParams {
            stock_max: 10.0,
            grid_n: 11,
            demand: ShockDistribution::uniform(vec![0.0, 1.0, 2.0, 3.0]).expect("valid demand"),
            price: 1.0,
            orders,
            order_costs,
            a_hat: 5.0,
        }
    }
}

pub fn build_inventory(p: &InventoryParams, discount: DiscountFunction) -> Result<Application, ModelsError> {
    if p.orders.is_empty() || p.orders.len() != p.order_costs.len() {
        return Err(ModelsError::Param(format!(
            "{} orders with {} costs",
            p.orders.len(),
            p.order_costs.len()
        )));
    }
    if p.orders[0] != 0.0 || p.order_costs[0] != 0.0 {
        return Err(ModelsError::Param("the first order must be 0 with C(0) = 0".into()));
    }
    if p.orders.iter().any(|&a| !(0.0..=p.a_hat).contains(&a)) {
        return Err(ModelsError::Param(format!("orders must lie in [0, {}]", p.a_hat)));
    }
    if p.order_costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(ModelsError::Param("order costs must be finite and nonnegative".into()));
    }
    if !(p.price.is_finite() && p.price >= 0.0) {
        return Err(ModelsError::Param(format!("price {} must be nonnegative", p.price)));
    }
    let grid = Grid::uniform(p.stock_max, p.grid_n)?;
    let n = grid.len();
    let mut transition = Vec::with_capacity(n);
    let mut utility = Vec::with_capacity(n);
    for &x in &grid.points {
        let sales = p.demand.expect(|dem| x.min(dem));
        let mut rows = Vec::with_capacity(p.orders.len());
        let mut us = Vec::with_capacity(p.orders.len());
        for (&a, &cost) in p.orders.iter().zip(&p.order_costs) {
            let mut row = vec![0.0; n];
            for (&dem, &q) in p.demand.support().iter().zip(p.demand.probs()) {
                if q > 0.0 {
                    grid.deposit(&mut row, x - x.min(dem) + a, q, Projection::Linear);
                }
            }
            rows.push(row);
            us.push(p.price * sales - cost);
        }
        transition.push(rows);
        utility.push(us);
    }
    let c_hat = p.order_costs.iter().copied().fold(0.0, f64::max);
    let model = FiniteModel::new(
        grid.points.iter().map(|&x| StateInfo::at(x)).collect(),
        p.orders.iter().map(|a| format!("order={a}")).collect(),
        vec![(0..p.orders.len()).collect(); n],
        transition,
        utility,
        vec![1.0; n],
    )?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("c_hat".into(), c_hat);
    diagnostics.insert("sales_bound".into(), p.price * p.demand.mean());
    Ok(Application {
        model,
        discount,
        diagnostics,
    })
}
