use super::{
    build_chain_counterexample, build_growth1, build_growth2, build_inventory, build_stopping,
    Application, Growth1Params, Growth2Params, HouseSelling, InventoryParams, ModelsError,
    Projection, StoppingSpec,
};
use crate::discount::DiscountFunction;
use crate::model::Mode;
use crate::random::{random_model, RandomModelSpec};
use std::collections::BTreeMap;

pub const PRESETS: &[&str] = &[
    "chain",
    "growth1",
    "growth2",
    "inventory",
    "stopping",
    "house-selling",
    "random",
];

/// A preset model with the mode it should be validated in.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub app: Application,
    pub mode: Mode,
}

struct Overrides<'a> {
    map: &'a BTreeMap<String, f64>,
    used: Vec<&'a str>,
}

impl<'a> Overrides<'a> {
    fn get(&mut self, key: &'a str, default: f64) -> f64 {
        self.used.push(key);
        self.map.get(key).copied().unwrap_or(default)
    }

    fn count(&mut self, key: &'a str, default: usize) -> Result<usize, ModelsError> {
        let v = self.get(key, default as f64);
        if v < 0.0 || v.fract() != 0.0 {
            return Err(ModelsError::Param(format!("{key} = {v} must be a whole number")));
        }
        Ok(v as usize)
    }

    fn finish(self, preset: &str) -> Result<(), ModelsError> {
        match self.map.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(k) => Err(ModelsError::Param(format!(
                "preset {preset} has no parameter {k:?}; known: {}",
                self.used.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

fn projection(code: f64) -> Result<Projection, ModelsError> {
    match code as i64 {
        0 => Ok(Projection::Linear),
        1 => Ok(Projection::Nearest),
        _ => Err(ModelsError::Param("projection must be 0 (linear) or 1 (nearest)".into())),
    }
}

/// Builds a named preset; `overrides` replaces numeric defaults by key.
///
/// | preset          | keys (defaults)                                                   |
/// |-----------------|-------------------------------------------------------------------|
/// | `chain`         | n (10), beta (0.5)                                                |
/// | `growth1`       | x_max (4), grid_n (41), eps (0.5), projection (0)                 |
/// | `growth2`       | x_max (10), grid_n (41), rho, theta, sigma (0.5), r (4), eps (0.35), projection (0) |
/// | `inventory`     | stock_max (10), price (1), beta (0.9)                              |
/// | `stopping`      | beta (0.5)                                                         |
/// | `house-selling` | m (1), M (4), n (4), c (0), beta (0.9)                             |
/// | `random`        | seed (0), states (10), actions (4), beta (0.9), weight_max (1)     |
///
/// Shocks in both growth presets are uniform on {0.5, 1.5}; inventory demand
/// is uniform on {0, 1, 2, 3} with orders 0..=5 costing `0.5 + 0.4a`.
pub fn preset(name: &str, overrides: &BTreeMap<String, f64>) -> Result<Preset, ModelsError> {
    let mut o = Overrides {
        map: overrides,
        used: Vec::new(),
    };
    let (app, mode) = match name {
        "chain" => {
            let n = o.count("n", 10)?;
            let beta = o.get("beta", 0.5);
            let (model, family) = build_chain_counterexample(n, beta)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("beta".into(), beta);
            (
                Application {
                    model,
                    discount: family.discount(),
                    diagnostics,
                },
                Mode::UnboundedBelow,
            )
        }
        "growth1" => {
            let d = Growth1Params::default();
            let p = Growth1Params {
                x_max: o.get("x_max", d.x_max),
                grid_n: o.count("grid_n", d.grid_n)?,
                eps: o.get("eps", d.eps),
                projection: projection(o.get("projection", 0.0))?,
                shocks: d.shocks,
            };
            (build_growth1(&p)?, Mode::Bounded)
        }
        "growth2" => {
            let d = Growth2Params::default();
            let p = Growth2Params {
                x_max: o.get("x_max", d.x_max),
                grid_n: o.count("grid_n", d.grid_n)?,
                rho: o.get("rho", d.rho),
                theta: o.get("theta", d.theta),
                sigma: o.get("sigma", d.sigma),
                r: o.get("r", d.r),
                eps: o.get("eps", d.eps),
                projection: projection(o.get("projection", 0.0))?,
                shocks: d.shocks,
            };
            (build_growth2(&p)?, Mode::Bounded)
        }
        "inventory" => {
            let d = InventoryParams::default();
            let stock_max = o.get("stock_max", d.stock_max);
            let p = InventoryParams {
                stock_max,
                grid_n: stock_max as usize + 1,
                price: o.get("price", d.price),
                ..d
            };
            let beta = o.get("beta", 0.9);
            (build_inventory(&p, DiscountFunction::linear(beta)?)?, Mode::Bounded)
        }
        "stopping" => {
            let beta = o.get("beta", 0.5);
            let spec = StoppingSpec {
                x_values: vec![0.0, 1.0, 2.0],
                q_rows: vec![
                    vec![0.0, 1.0, 0.0],
                    vec![0.0, 0.0, 1.0],
                    vec![0.0, 0.0, 1.0],
                ],
                reward: vec![1.0, -1.0, 3.0],
                cost: vec![0.0, 2.0, -1.0],
                weight: None,
            };
            let model = build_stopping(&spec)?;
            (
                Application {
                    model,
                    discount: DiscountFunction::linear(beta)?,
                    diagnostics: BTreeMap::new(),
                },
                Mode::Bounded,
            )
        }
        "house-selling" => {
            let hs = house_selling(&mut o)?;
            let beta = o.get("beta", 0.9);
            let model = build_stopping(&hs.stopping_spec()?)?;
            let mut diagnostics = BTreeMap::new();
            diagnostics.insert("c".into(), hs.cost);
            (
                Application {
                    model,
                    discount: DiscountFunction::linear(beta)?,
                    diagnostics,
                },
                Mode::Bounded,
            )
        }
        "random" => {
            let seed = o.count("seed", 0)? as u64;
            let mut spec = RandomModelSpec::new(o.count("states", 10)?, o.count("actions", 4)?);
            let wmax = o.get("weight_max", 1.0);
            if wmax > 1.0 {
                spec = spec.weights(wmax);
            }
            let beta = o.get("beta", 0.9);
            if spec.n_states == 0 || spec.n_actions == 0 {
                return Err(ModelsError::Param("random model needs states and actions".into()));
            }
            (
                Application {
                    model: random_model(&spec, seed),
                    discount: DiscountFunction::linear(beta)?,
                    diagnostics: BTreeMap::new(),
                },
                Mode::Bounded,
            )
        }
        other => {
            return Err(ModelsError::Param(format!(
                "unknown preset {other:?}; choose one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    o.finish(name)?;
    Ok(Preset {
        name: name.to_string(),
        app,
        mode,
    })
}

fn house_selling(o: &mut Overrides<'_>) -> Result<HouseSelling, ModelsError> {
    let m = o.get("m", 1.0);
    let big_m = o.get("M", 4.0);
    let n = o.count("n", 4)?;
    let c = o.get("c", 0.0);
    HouseSelling::uniform(m, big_m, n, c)
}

/// The house-selling problem described by the `house-selling` preset keys.
pub fn house_selling_problem(overrides: &BTreeMap<String, f64>) -> Result<HouseSelling, ModelsError> {
    let mut o = Overrides {
        map: overrides,
        used: vec!["beta"],
    };
    let hs = house_selling(&mut o)?;
    o.finish("house-selling")?;
    Ok(hs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;

    #[test]
    fn every_preset_builds_and_validates() {
        for name in PRESETS {
            let p = preset(name, &BTreeMap::new()).unwrap();
            validate_model(&p.app.model, p.mode).unwrap();
            let report = crate::discount::check_discount(&p.app.discount, &Default::default());
            assert!(report.all_passed(), "{name}: {:?}", report.failures());
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut o = BTreeMap::new();
        o.insert("betta".to_string(), 0.5);
        assert!(preset("chain", &o).is_err());
        assert!(preset("nope", &BTreeMap::new()).is_err());
    }
}
