//! Seeded random finite models for tests, benches and the `random` preset.

use crate::model::{FiniteModel, StateInfo};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomModelSpec {
    pub n_states: usize,
    pub n_actions: usize,
    /// Utilities are drawn uniformly from `[lo, hi] · ω(x)`.
    pub utility_lo: f64,
    pub utility_hi: f64,
    /// Probability that a transition entry is forced to zero.
    pub sparsity: f64,
    /// When set, ω is drawn uniformly from `[1, max]`; otherwise ω ≡ 1.
    pub weight_max: Option<f64>,
    /// Probability that a utility entry is `-∞`. Every state keeps one finite action.
    pub neg_inf_prob: f64,
    /// Every state admits all actions when set; otherwise a random nonempty subset.
    pub full_admissible: bool,
}

impl RandomModelSpec {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        RandomModelSpec {
            n_states,
            n_actions,
            utility_lo: -1.0,
            utility_hi: 1.0,
            sparsity: 0.3,
            weight_max: None,
            neg_inf_prob: 0.0,
            full_admissible: false,
        }
    }

    pub fn utilities(mut self, lo: f64, hi: f64) -> Self {
        self.utility_lo = lo;
        self.utility_hi = hi;
        self
    }

    pub fn weights(mut self, max: f64) -> Self {
        self.weight_max = Some(max);
        self
    }

    pub fn neg_inf(mut self, p: f64) -> Self {
        self.neg_inf_prob = p;
        self
    }

    pub fn sparsity(mut self, p: f64) -> Self {
        self.sparsity = p;
        self
    }

    pub fn full(mut self) -> Self {
        self.full_admissible = true;
        self
    }
}

/// Draws a model; the same spec and seed always yield the same tables.
pub fn random_model(spec: &RandomModelSpec, seed: u64) -> FiniteModel {
    assert!(spec.n_states > 0 && spec.n_actions > 0, "empty random model");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = spec.n_states;
    let weight: Vec<f64> = (0..s)
        .map(|_| match spec.weight_max {
            Some(max) if max > 1.0 => rng.gen_range(1.0..=max),
            _ => 1.0,
        })
        .collect();

    let mut admissible = Vec::with_capacity(s);
    let mut transition = Vec::with_capacity(s);
    let mut utility = Vec::with_capacity(s);
    for x in 0..s {
        let mut adm: Vec<usize> = (0..spec.n_actions).collect();
        if !spec.full_admissible {
            adm.shuffle(&mut rng);
            let k = rng.gen_range(1..=spec.n_actions);
            adm.truncate(k);
            adm.sort_unstable();
        }
        let rows: Vec<Vec<f64>> = adm.iter().map(|_| random_row(&mut rng, s, spec.sparsity)).collect();
        let keep = rng.gen_range(0..adm.len());
        let us: Vec<f64> = (0..adm.len())
            .map(|k| {
                let u = rng.gen_range(spec.utility_lo..=spec.utility_hi) * weight[x];
                if k != keep && spec.neg_inf_prob > 0.0 && rng.gen_bool(spec.neg_inf_prob) {
                    f64::NEG_INFINITY
                } else {
                    u
                }
            })
            .collect();
        admissible.push(adm);
        transition.push(rows);
        utility.push(us);
    }
    let states = (0..s).map(|x| StateInfo::labelled(format!("s{x}"))).collect();
    let actions = (0..spec.n_actions).map(|a| format!("a{a}")).collect();
    FiniteModel::new(states, actions, admissible, transition, utility, weight)
        .expect("random model is well formed")
}

fn random_row(rng: &mut ChaCha8Rng, n: usize, sparsity: f64) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(sparsity.clamp(0.0, 1.0)) {
                0.0
            } else {
                rng.gen_range(0.05..1.0)
            }
        })
        .collect();
    if row.iter().all(|&p| p == 0.0) {
        let y = rng.gen_range(0..n);
        row[y] = 1.0;
    }
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
    row
}

/// Random value table with entries in `[-scale, scale] · ω(x)`.
pub fn random_values(model: &FiniteModel, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    model
        .weights()
        .iter()
        .map(|w| rng.gen_range(-scale..=scale) * w)
        .collect()
}
