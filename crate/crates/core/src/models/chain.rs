use super::ModelsError;
use crate::discount::DiscountFunction;
use crate::model::{FiniteModel, StateInfo, ValueTable};
use serde::{Deserialize, Serialize};

/// The unbounded fixed points `v_r(x) = r / β^x` of the shift chain under
/// linear discounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainFamily {
    pub beta: f64,
    pub n_states: usize,
}

impl ChainFamily {
    /// `v_r` on states `1..=n_states`.
    pub fn member(&self, r: f64) -> ValueTable {
        ValueTable::new(
            (1..=self.n_states)
                .map(|x| r / self.beta.powi(x as i32))
                .collect(),
        )
    }

    /// Indices away from the truncated end, where the shift is exact.
    pub fn interior(&self) -> std::ops::Range<usize> {
        0..self.n_states.saturating_sub(2)
    }

    pub fn discount(&self) -> DiscountFunction {
        DiscountFunction::linear(self.beta).expect("beta validated by the builder")
    }
}

/// States `1..=n`, zero utility, a deterministic shift `x → x + 1`, and a
/// self-loop at the last state to keep the chain finite.
pub fn build_chain_counterexample(
    n_states: usize,
    beta: f64,
) -> Result<(FiniteModel, ChainFamily), ModelsError> {
    if n_states < 3 {
        return Err(ModelsError::Param(format!("chain needs at least 3 states, got {n_states}")));
    }
    DiscountFunction::linear(beta)?;
    let transition = (0..n_states)
        .map(|x| {
            let mut row = vec![0.0; n_states];
            row[(x + 1).min(n_states - 1)] = 1.0;
            vec![row]
        })
        .collect();
    let model = FiniteModel::new(
        (1..=n_states).map(|x| StateInfo::at(x as f64)).collect(),
        vec!["shift".into()],
        vec![vec![0]; n_states],
        transition,
        vec![vec![0.0]; n_states],
        vec![1.0; n_states],
    )?;
    Ok((model, ChainFamily { beta, n_states }))
}
