use serde::{Deserialize, Serialize};

use super::EstimateError;
use crate::protocol::{DecayDataset, FlipMode, ShotModel};

/// Law-of-total-variance split of the per-sequence outcome at one bounce count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    pub m: u32,
    /// Spread of the coin-averaged expectation across random gate sequences.
    pub v_gates: f64,
    /// Finite-shot noise.
    pub v_meas: f64,
    /// Spread from the random sign flip.
    pub v_diff: f64,
    /// Sample variance of the recorded values.
    pub v_total: f64,
}

impl VarianceComponents {
    pub fn modeled_total(&self) -> f64 {
        self.v_gates + self.v_meas + self.v_diff
    }
}

pub fn variance_decomposition(dataset: &DecayDataset) -> Result<Vec<VarianceComponents>, EstimateError> {
    let shots = dataset.shots.max(1) as f64;
    dataset
        .m_values
        .iter()
        .map(|&m| {
            let recs: Vec<_> = dataset.records_for(m).collect();
            if recs.len() < 2 {
                return Err(EstimateError::TooFewSequences { needed: 2, got: recs.len() });
            }
            let outcomes = recs.iter().map(|r| r.outcome.ok_or(EstimateError::MissingBranchData)).collect::<Result<Vec<_>, _>>()?;
            let n = recs.len() as f64;
            let mus: Vec<f64> = outcomes.iter().map(|(p, q)| 0.5 * (p - q)).collect();
            let coin: f64 = outcomes.iter().map(|(p, q)| (0.5 * (p + q)).powi(2)).sum::<f64>() / n;
            let binom: f64 = outcomes.iter().map(|(p, q)| 0.5 * (p * (1.0 - p) + q * (1.0 - q))).sum::<f64>() / n;
            let (v_meas, v_diff) = match (dataset.shot_model, dataset.flip_mode) {
                (ShotModel::Exact, _) => (0.0, 0.0),
                (_, FlipMode::PerSequence) => (binom / shots, coin),
                (_, FlipMode::PerShot) => (binom / shots, coin / shots),
            };
            let values: Vec<f64> = recs.iter().map(|r| r.b_value).collect();
            Ok(VarianceComponents { m, v_gates: sample_variance(&mus), v_meas, v_diff, v_total: sample_variance(&values) })
        })
        .collect()
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
