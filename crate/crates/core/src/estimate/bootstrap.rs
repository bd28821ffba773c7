use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_points, sandwich_se, FitResult};
use super::EstimateError;
use crate::protocol::DecayDataset;
use crate::seed::derive_seed;

pub const MIN_RESAMPLES: usize = 200;
pub const MIN_SEQUENCES: usize = 5;

/// Studentized bootstrap intervals at 95%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub ci_a: (f64, f64),
    pub ci_f: (f64, f64),
    pub resamples: usize,
    /// Resamples whose refit failed and were left out.
    pub failed: usize,
    pub seed: u64,
}

/// Resamples sequences within each bounce count. Each refit is studentized by a standard
/// error built from the per-m sequence spread of its own resample.
pub fn bootstrap_ci(
    dataset: &DecayDataset,
    fit: &FitResult,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapInterval, EstimateError> {
    if resamples < MIN_RESAMPLES {
        return Err(EstimateError::TooFewResamples { needed: MIN_RESAMPLES, got: resamples });
    }
    let groups = dataset.values_by_m();
    if let Some(fewest) = groups.iter().map(Vec::len).min() {
        if fewest < MIN_SEQUENCES {
            return Err(EstimateError::TooFewSequences { needed: MIN_SEQUENCES, got: fewest });
        }
    }
    bootstrap_groups(&dataset.m_values, &groups, fit, resamples, seed)
}

pub(crate) fn bootstrap_groups(
    m_values: &[u32],
    groups: &[Vec<f64>],
    fit: &FitResult,
    resamples: usize,
    seed: u64,
) -> Result<BootstrapInterval, EstimateError> {
    let (se_a, se_f) = sandwich_se(m_values, fit.a, fit.f, &mean_variances(groups))
        .ok_or_else(|| EstimateError::NotConverged("singular fit information".into()))?;
    let pivots: Vec<Option<(f64, f64)>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[b as u64]));
            let resampled: Vec<Vec<f64>> = groups
                .iter()
                .map(|vals| {
                    let n = vals.len();
                    (0..n).map(|_| vals[rng.random_range(0..n)]).collect()
                })
                .collect();
            let means: Vec<f64> = resampled.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
            let refit = fit_points(m_values, &means, None).ok()?;
            let (sa, sf) = sandwich_se(m_values, refit.a, refit.f, &mean_variances(&resampled))?;
            Some((studentize(refit.a, fit.a, sa)?, studentize(refit.f, fit.f, sf)?))
        })
        .collect();
    let (mut t_a, mut t_f): (Vec<f64>, Vec<f64>) = pivots.iter().flatten().copied().unzip();
    let failed = resamples - t_a.len();
    if t_a.len() < resamples / 2 {
        return Err(EstimateError::NotConverged(format!("{failed} of {resamples} bootstrap refits failed")));
    }
    Ok(BootstrapInterval {
        ci_a: pivot_interval(fit.a, se_a, &mut t_a),
        ci_f: pivot_interval(fit.f, se_f, &mut t_f),
        resamples,
        failed,
        seed,
    })
}

/// Variance of each group mean, `s²/n`.
fn mean_variances(groups: &[Vec<f64>]) -> Vec<f64> {
    groups
        .iter()
        .map(|v| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n
        })
        .collect()
}

fn studentize(estimate: f64, center: f64, se: f64) -> Option<f64> {
    let diff = estimate - center;
    if se > 0.0 && se.is_finite() {
        Some(diff / se)
    } else if diff.abs() <= 1e-12 * center.abs().max(1.0) {
        Some(0.0)
    } else {
        None
    }
}

fn pivot_interval(center: f64, se: f64, pivots: &mut [f64]) -> (f64, f64) {
    pivots.sort_by(f64::total_cmp);
    let lo = quantile(pivots, 0.025);
    let hi = quantile(pivots, 0.975);
    (center - hi * se, center - lo * se)
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
