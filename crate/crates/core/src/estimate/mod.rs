//! Decay fitting, confidence intervals, fidelity conversions and the sampling-cost analysis.

mod bootstrap;
mod fit;
mod stats;
mod variance;

use thiserror::Error;

pub use bootstrap::{bootstrap_ci, BootstrapInterval};
pub use fit::{fit_decay, fit_decay_with, fit_points, FitMethod, FitOptions, FitResult, Weighting};
pub use stats::{
    average_to_depolarizing, crb_cost_bound, depolarizing_to_average, fisher_information, fisher_per_cost,
    optimal_bounce_count, plan, symmetric_link_fidelity, StatReport, V_DIFF_BOUND,
};
pub use variance::{variance_decomposition, VarianceComponents};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("need at least {needed} distinct bounce counts, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("no signal: every mean is at or below zero")]
    NoSignal,
    #[error("fit did not converge: {0}")]
    NotConverged(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {needed} sequences per bounce count, got {got}")]
    TooFewSequences { needed: usize, got: usize },
    #[error("need at least {needed} bootstrap resamples, got {got}")]
    TooFewResamples { needed: usize, got: usize },
    #[error("dataset lacks per-sequence branch expectations")]
    MissingBranchData,
}
