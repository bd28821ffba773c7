use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::EstimateError;
use crate::protocol::DecayDataset;

const MAX_ITERATIONS: usize = 200;
const GRADIENT_TOL: f64 = 1e-12;
/// Means at or below this carry no usable signal.
const SIGNAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Unweighted,
    /// `w_m = N_m / s²_m` from the per-m sequence spread.
    InverseVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub weighting: Weighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    LevenbergMarquardt,
    /// Unconstrained optimum had `f > 1`; refit with `f = 1`.
    BoundaryUnitDecay,
}

/// Least-squares fit of `b_m = A·f^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(rename = "A")]
    pub a: f64,
    pub f: f64,
    pub se_a: f64,
    pub se_f: f64,
    /// 95% Student-t intervals from the fit covariance.
    pub ci_a: (f64, f64),
    pub ci_f: (f64, f64),
    pub m_values: Vec<u32>,
    pub residuals: Vec<f64>,
    pub method: FitMethod,
    pub weighting: Weighting,
    pub iterations: usize,
    pub gradient_norm: f64,
}

pub fn fit_decay(dataset: &DecayDataset) -> Result<FitResult, EstimateError> {
    fit_decay_with(dataset, &FitOptions::default())
}

pub fn fit_decay_with(dataset: &DecayDataset, options: &FitOptions) -> Result<FitResult, EstimateError> {
    let weights = match options.weighting {
        Weighting::Unweighted => None,
        Weighting::InverseVariance => inverse_variance_weights(&dataset.values_by_m()),
    };
    let mut fit = fit_points(&dataset.m_values, &dataset.means, weights.as_deref())?;
    if weights.is_some() {
        fit.weighting = Weighting::InverseVariance;
    }
    Ok(fit)
}

/// `None` when some spread vanishes, which leaves the fit unweighted.
fn inverse_variance_weights(groups: &[Vec<f64>]) -> Option<Vec<f64>> {
    groups
        .iter()
        .map(|vals| {
            let n = vals.len() as f64;
            if vals.len() < 2 {
                return None;
            }
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var > 1e-300).then(|| n / var)
        })
        .collect()
}

struct Problem<'a> {
    ms: Vec<f64>,
    ys: &'a [f64],
    ws: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, a: f64, f: f64) -> Vec<f64> {
        self.ms.iter().zip(self.ys).map(|(&m, &y)| y - a * f.powf(m)).collect()
    }

    fn cost(&self, a: f64, f: f64) -> f64 {
        self.residuals(a, f).iter().zip(&self.ws).map(|(r, w)| w * r * r).sum::<f64>() * 0.5
    }

    /// `(JᵀWJ, JᵀWr)` with `J` the model Jacobian.
    fn normal_equations(&self, a: f64, f: f64) -> (Matrix2<f64>, Vector2<f64>) {
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for ((&m, &y), &w) in self.ms.iter().zip(self.ys).zip(&self.ws) {
            let fm = f.powf(m);
            let d_f = if m == 0.0 { 0.0 } else { a * m * f.powf(m - 1.0) };
            let j = Vector2::new(fm, d_f);
            let r = y - a * fm;
            jtj += w * j * j.transpose();
            jtr += w * r * j;
        }
        (jtj, jtr)
    }
}

fn initial_guess(ms: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = ms.iter().zip(ys).filter(|(_, &y)| y > SIGNAL_FLOOR).map(|(&m, &y)| (m, y.ln())).collect();
    let (a, f) = match pts.len() {
        0 => (1.0, 0.5),
        1 => (pts[0].1.exp(), 0.9),
        n => {
            let n = n as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
            if sxx == 0.0 {
                (my.exp(), 0.9)
            } else {
                let slope = sxy / sxx;
                ((my - slope * mx).exp(), slope.exp())
            }
        }
    };
    (a, f.clamp(1e-3, 1.0))
}

/// Fits `A·f^m` to `(m, y)` pairs, optionally weighted.
pub fn fit_points(m_values: &[u32], means: &[f64], weights: Option<&[f64]>) -> Result<FitResult, EstimateError> {
    if m_values.len() != means.len() {
        return Err(EstimateError::InvalidParameter("m values and means differ in length".into()));
    }
    let mut distinct = m_values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(EstimateError::TooFewPoints { needed: 3, got: distinct.len() });
    }
    if means.iter().all(|&y| y <= SIGNAL_FLOOR) {
        return Err(EstimateError::NoSignal);
    }
    if means.iter().any(|y| !y.is_finite()) {
        return Err(EstimateError::InvalidParameter("non-finite mean".into()));
    }
    let ws = match weights {
        Some(w) if w.len() == means.len() => w.to_vec(),
        Some(_) => return Err(EstimateError::InvalidParameter("weight count mismatch".into())),
        None => vec![1.0; means.len()],
    };
    let problem = Problem { ms: m_values.iter().map(|&m| m as f64).collect(), ys: means, ws };

    let (mut a, mut f) = initial_guess(&problem.ms, means);
    let mut cost = problem.cost(a, f);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut stalled = false;
    while iterations < MAX_ITERATIONS {
        let (jtj, jtr) = problem.normal_equations(a, f);
        grad_norm = jtr.norm();
        if grad_norm < GRADIENT_TOL || stalled {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..40 {
            let damped = jtj + Matrix2::from_diagonal(&(jtj.diagonal() * lambda));
            let Some(step) = damped.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let (na, nf) = (a + step[0], f + step[1]);
            if nf <= 0.0 || !na.is_finite() || !nf.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let new_cost = problem.cost(na, nf);
            if new_cost <= cost {
                let tiny = step[0].abs() <= 1e-15 * a.abs().max(1e-300) && step[1].abs() <= 1e-15 * f.abs();
                stalled = tiny || new_cost == cost;
                a = na;
                f = nf;
                cost = new_cost;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at working precision
            break;
        }
    }
    if !(a.is_finite() && f.is_finite()) {
        return Err(EstimateError::NotConverged(format!("diverged to A = {a}, f = {f}")));
    }
    let relative_grad = grad_norm / (problem.normal_equations(a, f).0.norm().max(1.0));
    if iterations >= MAX_ITERATIONS && relative_grad > 1e-8 {
        return Err(EstimateError::NotConverged(format!("gradient norm {grad_norm:e} after {MAX_ITERATIONS} iterations")));
    }

    let mut method = FitMethod::LevenbergMarquardt;
    if f > 1.0 {
        method = FitMethod::BoundaryUnitDecay;
        f = 1.0;
        let wsum: f64 = problem.ws.iter().sum();
        a = problem.ws.iter().zip(means).map(|(w, y)| w * y).sum::<f64>() / wsum;
        grad_norm = problem.normal_equations(a, f).1[0].abs();
    }
    Ok(summarize(&problem, m_values, a, f, method, iterations, grad_norm, weights.is_some()))
}

/// Standard errors of `(A, f)` for an unweighted fit when the means have the given
/// variances, from `(JᵀJ)⁻¹ JᵀΣJ (JᵀJ)⁻¹`.
pub(crate) fn sandwich_se(m_values: &[u32], a: f64, f: f64, mean_variances: &[f64]) -> Option<(f64, f64)> {
    let mut bread = Matrix2::zeros();
    let mut meat = Matrix2::zeros();
    for (&m, &v) in m_values.iter().zip(mean_variances) {
        let m = m as f64;
        let d_f = if m == 0.0 { 0.0 } else { a * m * f.powf(m - 1.0) };
        let j = Vector2::new(f.powf(m), d_f);
        let jj = j * j.transpose();
        bread += jj;
        meat += v * jj;
    }
    let inv = bread.try_inverse()?;
    let cov = inv * meat * inv;
    Some((cov[(0, 0)].max(0.0).sqrt(), cov[(1, 1)].max(0.0).sqrt()))
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    problem: &Problem<'_>,
    m_values: &[u32],
    a: f64,
    f: f64,
    method: FitMethod,
    iterations: usize,
    gradient_norm: f64,
    weighted: bool,
) -> FitResult {
    let residuals = problem.residuals(a, f);
    let n = residuals.len();
    let dof = (n - 2).max(1) as f64;
    let rss: f64 = residuals.iter().zip(&problem.ws).map(|(r, w)| w * r * r).sum();
    let s2 = rss / dof;
    let (jtj, _) = problem.normal_equations(a, f);
    let (se_a, se_f) = match jtj.try_inverse() {
        Some(cov) => ((s2 * cov[(0, 0)]).max(0.0).sqrt(), (s2 * cov[(1, 1)]).max(0.0).sqrt()),
        None => (f64::INFINITY, f64::INFINITY),
    };
    let t = StudentsT::new(0.0, 1.0, dof).map(|d| d.inverse_cdf(0.975)).unwrap_or(1.96);
    FitResult {
        a,
        f,
        se_a,
        se_f,
        ci_a: (a - t * se_a, a + t * se_a),
        ci_f: (f - t * se_f, f + t * se_f),
        m_values: m_values.to_vec(),
        residuals,
        method,
        weighting: if weighted { Weighting::InverseVariance } else { Weighting::Unweighted },
        iterations,
        gradient_norm,
    }
}
