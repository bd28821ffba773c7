use serde::{Deserialize, Serialize};

use super::variance::VarianceComponents;
use super::EstimateError;

/// Upper bound on the per-sample variance of a flipped-sign outcome.
pub const V_DIFF_BOUND: f64 = 0.125;

/// `F = ((d−1)f + 1)/d`.
pub fn depolarizing_to_average(f: f64, d: usize) -> f64 {
    let d = d as f64;
    ((d - 1.0) * f + 1.0) / d
}

pub fn average_to_depolarizing(avg: f64, d: usize) -> f64 {
    let d = d as f64;
    (d * avg - 1.0) / (d - 1.0)
}

/// Splits a round-trip decay into identical forward and backward links.
/// Returns `(f_link, F_avg)`.
pub fn symmetric_link_fidelity(f_net: f64, d: usize) -> Result<(f64, f64), EstimateError> {
    if !(f_net > 0.0 && f_net <= 1.0) {
        return Err(EstimateError::InvalidParameter(format!("round-trip decay {f_net} outside (0, 1]")));
    }
    let f_link = f_net.sqrt();
    Ok((f_link, depolarizing_to_average(f_link, d)))
}

/// Gaussian-model Fisher information about `f` from one sample at bounce count `m`.
pub fn fisher_information(f: f64, m: u32, a: f64, v: f64) -> f64 {
    let m = m as f64;
    a * a * f.powf(2.0 * m - 2.0) * m * m / v
}

/// Fisher information per transmission spent.
pub fn fisher_per_cost(f: f64, m: u32, a: f64, v: f64) -> f64 {
    fisher_information(f, m, a, v) / m as f64
}

/// Maximizer of `m·f^{2m−2}` over real `m`.
pub fn optimal_bounce_count(f: f64) -> Result<f64, EstimateError> {
    if !(f > 0.0 && f < 1.0) {
        return Err(EstimateError::InvalidParameter(format!("decay {f} outside (0, 1)")));
    }
    Ok(-1.0 / (2.0 * f.ln()))
}

/// Largest per-cost Fisher information under the worst-case variance bound.
pub fn crb_cost_bound(f: f64, a: f64) -> Result<f64, EstimateError> {
    let m = optimal_bounce_count(f)?;
    Ok(a * a * m * f.powf(2.0 * m - 2.0) / V_DIFF_BOUND)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub f: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub variance_bound: f64,
    pub m_grid: Vec<u32>,
    pub fisher_per_sample: Vec<f64>,
    pub fisher_per_cost: Vec<f64>,
    /// Continuous optimum.
    pub m_star: f64,
    /// Grid point with the largest per-cost information.
    pub m_star_grid: u32,
    pub crb_variance_lower_bound: f64,
    pub variance_components: Option<Vec<VarianceComponents>>,
}

/// Experiment-design curves over `m = 1..=m_max`.
pub fn plan(f: f64, a: f64, m_max: u32) -> Result<StatReport, EstimateError> {
    if m_max == 0 {
        return Err(EstimateError::InvalidParameter("empty bounce grid".into()));
    }
    let m_star = optimal_bounce_count(f)?;
    let m_grid: Vec<u32> = (1..=m_max).collect();
    let fisher_per_sample: Vec<f64> = m_grid.iter().map(|&m| fisher_information(f, m, a, V_DIFF_BOUND)).collect();
    let per_cost: Vec<f64> = m_grid.iter().map(|&m| fisher_per_cost(f, m, a, V_DIFF_BOUND)).collect();
    let best = per_cost.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).map(|(i, _)| m_grid[i]).unwrap_or(1);
    Ok(StatReport {
        f,
        a,
        variance_bound: V_DIFF_BOUND,
        m_grid,
        fisher_per_sample,
        fisher_per_cost: per_cost,
        m_star,
        m_star_grid: best,
        crb_variance_lower_bound: 1.0 / crb_cost_bound(f, a)?,
        variance_components: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(depolarizing_to_average(1.0, 2), 1.0);
        assert_eq!(depolarizing_to_average(0.0, 2), 0.5);
        assert!((depolarizing_to_average(2.9 / 3.0, 2) - 0.983333).abs() < 1e-6);
        assert!((average_to_depolarizing(depolarizing_to_average(0.7, 4), 4) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn symmetric_split() {
        let (fl, _) = symmetric_link_fidelity(0.81, 2).unwrap();
        assert!((fl - 0.9).abs() < 1e-15);
        let (fl, avg) = symmetric_link_fidelity((2.9f64 / 3.0).powi(2), 2).unwrap();
        assert!((fl - 0.96667).abs() < 1e-5 && (avg - 0.98333).abs() < 1e-5);
        assert_eq!(symmetric_link_fidelity(1.0, 2).unwrap(), (1.0, 1.0));
        assert!(symmetric_link_fidelity(0.0, 2).is_err());
        assert!(symmetric_link_fidelity(1.1, 2).is_err());
    }

    #[test]
    fn fisher_values() {
        assert!((fisher_information(1.0 - 1e-15, 1, 0.5, V_DIFF_BOUND) - 2.0).abs() < 1e-12);
        assert!(fisher_information(0.9, 3, 0.5, 0.2) < fisher_information(0.9, 3, 0.5, 0.1));
        let report = plan(0.9, 0.5, 100).unwrap();
        assert_eq!(report.m_star_grid, 5);
        assert!((report.m_star - 4.746).abs() < 1e-3);
        assert!(report.fisher_per_cost.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn optimal_count() {
        assert!((optimal_bounce_count((-0.5f64).exp()).unwrap() - 1.0).abs() < 1e-12);
        assert!(optimal_bounce_count(1.0 - 1e-12).unwrap() > 1e10);
        assert!(optimal_bounce_count(1.0).is_err());
        assert!(optimal_bounce_count(0.0).is_err());
    }

    #[test]
    fn bound_scales_with_amplitude_squared() {
        let one = crb_cost_bound(0.9, 0.25).unwrap();
        let two = crb_cost_bound(0.9, 0.5).unwrap();
        assert!((two / one - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grid_and_continuous_optimum_agree() {
        for &f in &[0.5, 0.6, 0.8, 0.9, 0.95, 0.99] {
            let continuous = crb_cost_bound(f, 0.5).unwrap();
            let r = plan(f, 0.5, 2000).unwrap();
            let grid_best = r.fisher_per_cost.iter().cloned().fold(0.0, f64::max);
            assert!((continuous - grid_best).abs() / continuous < 0.1, "f={f}");
            assert!((r.m_star - r.m_star_grid as f64).abs() <= 1.0, "f={f}");
        }
    }
}
