//! One-fund replication of `W̃¹_T`.

use serde::Serialize;

use super::dynamics::A_FLOOR;
use super::sim::{Path, PathEnsemble};
use super::SdeModel;
use crate::error::{invalid, Error, Result};

/// `(σσᵀ)⁻¹(rx − μ(x, t)) = σ⁻ᵀ θ`.
pub fn mutual_fund_weights(model: &SdeModel, x: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = model.dim();
    let mut theta = vec![0.0; n];
    let mut w = vec![0.0; n];
    let singular = || invalid(format!("volatility is singular at x = {x:?}, t = {t}"));
    model.theta_into(x, t, &mut theta).ok_or_else(singular)?;
    model
        .dynamics()
        .solve_vol_transpose(x, t, &theta, &mut w)
        .ok_or_else(singular)?;
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationPath {
    pub terminal_value: f64,
    pub target: f64,
    /// Largest `|V − (bank + h·X)|` seen at a rebalance.
    pub max_residual: f64,
}

impl ReplicationPath {
    pub fn error(&self) -> f64 {
        self.terminal_value - self.target
    }
}

/// Self-financing strategy along one path, rebalanced every `stride` steps.
///
/// It holds `e^{−r(T−t)} · (−1/A) (σσᵀ)⁻¹(rX − μ)` units of the risky assets
/// from initial capital `−e^{−rT} Σ A dt`; in continuous time its terminal
/// value is `W̃¹_T = −Σ θ·ΔW / A`, which is the target. `A` is read off the
/// path as `|θ|`.
pub fn replicate_path(model: &SdeModel, path: &Path, dt: f64, stride: usize, index: usize) -> Result<ReplicationPath> {
    let steps = path.steps();
    if stride == 0 || steps % stride != 0 {
        return Err(invalid(format!("rebalance stride {stride} must divide {steps} steps")));
    }
    let n = path.dim();
    let r = model.r();
    let horizon = steps as f64 * dt;
    let mut a = Vec::with_capacity(steps);
    let mut target = 0.0;
    for k in 0..steps {
        let theta = path.theta(k);
        let ak = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(ak >= A_FLOOR) {
            return Err(Error::AmprBelowFloor {
                value: ak,
                floor: A_FLOOR,
                t: k as f64 * dt,
            });
        }
        target -= theta.iter().zip(path.increment(k)).map(|(a, b)| a * b).sum::<f64>() / ak;
        a.push(ak);
    }
    let mut value = -(-r * horizon).exp() * a.iter().sum::<f64>() * dt;
    let mut max_residual: f64 = 0.0;
    let mut holdings = vec![0.0; n];
    let growth = (r * stride as f64 * dt).exp();
    for j in (0..steps).step_by(stride) {
        let t = j as f64 * dt;
        let x = path.state(j);
        let w = mutual_fund_weights(model, x, t).map_err(|_| Error::SingularVolatility { path: index, step: j })?;
        let scale = -(-r * (horizon - t)).exp() / a[j];
        for (h, wi) in holdings.iter_mut().zip(&w) {
            *h = scale * wi;
        }
        let risky: f64 = holdings.iter().zip(x).map(|(h, xi)| h * xi).sum();
        let bank = value - risky;
        max_residual = max_residual.max((value - (bank + risky)).abs());
        let next = path.state(j + stride);
        value = bank * growth + holdings.iter().zip(next).map(|(h, xi)| h * xi).sum::<f64>();
    }
    Ok(ReplicationPath {
        terminal_value: value,
        target,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationReport {
    pub hedge_dt: f64,
    pub n_paths: usize,
    pub rms_error: f64,
    pub mean_error: f64,
    pub max_abs_error: f64,
    pub max_residual: f64,
}

impl ReplicationReport {
    pub fn from_paths(paths: &[ReplicationPath], hedge_dt: f64) -> Self {
        let n = paths.len() as f64;
        Self {
            hedge_dt,
            n_paths: paths.len(),
            rms_error: (paths.iter().map(|p| p.error().powi(2)).sum::<f64>() / n).sqrt(),
            mean_error: paths.iter().map(|p| p.error()).sum::<f64>() / n,
            max_abs_error: paths.iter().map(|p| p.error().abs()).fold(0.0, f64::max),
            max_residual: paths.iter().map(|p| p.max_residual).fold(0.0, f64::max),
        }
    }
}

pub fn replicate_fund(ensemble: &PathEnsemble, model: &SdeModel, stride: usize) -> Result<ReplicationReport> {
    let dt = ensemble.dt();
    let paths: Vec<ReplicationPath> = ensemble
        .paths
        .iter()
        .enumerate()
        .map(|(i, p)| replicate_path(model, p, dt, stride, i))
        .collect::<Result<_>>()?;
    Ok(ReplicationReport::from_paths(&paths, dt * stride as f64))
}

/// Least-squares slope of `log rms_error` against `log hedge_dt`.
pub fn convergence_order(reports: &[ReplicationReport]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.rms_error > 0.0)
        .map(|r| (r.hedge_dt.ln(), r.rms_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctsmkt::{simulate, ASchedule, CanonicalBachelier, LocalVol, SimConfig};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    #[test]
    fn weight_examples() {
        let c = CanonicalBachelier::new(2, 0.0, ASchedule::constant(0.7)).unwrap();
        let m = SdeModel::new(0.0, 1.0, vec![0.0, 0.0], Arc::new(c)).unwrap();
        let w = mutual_fund_weights(&m, &[1.0, 2.0], 0.1).unwrap();
        assert_abs_diff_eq!(w[0], -0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 0.0, epsilon = 1e-15);

        let (r, mu, s) = (0.02, 0.07, 0.2);
        let g = SdeModel::new(r, 1.0, vec![100.0], Arc::new(LocalVol::gbm(vec![mu], &[s]).unwrap())).unwrap();
        for x in [50.0, 120.0] {
            let w = mutual_fund_weights(&g, &[x], 0.0).unwrap();
            assert_abs_diff_eq!(w[0], (r - mu) / (s * s * x), epsilon = 1e-14);
        }
        let rn = SdeModel::new(r, 1.0, vec![100.0], Arc::new(LocalVol::gbm(vec![r], &[s]).unwrap())).unwrap();
        assert_eq!(mutual_fund_weights(&rn, &[100.0], 0.0).unwrap(), vec![0.0]);
    }

    #[test]
    fn canonical_zero_rate_replicates_exactly() {
        let c = CanonicalBachelier::new(2, 0.0, ASchedule::new(vec![0.25], vec![0.4, 1.5]).unwrap()).unwrap();
        let m = SdeModel::new(0.0, 1.0, vec![0.0, 0.0], Arc::new(c)).unwrap();
        let e = simulate(&m, &SimConfig::over(&m, 200, 8, 5)).unwrap();
        for stride in [1, 10, 50] {
            let rep = replicate_fund(&e, &m, stride).unwrap();
            assert!(rep.max_abs_error < 1e-12, "{rep:?}");
            assert!(rep.max_residual < 1e-14);
        }
    }

    #[test]
    fn order_of_exact_power_law() {
        let reports: Vec<ReplicationReport> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&h: &f64| ReplicationReport {
                hedge_dt: h,
                n_paths: 1,
                rms_error: 3.0 * h.sqrt(),
                mean_error: 0.0,
                max_abs_error: 0.0,
                max_residual: 0.0,
            })
            .collect();
        assert!((convergence_order(&reports).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(convergence_order(&reports[..1]), None);
    }

    #[test]
    fn stride_must_divide_steps() {
        let c = CanonicalBachelier::new(1, 0.0, ASchedule::constant(1.0)).unwrap();
        let m = SdeModel::new(0.0, 1.0, vec![0.0], Arc::new(c)).unwrap();
        let e = simulate(&m, &SimConfig::over(&m, 10, 1, 5)).unwrap();
        assert!(replicate_fund(&e, &m, 3).is_err());
    }
}
