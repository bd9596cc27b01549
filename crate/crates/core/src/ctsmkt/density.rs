use serde::Serialize;

use super::sim::{map_paths, Path, PathEnsemble, SimConfig};
use super::SdeModel;
use crate::error::{invalid, Error, Result};

/// Window length, in steps, of the realized AMPR estimator.
pub const DEFAULT_WINDOW: usize = 32;

const Z_GUARD: f64 = 700.0;

/// `log q_k = Z_k − ½ Σ_{j<k} |θ_j|² dt`, `Z_k = Σ_{j<k} θ_j · ΔW_j`.
///
/// The compensator is the predictable `|θ|² dt` rather than the realized
/// `(ΔZ)²`, which makes each discrete factor `exp(θ·ΔW − ½|θ|²dt)` have
/// expectation exactly one.
pub fn log_q_path(path: &Path, dt: f64, index: usize) -> Result<Vec<f64>> {
    let steps = path.steps();
    let mut out = Vec::with_capacity(steps + 1);
    let (mut z, mut comp) = (0.0, 0.0);
    out.push(0.0);
    for k in 0..steps {
        let theta = path.theta(k);
        z += theta.iter().zip(path.increment(k)).map(|(a, b)| a * b).sum::<f64>();
        comp += 0.5 * theta.iter().map(|a| a * a).sum::<f64>() * dt;
        if !(z.abs() <= Z_GUARD) {
            return Err(Error::Overflow { path: index, step: k });
        }
        out.push(z - comp);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QPaths {
    pub log_q: Vec<Vec<f64>>,
}

impl QPaths {
    pub fn q(&self, path: usize, k: usize) -> f64 {
        self.log_q[path][k].exp()
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.log_q.iter().map(|l| l.last().expect("q₀ is stored").exp()).collect()
    }
}

pub fn q_process(ensemble: &PathEnsemble) -> Result<QPaths> {
    let log_q = ensemble
        .paths
        .iter()
        .enumerate()
        .map(|(i, p)| log_q_path(p, ensemble.dt(), i))
        .collect::<Result<_>>()?;
    Ok(QPaths { log_q })
}

/// Windowed `Σ (Δq/q)² / (window · dt)` along one path, from `log q`.
/// A trailing partial window is dropped.
pub fn ampr_realized(log_q: &[f64], dt: f64, window: usize) -> Vec<f64> {
    let window = window.max(1);
    log_q
        .windows(2)
        .map(|w| (w[1] - w[0]).exp_m1().powi(2))
        .collect::<Vec<_>>()
        .chunks_exact(window)
        .map(|c| c.iter().sum::<f64>() / (window as f64 * dt))
        .collect()
}

/// Per-window ensemble means of realized `A²` and of the coefficient `|θ|²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmprWindows {
    /// Window start times.
    pub times: Vec<f64>,
    pub realized: Vec<f64>,
    pub coefficient: Vec<f64>,
}

impl AmprWindows {
    /// Mean absolute relative error over windows whose coefficient is nonzero.
    pub fn mare(&self) -> Option<f64> {
        let errs: Vec<f64> = self
            .realized
            .iter()
            .zip(&self.coefficient)
            .filter(|(_, c)| **c > 1e-12)
            .map(|(r, c)| (r - c).abs() / c)
            .collect();
        (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64)
    }
}

/// Streams paths, so memory stays proportional to the number of windows.
pub fn ampr_windows(model: &SdeModel, cfg: &SimConfig, window: usize) -> Result<AmprWindows> {
    if window == 0 || cfg.steps < window {
        return Err(invalid(format!("{} steps cannot fill an AMPR window of {window}", cfg.steps)));
    }
    let n_windows = cfg.steps / window;
    let per_path = map_paths(model, cfg, |i, p| {
        let lq = log_q_path(p, cfg.dt, i)?;
        let coef: Vec<f64> = (0..n_windows)
            .map(|w| {
                (w * window..(w + 1) * window)
                    .map(|k| p.theta(k).iter().map(|t| t * t).sum::<f64>())
                    .sum::<f64>()
                    / window as f64
            })
            .collect();
        Ok((ampr_realized(&lq, cfg.dt, window), coef))
    })?;
    let m = per_path.len() as f64;
    let mut realized = vec![0.0; n_windows];
    let mut coefficient = vec![0.0; n_windows];
    for (r, c) in &per_path {
        for w in 0..n_windows {
            realized[w] += r[w] / m;
            coefficient[w] += c[w] / m;
        }
    }
    Ok(AmprWindows {
        times: (0..n_windows).map(|w| cfg.time(w * window)).collect(),
        realized,
        coefficient,
    })
}
