//! Mapping a deterministic-AMPR market onto canonical Bachelier form.

use nalgebra::{DMatrix, DVector};

use super::density::log_q_path;
use std::sync::Arc;

use super::dynamics::{ASchedule, CanonicalBachelier, A_FLOOR};
use super::sim::{Path, PathEnsemble};
use super::SdeModel;
use crate::error::{invalid, Error, Result};

/// Largest tolerated cross-path spread of `|θ|` at a fixed time, relative to
/// its mean.
const DETERMINISM_GATE: f64 = 0.05;

/// Orthonormal frame with first row `v`.
///
/// Further rows orthonormalize `e_{i₂}, e_{i₃}, …` in order, where `i_k` is
/// the first index with `dim span(v, e₁, …, e_{i_k}) ≥ k`.
pub fn gram_schmidt_frame(v: &[f64]) -> Result<DMatrix<f64>> {
    let n = v.len();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0 || (norm - 1.0).abs() > 1e-10 {
        return Err(invalid(format!("frame needs a unit vector, got norm {norm}")));
    }
    let mut rows = vec![DVector::from_column_slice(v)];
    for i in 0..n {
        if rows.len() == n {
            break;
        }
        let mut u = DVector::<f64>::zeros(n);
        u[i] = 1.0;
        for _ in 0..2 {
            for r in &rows {
                u -= r * r.dot(&u);
            }
        }
        let len = u.norm();
        if len > 1e-10 {
            rows.push(u / len);
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Cross-path mean of `|θ|` per step, refusing spreads above 5% or values
/// below the floor.
pub fn deterministic_ampr(ensemble: &PathEnsemble) -> Result<Vec<f64>> {
    let steps = ensemble.steps();
    let n_paths = ensemble.paths.len() as f64;
    let mut a = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = ensemble.config.time(k);
        let norms: Vec<f64> = ensemble
            .paths
            .iter()
            .map(|p| p.theta(k).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        let mean = norms.iter().sum::<f64>() / n_paths;
        if !(mean >= A_FLOOR) {
            return Err(Error::AmprBelowFloor {
                value: mean,
                floor: A_FLOOR,
                t,
            });
        }
        let variation = norms.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max) / mean;
        if variation > DETERMINISM_GATE {
            return Err(Error::NonDeterministicAmpr { variation, t });
        }
        a.push(mean);
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPath {
    n: usize,
    /// `steps × n` increments of `W̃`.
    pub dw: Vec<f64>,
    /// `(steps + 1) × n` states of `X̃`, starting at 0.
    pub x: Vec<f64>,
}

impl CanonicalPath {
    pub fn increment(&self, k: usize) -> &[f64] {
        &self.dw[k * self.n..(k + 1) * self.n]
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.x[k * self.n..(k + 1) * self.n]
    }

    /// Increments of component `j` along the path.
    pub fn channel(&self, j: usize) -> Vec<f64> {
        self.dw.iter().skip(j).step_by(self.n).copied().collect()
    }
}

/// Canonical image of one path given the deterministic schedule `a` (one
/// value per step).
///
/// `Z̃ = log q + ½∫A²`, `dW̃¹ = −dZ̃ / A`, the other components of `dW̃` are
/// rows `2..n` of the frame of `−θ/|θ|` applied to `dW`, and
/// `dX̃ = (rX̃ + A e₁) dt + dW̃` from `X̃₀ = 0`.
pub fn canonicalize_path(path: &Path, log_q: &[f64], a: &[f64], r: f64, dt: f64) -> Result<CanonicalPath> {
    let n = path.dim();
    let steps = path.steps();
    if a.len() != steps || log_q.len() != steps + 1 {
        return Err(invalid("schedule and density must match the path length"));
    }
    let mut dw = Vec::with_capacity(steps * n);
    let mut x = vec![0.0; n];
    x.reserve(steps * n);
    let mut alpha = vec![0.0; n];
    for k in 0..steps {
        let ak = a[k];
        let dz = log_q[k + 1] - log_q[k] + 0.5 * ak * ak * dt;
        dw.push(-dz / ak);
        if n > 1 {
            let theta = path.theta(k);
            let norm = theta.iter().map(|v| v * v).sum::<f64>().sqrt();
            for (al, th) in alpha.iter_mut().zip(theta) {
                *al = -th / norm;
            }
            let frame = gram_schmidt_frame(&alpha)?;
            let inc = path.increment(k);
            for i in 1..n {
                dw.push((0..n).map(|j| frame[(i, j)] * inc[j]).sum());
            }
        }
        for i in 0..n {
            let prev = x[k * n + i];
            let drift = r * prev + if i == 0 { ak } else { 0.0 };
            x.push(prev + drift * dt + dw[k * n + i]);
        }
    }
    Ok(CanonicalPath { n, dw, x })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalEnsemble {
    /// `A` per step.
    pub a: Vec<f64>,
    pub paths: Vec<CanonicalPath>,
}

impl CanonicalEnsemble {
    /// All increments of component `j`, path by path.
    pub fn channel(&self, j: usize) -> Vec<f64> {
        self.paths.iter().flat_map(|p| p.channel(j)).collect()
    }
}

pub fn bachelier_canonicalize(ensemble: &PathEnsemble) -> Result<CanonicalEnsemble> {
    let a = deterministic_ampr(ensemble)?;
    let dt = ensemble.dt();
    let paths = ensemble
        .paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let log_q = log_q_path(p, dt, i)?;
            canonicalize_path(p, &log_q, &a, ensemble.r, dt)
        })
        .collect::<Result<_>>()?;
    Ok(CanonicalEnsemble { a, paths })
}

/// Canonical Bachelier model from `X̃₀ = 0` holding `A = a[k]` over step `k`.
pub fn canonical_image(model: &SdeModel, a: &[f64], dt: f64) -> Result<SdeModel> {
    if a.is_empty() {
        return Err(invalid("empty A schedule"));
    }
    // breakpoints between grid times, so rounding in k·dt cannot shift a step
    let times = (1..a.len()).map(|k| (k as f64 - 0.5) * dt).collect();
    let dynamics = CanonicalBachelier::new(model.dim(), model.r(), ASchedule::new(times, a.to_vec())?)?;
    SdeModel::new(model.r(), model.horizon(), vec![0.0; model.dim()], Arc::new(dynamics))
}
