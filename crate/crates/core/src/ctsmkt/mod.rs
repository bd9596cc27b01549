//! Continuous-time diffusion markets.
//!
//! A model is a risk-free rate `r`, a horizon `T`, an initial state and a
//! [`Dynamics`] implementation. Paths are simulated by Euler–Maruyama with
//! one counter-based random stream per path, so ensembles are reproducible
//! independently of thread count. Stochastic integrals are left-point
//! throughout.
//!
//! Notation: `θ = σ⁻¹(rX − μ)` is the vector whose norm is the AMPR,
//! `Z = ∫ θ · dW` and `q = exp(Z − ½∫|θ|² dt)`.

mod canon;
mod density;
mod dynamics;
mod fund;
mod pricing;
mod registry;
mod sim;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Result};

pub use canon::{
    bachelier_canonicalize, canonical_image, canonicalize_path, deterministic_ampr, gram_schmidt_frame, CanonicalEnsemble,
    CanonicalPath,
};
pub use density::{ampr_realized, ampr_windows, log_q_path, q_process, AmprWindows, QPaths, DEFAULT_WINDOW};
pub use dynamics::{ASchedule, BachelierConstant, CanonicalBachelier, DriftAdjusted, Dynamics, LocalVol, A_FLOOR};
pub use fund::{
    convergence_order, mutual_fund_weights, replicate_fund, replicate_path, ReplicationPath, ReplicationReport,
};
pub use pricing::{price_mc, price_from_samples, ClaimSpec, PriceEstimate};
pub use registry::{BuildContext, Builder, FamilyBlock, ModelRegistry, ScheduleSpec, SdeSpec};
pub use sim::{map_paths, simulate, simulate_path, Path, PathEnsemble, SimConfig};

#[derive(Debug, Clone)]
pub struct SdeModel {
    r: f64,
    horizon: f64,
    x0: Vec<f64>,
    dynamics: Arc<dyn Dynamics>,
}

impl SdeModel {
    pub fn new(r: f64, horizon: f64, x0: Vec<f64>, dynamics: Arc<dyn Dynamics>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(invalid(format!("horizon must be positive, got {horizon}")));
        }
        if !r.is_finite() {
            return Err(invalid("risk-free rate must be finite"));
        }
        let n = dynamics.dim();
        if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("initial state must be {n} finite values")));
        }
        let mut s = vec![0.0; n * n];
        dynamics.diffusion_into(&x0, 0.0, &mut s);
        let sv = DMatrix::from_row_slice(n, n, &s).singular_values();
        let (lo, hi) = (sv.min(), sv.max());
        if !(lo > 0.0) || hi / lo >= 1e8 {
            return Err(invalid("volatility is not invertible at the initial state"));
        }
        Ok(Self {
            r,
            horizon,
            x0,
            dynamics,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn dynamics(&self) -> &Arc<dyn Dynamics> {
        &self.dynamics
    }

    /// `θ = σ⁻¹(rx − μ)`; `None` when σ is singular.
    pub fn theta_into(&self, x: &[f64], t: f64, out: &mut [f64]) -> Option<()> {
        dynamics::with_scratch(self.dim(), |v| {
            self.dynamics.drift_into(x, t, v);
            for (vi, xi) in v.iter_mut().zip(x) {
                *vi = self.r * xi - *vi;
            }
            self.dynamics.solve_vol(x, t, v, out)
        })
    }

    /// Same model with `μ = rx − A(t) σ e₁`.
    pub fn drift_adjust(&self, a: ASchedule) -> Result<Self> {
        let d = DriftAdjusted::new(self.dynamics.clone(), self.r, a)?;
        Self::new(self.r, self.horizon, self.x0.clone(), Arc::new(d))
    }
}

/// `|σ⁻¹(rx − μ(x, t))|`.
pub fn ampr_coefficient(model: &SdeModel, x: &[f64], t: f64) -> Result<f64> {
    let mut theta = vec![0.0; model.dim()];
    model
        .theta_into(x, t, &mut theta)
        .ok_or_else(|| invalid(format!("volatility is singular at x = {x:?}, t = {t}")))?;
    Ok(theta.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `drift_adjust` as a free function over a volatility model.
pub fn drift_adjust(model: &SdeModel, a: ASchedule) -> Result<SdeModel> {
    model.drift_adjust(a)
}
