//! Coefficient families `dX = μ(X, t) dt + σ(X, t) dW`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Minimum admissible value of a deterministic AMPR schedule.
pub const A_FLOOR: f64 = 1e-6;

/// Diffusion coefficients of one model family.
///
/// Matrices are row-major `n × n`. `solve_vol` returns `None` when `σ(x, t)`
/// is singular.
pub trait Dynamics: Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn drift_into(&self, x: &[f64], t: f64, out: &mut [f64]);
    fn diffusion_into(&self, x: &[f64], t: f64, out: &mut [f64]);
    /// `out = σ(x, t)⁻¹ v`.
    fn solve_vol(&self, x: &[f64], t: f64, v: &[f64], out: &mut [f64]) -> Option<()>;

    /// `out = σ(x, t)⁻ᵀ v`.
    fn solve_vol_transpose(&self, x: &[f64], t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        let n = self.dim();
        let mut s = vec![0.0; n * n];
        self.diffusion_into(x, t, &mut s);
        let m = DMatrix::from_row_slice(n, n, &s).transpose();
        let sol = m.lu().solve(&DVector::from_column_slice(v))?;
        out.copy_from_slice(sol.as_slice());
        Some(())
    }
}

/// Piecewise-constant `A(t)`: `values[k]` on `[times[k-1], times[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ASchedule {
    #[serde(default)]
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ASchedule {
    pub fn constant(a: f64) -> Self {
        Self {
            times: Vec::new(),
            values: vec![a],
        }
    }

    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len() + 1 {
            return Err(invalid("A schedule needs one more value than breakpoints"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("A schedule breakpoints must increase"));
        }
        if self.values.iter().chain(&self.times).any(|v| !v.is_finite()) {
            return Err(invalid("A schedule must be finite"));
        }
        if let Some(v) = self.values.iter().find(|v| **v < 0.0) {
            return Err(invalid(format!("A schedule value {v} is negative")));
        }
        Ok(())
    }

    /// Refuses schedules dipping below [`A_FLOOR`].
    pub fn validate_floor(&self) -> Result<()> {
        self.validate()?;
        match self.values.iter().find(|v| **v < A_FLOOR) {
            Some(v) => Err(invalid(format!("A schedule value {v} below floor {A_FLOOR}"))),
            None => Ok(()),
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.values[self.times.partition_point(|b| *b <= t)]
    }
}

fn lu_inverse(s: &[f64], n: usize) -> Result<DMatrix<f64>> {
    if s.len() != n * n {
        return Err(invalid(format!("volatility needs {} entries, got {}", n * n, s.len())));
    }
    let m = DMatrix::from_row_slice(n, n, s);
    let svd = m.clone().svd(false, false);
    let (lo, hi) = (svd.singular_values.min(), svd.singular_values.max());
    if !(lo > 0.0) || hi / lo >= 1e8 {
        return Err(invalid(format!("volatility matrix condition number {:e} ≥ 1e8", hi / lo)));
    }
    m.try_inverse().ok_or_else(|| invalid("volatility matrix is singular"))
}

/// Runs `f` on a zeroed buffer, on the stack for small sizes.
pub(crate) fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [f64]) -> R) -> R {
    if len <= 64 {
        f(&mut [0.0; 64][..len])
    } else {
        f(&mut vec![0.0; len])
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..v.len()).map(|j| m[(i, j)] * v[j]).sum();
    }
}

/// `dX = b dt + S dW`.
#[derive(Debug, Clone)]
pub struct BachelierConstant {
    drift: Vec<f64>,
    vol: DMatrix<f64>,
    vol_inv: DMatrix<f64>,
}

impl BachelierConstant {
    pub fn new(drift: Vec<f64>, vol: &[f64]) -> Result<Self> {
        let n = drift.len();
        let vol_inv = lu_inverse(vol, n)?;
        Ok(Self {
            drift,
            vol: DMatrix::from_row_slice(n, n, vol),
            vol_inv,
        })
    }
}

impl Dynamics for BachelierConstant {
    fn name(&self) -> &'static str {
        "bachelier-constant"
    }
    fn dim(&self) -> usize {
        self.drift.len()
    }
    fn drift_into(&self, _x: &[f64], _t: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.drift);
    }
    fn diffusion_into(&self, _x: &[f64], _t: f64, out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.vol[(i, j)];
            }
        }
    }
    fn solve_vol(&self, _x: &[f64], _t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        mat_vec(&self.vol_inv, v, out);
        Some(())
    }
}

/// `dXᵢ = mᵢ Xᵢ dt + |Xᵢ|^β (S dW)ᵢ`; `β = 1` is geometric Brownian motion.
#[derive(Debug, Clone)]
pub struct LocalVol {
    name: &'static str,
    growth: Vec<f64>,
    beta: f64,
    vol: DMatrix<f64>,
    vol_inv: DMatrix<f64>,
}

impl LocalVol {
    pub fn gbm(growth: Vec<f64>, vol: &[f64]) -> Result<Self> {
        Self::build("gbm", growth, vol, 1.0)
    }

    pub fn cev(growth: Vec<f64>, vol: &[f64], beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(invalid("CEV exponent must be finite"));
        }
        Self::build("cev", growth, vol, beta)
    }

    fn build(name: &'static str, growth: Vec<f64>, vol: &[f64], beta: f64) -> Result<Self> {
        let n = growth.len();
        let vol_inv = lu_inverse(vol, n)?;
        Ok(Self {
            name,
            growth,
            beta,
            vol: DMatrix::from_row_slice(n, n, vol),
            vol_inv,
        })
    }

    fn scale(&self, xi: f64) -> f64 {
        if self.beta == 1.0 {
            xi
        } else {
            xi.abs().powf(self.beta)
        }
    }
}

impl Dynamics for LocalVol {
    fn name(&self) -> &'static str {
        self.name
    }
    fn dim(&self) -> usize {
        self.growth.len()
    }
    fn drift_into(&self, x: &[f64], _t: f64, out: &mut [f64]) {
        for ((o, m), xi) in out.iter_mut().zip(&self.growth).zip(x) {
            *o = m * xi;
        }
    }
    fn diffusion_into(&self, x: &[f64], _t: f64, out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let s = self.scale(x[i]);
            for j in 0..n {
                out[i * n + j] = s * self.vol[(i, j)];
            }
        }
    }
    fn solve_vol(&self, x: &[f64], _t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        with_scratch(v.len(), |w| {
            for ((wi, vi), xi) in w.iter_mut().zip(v).zip(x) {
                let s = self.scale(*xi);
                if s == 0.0 || !s.is_finite() {
                    return None;
                }
                *wi = vi / s;
            }
            mat_vec(&self.vol_inv, w, out);
            Some(())
        })
    }
}

/// `dX = (rX + A(t) e₁) dt + dW`.
#[derive(Debug, Clone)]
pub struct CanonicalBachelier {
    n: usize,
    r: f64,
    schedule: ASchedule,
}

impl CanonicalBachelier {
    pub fn new(n: usize, r: f64, schedule: ASchedule) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension must be positive"));
        }
        schedule.validate_floor()?;
        Ok(Self { n, r, schedule })
    }

    pub fn schedule(&self) -> &ASchedule {
        &self.schedule
    }
}

impl Dynamics for CanonicalBachelier {
    fn name(&self) -> &'static str {
        "canonical-bachelier"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn drift_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o = self.r * xi;
        }
        out[0] += self.schedule.at(t);
    }
    fn diffusion_into(&self, _x: &[f64], _t: f64, out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.n {
            out[i * self.n + i] = 1.0;
        }
    }
    fn solve_vol(&self, _x: &[f64], _t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        out.copy_from_slice(v);
        Some(())
    }
    fn solve_vol_transpose(&self, _x: &[f64], _t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        out.copy_from_slice(v);
        Some(())
    }
}

/// Keeps the volatility of `inner` and sets `μ = rx − A(t) σ e₁`, so the
/// AMPR equals `A(t)` everywhere.
#[derive(Debug, Clone)]
pub struct DriftAdjusted {
    inner: Arc<dyn Dynamics>,
    r: f64,
    schedule: ASchedule,
}

impl DriftAdjusted {
    pub fn new(inner: Arc<dyn Dynamics>, r: f64, schedule: ASchedule) -> Result<Self> {
        schedule.validate()?;
        Ok(Self { inner, r, schedule })
    }

    pub fn schedule(&self) -> &ASchedule {
        &self.schedule
    }
}

impl Dynamics for DriftAdjusted {
    fn name(&self) -> &'static str {
        "drift-adjusted"
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn drift_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        let n = self.dim();
        let a = self.schedule.at(t);
        with_scratch(n * n, |s| {
            self.inner.diffusion_into(x, t, s);
            for i in 0..n {
                out[i] = self.r * x[i] - a * s[i * n];
            }
        })
    }
    fn diffusion_into(&self, x: &[f64], t: f64, out: &mut [f64]) {
        self.inner.diffusion_into(x, t, out)
    }
    fn solve_vol(&self, x: &[f64], t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        self.inner.solve_vol(x, t, v, out)
    }
    fn solve_vol_transpose(&self, x: &[f64], t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
        self.inner.solve_vol_transpose(x, t, v, out)
    }
}
