use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SdeModel;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
}

impl SimConfig {
    /// `steps` equal steps over the model horizon.
    pub fn over(model: &SdeModel, steps: usize, n_paths: usize, seed: u64) -> Self {
        Self {
            dt: model.horizon() / steps as f64,
            steps,
            n_paths,
            seed,
            antithetic: false,
        }
    }

    pub fn with_antithetic(self, antithetic: bool) -> Self {
        Self { antithetic, ..self }
    }

    pub fn check(&self, model: &SdeModel) -> Result<()> {
        if self.steps == 0 || self.n_paths == 0 || !(self.dt > 0.0) {
            return Err(invalid("simulation needs positive dt, steps and paths"));
        }
        let horizon = model.horizon();
        if (self.steps as f64 * self.dt - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return Err(invalid(format!(
                "steps·dt = {} does not match horizon {horizon}",
                self.steps as f64 * self.dt
            )));
        }
        Ok(())
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// One simulated path: states, Brownian increments and `θ` at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    n: usize,
    /// `(steps + 1) × n`.
    pub x: Vec<f64>,
    /// `steps × n`.
    pub dw: Vec<f64>,
    /// `steps × n`, evaluated at the left end of each step.
    pub theta: Vec<f64>,
}

impl Path {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.dw.len() / self.n
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.x[k * self.n..(k + 1) * self.n]
    }

    pub fn increment(&self, k: usize) -> &[f64] {
        &self.dw[k * self.n..(k + 1) * self.n]
    }

    pub fn theta(&self, k: usize) -> &[f64] {
        &self.theta[k * self.n..(k + 1) * self.n]
    }

    pub fn terminal(&self) -> &[f64] {
        self.state(self.steps())
    }
}

/// Euler–Maruyama path number `index`.
///
/// The normal draws come from the ChaCha8 stream `index` (or `index / 2`,
/// negated for odd indices, under antithetic pairing) of `seed`.
pub fn simulate_path(model: &SdeModel, cfg: &SimConfig, index: usize) -> Result<Path> {
    let n = model.dim();
    let (stream, flip) = if cfg.antithetic {
        (index / 2, index % 2 == 1)
    } else {
        (index, false)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream as u64);
    let sqrt_dt = cfg.dt.sqrt();
    let mut x = Vec::with_capacity((cfg.steps + 1) * n);
    let mut dw = Vec::with_capacity(cfg.steps * n);
    let mut theta = vec![0.0; cfg.steps * n];
    x.extend_from_slice(model.x0());
    let mut mu = vec![0.0; n];
    let mut sigma = vec![0.0; n * n];
    let dynamics = model.dynamics();
    for k in 0..cfg.steps {
        let t = cfg.time(k);
        for _ in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            dw.push(if flip { -z } else { z } * sqrt_dt);
        }
        let (done, _) = x.split_at(k * n + n);
        let xk = &done[k * n..];
        model
            .theta_into(xk, t, &mut theta[k * n..(k + 1) * n])
            .ok_or(Error::SingularVolatility { path: index, step: k })?;
        dynamics.drift_into(xk, t, &mut mu);
        dynamics.diffusion_into(xk, t, &mut sigma);
        let inc = &dw[k * n..];
        for i in 0..n {
            let noise: f64 = (0..n).map(|j| sigma[i * n + j] * inc[j]).sum();
            let next = x[k * n + i] + mu[i] * cfg.dt + noise;
            if !next.is_finite() {
                return Err(Error::Overflow { path: index, step: k });
            }
            x.push(next);
        }
    }
    Ok(Path { n, x, dw, theta })
}

/// Applies `f` to every simulated path, in parallel, returning results in
/// path order. The first failing path (by index) determines the error.
pub fn map_paths<T, F>(model: &SdeModel, cfg: &SimConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Path) -> Result<T> + Sync,
{
    cfg.check(model)?;
    let results: Vec<Result<T>> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(model, cfg, i).and_then(|p| f(i, &p)))
        .collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub config: SimConfig,
    pub r: f64,
    pub paths: Vec<Path>,
}

impl PathEnsemble {
    pub fn dim(&self) -> usize {
        self.paths[0].dim()
    }

    pub fn steps(&self) -> usize {
        self.config.steps
    }

    pub fn dt(&self) -> f64 {
        self.config.dt
    }
}

pub fn simulate(model: &SdeModel, cfg: &SimConfig) -> Result<PathEnsemble> {
    Ok(PathEnsemble {
        config: *cfg,
        r: model.r(),
        paths: map_paths(model, cfg, |_, p| Ok(p.clone()))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctsmkt::{BachelierConstant, LocalVol};
    use std::sync::Arc;

    fn gbm() -> SdeModel {
        SdeModel::new(0.0, 1.0, vec![100.0], Arc::new(LocalVol::gbm(vec![0.07], &[0.2]).unwrap())).unwrap()
    }

    #[test]
    fn horizon_mismatch_rejected() {
        let cfg = SimConfig {
            dt: 0.01,
            steps: 50,
            n_paths: 1,
            seed: 1,
            antithetic: false,
        };
        assert!(simulate(&gbm(), &cfg).is_err());
    }

    #[test]
    fn driftless_bachelier_moves_by_increments() {
        let d = BachelierConstant::new(vec![0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let m = SdeModel::new(0.0, 1.0, vec![1.0, 2.0], Arc::new(d)).unwrap();
        let e = simulate(&m, &SimConfig::over(&m, 10, 3, 7)).unwrap();
        for p in &e.paths {
            for k in 0..10 {
                for i in 0..2 {
                    let moved = p.state(k + 1)[i] - p.state(k)[i];
                    assert!((moved - p.increment(k)[i]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let m = gbm();
        let cfg = SimConfig::over(&m, 20, 16, 99);
        let a = simulate(&m, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| simulate(&m, &cfg).unwrap());
        assert_eq!(a, b);
        let other = simulate(&m, &SimConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.paths[0].dw, other.paths[0].dw);
    }

    #[test]
    fn antithetic_pairs_mirror() {
        let m = gbm();
        let cfg = SimConfig::over(&m, 8, 4, 3).with_antithetic(true);
        let e = simulate(&m, &cfg).unwrap();
        for pair in e.paths.chunks(2) {
            let neg: Vec<f64> = pair[0].dw.iter().map(|v| -v).collect();
            assert_eq!(neg, pair[1].dw);
        }
    }

    /// Unit volatility that turns singular from `t = 0.5` on.
    #[derive(Debug)]
    struct Fading;

    impl crate::ctsmkt::Dynamics for Fading {
        fn name(&self) -> &'static str {
            "fading"
        }
        fn dim(&self) -> usize {
            1
        }
        fn drift_into(&self, _x: &[f64], _t: f64, out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn diffusion_into(&self, _x: &[f64], t: f64, out: &mut [f64]) {
            out[0] = if t < 0.5 { 1.0 } else { 0.0 };
        }
        fn solve_vol(&self, _x: &[f64], t: f64, v: &[f64], out: &mut [f64]) -> Option<()> {
            (t < 0.5).then(|| out[0] = v[0])
        }
    }

    #[test]
    fn singular_volatility_reported_with_location() {
        let m = SdeModel::new(0.0, 1.0, vec![1.0], Arc::new(Fading)).unwrap();
        let err = simulate(&m, &SimConfig::over(&m, 10, 2, 1)).unwrap_err();
        assert_eq!(err, Error::SingularVolatility { path: 0, step: 5 });
    }
}
