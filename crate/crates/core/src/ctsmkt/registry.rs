//! Model families by name, built from JSON parameter blocks.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::dynamics::{ASchedule, BachelierConstant, CanonicalBachelier, DriftAdjusted, Dynamics, LocalVol};
use super::SdeModel;
use crate::error::{invalid, Result};

/// `A` as a constant or a piecewise schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Constant(f64),
    Piecewise(ASchedule),
}

impl ScheduleSpec {
    pub fn schedule(&self) -> Result<ASchedule> {
        let s = match self {
            ScheduleSpec::Constant(a) => ASchedule::constant(*a),
            ScheduleSpec::Piecewise(s) => s.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

/// Volatility as a full matrix (rows) or per-asset diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum VolSpec {
    Matrix(Vec<Vec<f64>>),
    Diagonal(Vec<f64>),
}

impl VolSpec {
    fn row_major(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            VolSpec::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(invalid(format!("vol must be {n}×{n}")));
                }
                Ok(rows.iter().flatten().copied().collect())
            }
            VolSpec::Diagonal(d) => {
                if d.len() != n {
                    return Err(invalid(format!("vol must have {n} entries")));
                }
                Ok((0..n * n).map(|k| if k % (n + 1) == 0 { d[k / n] } else { 0.0 }).collect())
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearParams {
    #[serde(default)]
    drift: Option<Vec<f64>>,
    vol: VolSpec,
    #[serde(default)]
    beta: Option<f64>,
}

impl LinearParams {
    fn drift(&self, n: usize) -> Result<Vec<f64>> {
        match &self.drift {
            Some(d) if d.len() != n => Err(invalid(format!("drift must have {n} entries"))),
            Some(d) => Ok(d.clone()),
            None => Ok(vec![0.0; n]),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalParams {
    a: ScheduleSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdjustedParams {
    inner: FamilyBlock,
    a: ScheduleSpec,
}

/// A family tag and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBlock {
    pub family: String,
    #[serde(default)]
    pub params: Value,
}

/// Everything a builder needs besides its own parameters.
#[derive(Debug, Clone, Copy)]
pub struct BuildContext {
    pub dim: usize,
    pub r: f64,
}

pub type Builder = fn(&ModelRegistry, &Value, BuildContext) -> Result<Arc<dyn Dynamics>>;

fn params<T: DeserializeOwned>(family: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| invalid(format!("{family} params: {e}")))
}

fn build_bachelier(_: &ModelRegistry, v: &Value, ctx: BuildContext) -> Result<Arc<dyn Dynamics>> {
    let p: LinearParams = params("bachelier-constant", v)?;
    if p.beta.is_some() {
        return Err(invalid("bachelier-constant takes no beta"));
    }
    Ok(Arc::new(BachelierConstant::new(p.drift(ctx.dim)?, &p.vol.row_major(ctx.dim)?)?))
}

fn build_gbm(_: &ModelRegistry, v: &Value, ctx: BuildContext) -> Result<Arc<dyn Dynamics>> {
    let p: LinearParams = params("gbm", v)?;
    if p.beta.is_some() {
        return Err(invalid("gbm takes no beta"));
    }
    Ok(Arc::new(LocalVol::gbm(p.drift(ctx.dim)?, &p.vol.row_major(ctx.dim)?)?))
}

fn build_cev(_: &ModelRegistry, v: &Value, ctx: BuildContext) -> Result<Arc<dyn Dynamics>> {
    let p: LinearParams = params("cev", v)?;
    let beta = p.beta.ok_or_else(|| invalid("cev params: missing field `beta`"))?;
    Ok(Arc::new(LocalVol::cev(p.drift(ctx.dim)?, &p.vol.row_major(ctx.dim)?, beta)?))
}

fn build_canonical(_: &ModelRegistry, v: &Value, ctx: BuildContext) -> Result<Arc<dyn Dynamics>> {
    let p: CanonicalParams = params("canonical-bachelier", v)?;
    Ok(Arc::new(CanonicalBachelier::new(ctx.dim, ctx.r, p.a.schedule()?)?))
}

fn build_adjusted(reg: &ModelRegistry, v: &Value, ctx: BuildContext) -> Result<Arc<dyn Dynamics>> {
    let p: AdjustedParams = params("drift-adjusted", v)?;
    let inner = reg.build(&p.inner, ctx)?;
    Ok(Arc::new(DriftAdjusted::new(inner, ctx.r, p.a.schedule()?)?))
}

#[derive(Clone)]
pub struct ModelRegistry {
    builders: BTreeMap<String, Builder>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = Self {
            builders: BTreeMap::new(),
        };
        r.register("bachelier-constant", build_bachelier);
        r.register("gbm", build_gbm);
        r.register("cev", build_cev);
        r.register("canonical-bachelier", build_canonical);
        r.register("drift-adjusted", build_adjusted);
        r
    }
}

impl ModelRegistry {
    pub fn register(&mut self, family: &str, builder: Builder) {
        self.builders.insert(family.to_string(), builder);
    }

    pub fn families(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, block: &FamilyBlock, ctx: BuildContext) -> Result<Arc<dyn Dynamics>> {
        let builder = self.builders.get(&block.family).ok_or_else(|| {
            let known: Vec<&str> = self.families().collect();
            invalid(format!("unknown model family `{}` (known: {})", block.family, known.join(", ")))
        })?;
        builder(self, &block.params, ctx)
    }
}

/// Declarative description of an [`SdeModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeSpec {
    pub family: String,
    #[serde(default)]
    pub params: Value,
    pub r: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub x0: Vec<f64>,
}

impl SdeSpec {
    pub fn build(&self, registry: &ModelRegistry) -> Result<SdeModel> {
        let block = FamilyBlock {
            family: self.family.clone(),
            params: self.params.clone(),
        };
        let ctx = BuildContext {
            dim: self.x0.len(),
            r: self.r,
        };
        if ctx.dim == 0 {
            return Err(invalid("x0 must be non-empty"));
        }
        SdeModel::new(self.r, self.horizon, self.x0.clone(), registry.build(&block, ctx)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctsmkt::ampr_coefficient;
    use serde_json::json;

    fn spec(v: Value) -> Result<SdeModel> {
        let s: SdeSpec = serde_json::from_value(v).map_err(|e| invalid(e.to_string()))?;
        s.build(&ModelRegistry::default())
    }

    #[test]
    fn builds_every_family() {
        let gbm = spec(json!({"family": "gbm", "params": {"drift": [0.07], "vol": [0.2]}, "r": 0.02, "T": 1.0, "x0": [100.0]})).unwrap();
        assert!((ampr_coefficient(&gbm, &[100.0], 0.0).unwrap() - 0.25).abs() < 1e-12);
        let adj = spec(json!({
            "family": "drift-adjusted",
            "params": {"inner": {"family": "cev", "params": {"vol": [[0.3, 0.0], [0.1, 0.2]], "beta": 0.5}}, "a": 0.3},
            "r": 0.01, "T": 1.0, "x0": [1.0, 2.0]
        }))
        .unwrap();
        assert!((ampr_coefficient(&adj, &[1.5, 0.7], 0.4).unwrap() - 0.3).abs() < 1e-12);
        let can = spec(json!({"family": "canonical-bachelier", "params": {"a": {"times": [0.5], "values": [0.2, 0.4]}}, "r": 0.0, "T": 1.0, "x0": [0.0]})).unwrap();
        assert_eq!(can.dynamics().name(), "canonical-bachelier");
        let bach = spec(json!({"family": "bachelier-constant", "params": {"drift": [0.1], "vol": [[2.0]]}, "r": 0.0, "T": 2.0, "x0": [0.0]})).unwrap();
        assert!((ampr_coefficient(&bach, &[0.0], 0.0).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_blocks() {
        assert!(spec(json!({"family": "heston", "r": 0.0, "T": 1.0, "x0": [1.0]})).is_err());
        assert!(spec(json!({"family": "gbm", "params": {"vol": [0.2], "sigma": 1}, "r": 0.0, "T": 1.0, "x0": [1.0]})).is_err());
        assert!(spec(json!({"family": "gbm", "params": {"vol": [0.2, 0.1]}, "r": 0.0, "T": 1.0, "x0": [1.0]})).is_err());
        assert!(spec(json!({"family": "canonical-bachelier", "params": {"a": 0.0}, "r": 0.0, "T": 1.0, "x0": [0.0]})).is_err());
        assert!(spec(json!({"family": "cev", "params": {"vol": [0.2]}, "r": 0.0, "T": 1.0, "x0": [1.0]})).is_err());
    }
}
