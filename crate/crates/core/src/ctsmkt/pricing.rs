use serde::{Deserialize, Serialize};

use super::density::log_q_path;
use super::sim::{map_paths, SimConfig};
use super::SdeModel;
use crate::error::{invalid, Error, Result};

/// Claims paid at `T`, functions of the terminal state and of `q_T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimSpec {
    Constant { value: f64 },
    Linear { weights: Vec<f64> },
    Call { asset: usize, strike: f64 },
    Put { asset: usize, strike: f64 },
    Indicator { asset: usize, lower: f64, upper: f64 },
    /// `Σ cₖ (log q_T)ᵏ`, degree at most 4.
    LogQPoly { coefficients: Vec<f64> },
    CallOnQ { strike: f64 },
}

impl ClaimSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let asset_ok = |a: usize| {
            if a < dim {
                Ok(())
            } else {
                Err(invalid(format!("claim asset {a} out of range for dimension {dim}")))
            }
        };
        let finite = |vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(invalid("claim parameters must be finite"))
            }
        };
        let positive = |k: f64| {
            if k > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("strike must be positive, got {k}")))
            }
        };
        match self {
            ClaimSpec::Constant { value } => finite(&[*value]),
            ClaimSpec::Linear { weights } => {
                if weights.len() != dim {
                    return Err(invalid(format!("linear claim needs {dim} weights")));
                }
                finite(weights)
            }
            ClaimSpec::Call { asset, strike } | ClaimSpec::Put { asset, strike } => {
                asset_ok(*asset)?;
                finite(&[*strike])?;
                positive(*strike)
            }
            ClaimSpec::Indicator { asset, lower, upper } => {
                asset_ok(*asset)?;
                finite(&[*lower, *upper])?;
                if lower > upper {
                    return Err(invalid("indicator bounds are reversed"));
                }
                Ok(())
            }
            ClaimSpec::LogQPoly { coefficients } => {
                if coefficients.is_empty() || coefficients.len() > 5 {
                    return Err(invalid("log-q polynomial needs 1 to 5 coefficients"));
                }
                finite(coefficients)
            }
            ClaimSpec::CallOnQ { strike } => {
                finite(&[*strike])?;
                positive(*strike)
            }
        }
    }

    /// Whether the payoff depends on the path only through `q_T`.
    pub fn is_q_measurable(&self) -> bool {
        matches!(
            self,
            ClaimSpec::Constant { .. } | ClaimSpec::LogQPoly { .. } | ClaimSpec::CallOnQ { .. }
        )
    }

    pub fn payoff(&self, x: &[f64], log_q: f64) -> f64 {
        match self {
            ClaimSpec::Constant { value } => *value,
            ClaimSpec::Linear { weights } => weights.iter().zip(x).map(|(w, v)| w * v).sum(),
            ClaimSpec::Call { asset, strike } => (x[*asset] - strike).max(0.0),
            ClaimSpec::Put { asset, strike } => (strike - x[*asset]).max(0.0),
            ClaimSpec::Indicator { asset, lower, upper } => {
                f64::from(u8::from(*lower <= x[*asset] && x[*asset] <= *upper))
            }
            ClaimSpec::LogQPoly { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * log_q + c),
            ClaimSpec::CallOnQ { strike } => (log_q.exp() - strike).max(0.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ClaimSpec::Constant { value } => format!("constant({value})"),
            ClaimSpec::Linear { weights } => format!("linear({weights:?})"),
            ClaimSpec::Call { asset, strike } => format!("call({asset},{strike})"),
            ClaimSpec::Put { asset, strike } => format!("put({asset},{strike})"),
            ClaimSpec::Indicator { asset, lower, upper } => format!("indicator({asset},{lower},{upper})"),
            ClaimSpec::LogQPoly { coefficients } => format!("log_q_poly({coefficients:?})"),
            ClaimSpec::CallOnQ { strike } => format!("call_on_q({strike})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceEstimate {
    pub price: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

/// `discount · mean(samples)` with the standard error of the mean. Under
/// antithetic pairing, adjacent samples are averaged first.
pub fn price_from_samples(samples: &[f64], discount: f64, antithetic: bool) -> Result<PriceEstimate> {
    let units: Vec<f64> = if antithetic {
        samples.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
    } else {
        samples.to_vec()
    };
    let m = units.len();
    if m < 2 {
        return Err(Error::Insufficient { needed: 2, got: m });
    }
    let mean = units.iter().sum::<f64>() / m as f64;
    let var = units.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    Ok(PriceEstimate {
        price: discount * mean,
        std_error: discount * (var / m as f64).sqrt(),
        n_paths: samples.len(),
    })
}

/// `e^{−rT} · mean(q_T · payoff)` from paths simulated under the base measure.
pub fn price_mc(model: &SdeModel, claim: &ClaimSpec, cfg: &SimConfig) -> Result<PriceEstimate> {
    claim.validate(model.dim())?;
    let samples = map_paths(model, cfg, |i, p| {
        let log_q = *log_q_path(p, cfg.dt, i)?.last().expect("q₀ is stored");
        let v = log_q.exp() * claim.payoff(p.terminal(), log_q);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinitePayoff(claim.label()))
        }
    })?;
    price_from_samples(&samples, (-model.r() * model.horizon()).exp(), cfg.antithetic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctsmkt::LocalVol;
    use std::sync::Arc;

    fn gbm() -> SdeModel {
        SdeModel::new(0.02, 1.0, vec![100.0], Arc::new(LocalVol::gbm(vec![0.07], &[0.2]).unwrap())).unwrap()
    }

    #[test]
    fn payoffs() {
        let x = [90.0, 110.0];
        assert_eq!(ClaimSpec::Call { asset: 1, strike: 100.0 }.payoff(&x, 0.0), 10.0);
        assert_eq!(ClaimSpec::Put { asset: 1, strike: 100.0 }.payoff(&x, 0.0), 0.0);
        assert_eq!(ClaimSpec::Indicator { asset: 0, lower: 80.0, upper: 90.0 }.payoff(&x, 0.0), 1.0);
        let poly = ClaimSpec::LogQPoly {
            coefficients: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(poly.payoff(&x, 2.0), 1.0 + 4.0 + 12.0);
        assert_eq!(ClaimSpec::CallOnQ { strike: 1.0 }.payoff(&x, 0.0), 0.0);
        assert_eq!(ClaimSpec::Linear { weights: vec![1.0, -1.0] }.payoff(&x, 0.0), -20.0);
    }

    #[test]
    fn claim_validation() {
        assert!(ClaimSpec::Call { asset: 1, strike: 100.0 }.validate(1).is_err());
        assert!(ClaimSpec::CallOnQ { strike: 0.0 }.validate(1).is_err());
        assert!(ClaimSpec::LogQPoly { coefficients: vec![0.0; 6] }.validate(1).is_err());
        assert!(ClaimSpec::Constant { value: f64::NAN }.validate(1).is_err());
    }

    #[test]
    fn constant_claim_discounts() {
        let m = gbm();
        let est = price_mc(&m, &ClaimSpec::Constant { value: 1.0 }, &SimConfig::over(&m, 20, 4000, 42)).unwrap();
        let target = (-0.02f64).exp();
        assert!((est.price - target).abs() <= 3.0 * est.std_error + 1e-12, "{est:?}");
    }

    #[test]
    fn antithetic_standard_error_uses_pairs() {
        let est = price_from_samples(&[1.0, 3.0, 2.0, 2.0], 1.0, true).unwrap();
        assert_eq!(est.price, 2.0);
        assert_eq!(est.std_error, 0.0);
        assert!(price_from_samples(&[1.0], 1.0, false).is_err());
    }
}
