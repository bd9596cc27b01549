//! JSON market spec files.

use std::path::Path;

use isomarket_core::ctsmkt::{ClaimSpec, ModelRegistry, SdeModel, SdeSpec};
use isomarket_core::finprob::{FiniteSpace, MultiMeasureSpace, Payoff};
use isomarket_core::gauss::GaussianMarket;
use isomarket_core::rearrange::Sign;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SPEC_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteBlock {
    /// Defaults to `a0, a1, …`.
    #[serde(default)]
    pub atoms: Option<Vec<String>>,
    pub p0: Vec<f64>,
    #[serde(default)]
    pub measures: Vec<Vec<f64>>,
    #[serde(default)]
    pub scale_c: Option<f64>,
    #[serde(default)]
    pub payoffs: Vec<Vec<f64>>,
    /// One of `+1`, `-1` per extra measure; all `+1` when absent.
    #[serde(default)]
    pub signs: Option<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBlock {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub cost: Vec<f64>,
    /// `(μᵀx, cᵀx)` targets for the min-variance problem.
    #[serde(default)]
    pub targets: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub casino_grid: Option<usize>,
    #[serde(default)]
    pub antithetic: Option<bool>,
    /// Rebalance strides, in simulation steps, for `replicate`.
    #[serde(default)]
    pub hedge_strides: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpecFile {
    pub version: String,
    #[serde(default)]
    pub finite: Option<FiniteBlock>,
    #[serde(default)]
    pub gaussian: Option<GaussianBlock>,
    #[serde(default)]
    pub sde: Option<SdeSpec>,
    #[serde(default)]
    pub claims: Vec<ClaimSpec>,
    #[serde(default)]
    pub run: RunBlock,
}

/// A parsed spec with its market built.
pub enum Market {
    Finite {
        space: MultiMeasureSpace,
        scale_c: Option<f64>,
        payoffs: Vec<Payoff>,
        signs: Vec<Sign>,
    },
    Gaussian {
        market: GaussianMarket,
        targets: [f64; 2],
    },
    Sde {
        model: SdeModel,
        claims: Vec<ClaimSpec>,
    },
}

impl Market {
    pub fn kind(&self) -> &'static str {
        match self {
            Market::Finite { .. } => "finite",
            Market::Gaussian { .. } => "gaussian",
            Market::Sde { .. } => "sde",
        }
    }
}

pub struct LoadedSpec {
    pub name: String,
    /// Parsed document, used for the config hash.
    pub document: Value,
    pub file: MarketSpecFile,
    pub market: Market,
}

pub fn parse_spec(name: &str, text: &str) -> Result<MarketSpecFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: MarketSpecFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Invalid(format!("{name}: at `{path}`: {}", e.inner()))
    })?;
    if file.version != SPEC_VERSION {
        return Err(CliError::Invalid(format!(
            "{name}: at `version`: unsupported spec version \"{}\", expected \"{SPEC_VERSION}\"",
            file.version
        )));
    }
    let blocks = [file.finite.is_some(), file.gaussian.is_some(), file.sde.is_some()];
    if blocks.iter().filter(|b| **b).count() != 1 {
        return Err(CliError::Invalid(format!(
            "{name}: exactly one of `finite`, `gaussian`, `sde` is required"
        )));
    }
    Ok(file)
}

fn at(name: &str, path: &str) -> impl Fn(isomarket_core::Error) -> CliError {
    let (name, path) = (name.to_string(), path.to_string());
    move |e| {
        let msg = format!("{name}: at `{path}`: {e}");
        if e.is_numerical() {
            CliError::Numerical(msg)
        } else {
            CliError::Invalid(msg)
        }
    }
}

pub fn build_market(name: &str, file: &MarketSpecFile) -> Result<Market, CliError> {
    if let Some(f) = &file.finite {
        if !file.claims.is_empty() {
            return Err(CliError::Invalid(format!(
                "{name}: at `claims`: claims apply to sde markets; use `finite.payoffs`"
            )));
        }
        let labels = f
            .atoms
            .clone()
            .unwrap_or_else(|| (0..f.p0.len()).map(|a| format!("a{a}")).collect());
        let base = FiniteSpace::new(labels, f.p0.clone()).map_err(at(name, "finite.p0"))?;
        let space = MultiMeasureSpace::new(base, f.measures.clone()).map_err(at(name, "finite.measures"))?;
        let payoffs: Vec<Payoff> = f.payoffs.iter().map(|v| Payoff(v.clone())).collect();
        for (k, p) in payoffs.iter().enumerate() {
            p.aligned(&space).map_err(at(name, &format!("finite.payoffs[{k}]")))?;
        }
        let signs = match &f.signs {
            None => vec![Sign::Plus; space.n_measures()],
            Some(s) if s.len() != space.n_measures() => {
                return Err(CliError::Invalid(format!(
                    "{name}: at `finite.signs`: need {} signs, got {}",
                    space.n_measures(),
                    s.len()
                )))
            }
            Some(s) => s
                .iter()
                .map(|v| Sign::from_i32(*v))
                .collect::<Result<_, _>>()
                .map_err(at(name, "finite.signs"))?,
        };
        if let Some(c) = f.scale_c {
            if !(c > 0.0 && c.is_finite()) {
                return Err(CliError::Invalid(format!(
                    "{name}: at `finite.scale_c`: must be positive, got {c}"
                )));
            }
        }
        return Ok(Market::Finite {
            space,
            scale_c: f.scale_c,
            payoffs,
            signs,
        });
    }
    if let Some(g) = &file.gaussian {
        if !file.claims.is_empty() {
            return Err(CliError::Invalid(format!("{name}: at `claims`: claims apply to sde markets")));
        }
        let market = GaussianMarket::new(g.mean.clone(), g.covariance.clone(), g.cost.clone())
            .map_err(at(name, "gaussian"))?;
        return Ok(Market::Gaussian {
            market,
            targets: g.targets.unwrap_or([1.0, 1.0]),
        });
    }
    let s = file.sde.as_ref().expect("one block is present");
    let model = s.build(&ModelRegistry::default()).map_err(at(name, "sde"))?;
    for (k, c) in file.claims.iter().enumerate() {
        c.validate(model.dim()).map_err(at(name, &format!("claims[{k}]")))?;
    }
    Ok(Market::Sde {
        model,
        claims: file.claims.clone(),
    })
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read spec {}: {e}", path.display())))?;
    let file = parse_spec(&name, &text)?;
    let market = build_market(&name, &file)?;
    let document = serde_json::to_value(&file).expect("spec serializes");
    Ok(LoadedSpec {
        name,
        document,
        file,
        market,
    })
}
