//! Statistical gates: weighted ECDFs, Kolmogorov–Smirnov tests, quadratic
//! variation bands, covariation rank and moment summaries.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Every threshold used by the gates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatConfig {
    pub alpha: f64,
    pub qv_sigmas: f64,
    pub rank_threshold: f64,
    pub skew_bound: f64,
    pub kurtosis_bound: f64,
}

impl Default for StatConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            qv_sigmas: 3.0,
            rank_threshold: 1e-3,
            skew_bound: 0.1,
            kurtosis_bound: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub sizes: Vec<f64>,
    pub description: String,
}

impl TestReport {
    pub fn new(statistic: f64, threshold: f64, sizes: Vec<f64>, description: impl Into<String>) -> Self {
        Self {
            statistic,
            threshold,
            pass: statistic <= threshold,
            sizes,
            description: description.into(),
        }
    }
}

/// Weighted empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfTable {
    values: Vec<f64>,
    cumulative: Vec<f64>,
    effective_size: f64,
}

impl EcdfTable {
    pub fn new(values: &[f64]) -> Result<Self> {
        Self::weighted(values, &vec![1.0; values.len()])
    }

    pub fn weighted(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(invalid("values and weights differ in length"));
        }
        if values.iter().chain(weights).any(|v| !v.is_finite()) || weights.iter().any(|w| *w < 0.0) {
            return Err(invalid("sample values and weights must be finite, weights non-negative"));
        }
        let mut idx: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
        if idx.is_empty() {
            return Err(Error::EmptySample);
        }
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let total: f64 = idx.iter().map(|&i| weights[i]).sum();
        let sum_sq: f64 = idx.iter().map(|&i| weights[i] * weights[i]).sum();
        let mut vals: Vec<f64> = Vec::new();
        let mut cumulative: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for i in idx {
            acc += weights[i] / total;
            if vals.last() == Some(&values[i]) {
                *cumulative.last_mut().expect("parallel vectors") = acc;
            } else {
                vals.push(values[i]);
                cumulative.push(acc);
            }
        }
        Ok(Self {
            values: vals,
            cumulative,
            effective_size: total * total / sum_sq,
        })
    }

    /// `P(X ≤ x)`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.values.partition_point(|v| *v <= x) {
            0 => 0.0,
            k => self.cumulative[k - 1].min(1.0),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Kish effective sample size `(Σw)² / Σw²`.
    pub fn effective_size(&self) -> f64 {
        self.effective_size
    }
}

fn ks_coefficient(alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt()
}

/// Two-sample KS at level `alpha` using effective sizes.
pub fn ks_two_sample(a: &EcdfTable, b: &EcdfTable, alpha: f64) -> TestReport {
    let mut d: f64 = 0.0;
    for x in a.values.iter().chain(&b.values) {
        d = d.max((a.eval(*x) - b.eval(*x)).abs());
    }
    let (n, m) = (a.effective_size, b.effective_size);
    let threshold = ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt();
    TestReport::new(d, threshold, vec![n, m], "two-sample Kolmogorov-Smirnov")
}

/// One-sample KS against a continuous reference CDF.
pub fn ks_against(a: &EcdfTable, cdf: impl Fn(f64) -> f64, alpha: f64) -> TestReport {
    let mut d: f64 = 0.0;
    let mut prev = 0.0;
    for (x, c) in a.values.iter().zip(&a.cumulative) {
        let f = cdf(*x);
        d = d.max((c - f).abs()).max((prev - f).abs());
        prev = *c;
    }
    let n = a.effective_size;
    TestReport::new(d, ks_coefficient(alpha) / n.sqrt(), vec![n], "one-sample Kolmogorov-Smirnov")
}

/// `|Σ(ΔY)² − target|` against `k·√(2·target·dt)·√target`.
pub fn qv_check(increments: &[f64], target: f64, dt: f64, cfg: &StatConfig) -> Result<TestReport> {
    if increments.len() < 100 {
        return Err(Error::Insufficient {
            needed: 100,
            got: increments.len(),
        });
    }
    let qv: f64 = increments.iter().map(|v| v * v).sum();
    Ok(TestReport::new(
        (qv - target).abs(),
        qv_band(target, dt, cfg),
        vec![increments.len() as f64],
        format!("quadratic variation {qv:.6} vs {target}"),
    ))
}

pub fn qv_band(target: f64, dt: f64, cfg: &StatConfig) -> f64 {
    cfg.qv_sigmas * (2.0 * target * dt).sqrt() * target.sqrt()
}

/// Realized covariation `Σ ΔYᵢ ΔYⱼ` of equally long channels.
pub fn covariation(channels: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let c = channels.len();
    if c == 0 {
        return Err(Error::EmptySample);
    }
    let steps = channels[0].len();
    if channels.iter().any(|ch| ch.len() != steps) {
        return Err(invalid("channels differ in length"));
    }
    Ok(DMatrix::from_fn(c, c, |i, j| {
        channels[i].iter().zip(&channels[j]).map(|(a, b)| a * b).sum()
    }))
}

/// Number of covariation eigenvalues at least `rank_threshold` × the largest.
pub fn dimension_estimate(channels: &[Vec<f64>], cfg: &StatConfig) -> Result<usize> {
    let steps = channels.first().map_or(0, Vec::len);
    if steps < 1000 {
        return Err(Error::Insufficient { needed: 1000, got: steps });
    }
    let eig = covariation(channels)?.symmetric_eigen().eigenvalues;
    let top = eig.max();
    if !(top > 0.0) {
        return Ok(0);
    }
    Ok(eig.iter().filter(|v| **v >= cfg.rank_threshold * top).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub se_skewness: f64,
    pub se_kurtosis: f64,
    /// Zero variance; skewness and kurtosis are reported as 0.
    pub degenerate: bool,
}

/// Unbiased sample moments (`G1`, `G2`) with their standard errors.
pub fn moment_report(sample: &[f64]) -> Result<MomentReport> {
    let n = sample.len();
    if n < 30 {
        return Err(Error::Insufficient { needed: 30, got: n });
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let (m2, m3, m4) = sample.iter().fold((0.0, 0.0, 0.0), |(a, b, c), x| {
        let d = x - mean;
        (a + d * d, b + d * d * d, c + d * d * d * d)
    });
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let variance = m2 * nf / (nf - 1.0);
    let degenerate = m2 <= f64::MIN_POSITIVE;
    let (skewness, excess_kurtosis) = if degenerate {
        (0.0, 0.0)
    } else {
        let g1 = m3 / m2.powf(1.5);
        let g2 = m4 / (m2 * m2) - 3.0;
        (
            (nf * (nf - 1.0)).sqrt() / (nf - 2.0) * g1,
            (nf - 1.0) / ((nf - 2.0) * (nf - 3.0)) * ((nf + 1.0) * g2 + 6.0),
        )
    };
    let se_skewness = (6.0 * nf * (nf - 1.0) / ((nf - 2.0) * (nf + 1.0) * (nf + 3.0))).sqrt();
    Ok(MomentReport {
        n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
        se_mean: (variance / nf).sqrt(),
        se_variance: variance * (2.0 / (nf - 1.0)).sqrt(),
        se_skewness,
        se_kurtosis: 2.0 * se_skewness * ((nf * nf - 1.0) / ((nf - 3.0) * (nf + 5.0))).sqrt(),
        degenerate,
    })
}

/// Lévy-characterization gates for channels pooled over `n_paths` paths of
/// horizon `horizon`: ensemble-average QV of each channel near `horizon`,
/// cross-QV near 0, and normality of the standardized increments.
pub fn levy_gates(channels: &[Vec<f64>], n_paths: usize, horizon: f64, dt: f64, cfg: &StatConfig) -> Result<Vec<TestReport>> {
    if n_paths == 0 {
        return Err(Error::EmptySample);
    }
    let band = qv_band(horizon, dt, cfg);
    let per_path = n_paths as f64;
    let cov = covariation(channels)?;
    let mut out = Vec::new();
    for i in 0..channels.len() {
        let qv = cov[(i, i)] / per_path;
        out.push(TestReport::new(
            (qv - horizon).abs(),
            band,
            vec![channels[i].len() as f64],
            format!("QV of channel {}", i + 1),
        ));
        for j in i + 1..channels.len() {
            out.push(TestReport::new(
                (cov[(i, j)] / per_path).abs(),
                band,
                vec![channels[i].len() as f64],
                format!("cross-QV of channels {} and {}", i + 1, j + 1),
            ));
        }
        let scaled: Vec<f64> = channels[i].iter().map(|v| v / dt.sqrt()).collect();
        let m = moment_report(&scaled)?;
        out.push(TestReport::new(
            m.skewness.abs(),
            cfg.skew_bound,
            vec![m.n as f64],
            format!("skewness of channel {}", i + 1),
        ));
        out.push(TestReport::new(
            m.excess_kurtosis.abs(),
            cfg.kurtosis_bound,
            vec![m.n as f64],
            format!("excess kurtosis of channel {}", i + 1),
        ));
    }
    Ok(out)
}
