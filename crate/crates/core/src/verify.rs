//! Check bundles per market kind, each row a named statistic against a
//! tolerance.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ctsmkt::{
    ampr_windows, bachelier_canonicalize, canonical_image, price_mc, q_process, simulate, ClaimSpec, SdeModel, SimConfig, DEFAULT_WINDOW,
};
use crate::error::Result;
use crate::finprob::{automorphisms, group_average, validate_space, MultiMeasureSpace, Payoff};
use crate::gauss::{canonical_gauss, min_variance_solve, two_fund_basis, GaussianMarket};
use crate::onep::{classification_invariant, jointly_isomorphic, price, quantile_layout, quantile_market, CompleteMarket1P, StepFunction};
use crate::rearrange::{
    composite_rearrange, dominance_violation, law_discrepancy, row_order_violation, CasinoSample, Sign,
};
use crate::statcheck::{dimension_estimate, ks_against, levy_gates, EcdfTable, StatConfig};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: f64::from(u8::from(ok)),
            tolerance: 1.0,
            pass: ok,
        }
    }
}

/// Payoffs on `[0, 1)` pulled forward through the quantile layout.
fn layout_step(market: &CompleteMarket1P, payoff: &Payoff) -> Result<StepFunction> {
    let mut cells: Vec<(f64, f64, f64)> = quantile_layout(market)
        .intervals
        .iter()
        .zip(payoff.values())
        .filter_map(|(iv, v)| iv.map(|(lo, hi)| (lo, hi, *v)))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut breakpoints = vec![0.0];
    breakpoints.extend(cells.iter().map(|c| c.1));
    *breakpoints.last_mut().expect("at least one atom") = 1.0;
    StepFunction::new(breakpoints, cells.iter().map(|c| c.2).collect())
}

pub fn verify_finite(
    space: &MultiMeasureSpace,
    scale_c: Option<f64>,
    payoffs: &[Payoff],
    grid: usize,
    stat: &StatConfig,
) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    let report = validate_space(space);
    rows.push(CheckRow::at_most("measures valid (violations)", report.violations.len() as f64, 0.0));
    if !report.is_pass() {
        return Ok(rows);
    }
    let reversed: Vec<usize> = (0..space.n_atoms()).rev().collect();
    let copy = space.permuted(&reversed);
    rows.push(CheckRow::flag(
        "relabeled copy jointly isomorphic",
        jointly_isomorphic(space, &copy).is_some_and(|b| b.preserves(space, &copy, tol::CONSTRUCTION)),
    ));
    rows.push(CheckRow::flag(
        "invariant stable under relabeling",
        classification_invariant(space).approx_eq(&classification_invariant(&copy), tol::DERIVED),
    ));

    let default_payoff = [Payoff((0..space.n_atoms()).map(|a| a as f64).collect())];
    let payoffs = if payoffs.is_empty() { &default_payoff[..] } else { payoffs };
    let group = automorphisms(space);
    let signs = vec![Sign::Plus; space.n_measures()];
    for (k, payoff) in payoffs.iter().enumerate() {
        let tag = format!("payoff {}", k + 1);
        if space.n_measures() == 1 {
            let market = CompleteMarket1P::new(space.clone(), scale_c.unwrap_or(1.0))?;
            let direct = price(&market, payoff)?;
            let canonical = quantile_market(&market).price_step(&layout_step(&market, payoff)?);
            rows.push(CheckRow::at_most(
                format!("{tag}: quantile-market price gap"),
                (direct - canonical).abs(),
                tol::DERIVED,
            ));
        }
        let averaged = group_average(space, &group, payoff, tol::GROUP_CAP)?;
        let gap = (0..=space.n_measures())
            .map(|i| (averaged.expectation(space, i) - payoff.expectation(space, i)).abs())
            .fold(0.0, f64::max);
        rows.push(CheckRow::at_most(format!("{tag}: group average expectation gap"), gap, tol::DERIVED));

        let sample = CasinoSample::from_space(space, payoff, grid)?;
        let out = composite_rearrange(&sample, &signs)?;
        rows.push(CheckRow::at_most(
            format!("{tag}: P0 law preserved by rearrangement"),
            law_discrepancy(&sample, &out, 0),
            tol::CONSTRUCTION,
        ));
        for i in 1..=space.n_measures() {
            rows.push(CheckRow::at_most(
                format!("{tag}: P{i} law raised by rearrangement"),
                dominance_violation(&sample, &out, i, Sign::Plus),
                tol::CONSTRUCTION,
            ));
        }
        if space.n_measures() == 1 {
            rows.push(CheckRow::at_most(
                format!("{tag}: rearranged value monotone in (q, y)"),
                row_order_violation(&out, Sign::Plus),
                tol::CONSTRUCTION,
            ));
            let (u, w): (Vec<f64>, Vec<f64>) = sample.u_values(0).into_iter().unzip();
            let ks = ks_against(&EcdfTable::weighted(&u, &w)?, |x| x.clamp(0.0, 1.0), stat.alpha);
            rows.push(CheckRow::at_most(
                format!("{tag}: U uniformity (KS)"),
                ks.statistic,
                2.0 / (grid as f64).sqrt(),
            ));
        }
    }
    Ok(rows)
}

/// Coordinates of `x` outside `span{u, v}`, relative to `max(1, |x|)`.
pub fn span_residual(x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let basis = DMatrix::from_columns(&[u.clone(), v.clone()]);
    let gram = basis.transpose() * &basis;
    let coef = match gram.clone().cholesky() {
        Some(c) => c.solve(&(basis.transpose() * x)),
        // parallel funds: project on the longer one
        None => {
            let w = if u.norm() >= v.norm() { u } else { v };
            let t = if w.norm() > 0.0 { w.dot(x) / w.dot(w) } else { 0.0 };
            return (x - w * t).norm() / x.norm().max(1.0);
        }
    };
    (x - basis * coef).norm() / x.norm().max(1.0)
}

pub fn verify_gaussian(market: &GaussianMarket, seed: u64) -> Result<Vec<CheckRow>> {
    let n = market.dim();
    let form = canonical_gauss(market);
    let k = &form.canonicalizer;
    let mut target_mean = DVector::zeros(n);
    target_mean[0] = form.alpha;
    let mut target_cost = DVector::zeros(n);
    target_cost[0] = form.beta;
    if n > 1 {
        target_cost[1] = form.gamma;
    }
    let residual = (k * market.mean() - target_mean)
        .amax()
        .max((k * market.covariance() * k.transpose() - DMatrix::identity(n, n)).amax())
        .max((k * market.cost() - target_cost).amax());
    let mut rows = vec![CheckRow::at_most("normal form residual", residual, tol::GAUSS)];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |i, j| rng.random_range(-1.0..1.0) + if i == j { 2.0 } else { 0.0 });
    let moved = canonical_gauss(&market.change_basis(&b)?);
    let gap = (form.alpha - moved.alpha)
        .abs()
        .max((form.beta - moved.beta).abs())
        .max((form.gamma - moved.gamma).abs());
    rows.push(CheckRow::at_most("normal form invariant under change of basis", gap, tol::GAUSS));

    let funds = two_fund_basis(market);
    rows.push(CheckRow::flag("two funds independent", !funds.degenerate));
    if !funds.degenerate {
        let sol = min_variance_solve(market, 1.0, 1.0)?;
        rows.push(CheckRow::at_most(
            "min-variance solution in two-fund span",
            span_residual(&sol.portfolio, &funds.x1, &funds.x2),
            tol::DERIVED,
        ));
        let constraint = (market.mean().dot(&sol.portfolio) - 1.0)
            .abs()
            .max((market.cost().dot(&sol.portfolio) - 1.0).abs());
        rows.push(CheckRow::at_most("min-variance constraints met", constraint, tol::DERIVED));
    }
    Ok(rows)
}

pub fn verify_sde(model: &SdeModel, claims: &[ClaimSpec], cfg: &SimConfig, stat: &StatConfig) -> Result<Vec<CheckRow>> {
    let ensemble = simulate(model, cfg)?;
    let q = q_process(&ensemble)?;
    let mut rows = Vec::new();

    let q_t = q.terminal();
    let m = q_t.len() as f64;
    let mean = q_t.iter().sum::<f64>() / m;
    let se = (q_t.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    let z = if se > 0.0 { (mean - 1.0).abs() / se } else { (mean - 1.0).abs() / tol::DERIVED };
    rows.push(CheckRow::at_most("E[q_T] = 1 (standard errors)", z, 4.0));

    if cfg.steps >= DEFAULT_WINDOW {
        if let Some(mare) = ampr_windows(model, cfg, DEFAULT_WINDOW)?.mare() {
            rows.push(CheckRow::at_most("realized vs coefficient AMPR² (MARE)", mare, 0.10));
        }
    }

    if let Ok(canon) = bachelier_canonicalize(&ensemble) {
        let channels: Vec<Vec<f64>> = (0..model.dim()).map(|j| canon.channel(j)).collect();
        for g in levy_gates(&channels, ensemble.paths.len(), model.horizon(), cfg.dt, stat)? {
            rows.push(CheckRow::at_most(format!("canonical W: {}", g.description), g.statistic, g.threshold));
        }
        if channels[0].len() >= 1000 {
            let d = dimension_estimate(&channels, stat)?;
            rows.push(CheckRow::at_most(
                "canonical W: covariation rank gap",
                (d as f64 - model.dim() as f64).abs(),
                0.0,
            ));
        }
        let image = canonical_image(model, &canon.a, cfg.dt)?;
        let independent = SimConfig {
            seed: cfg.seed.wrapping_add(1),
            ..*cfg
        };
        for claim in claims.iter().filter(|c| c.is_q_measurable()) {
            let here = price_mc(model, claim, cfg)?;
            let there = price_mc(&image, claim, &independent)?;
            let se = here.std_error.hypot(there.std_error);
            let gap = (here.price - there.price).abs();
            rows.push(CheckRow::at_most(
                format!("{}: price gap to canonical image (joint s.e.)", claim.label()),
                if se > 0.0 { gap / se } else { gap / tol::DERIVED },
                3.0,
            ));
        }
    }

    Ok(rows)
}
