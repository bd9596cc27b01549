use isomarket_core::ctsmkt::{
    ampr_windows, bachelier_canonicalize, convergence_order, price_from_samples, price_mc,
    q_process, replicate_fund, simulate, SdeModel, SimConfig, DEFAULT_WINDOW,
};
use isomarket_core::finprob::{automorphisms, MultiMeasureSpace, Payoff};
use isomarket_core::gauss::{canonical_gauss, gauss_isomorphic, min_variance_solve, two_fund_basis};
use isomarket_core::onep::{
    casino_equivalence, classification_invariant, jointly_isomorphic, project_onto_q, quantile_layout,
    quantile_market, CompleteMarket1P,
};
use isomarket_core::rearrange::{
    composite_rearrange, dominance_violation, law_discrepancy, order_violation, CasinoSample,
};
use isomarket_core::statcheck::{dimension_estimate, levy_gates, StatConfig};
use isomarket_core::tol;
use isomarket_core::verify::{verify_finite, verify_gaussian, verify_sde, CheckRow};

use crate::report::{Cell, Outcome, Row, Table};
use crate::spec::{LoadedSpec, Market};
use crate::{CliError, Command};

/// Options resolved from flags, the spec's run block and defaults.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Settings {
    pub seed: u64,
    pub paths: usize,
    pub steps: Option<usize>,
    pub alpha: f64,
    pub casino_grid: usize,
    pub antithetic: bool,
    pub hedge_strides: Vec<usize>,
}

/// Paths kept in full in `series_paths.csv` and `series_canonical.csv`.
const SHOWN_PATHS: usize = 8;

impl Settings {
    pub fn stat(&self) -> StatConfig {
        StatConfig {
            alpha: self.alpha,
            ..StatConfig::default()
        }
    }

    pub fn sim(&self, model: &SdeModel) -> SimConfig {
        let steps = self.steps.unwrap_or(crate::DEFAULT_STEPS);
        SimConfig::over(model, steps, self.paths, self.seed).with_antithetic(self.antithetic)
    }
}

fn one(specs: &[LoadedSpec], cmd: Command) -> Result<&LoadedSpec, CliError> {
    match specs {
        [s] => Ok(s),
        _ => Err(CliError::Invalid(format!("{} takes exactly one --spec", cmd.name()))),
    }
}

fn finite(spec: &LoadedSpec, cmd: Command) -> Result<(&MultiMeasureSpace, Option<f64>, Vec<Payoff>), CliError> {
    match &spec.market {
        Market::Finite {
            space, scale_c, payoffs, ..
        } => {
            let payoffs = if payoffs.is_empty() {
                vec![Payoff((0..space.n_atoms()).map(|a| a as f64).collect())]
            } else {
                payoffs.clone()
            };
            Ok((space, *scale_c, payoffs))
        }
        m => Err(wrong_kind(spec, cmd, "finite", m)),
    }
}

fn sde(spec: &LoadedSpec, cmd: Command) -> Result<&SdeModel, CliError> {
    match &spec.market {
        Market::Sde { model, .. } => Ok(model),
        m => Err(wrong_kind(spec, cmd, "sde", m)),
    }
}

fn wrong_kind(spec: &LoadedSpec, cmd: Command, want: &str, got: &Market) -> CliError {
    CliError::Invalid(format!(
        "{}: {} needs a {want} market, spec has a {} block",
        spec.name,
        cmd.name(),
        got.kind()
    ))
}

fn checks(rows: Vec<CheckRow>) -> Vec<Row> {
    rows.into_iter()
        .map(|c| Row::check(c.name, c.value, c.tolerance, c.pass))
        .collect()
}

pub fn run_command(cmd: Command, specs: &[LoadedSpec], s: &Settings) -> Result<Outcome, CliError> {
    match cmd {
        Command::Classify => classify(specs),
        Command::CanonGauss => canon_gauss(specs),
        Command::SolveTwoFund => solve_two_fund(one(specs, cmd)?),
        Command::Rearrange => rearrange(one(specs, cmd)?, s),
        Command::ProjectQ => project_q(one(specs, cmd)?),
        Command::Simulate => simulate_cmd(one(specs, cmd)?, s),
        Command::Ampr => ampr(one(specs, cmd)?, s),
        Command::CanonicalizeCts => canonicalize_cts(one(specs, cmd)?, s),
        Command::Replicate => replicate(one(specs, cmd)?, s),
        Command::Price => price(one(specs, cmd)?, s),
        Command::Verify => verify(one(specs, cmd)?, s),
    }
}

fn invariant_rows(table: &mut Table, spec: &LoadedSpec, space: &MultiMeasureSpace) {
    let labels = space.base().labels();
    for (k, e) in classification_invariant(space).entries.iter().enumerate() {
        let mut row: Vec<Cell> = vec![spec.name.as_str().into(), k.into(), e.mass.into()];
        row.extend(e.rn.iter().map(|v| Cell::Num(*v)));
        let atoms: Vec<&str> = e.atoms.iter().map(|&a| labels[a].as_str()).collect();
        row.push(atoms.join(" ").into());
        let profile: Vec<String> = e.profile.atom_masses.iter().map(|m| Cell::Num(*m).to_string()).collect();
        row.push(profile.join(" ").into());
        table.push(row);
    }
}

fn classify(specs: &[LoadedSpec]) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match specs {
        [a] | [a, _] if matches!(a.market, Market::Finite { .. }) => {
            let spaces: Vec<(&MultiMeasureSpace, Option<f64>)> = specs
                .iter()
                .map(|s| finite(s, Command::Classify).map(|(sp, c, _)| (sp, c)))
                .collect::<Result<_, _>>()?;
            let n = spaces[0].0.n_measures();
            if spaces.iter().any(|(sp, _)| sp.n_measures() != n) {
                out.push(Row::value("isomorphic", false));
                out.push(Row::value("reason", "different numbers of measures"));
            }
            let mut header = vec!["spec".to_string(), "class".into(), "mass".into()];
            header.extend((1..=n).map(|i| format!("rn_{i}")));
            header.extend(["atoms".to_string(), "profile".into()]);
            let mut table = Table::with_header("invariant", header);
            for (spec, (space, _)) in specs.iter().zip(&spaces) {
                if space.n_measures() == n {
                    invariant_rows(&mut table, spec, space);
                }
                let group = automorphisms(space);
                let order = group.structured_order().map_or("unknown".to_string(), |o| o.to_string());
                out.push(Row::value(format!("{}: atoms", spec.name), space.n_atoms()));
                out.push(Row::value(format!("{}: automorphism group order", spec.name), order));
            }
            out.tables.push(table);
            if let [(s1, c1), (s2, c2)] = spaces[..] {
                if out.rows.iter().any(|r| r.name == "isomorphic") {
                    return Ok(out);
                }
                let bij = jointly_isomorphic(s1, s2);
                out.push(Row::value("isomorphic", bij.is_some()));
                if let Some(b) = bij {
                    let mut t = Table::new("series_bijection", &["left", "right"]);
                    for (l, label) in s1.base().labels().iter().enumerate() {
                        if let Some(r) = b.image(l) {
                            t.push(vec![label.as_str().into(), s2.base().labels()[r].as_str().into()]);
                        }
                    }
                    out.tables.push(t);
                }
                if n == 1 {
                    let m1 = CompleteMarket1P::new(s1.clone(), c1.unwrap_or(1.0))?;
                    let m2 = CompleteMarket1P::new(s2.clone(), c2.unwrap_or(1.0))?;
                    let eq = format!("{:?}", casino_equivalence(&m1, &m2)).to_lowercase();
                    out.push(Row::value("isomorphic up to casino", eq));
                }
            }
            Ok(out)
        }
        [a] | [a, _] if matches!(a.market, Market::Gaussian { .. }) => {
            let mut out = canon_gauss(specs)?;
            out.tables.clear();
            Ok(out)
        }
        [a] | [a, _] => Err(wrong_kind(a, Command::Classify, "finite or gaussian", &a.market)),
        _ => Err(CliError::Invalid("classify takes one or two --spec".into())),
    }
}

fn canon_gauss(specs: &[LoadedSpec]) -> Result<Outcome, CliError> {
    if specs.is_empty() || specs.len() > 2 {
        return Err(CliError::Invalid("canon-gauss takes one or two --spec".into()));
    }
    let mut out = Outcome::default();
    let mut markets = Vec::new();
    for spec in specs {
        let Market::Gaussian { market, .. } = &spec.market else {
            return Err(wrong_kind(spec, Command::CanonGauss, "gaussian", &spec.market));
        };
        let form = canonical_gauss(market);
        let prefix = if specs.len() == 1 {
            String::new()
        } else {
            format!("{}: ", spec.name)
        };
        out.push(Row::value(format!("{prefix}dimension"), form.dimension));
        out.push(Row::value(format!("{prefix}alpha"), form.alpha));
        out.push(Row::value(format!("{prefix}beta"), form.beta));
        out.push(Row::value(format!("{prefix}gamma"), form.gamma));
        let n = market.dim();
        let mut header = vec!["spec".to_string(), "row".into()];
        header.extend((1..=n).map(|j| format!("k_{j}")));
        let mut t = Table::with_header(format!("series_canonicalizer_{}", markets.len() + 1), header);
        for i in 0..n {
            let mut row: Vec<Cell> = vec![spec.name.as_str().into(), i.into()];
            row.extend((0..n).map(|j| Cell::Num(form.canonicalizer[(i, j)])));
            t.push(row);
        }
        out.tables.push(t);
        markets.push(market);
    }
    if let [m1, m2] = markets[..] {
        out.push(Row::value("isomorphic", m1.dim() == m2.dim() && gauss_isomorphic(m1, m2)));
    }
    Ok(out)
}

fn solve_two_fund(spec: &LoadedSpec) -> Result<Outcome, CliError> {
    let Market::Gaussian { market, targets } = &spec.market else {
        return Err(wrong_kind(spec, Command::SolveTwoFund, "gaussian", &spec.market));
    };
    let funds = two_fund_basis(market);
    let sol = min_variance_solve(market, targets[0], targets[1])?;
    let mut out = Outcome::default();
    out.push(Row::value("target mean", targets[0]));
    out.push(Row::value("target cost", targets[1]));
    out.push(Row::value("degenerate", sol.degenerate));
    out.push(Row::value("variance", sol.variance));
    let mut t = Table::new("series_two_fund", &["asset", "fund_mean", "fund_cost", "portfolio"]);
    for j in 0..market.dim() {
        out.push(Row::value(format!("portfolio[{j}]"), sol.portfolio[j]));
        t.push(vec![j.into(), funds.x1[j].into(), funds.x2[j].into(), sol.portfolio[j].into()]);
    }
    out.tables.push(t);
    Ok(out)
}

fn rearrange(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let (space, _, payoffs) = finite(spec, Command::Rearrange)?;
    let Market::Finite { signs, .. } = &spec.market else { unreachable!() };
    let n = space.n_measures();
    let labels = space.base().labels();
    let mut out = Outcome::default();
    for (k, payoff) in payoffs.iter().enumerate() {
        let tag = format!("payoff {}", k + 1);
        let sample = CasinoSample::from_space(space, payoff, s.casino_grid)?;
        let after = composite_rearrange(&sample, signs)?;
        let d0 = law_discrepancy(&sample, &after, 0);
        out.push(Row::check(format!("{tag}: P0 law discrepancy"), d0, tol::CONSTRUCTION, d0 <= tol::CONSTRUCTION));
        for (i, sign) in signs.iter().enumerate() {
            let v = dominance_violation(&sample, &after, i + 1, *sign);
            out.push(Row::check(
                format!("{tag}: P{} dominance violation", i + 1),
                v,
                tol::CONSTRUCTION,
                v <= tol::CONSTRUCTION,
            ));
        }
        let order = order_violation(&after, signs);
        if n == 1 {
            out.push(Row::check(format!("{tag}: order violation"), order, tol::CONSTRUCTION, order <= tol::CONSTRUCTION));
        } else {
            // slices with differing conditional laws may leave order violations
            out.push(Row::value(format!("{tag}: order violation"), order));
        }
        let mut header = vec!["atom".to_string()];
        header.extend((1..=n).map(|i| format!("rn_{i}")));
        header.extend(["y_lo", "y_hi", "weight", "original", "rearranged"].map(String::from));
        let mut t = Table::with_header(format!("series_rearranged_{}", k + 1), header);
        for r in after.rows() {
            let mut row: Vec<Cell> = vec![labels[r.atom].as_str().into()];
            row.extend(r.x.iter().map(|v| Cell::Num(*v)));
            row.extend([r.y_lo, r.y_hi, r.weight, payoff.values()[r.atom], r.value].map(Cell::Num));
            t.push(row);
        }
        out.tables.push(t);
    }
    Ok(out)
}

fn project_q(spec: &LoadedSpec) -> Result<Outcome, CliError> {
    let (space, scale_c, payoffs) = finite(spec, Command::ProjectQ)?;
    let n = space.n_measures();
    let labels = space.base().labels();
    let projected: Vec<Payoff> = payoffs
        .iter()
        .map(|p| project_onto_q(space, p))
        .collect::<Result<_, _>>()?;
    let mut out = Outcome::default();
    for (k, (p, pr)) in payoffs.iter().zip(&projected).enumerate() {
        for i in 0..=n {
            let gap = (p.expectation(space, i) - pr.expectation(space, i)).abs();
            out.push(Row::check(
                format!("payoff {}: P{i} expectation gap", k + 1),
                gap,
                tol::DERIVED,
                gap <= tol::DERIVED,
            ));
        }
    }
    let mut header = vec!["atom".to_string()];
    header.extend((1..=n).map(|i| format!("rn_{i}")));
    for k in 1..=payoffs.len() {
        header.extend([format!("payoff_{k}"), format!("projected_{k}")]);
    }
    let mut t = Table::with_header("series_projection", header);
    for a in 0..space.n_atoms() {
        let mut row: Vec<Cell> = vec![labels[a].as_str().into()];
        row.extend(space.rn_vector(a).into_iter().map(Cell::Num));
        for (p, pr) in payoffs.iter().zip(&projected) {
            row.extend([p.values()[a], pr.values()[a]].map(Cell::Num));
        }
        t.push(row);
    }
    out.tables.push(t);
    if n == 1 {
        let market = CompleteMarket1P::new(space.clone(), scale_c.unwrap_or(1.0))?;
        let layout = quantile_layout(&market);
        let mut t = Table::new("series_quantile_layout", &["atom", "u_lo", "u_hi", "rn"]);
        for (a, iv) in layout.intervals.iter().enumerate() {
            if let Some((lo, hi)) = iv {
                t.push(vec![labels[a].as_str().into(), (*lo).into(), (*hi).into(), market.q()[a].into()]);
            }
        }
        out.tables.push(t);
        let qm = quantile_market(&market);
        let mut t = Table::new("series_quantile_steps", &["u_lo", "u_hi", "rn"]);
        for (w, v) in qm.breakpoints.windows(2).zip(&qm.rn_values) {
            t.push(vec![w[0].into(), w[1].into(), (*v).into()]);
        }
        out.tables.push(t);
    }
    Ok(out)
}

fn state_header(first: &[&str], n: usize, prefix: &str, last: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    h.extend((1..=n).map(|j| format!("{prefix}_{j}")));
    h.extend(last.iter().map(|s| s.to_string()));
    h
}

fn simulate_cmd(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let model = sde(spec, Command::Simulate)?;
    let cfg = s.sim(model);
    let ensemble = simulate(model, &cfg)?;
    let q = q_process(&ensemble)?;
    let n = model.dim();
    let m = ensemble.paths.len() as f64;
    let mut out = Outcome::default();
    let q_t = q.terminal();
    let est = price_from_samples(&q_t, 1.0, cfg.antithetic)?;
    out.push(Row::estimate("E[q_T]", est.price, est.std_error));
    for j in 0..n {
        let xs: Vec<f64> = ensemble.paths.iter().map(|p| p.terminal()[j]).collect();
        let est = price_from_samples(&xs, 1.0, cfg.antithetic)?;
        out.push(Row::estimate(format!("E[X_T[{j}]]"), est.price, est.std_error));
    }
    let mut paths = Table::with_header("series_paths", state_header(&["path", "step", "t"], n, "x", &["log_q"]));
    for (i, p) in ensemble.paths.iter().enumerate().take(SHOWN_PATHS) {
        for k in 0..=cfg.steps {
            let mut row: Vec<Cell> = vec![i.into(), k.into(), cfg.time(k).into()];
            row.extend(p.state(k).iter().map(|v| Cell::Num(*v)));
            row.push(q.log_q[i][k].into());
            paths.push(row);
        }
    }
    let mut mean = Table::with_header("series_mean", state_header(&["step", "t"], n, "mean_x", &["mean_q"]));
    for k in 0..=cfg.steps {
        let mut row: Vec<Cell> = vec![k.into(), cfg.time(k).into()];
        for j in 0..n {
            row.push(Cell::Num(ensemble.paths.iter().map(|p| p.state(k)[j]).sum::<f64>() / m));
        }
        row.push(Cell::Num((0..ensemble.paths.len()).map(|i| q.q(i, k)).sum::<f64>() / m));
        mean.push(row);
    }
    out.tables.extend([paths, mean]);
    Ok(out)
}

fn ampr(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let model = sde(spec, Command::Ampr)?;
    let windows = ampr_windows(model, &s.sim(model), DEFAULT_WINDOW)?;
    let mut out = Outcome::default();
    out.push(Row::value("window steps", DEFAULT_WINDOW));
    match windows.mare() {
        Some(mare) => out.push(Row::check("realized vs coefficient AMPR² (MARE)", mare, 0.10, mare <= 0.10)),
        None => out.push(Row::value("realized vs coefficient AMPR² (MARE)", "undefined: zero AMPR")),
    }
    let mut t = Table::new("series_ampr", &["t", "realized_ampr2", "coefficient_ampr2"]);
    for ((time, r), c) in windows.times.iter().zip(&windows.realized).zip(&windows.coefficient) {
        t.push(vec![(*time).into(), (*r).into(), (*c).into()]);
    }
    out.tables.push(t);
    Ok(out)
}

fn canonicalize_cts(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let model = sde(spec, Command::CanonicalizeCts)?;
    let cfg = s.sim(model);
    let ensemble = simulate(model, &cfg)?;
    let canon = bachelier_canonicalize(&ensemble)?;
    let n = model.dim();
    let stat = s.stat();
    let channels: Vec<Vec<f64>> = (0..n).map(|j| canon.channel(j)).collect();
    let mut out = Outcome::default();
    for g in levy_gates(&channels, ensemble.paths.len(), model.horizon(), cfg.dt, &stat)? {
        out.push(Row::check(format!("canonical W: {}", g.description), g.statistic, g.threshold, g.pass));
    }
    match dimension_estimate(&channels, &stat) {
        Ok(d) => out.push(Row::check("canonical W: covariation rank", d as f64, n as f64, d == n)),
        Err(isomarket_core::Error::Insufficient { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    let mut a = Table::new("series_ampr_schedule", &["step", "t", "a"]);
    for (k, v) in canon.a.iter().enumerate() {
        a.push(vec![k.into(), cfg.time(k).into(), (*v).into()]);
    }
    let mut header = state_header(&["path", "step", "t"], n, "dw", &[]);
    header.extend((1..=n).map(|j| format!("x_{j}")));
    let mut paths = Table::with_header("series_canonical", header);
    for (i, p) in canon.paths.iter().enumerate().take(SHOWN_PATHS) {
        for k in 0..=cfg.steps {
            let mut row: Vec<Cell> = vec![i.into(), k.into(), cfg.time(k).into()];
            if k == 0 {
                row.extend((0..n).map(|_| Cell::Empty));
            } else {
                row.extend(p.increment(k - 1).iter().map(|v| Cell::Num(*v)));
            }
            row.extend(p.state(k).iter().map(|v| Cell::Num(*v)));
            paths.push(row);
        }
    }
    out.tables.extend([a, paths]);
    Ok(out)
}

fn replicate(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let model = sde(spec, Command::Replicate)?;
    let cfg = s.sim(model);
    let strides: Vec<usize> = s
        .hedge_strides
        .iter()
        .copied()
        .filter(|k| *k > 0 && cfg.steps % k == 0)
        .collect();
    if strides.is_empty() {
        return Err(CliError::Invalid(format!("no hedge stride divides {} steps", cfg.steps)));
    }
    let ensemble = simulate(model, &cfg)?;
    let reports = strides
        .iter()
        .map(|k| replicate_fund(&ensemble, model, *k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome::default();
    let mut t = Table::new(
        "series_replication",
        &["hedge_dt", "rms_error", "mean_error", "max_abs_error", "max_residual"],
    );
    for r in &reports {
        out.push(Row::value(format!("rms tracking error (hedge dt {:e})", r.hedge_dt), r.rms_error));
        t.push(vec![r.hedge_dt.into(), r.rms_error.into(), r.mean_error.into(), r.max_abs_error.into(), r.max_residual.into()]);
    }
    if let Some(order) = convergence_order(&reports) {
        out.push(Row::value("fitted convergence order", order));
    }
    out.tables.push(t);
    Ok(out)
}

fn price(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let model = sde(spec, Command::Price)?;
    let Market::Sde { claims, .. } = &spec.market else { unreachable!() };
    if claims.is_empty() {
        return Err(CliError::Invalid(format!("{}: at `claims`: price needs at least one claim", spec.name)));
    }
    let cfg = s.sim(model);
    let mut out = Outcome::default();
    for c in claims {
        let est = price_mc(model, c, &cfg)?;
        out.push(Row::estimate(format!("price {}", c.label()), est.price, est.std_error));
    }
    Ok(out)
}

fn verify(spec: &LoadedSpec, s: &Settings) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match &spec.market {
        Market::Finite {
            space,
            scale_c,
            payoffs,
            ..
        } => out.rows = checks(verify_finite(space, *scale_c, payoffs, s.casino_grid, &s.stat())?),
        Market::Gaussian { market, .. } => out.rows = checks(verify_gaussian(market, s.seed)?),
        Market::Sde { model, claims } => {
            let cfg = s.sim(model);
            out.rows = checks(verify_sde(model, claims, &cfg, &s.stat())?);
            for c in claims {
                let est = price_mc(model, c, &cfg)?;
                out.push(Row::estimate(format!("price {}", c.label()), est.price, est.std_error));
            }
        }
    }
    Ok(out)
}
