//! Increasing and decreasing rearrangement of payoffs over a market with a
//! casino.
//!
//! A [`CasinoSample`] is a finite description of a random variable on
//! `Ω × [0, 1)`: every row is an atom of `Ω` (through its rn vector `x`)
//! together with a cell `[y_lo, y_hi)` of the casino coordinate. Inside a
//! row the base measure is uniform in `y`, so the rearranged value
//! `F_X⁻¹(U_m(x, y))` is evaluated exactly by splitting the row at the jumps
//! of `F_X`. Rows may therefore come back refined: a rearranged sample has at
//! least as many rows as its input, and the cells of a split row partition
//! the original cell.
//!
//! The conditional rearrangement along coordinate `j` uses the conditional
//! law of `q_j` inside each slice of the remaining coordinates. This keeps
//! the base law and every other measure's law fixed slice by slice. The
//! ordering property of the composite operator additionally needs the slices
//! to share one conditional law of `q_j` (for example, when the coordinates
//! are independent under the base measure); see
//! [`composite_rearrange`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::finprob::{MultiMeasureSpace, Payoff};
use crate::onep::rn_classes;
use crate::tol;

/// Direction of a monotone preference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_i32(s: i32) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(invalid(format!("sign must be +1 or -1, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasinoRow {
    /// Originating atom of the base space.
    pub atom: usize,
    /// rn vector `(dP1/dP0, ..., dPn/dP0)`.
    pub x: Vec<f64>,
    pub y_lo: f64,
    pub y_hi: f64,
    /// Base-measure probability of the row.
    pub weight: f64,
    pub value: f64,
}

impl CasinoRow {
    pub fn y(&self) -> f64 {
        0.5 * (self.y_lo + self.y_hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasinoSample {
    rows: Vec<CasinoRow>,
}

impl CasinoSample {
    pub fn from_rows(rows: Vec<CasinoRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = rows[0].x.len();
        if rows.iter().any(|r| r.x.len() != n) {
            return Err(invalid("rows carry rn vectors of different lengths"));
        }
        if rows.iter().any(|r| r.x.iter().any(|v| !(*v > 0.0 && v.is_finite()))) {
            return Err(invalid("rn values must be positive and finite"));
        }
        if rows.iter().any(|r| !(r.weight >= 0.0) || !r.value.is_finite()) {
            return Err(invalid("row weights must be non-negative and values finite"));
        }
        let mass: f64 = rows.iter().map(|r| r.weight).sum();
        if !tol::close(mass, 1.0, tol::DERIVED) {
            return Err(invalid(format!("row weights sum to {mass}")));
        }
        Ok(Self { rows })
    }

    /// `K` rows per non-null atom, cells `[j/K, (j+1)/K)`.
    pub fn from_space(space: &MultiMeasureSpace, payoff: &Payoff, k: usize) -> Result<Self> {
        payoff.aligned(space)?;
        if k == 0 {
            return Err(invalid("casino grid K must be at least 1"));
        }
        let p0 = space.base().weights();
        let cell = 1.0 / k as f64;
        let mut rows = Vec::with_capacity(space.n_atoms() * k);
        for atom in space.base().support() {
            let x = space.rn_vector(atom);
            for j in 0..k {
                rows.push(CasinoRow {
                    atom,
                    x: x.clone(),
                    y_lo: j as f64 * cell,
                    y_hi: (j + 1) as f64 * cell,
                    weight: p0[atom] * cell,
                    value: payoff.values()[atom],
                });
            }
        }
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> &[CasinoRow] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows[0].x.len()
    }

    /// Row probabilities under measure `i` (`0` = base, `i` uses `x[i-1]`).
    pub fn measure_weights(&self, i: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| if i == 0 { r.weight } else { r.weight * r.x[i - 1] })
            .collect()
    }

    /// Law of the value column under measure `i`.
    pub fn value_law(&self, i: usize) -> DiscreteLaw {
        let values: Vec<f64> = self.rows.iter().map(|r| r.value).collect();
        DiscreteLaw::from_weighted(&values, &self.measure_weights(i))
    }

    /// `(U, weight)` per row, evaluated at the cell midpoint, for coordinate `coord`.
    pub fn u_values(&self, coord: usize) -> Vec<(f64, f64)> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.x[coord]).collect();
        let law = DiscreteLaw::from_weighted(&xs, &self.measure_weights(0));
        self.rows.iter().map(|r| (u_m(&law, r.x[coord], r.y()), r.weight)).collect()
    }
}

/// A finitely supported law on the real line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw {
    pub support: Vec<f64>,
    pub masses: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != masses.len() {
            return Err(invalid("law needs matching non-empty support and masses"));
        }
        if support.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("law support must be strictly increasing"));
        }
        if masses.iter().any(|m| *m < 0.0) || !tol::close(masses.iter().sum(), 1.0, tol::DERIVED) {
            return Err(invalid("law masses must be non-negative and sum to 1"));
        }
        Ok(Self { support, masses })
    }

    /// Aggregates equal values (within 1e-12) and normalizes the weights.
    pub fn from_weighted(values: &[f64], weights: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let total: f64 = idx.iter().map(|&i| weights[i]).sum();
        let mut support: Vec<f64> = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        for i in idx {
            match support.last() {
                Some(s) if tol::close(*s, values[i], tol::CONSTRUCTION) => {
                    *masses.last_mut().expect("parallel vectors") += weights[i] / total
                }
                _ => {
                    support.push(values[i]);
                    masses.push(weights[i] / total);
                }
            }
        }
        Self { support, masses }
    }

    /// Empirical law of an unweighted sample.
    pub fn from_sample(values: &[f64]) -> Self {
        Self::from_weighted(values, &vec![1.0; values.len()])
    }

    fn cumulative(&self) -> Vec<f64> {
        self.masses
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }

    /// `(F(x−), F(x+))`.
    pub fn limits(&self, x: f64) -> (f64, f64) {
        let mut below = 0.0;
        let mut at = 0.0;
        for (s, m) in self.support.iter().zip(&self.masses) {
            if *s < x - tol::CONSTRUCTION {
                below += m;
            } else if *s <= x + tol::CONSTRUCTION {
                at += m;
            }
        }
        (below, below + at)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.limits(x).1
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.masses).map(|(s, m)| s * m).sum()
    }
}

/// `U_m(x, y) = (1 − y) F(x−) + y F(x+)`.
pub fn u_m(law: &DiscreteLaw, x: f64, y: f64) -> f64 {
    let (left, right) = law.limits(x);
    (1.0 - y) * left + y * right
}

/// `inf { x : F(x) ≥ p }` for `p ∈ (0, 1]`.
pub fn generalized_inverse_cdf(law: &DiscreteLaw, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("probability {p} outside (0, 1]")));
    }
    Ok(quantile(law, &law.cumulative(), p))
}

fn quantile(law: &DiscreteLaw, cumulative: &[f64], p: f64) -> f64 {
    let k = cumulative.partition_point(|c| *c < p - tol::CONSTRUCTION);
    law.support[k.min(law.support.len() - 1)]
}

/// The map `(x, y) ↦ sign · F_{sign·X}⁻¹(U_m(x, y))` for one slice.
#[derive(Debug, Clone)]
pub struct RearrangementMap {
    x_law: DiscreteLaw,
    value_law: DiscreteLaw,
    value_cumulative: Vec<f64>,
    sign: Sign,
}

impl RearrangementMap {
    /// Built from parallel columns of rn values, values and base weights.
    pub fn new(xs: &[f64], values: &[f64], weights: &[f64], sign: Sign) -> Self {
        let signed: Vec<f64> = values.iter().map(|v| sign.as_f64() * v).collect();
        let value_law = DiscreteLaw::from_weighted(&signed, weights);
        Self {
            x_law: DiscreteLaw::from_weighted(xs, weights),
            value_cumulative: value_law.cumulative(),
            value_law,
            sign,
        }
    }

    pub fn x_law(&self) -> &DiscreteLaw {
        &self.x_law
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let u = u_m(&self.x_law, x, y).clamp(f64::MIN_POSITIVE, 1.0);
        self.sign.as_f64() * quantile(&self.value_law, &self.value_cumulative, u)
    }

    /// Rearranges one row, splitting its cell at the jumps of the value CDF.
    fn apply(&self, x: f64, row: &CasinoRow, out: &mut Vec<CasinoRow>) {
        let (left, right) = self.x_law.limits(x);
        let mass = right - left;
        let u_lo = left + row.y_lo * mass;
        let u_hi = left + row.y_hi * mass;
        let eps = 1e-13;
        let mut cuts = vec![u_lo];
        cuts.extend(
            self.value_cumulative
                .iter()
                .copied()
                .filter(|c| *c > u_lo + eps && *c < u_hi - eps),
        );
        cuts.push(u_hi);
        let span = u_hi - u_lo;
        let y_span = row.y_hi - row.y_lo;
        let mut y_lo = row.y_lo;
        for (i, w) in cuts.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            let value = self.sign.as_f64() * quantile(&self.value_law, &self.value_cumulative, mid);
            let frac = if span > 0.0 { (w[1] - w[0]) / span } else { 1.0 };
            let y_hi = if i + 2 == cuts.len() { row.y_hi } else { y_lo + frac * y_span };
            // adjacent pieces with the same value stay one row
            if let Some(prev) = out.last_mut().filter(|p| i > 0 && p.value == value) {
                prev.y_hi = y_hi;
                prev.weight += row.weight * frac;
            } else {
                out.push(CasinoRow {
                    y_lo,
                    y_hi,
                    weight: row.weight * frac,
                    value,
                    ..row.clone()
                });
            }
            y_lo = y_hi;
        }
    }
}

fn rearrange_slice(rows: &[&CasinoRow], coord: usize, sign: Sign, out: &mut Vec<CasinoRow>) {
    let xs: Vec<f64> = rows.iter().map(|r| r.x[coord]).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let weights: Vec<f64> = rows.iter().map(|r| r.weight).collect();
    let map = RearrangementMap::new(&xs, &values, &weights, sign);
    for row in rows {
        map.apply(row.x[coord], row, out);
    }
}

/// `R⁺_m(X) = F_X⁻¹(U_m)` or `R⁻_m(X) = −F_{−X}⁻¹(U_m)` for scalar `x`.
pub fn rearrange_pm(sample: &CasinoSample, sign: Sign) -> Result<CasinoSample> {
    if sample.dim() != 1 {
        return Err(invalid(format!(
            "rearrange_pm needs scalar rn values, got dimension {}",
            sample.dim()
        )));
    }
    let mean: f64 = sample.rows.iter().map(|r| r.weight * r.x[0]).sum();
    if !tol::close(mean, 1.0, 1e-8) {
        return Err(Error::MeanViolation { mean });
    }
    let refs: Vec<&CasinoRow> = sample.rows.iter().collect();
    let mut out = Vec::with_capacity(sample.rows.len());
    rearrange_slice(&refs, 0, sign, &mut out);
    Ok(CasinoSample { rows: out })
}

/// Slices of row indices sharing every rn coordinate except `j`, in
/// lexicographic order of the shared coordinates.
pub fn slices(sample: &CasinoSample, j: usize) -> Vec<Vec<usize>> {
    let key = |r: &CasinoRow| -> Vec<f64> {
        r.x.iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, v)| *v)
            .collect()
    };
    let keys: Vec<Vec<f64>> = sample.rows.iter().map(key).collect();
    let mut order: Vec<usize> = (0..sample.rows.len()).collect();
    order.sort_by(|&a, &b| tol::lex_cmp(&keys[a], &keys[b], tol::CONSTRUCTION).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match out.last_mut() {
            Some(s) if tol::close_slice(&keys[s[0]], &keys[i], tol::CONSTRUCTION) => s.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Rearranges along coordinate `j` independently inside each slice of the
/// other coordinates, using the slice-conditional law of `q_j`.
pub fn conditional_rearrange(sample: &CasinoSample, j: usize, sign: Sign) -> Result<CasinoSample> {
    if j >= sample.dim() {
        return Err(Error::IndexOutOfRange {
            index: j,
            count: sample.dim(),
        });
    }
    let mut out = Vec::with_capacity(sample.rows.len());
    for slice in slices(sample, j) {
        let rows: Vec<&CasinoRow> = slice.iter().map(|&i| &sample.rows[i]).collect();
        let mass: f64 = rows.iter().map(|r| r.weight).sum();
        let mean = rows.iter().map(|r| r.weight * r.x[j]).sum::<f64>() / mass;
        if !(mean.is_finite() && mean > 0.0) {
            return Err(invalid(format!("slice conditional mean of q_{} is {mean}", j + 1)));
        }
        rearrange_slice(&rows, j, sign, &mut out);
    }
    Ok(CasinoSample { rows: out })
}

/// `R = R_n ∘ … ∘ R_1`, each `R_j` the conditional rearrangement of sign `j`.
///
/// The result keeps the base law of the values, moves each `Pj` law in the
/// direction of its sign, and (when the slices of every coordinate share a
/// conditional law, e.g. on product grids) is monotone for the sign-weighted
/// product order of the rn vectors at each casino coordinate `y`.
pub fn composite_rearrange(sample: &CasinoSample, signs: &[Sign]) -> Result<CasinoSample> {
    if signs.len() != sample.dim() {
        return Err(invalid(format!(
            "{} signs for {} measures",
            signs.len(),
            sample.dim()
        )));
    }
    signs
        .iter()
        .enumerate()
        .try_fold(sample.clone(), |acc, (j, s)| conditional_rearrange(&acc, j, *s))
}

/// Largest mass difference between the measure-`i` value laws of two
/// samples; infinite when their supports differ.
pub fn law_discrepancy(a: &CasinoSample, b: &CasinoSample, i: usize) -> f64 {
    let (la, lb) = (a.value_law(i), b.value_law(i));
    if !tol::close_slice(&la.support, &lb.support, tol::CONSTRUCTION) {
        return f64::INFINITY;
    }
    la.masses
        .iter()
        .zip(&lb.masses)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Largest amount by which the measure-`i` CDF of `after` fails to lie
/// below (sign `+`) or above (sign `−`) that of `before`, over every
/// threshold in either support.
pub fn dominance_violation(before: &CasinoSample, after: &CasinoSample, i: usize, sign: Sign) -> f64 {
    let (lb, la) = (before.value_law(i), after.value_law(i));
    lb.support
        .iter()
        .chain(&la.support)
        .map(|k| sign.as_f64() * (la.cdf(*k) - lb.cdf(*k)))
        .fold(0.0, f64::max)
}

/// Largest `value(a) − value(b)` over rows with overlapping casino cells
/// whose rn vectors satisfy `sⱼ xⱼ(a) ≤ sⱼ xⱼ(b)` for every `j`, strictly
/// for some `j`.
///
/// Rows are compared at a common `y`. When a coordinate's law has atoms the
/// values on one fibre vary with `y`, and rows of different slices need not
/// be ordered across different `y`.
pub fn order_violation(sample: &CasinoSample, signs: &[Sign]) -> f64 {
    let mut classes: Vec<(Vec<f64>, Vec<&CasinoRow>)> = Vec::new();
    for r in sample.rows() {
        let key: Vec<f64> = r.x.iter().zip(signs).map(|(x, s)| s.as_f64() * x).collect();
        match classes.iter_mut().find(|c| tol::close_slice(&c.0, &key, tol::CONSTRUCTION)) {
            Some(c) => c.1.push(r),
            None => classes.push((key, vec![r])),
        }
    }
    let below = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| *x <= y + tol::CONSTRUCTION)
            && a.iter().zip(b).any(|(x, y)| *x < y - tol::CONSTRUCTION)
    };
    let mut worst: f64 = 0.0;
    for (ka, ra) in &classes {
        for (kb, rb) in &classes {
            if !below(ka, kb) {
                continue;
            }
            for a in ra {
                for b in rb.iter().filter(|b| a.y_hi.min(b.y_hi) - a.y_lo.max(b.y_lo) > tol::CONSTRUCTION) {
                    worst = worst.max(a.value - b.value);
                }
            }
        }
    }
    worst
}

/// For scalar rn values: largest decrease of `sign · value` along rows
/// sorted by `(x, y)`.
pub fn row_order_violation(sample: &CasinoSample, sign: Sign) -> f64 {
    // rn values equal within tolerance share one rank
    let xs: Vec<f64> = sample.rows().iter().map(|r| r.x[0]).collect();
    let law = DiscreteLaw::from_weighted(&xs, &vec![1.0; xs.len()]);
    let rank = |x: f64| law.support.partition_point(|s| *s < x - tol::CONSTRUCTION);
    let mut rows: Vec<&CasinoRow> = sample.rows().iter().collect();
    rows.sort_by(|a, b| rank(a.x[0]).cmp(&rank(b.x[0])).then(a.y_lo.total_cmp(&b.y_lo)));
    rows.windows(2)
        .map(|w| sign.as_f64() * (w[0].value - w[1].value))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoCasinoOptions {
    pub grid: usize,
    /// Coordinate asserted to have a continuous conditional law (no ties).
    pub continuous_coordinate: Option<usize>,
}

impl Default for NoCasinoOptions {
    fn default() -> Self {
        Self {
            grid: tol::CASINO_GRID,
            continuous_coordinate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum NoCasinoRearrangement {
    /// Value per atom cell of the grid refinement (single measure).
    Refined(CasinoSample),
    /// Value as a function of the rn vector, one entry per rn class.
    ByRn(Vec<(Vec<f64>, f64)>),
}

/// Rearrangement that avoids the casino where the structure permits it.
///
/// With a single measure the result lives on the atom refinement induced by
/// the casino grid. When a coordinate is flagged continuous and no two atoms
/// share an rn vector, the result is read off at the fibre midpoint `y = ½`
/// and returned as a function of the rn vector. Otherwise a casino is needed.
pub fn rearrange_no_casino(
    space: &MultiMeasureSpace,
    payoff: &Payoff,
    signs: &[Sign],
    opts: NoCasinoOptions,
) -> Result<NoCasinoRearrangement> {
    let n = space.n_measures();
    let classes = rn_classes(space);
    let no_ties = classes.iter().all(|(_, atoms)| atoms.len() == 1);
    if let Some(j) = opts.continuous_coordinate {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, count: n });
        }
        if no_ties {
            let sample = CasinoSample::from_space(space, payoff, opts.grid)?;
            let out = composite_rearrange(&sample, signs)?;
            let table = classes
                .into_iter()
                .map(|(rn, atoms)| {
                    let value = out
                        .rows()
                        .iter()
                        .find(|r| r.atom == atoms[0] && r.y_lo <= 0.5 && 0.5 < r.y_hi)
                        .map(|r| r.value)
                        .expect("cells cover [0, 1)");
                    (rn, value)
                })
                .collect();
            return Ok(NoCasinoRearrangement::ByRn(table));
        }
    }
    if n == 1 {
        let sample = CasinoSample::from_space(space, payoff, opts.grid)?;
        return Ok(NoCasinoRearrangement::Refined(composite_rearrange(&sample, signs)?));
    }
    Err(Error::CasinoRequired { n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn law(support: &[f64], masses: &[f64]) -> DiscreteLaw {
        DiscreteLaw::new(support.to_vec(), masses.to_vec()).unwrap()
    }

    #[test]
    fn u_m_examples() {
        let point = law(&[1.0], &[1.0]);
        for y in [0.0, 0.3, 0.9] {
            assert_abs_diff_eq!(u_m(&point, 1.0, y), y, epsilon = 1e-15);
        }
        let two = law(&[0.5, 1.5], &[0.5, 0.5]);
        assert_eq!(u_m(&two, 1.0, 0.1), u_m(&two, 1.0, 0.9));
        assert_abs_diff_eq!(u_m(&two, 1.0, 0.7), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(u_m(&two, 1.5, 0.5), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn inverse_cdf_examples() {
        let point = law(&[1.0], &[1.0]);
        for p in [0.01, 0.5, 1.0] {
            assert_eq!(generalized_inverse_cdf(&point, p).unwrap(), 1.0);
        }
        let two = law(&[1.0, 3.0], &[0.5, 0.5]);
        assert_eq!(generalized_inverse_cdf(&two, 0.5).unwrap(), 1.0);
        assert_eq!(generalized_inverse_cdf(&two, 0.6).unwrap(), 3.0);
        assert!(generalized_inverse_cdf(&two, 0.0).is_err());
        assert!(generalized_inverse_cdf(&two, 1.1).is_err());

        let grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let uniform = DiscreteLaw::from_sample(&grid);
        for p in [0.013, 0.5, 0.77, 1.0] {
            assert!((generalized_inverse_cdf(&uniform, p).unwrap() - p).abs() <= 1e-3);
        }
    }

    #[test]
    fn law_validation() {
        assert!(DiscreteLaw::new(vec![1.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(DiscreteLaw::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteLaw::new(vec![], vec![]).is_err());
    }

    fn two_point_space() -> MultiMeasureSpace {
        MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.25, 0.75]]).unwrap()
    }

    #[test]
    fn constant_payoff_is_fixed() {
        let s = two_point_space();
        let sample = CasinoSample::from_space(&s, &Payoff(vec![2.5, 2.5]), 8).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let out = rearrange_pm(&sample, sign).unwrap();
            assert!(out.rows().iter().all(|r| r.value == 2.5));
        }
    }

    #[test]
    fn uniform_payoff_maps_to_u() {
        // base law uniform on 16 atoms, payoff equal to the atom's quantile midpoint
        let k = 16;
        let s = MultiMeasureSpace::from_weights(vec![1.0 / k as f64; k], vec![vec![1.0 / k as f64; k]]).unwrap();
        let payoff: Vec<f64> = (0..k).map(|i| (i as f64 + 1.0) / k as f64).collect();
        let sample = CasinoSample::from_space(&s, &Payoff(payoff), 1).unwrap();
        let out = rearrange_pm(&sample, Sign::Plus).unwrap();
        // every rn value is 1, so U = y and the payoff is a grid quantile of U
        for r in out.rows() {
            assert!(r.value >= r.y() - 1e-12 && r.value - r.y() <= 1.0 / k as f64 + 1e-12);
        }
        assert_eq!(out.value_law(0).support.len(), k);
    }

    #[test]
    fn increasing_rearrangement_raises_q_expectation() {
        let s = two_point_space();
        let sample = CasinoSample::from_space(&s, &Payoff(vec![3.0, -1.0]), 4).unwrap();
        let out = rearrange_pm(&sample, Sign::Plus).unwrap();
        let eq = |smp: &CasinoSample| -> f64 { smp.rows().iter().map(|r| r.weight * r.x[0] * r.value).sum() };
        assert!(eq(&out) >= eq(&sample));
        assert_abs_diff_eq!(eq(&sample), 0.25 * 3.0 - 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(eq(&out), 0.25 * -1.0 + 0.75 * 3.0, epsilon = 1e-12);
        let down = rearrange_pm(&sample, Sign::Minus).unwrap();
        assert!(eq(&down) <= eq(&sample) + 1e-12);
    }

    #[test]
    fn mean_violation_rejected() {
        let rows = vec![CasinoRow {
            atom: 0,
            x: vec![2.0],
            y_lo: 0.0,
            y_hi: 1.0,
            weight: 1.0,
            value: 1.0,
        }];
        let sample = CasinoSample::from_rows(rows).unwrap();
        assert!(matches!(rearrange_pm(&sample, Sign::Plus), Err(Error::MeanViolation { .. })));
    }

    #[test]
    fn splitting_preserves_law_exactly() {
        // payoff mass 0.3 does not align with the 1/3 grid cells
        let s = MultiMeasureSpace::from_weights(vec![0.3, 0.7], vec![vec![0.6, 0.4]]).unwrap();
        let sample = CasinoSample::from_space(&s, &Payoff(vec![1.0, 2.0]), 3).unwrap();
        let out = rearrange_pm(&sample, Sign::Plus).unwrap();
        let before = sample.value_law(0);
        let after = out.value_law(0);
        assert_eq!(before.support, after.support);
        assert!(tol::close_slice(&before.masses, &after.masses, 1e-14));
        let total: f64 = out.rows().iter().map(|r| r.weight).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn conditional_single_measure_matches_pm() {
        let s = MultiMeasureSpace::from_weights(vec![0.2, 0.3, 0.5], vec![vec![0.1, 0.6, 0.3]]).unwrap();
        let sample = CasinoSample::from_space(&s, &Payoff(vec![5.0, 1.0, -2.0]), 5).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            assert_eq!(
                conditional_rearrange(&sample, 0, sign).unwrap(),
                rearrange_pm(&sample, sign).unwrap()
            );
            assert_eq!(
                composite_rearrange(&sample, &[sign]).unwrap(),
                rearrange_pm(&sample, sign).unwrap()
            );
        }
    }

    #[test]
    fn constant_slices_unchanged() {
        // two slices of q2, payoff constant on each
        let s = MultiMeasureSpace::from_weights(
            vec![0.25; 4],
            vec![vec![0.125, 0.375, 0.125, 0.375], vec![0.2, 0.2, 0.3, 0.3]],
        )
        .unwrap();
        let sample = CasinoSample::from_space(&s, &Payoff(vec![1.0, 1.0, 4.0, 4.0]), 4).unwrap();
        let out = conditional_rearrange(&sample, 0, Sign::Plus).unwrap();
        for r in out.rows() {
            let expected = if r.atom < 2 { 1.0 } else { 4.0 };
            assert_eq!(r.value, expected);
        }
    }

    #[test]
    fn no_casino_gates() {
        let s = MultiMeasureSpace::from_weights(vec![0.25; 4], vec![vec![0.25; 4], vec![0.25; 4]]).unwrap();
        let x = Payoff(vec![1.0, 2.0, 3.0, 4.0]);
        let signs = [Sign::Plus, Sign::Plus];
        assert!(matches!(
            rearrange_no_casino(&s, &x, &signs, NoCasinoOptions::default()),
            Err(Error::CasinoRequired { n: 2 })
        ));
        let c = Payoff(vec![2.0; 4]);
        let one = MultiMeasureSpace::from_weights(vec![0.25; 4], vec![vec![0.1, 0.2, 0.3, 0.4]]).unwrap();
        match rearrange_no_casino(&one, &c, &[Sign::Plus], NoCasinoOptions::default()).unwrap() {
            NoCasinoRearrangement::Refined(sample) => assert!(sample.rows().iter().all(|r| r.value == 2.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn no_casino_table_is_monotone() {
        let one = MultiMeasureSpace::from_weights(vec![0.25; 4], vec![vec![0.4, 0.1, 0.3, 0.2]]).unwrap();
        let x = Payoff(vec![1.0, 4.0, 2.0, 3.0]);
        let opts = NoCasinoOptions {
            continuous_coordinate: Some(0),
            ..Default::default()
        };
        match rearrange_no_casino(&one, &x, &[Sign::Plus], opts).unwrap() {
            NoCasinoRearrangement::ByRn(table) => {
                assert_eq!(table.len(), 4);
                assert!(table.windows(2).all(|w| w[0].0[0] < w[1].0[0] && w[0].1 <= w[1].1));
                let values: Vec<f64> = table.iter().map(|e| e.1).collect();
                assert_eq!(values, vec![1.0, 2.0, 3.0, 4.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn map_is_constant_off_atoms() {
        let map = RearrangementMap::new(&[0.5, 1.5], &[3.0, 1.0], &[0.5, 0.5], Sign::Plus);
        assert_eq!(map.eval(1.0, 0.1), map.eval(1.0, 0.9));
        assert!(map.eval(1.5, 0.9) >= map.eval(0.5, 0.1));
        assert_eq!(map.x_law().support, vec![0.5, 1.5]);
    }

    #[test]
    fn product_grid_orders_at_common_y() {
        // P0 = (3/4, 1/4) ⊗ (2/3, 1/3), q1 = (2/3, 2), q2 = (3/4, 3/2); payoff 1 on (low, low)
        let p0 = vec![0.5, 0.25, 1.0 / 6.0, 1.0 / 12.0];
        let p1 = vec![1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0];
        let p2 = vec![0.375, 0.375, 0.125, 0.125];
        let s = MultiMeasureSpace::from_weights(p0, vec![p1, p2]).unwrap();
        let sample = CasinoSample::from_space(&s, &Payoff(vec![1.0, 0.0, 0.0, 0.0]), 1).unwrap();
        let signs = [Sign::Plus, Sign::Plus];
        let out = composite_rearrange(&sample, &signs).unwrap();
        assert_eq!(order_violation(&out, &signs), 0.0);

        // (low, low) is 1 above y = 5/6 while (high, low) is 0 below y = 1/2
        let at = |atom: usize, y: f64| {
            out.rows()
                .iter()
                .find(|r| r.atom == atom && r.y_lo <= y && y < r.y_hi)
                .unwrap()
                .value
        };
        assert_eq!((at(0, 0.9), at(2, 0.1)), (1.0, 0.0));
        assert_eq!((at(0, 0.4), at(2, 0.4)), (0.0, 0.0));
        assert_eq!((at(0, 0.7), at(2, 0.7)), (0.0, 1.0));
    }
}
