//! Complete one-period markets.
//!
//! A complete market is a [`MultiMeasureSpace`] with a single pricing measure
//! `Q` and a scale `C = c(1)`; prices are `C · E_Q[X]`. Two markets are
//! isomorphic exactly when the joint law of their Radon–Nikodym vectors and
//! the conditional atom structure on each level set agree, which is what
//! [`ClassificationInvariant`] records.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::finprob::{AtomBijection, MultiMeasureSpace, Payoff};
use crate::tol;

#[derive(Debug, Clone, PartialEq)]
pub struct CompleteMarket1P {
    space: MultiMeasureSpace,
    scale_c: f64,
}

impl CompleteMarket1P {
    pub fn new(space: MultiMeasureSpace, scale_c: f64) -> Result<Self> {
        if space.n_measures() != 1 {
            return Err(invalid(format!(
                "complete market needs exactly one pricing measure, got {}",
                space.n_measures()
            )));
        }
        if !(scale_c > 0.0 && scale_c.is_finite()) {
            return Err(invalid(format!("scale_C must be positive, got {scale_c}")));
        }
        Ok(Self { space, scale_c })
    }

    pub fn space(&self) -> &MultiMeasureSpace {
        &self.space
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c
    }

    pub fn q(&self) -> &[f64] {
        self.space.measure(1)
    }
}

/// `C · E_Q[payoff]`.
pub fn price(market: &CompleteMarket1P, payoff: &Payoff) -> Result<f64> {
    payoff.aligned(&market.space)?;
    Ok(market.scale_c * payoff.expectation(&market.space, 1))
}

/// Conditional law of `P0` on one rn level set: atom masses in descending
/// order plus the atomless remainder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalProfile {
    pub atom_masses: Vec<f64>,
    pub continuous_mass: f64,
}

impl ConditionalProfile {
    pub fn atomic(mut masses: Vec<f64>) -> Self {
        masses.sort_by(|a, b| b.total_cmp(a));
        Self {
            atom_masses: masses,
            continuous_mass: 0.0,
        }
    }

    /// Splits every atom into `k` equal atoms.
    pub fn refine(&self, k: usize) -> Self {
        let scale = 1.0 / k as f64;
        Self {
            atom_masses: self
                .atom_masses
                .iter()
                .flat_map(|m| std::iter::repeat_n(m * scale, k))
                .collect(),
            continuous_mass: self.continuous_mass,
        }
    }

    /// Profile after a product with the continuous casino: no atoms remain.
    pub fn smeared(&self) -> Self {
        Self {
            atom_masses: Vec::new(),
            continuous_mass: 1.0,
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        tol::close(self.continuous_mass, other.continuous_mass, tol)
            && tol::close_slice(&self.atom_masses, &other.atom_masses, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantEntry {
    pub rn: Vec<f64>,
    pub mass: f64,
    pub profile: ConditionalProfile,
    /// Atoms of this level set in canonical order (descending mass, then label).
    #[serde(skip)]
    pub atoms: Vec<usize>,
}

/// Finite form of the pair (law of the rn vector, conditional profiles).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationInvariant {
    pub entries: Vec<InvariantEntry>,
    pub scale_c: Option<f64>,
}

impl ClassificationInvariant {
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale_ok = match (self.scale_c, other.scale_c) {
            (Some(a), Some(b)) => tol::close(a, b, tol),
            (None, None) => true,
            _ => false,
        };
        scale_ok
            && self.entries.len() == other.entries.len()
            && self.entries.iter().zip(&other.entries).all(|(a, b)| {
                tol::close_slice(&a.rn, &b.rn, tol)
                    && tol::close(a.mass, b.mass, tol)
                    && a.profile.approx_eq(&b.profile, tol)
            })
    }

    pub fn refine(&self, k: usize) -> Self {
        self.map_profiles(|p| p.refine(k))
    }

    pub fn smeared(&self) -> Self {
        self.map_profiles(ConditionalProfile::smeared)
    }

    fn map_profiles(&self, f: impl Fn(&ConditionalProfile) -> ConditionalProfile) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| InvariantEntry {
                    profile: f(&e.profile),
                    ..e.clone()
                })
                .collect(),
            scale_c: self.scale_c,
        }
    }

    pub fn with_scale(mut self, scale_c: f64) -> Self {
        self.scale_c = Some(scale_c);
        self
    }
}

/// Non-null atoms grouped by rn vector, groups in lexicographic rn order.
pub(crate) fn rn_classes(space: &MultiMeasureSpace) -> Vec<(Vec<f64>, Vec<usize>)> {
    let mut atoms = space.base().support();
    let rn: Vec<Vec<f64>> = (0..space.n_atoms()).map(|a| space.rn_vector(a)).collect();
    let labels = space.base().labels();
    atoms.sort_by(|&a, &b| {
        tol::lex_cmp(&rn[a], &rn[b], tol::CONSTRUCTION).then_with(|| labels[a].cmp(&labels[b]))
    });
    let mut classes: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for a in atoms {
        match classes.last_mut() {
            Some((key, members)) if tol::close_slice(key, &rn[a], tol::CONSTRUCTION) => members.push(a),
            _ => classes.push((rn[a].clone(), vec![a])),
        }
    }
    classes
}

pub fn classification_invariant(space: &MultiMeasureSpace) -> ClassificationInvariant {
    let p0 = space.base().weights();
    let labels = space.base().labels();
    let entries = rn_classes(space)
        .into_iter()
        .map(|(rn, mut atoms)| {
            let mass: f64 = atoms.iter().map(|&a| p0[a]).sum();
            atoms.sort_by(|&a, &b| p0[b].total_cmp(&p0[a]).then_with(|| labels[a].cmp(&labels[b])));
            let profile = ConditionalProfile::atomic(atoms.iter().map(|&a| p0[a] / mass).collect());
            InvariantEntry {
                rn,
                mass,
                profile,
                atoms,
            }
        })
        .collect();
    ClassificationInvariant {
        entries,
        scale_c: None,
    }
}

/// Joint mod-0 isomorphism preserving every measure, if one exists.
pub fn jointly_isomorphic(s1: &MultiMeasureSpace, s2: &MultiMeasureSpace) -> Option<AtomBijection> {
    if s1.n_measures() != s2.n_measures() {
        return None;
    }
    let a = classification_invariant(s1);
    let b = classification_invariant(s2);
    if !a.approx_eq(&b, tol::DERIVED) {
        return None;
    }
    let pairs = a
        .entries
        .iter()
        .zip(&b.entries)
        .flat_map(|(x, y)| x.atoms.iter().copied().zip(y.atoms.iter().copied()))
        .collect();
    Some(AtomBijection { pairs })
}

/// A right-continuous step function on `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    /// `0 = b0 < b1 < ... < bm`, with `bm` at (or numerically at) 1.
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(invalid("step function needs one more breakpoint than values"));
        }
        if breakpoints.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("step breakpoints must be non-decreasing"));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            values: vec![value],
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        let idx = self.breakpoints[1..self.breakpoints.len() - 1].partition_point(|b| *b <= u);
        self.values[idx]
    }

    /// `∫ f(u) du` over `[lo, hi)`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let a = self.breakpoints[i].max(lo);
                let b = self.breakpoints[i + 1].min(hi);
                if b > a {
                    v * (b - a)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// `∫ f(u) g(u) du` over the common domain.
    pub fn integral_product(&self, other: &StepFunction) -> f64 {
        merged_pieces(self, other).map(|(len, a, b)| len * a * b).sum()
    }

    /// `∫ |f(u) − g(u)| du` over the common domain.
    pub fn l1_distance(&self, other: &StepFunction) -> f64 {
        merged_pieces(self, other).map(|(len, a, b)| len * (a - b).abs()).sum()
    }
}

/// Pieces `(length, f value, g value)` of the common refinement.
fn merged_pieces<'a>(f: &'a StepFunction, g: &'a StepFunction) -> impl Iterator<Item = (f64, f64, f64)> + 'a {
    let (mut i, mut j) = (0usize, 0usize);
    let mut start = f.breakpoints[0].max(g.breakpoints[0]);
    std::iter::from_fn(move || {
        while i < f.values.len() && j < g.values.len() {
            let end = f.breakpoints[i + 1].min(g.breakpoints[j + 1]);
            let piece = (end - start, f.values[i], g.values[j]);
            if f.breakpoints[i + 1] <= end {
                i += 1;
            }
            if g.breakpoints[j + 1] <= end {
                j += 1;
            }
            let s = start;
            start = start.max(end);
            if end > s {
                return Some(piece);
            }
        }
        None
    })
}

/// Canonical market on `[0, 1)`: the quantile function of `dQ/dP`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileMarket {
    pub breakpoints: Vec<f64>,
    pub rn_values: Vec<f64>,
    pub scale_c: f64,
}

impl QuantileMarket {
    pub fn rn_function(&self) -> StepFunction {
        StepFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.rn_values.clone(),
        }
    }

    /// `C ∫ F⁻¹(u) X(u) du`, exact for step payoffs.
    pub fn price_step(&self, payoff: &StepFunction) -> f64 {
        self.scale_c * self.rn_function().integral_product(payoff)
    }

    /// Midpoint-rule price for payoffs given as arbitrary functions of `u`.
    pub fn price_fn(&self, payoff: impl Fn(f64) -> f64, samples: usize) -> f64 {
        let rn = self.rn_function();
        let h = 1.0 / samples as f64;
        let sum: f64 = (0..samples)
            .map(|k| {
                let u = (k as f64 + 0.5) * h;
                rn.eval(u) * payoff(u)
            })
            .sum();
        self.scale_c * sum * h
    }
}

/// Interval `[lo, hi)` of `[0, 1)` occupied by each atom in the quantile
/// layout; null atoms have none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileLayout {
    pub intervals: Vec<Option<(f64, f64)>>,
}

fn sorted_by_rn(market: &CompleteMarket1P) -> Vec<usize> {
    let space = market.space();
    let q = space.rn_vector_column(0);
    let labels = space.base().labels();
    let mut atoms = space.base().support();
    atoms.sort_by(|&a, &b| q[a].total_cmp(&q[b]).then_with(|| labels[a].cmp(&labels[b])));
    atoms
}

pub fn quantile_layout(market: &CompleteMarket1P) -> QuantileLayout {
    let p0 = market.space().base().weights();
    let mut intervals = vec![None; p0.len()];
    let mut u = 0.0;
    for a in sorted_by_rn(market) {
        intervals[a] = Some((u, u + p0[a]));
        u += p0[a];
    }
    QuantileLayout { intervals }
}

/// Atoms sorted by `dQ/dP` laid end to end on `[0, 1)`; equal values merge.
pub fn quantile_market(market: &CompleteMarket1P) -> QuantileMarket {
    let space = market.space();
    let q = space.rn_vector_column(0);
    let p0 = space.base().weights();
    let mut breakpoints = vec![0.0];
    let mut rn_values: Vec<f64> = Vec::new();
    let mut u = 0.0;
    for a in sorted_by_rn(market) {
        u += p0[a];
        match rn_values.last() {
            Some(last) if tol::close(*last, q[a], tol::CONSTRUCTION) => {
                *breakpoints.last_mut().expect("non-empty") = u;
            }
            _ => {
                rn_values.push(q[a]);
                breakpoints.push(u);
            }
        }
    }
    QuantileMarket {
        breakpoints,
        rn_values,
        scale_c: market.scale_c(),
    }
}

/// Price in `M × I` of the pull-back of a payoff on the quantile market.
pub fn price_on_casino_product(market: &CompleteMarket1P, layout: &QuantileLayout, payoff: &StepFunction) -> f64 {
    let q = market.q();
    let p0 = market.space().base().weights();
    let sum: f64 = layout
        .intervals
        .iter()
        .enumerate()
        .filter_map(|(a, iv)| iv.map(|(lo, hi)| q[a] * payoff.integral(lo, hi) / p0[a]))
        .sum();
    market.scale_c() * sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CasinoEquivalence {
    Equivalent,
    Distinct,
    /// Within ten times the tolerance but outside it.
    Indeterminate,
}

pub fn casino_equivalence(m1: &CompleteMarket1P, m2: &CompleteMarket1P) -> CasinoEquivalence {
    if !tol::close(m1.scale_c(), m2.scale_c(), tol::DERIVED) {
        return CasinoEquivalence::Distinct;
    }
    let d = quantile_market(m1)
        .rn_function()
        .l1_distance(&quantile_market(m2).rn_function());
    if d <= tol::DERIVED {
        CasinoEquivalence::Equivalent
    } else if d <= 10.0 * tol::DERIVED {
        CasinoEquivalence::Indeterminate
    } else {
        CasinoEquivalence::Distinct
    }
}

/// `M1 × I ≅ M2 × I`.
pub fn isomorphic_up_to_casino(m1: &CompleteMarket1P, m2: &CompleteMarket1P) -> bool {
    casino_equivalence(m1, m2) == CasinoEquivalence::Equivalent
}

/// `E_{P0}[payoff | rn vector]`; null atoms are left unchanged.
pub fn project_onto_q(space: &MultiMeasureSpace, payoff: &Payoff) -> Result<Payoff> {
    payoff.aligned(space)?;
    let p0 = space.base().weights();
    let mut out = payoff.values().to_vec();
    for (_, atoms) in rn_classes(space) {
        let mass: f64 = atoms.iter().map(|&a| p0[a]).sum();
        let mean = atoms.iter().map(|&a| p0[a] * out[a]).sum::<f64>() / mass;
        for a in atoms {
            out[a] = mean;
        }
    }
    Ok(Payoff(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finprob::{product_with_casino, FiniteSpace};
    use approx::assert_abs_diff_eq;

    fn market(p0: &[f64], q: &[f64], c: f64) -> CompleteMarket1P {
        let space = MultiMeasureSpace::from_weights(p0.to_vec(), vec![q.to_vec()]).unwrap();
        CompleteMarket1P::new(space, c).unwrap()
    }

    #[test]
    fn price_examples() {
        let m = market(&[0.5, 0.5], &[0.25, 0.75], 0.97);
        assert_abs_diff_eq!(price(&m, &Payoff(vec![1.0, 1.0])).unwrap(), 0.97, epsilon = 1e-15);
        let m = market(&[0.5, 0.5], &[0.25, 0.75], 1.0);
        assert_abs_diff_eq!(price(&m, &Payoff(vec![4.0, 0.0])).unwrap(), 1.0, epsilon = 1e-15);
        assert!(price(&m, &Payoff(vec![0.0, 1e-9])).unwrap() > 0.0);
        assert!(price(&m, &Payoff(vec![1.0])).is_err());
    }

    #[test]
    fn rejects_bad_markets() {
        let space = MultiMeasureSpace::from_weights(vec![1.0], vec![]).unwrap();
        assert!(CompleteMarket1P::new(space, 1.0).is_err());
        let space = MultiMeasureSpace::from_weights(vec![1.0], vec![vec![1.0]]).unwrap();
        assert!(CompleteMarket1P::new(space, 0.0).is_err());
    }

    #[test]
    fn invariant_of_casino_measure() {
        let s = MultiMeasureSpace::from_weights(vec![0.2, 0.5, 0.3], vec![vec![0.2, 0.5, 0.3]]).unwrap();
        let inv = classification_invariant(&s);
        assert_eq!(inv.entries.len(), 1);
        assert_eq!(inv.entries[0].rn, vec![1.0]);
        assert_abs_diff_eq!(inv.entries[0].mass, 1.0, epsilon = 1e-12);
        assert_eq!(inv.entries[0].profile.atom_masses, vec![0.5, 0.3, 0.2]);
    }

    #[test]
    fn invariant_distinguishes_markets() {
        let a = MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.25, 0.75]]).unwrap();
        let b = MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.3, 0.7]]).unwrap();
        assert!(!classification_invariant(&a).approx_eq(&classification_invariant(&b), 1e-10));
        assert!(jointly_isomorphic(&a, &b).is_none());
        let swapped = MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.75, 0.25]]).unwrap();
        let map = jointly_isomorphic(&a, &swapped).unwrap();
        assert_eq!(map.image(0), Some(1));
        assert!(map.preserves(&a, &swapped, 1e-12));
        let id = jointly_isomorphic(&a, &a).unwrap();
        assert!(id.pairs.iter().all(|(l, r)| l == r));
    }

    #[test]
    fn invariant_sees_profiles() {
        // same rn law, different atom structure on the level set
        let a = MultiMeasureSpace::from_weights(vec![0.25, 0.25, 0.5], vec![vec![0.25, 0.25, 0.5]]).unwrap();
        let b = MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.5, 0.5]]).unwrap();
        assert!(jointly_isomorphic(&a, &b).is_none());
        let ma = CompleteMarket1P::new(a, 1.0).unwrap();
        let mb = CompleteMarket1P::new(b, 1.0).unwrap();
        assert!(isomorphic_up_to_casino(&ma, &mb));
    }

    #[test]
    fn casino_refinement_of_invariant() {
        let s = MultiMeasureSpace::from_weights(vec![0.4, 0.6], vec![vec![0.2, 0.8]]).unwrap();
        let product = product_with_casino(&s, 3).unwrap();
        let lhs = classification_invariant(&product);
        let rhs = classification_invariant(&s).refine(3);
        assert!(lhs.approx_eq(&rhs, 1e-12));
        assert!(lhs.smeared().approx_eq(&classification_invariant(&s).smeared(), 1e-12));
    }

    #[test]
    fn quantile_examples() {
        let m = market(&[0.5, 0.5], &[0.25, 0.75], 1.0);
        let qm = quantile_market(&m);
        assert_eq!(qm.breakpoints, vec![0.0, 0.5, 1.0]);
        assert_eq!(qm.rn_values, vec![0.5, 1.5]);

        let m = market(&[0.3, 0.7], &[0.3, 0.7], 0.9);
        let qm = quantile_market(&m);
        assert_eq!(qm.rn_values.len(), 1);
        assert_abs_diff_eq!(qm.rn_values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qm.price_step(&StepFunction::constant(1.0)), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn quantile_sorts_descending_input() {
        let m = market(&[0.2, 0.3, 0.5], &[0.4, 0.3, 0.3], 1.0);
        let qm = quantile_market(&m);
        assert!(qm.rn_values.windows(2).all(|w| w[0] <= w[1]));
        let layout = quantile_layout(&m);
        let payoff = Payoff(vec![3.0, -1.0, 2.0]);
        // step payoff that matches the atom payoff on each atom interval
        let mut pieces: Vec<(f64, f64, f64)> = layout
            .intervals
            .iter()
            .zip(payoff.values())
            .map(|(iv, v)| {
                let (lo, hi) = iv.unwrap();
                (lo, hi, *v)
            })
            .collect();
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut bps = vec![0.0];
        bps.extend(pieces.iter().map(|p| p.1));
        let step = StepFunction::new(bps, pieces.iter().map(|p| p.2).collect()).unwrap();
        let direct = price(&m, &payoff).unwrap();
        assert_abs_diff_eq!(qm.price_step(&step), direct, epsilon = 1e-12);
        assert_abs_diff_eq!(price_on_casino_product(&m, &layout, &step), direct, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_pricing_of_smooth_payoff() {
        let m = market(&[0.5, 0.5], &[0.25, 0.75], 1.0);
        let qm = quantile_market(&m);
        // ∫0^.5 0.5 u du + ∫.5^1 1.5 u du = 0.0625 + 0.5625
        assert_abs_diff_eq!(qm.price_fn(|u| u, 10_000), 0.625, epsilon = 1e-8);
    }

    #[test]
    fn casino_equivalence_examples() {
        let coarse = market(&[0.5, 0.5], &[0.25, 0.75], 1.0);
        let fine = market(&[0.25; 4], &[0.125, 0.125, 0.375, 0.375], 1.0);
        assert!(isomorphic_up_to_casino(&coarse, &fine));
        let other_c = market(&[0.25; 4], &[0.125, 0.125, 0.375, 0.375], 1.1);
        assert!(!isomorphic_up_to_casino(&coarse, &other_c));
        let shifted = market(&[0.5, 0.5], &[0.3, 0.7], 1.0);
        assert!(!isomorphic_up_to_casino(&coarse, &shifted));
        let nudged = market(&[0.5, 0.5], &[0.25 + 4e-10, 0.75 - 4e-10], 1.0);
        assert_eq!(casino_equivalence(&coarse, &nudged), CasinoEquivalence::Indeterminate);
    }

    #[test]
    fn casino_product_is_casino_equivalent() {
        let s = MultiMeasureSpace::from_weights(vec![0.1, 0.2, 0.7], vec![vec![0.3, 0.3, 0.4]]).unwrap();
        let m = CompleteMarket1P::new(s.clone(), 0.95).unwrap();
        for k in [1, 2, 7] {
            let p = CompleteMarket1P::new(product_with_casino(&s, k).unwrap(), 0.95).unwrap();
            assert!(isomorphic_up_to_casino(&m, &p));
        }
    }

    #[test]
    fn projection_examples() {
        let s = MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.25, 0.75]]).unwrap();
        let x = Payoff(vec![3.0, 7.0]);
        assert_eq!(project_onto_q(&s, &x).unwrap(), x);

        let s = MultiMeasureSpace::from_weights(vec![0.5, 0.5], vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(project_onto_q(&s, &Payoff(vec![0.0, 2.0])).unwrap().values(), &[1.0, 1.0]);

        let s = MultiMeasureSpace::new(
            FiniteSpace::from_weights(vec![0.1, 0.2, 0.3, 0.4]).unwrap(),
            vec![vec![0.05, 0.1, 0.45, 0.4]],
        )
        .unwrap();
        let x = Payoff(vec![1.0, -2.0, 5.0, 0.5]);
        let y = project_onto_q(&s, &x).unwrap();
        assert_eq!(y.values()[0], y.values()[1]);
        for i in 0..=1 {
            assert_abs_diff_eq!(y.expectation(&s, i), x.expectation(&s, i), epsilon = 1e-12);
        }
    }

    #[test]
    fn step_function_algebra() {
        let f = StepFunction::new(vec![0.0, 0.25, 1.0], vec![2.0, 4.0]).unwrap();
        let g = StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, -1.0]).unwrap();
        // 0.25*2 + 0.25*4 - 0.5*4
        assert_abs_diff_eq!(f.integral_product(&g), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.l1_distance(&g), 0.25 * 1.0 + 0.25 * 3.0 + 0.5 * 5.0, epsilon = 1e-15);
        assert_eq!(f.eval(0.1), 2.0);
        assert_eq!(f.eval(0.25), 4.0);
        assert_abs_diff_eq!(f.integral(0.2, 0.3), 0.05 * 2.0 + 0.05 * 4.0, epsilon = 1e-15);
        assert!(StepFunction::new(vec![0.0, 1.0], vec![]).is_err());
    }
}
