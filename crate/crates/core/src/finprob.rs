//! Finite probability spaces carrying several equivalent measures.
//!
//! Atoms of base weight zero are kept in the data but ignored by every
//! isomorphism and pricing routine (the mod-0 convention).

use std::collections::{HashSet, VecDeque};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl FiniteSpace {
    /// Builds a space and checks normalization and label distinctness.
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let space = Self::unchecked(labels, weights);
        let mut violations = Vec::new();
        space.collect_violations(&mut violations);
        if violations.is_empty() {
            Ok(space)
        } else {
            Err(invalid(violations.join("; ")))
        }
    }

    /// Labels the atoms `0, 1, ...`.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn unchecked(labels: Vec<String>, weights: Vec<f64>) -> Self {
        Self { labels, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_null(&self, atom: usize) -> bool {
        self.weights[atom] == 0.0
    }

    /// Indices of atoms with positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.is_null(i)).collect()
    }

    fn collect_violations(&self, out: &mut Vec<String>) {
        if self.labels.len() != self.weights.len() {
            out.push(format!(
                "{} labels for {} weights",
                self.labels.len(),
                self.weights.len()
            ));
        }
        let distinct: HashSet<&String> = self.labels.iter().collect();
        if distinct.len() != self.labels.len() {
            out.push("atom labels are not distinct".to_string());
        }
        check_measure("P0", &self.weights, out);
    }
}

fn check_measure(name: &str, weights: &[f64], out: &mut Vec<String>) {
    if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
        out.push(format!("{name}: negative or non-finite weight at atom {i}"));
        return;
    }
    let mass: f64 = weights.iter().sum();
    if !tol::close(mass, 1.0, tol::CONSTRUCTION) {
        out.push(format!("{name}: mass {mass}"));
    }
}

/// A finite space with base measure `P0` and `n` extra measures `P1..Pn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiMeasureSpace {
    base: FiniteSpace,
    extra: Vec<Vec<f64>>,
}

impl MultiMeasureSpace {
    pub fn new(base: FiniteSpace, extra: Vec<Vec<f64>>) -> Result<Self> {
        let space = Self::unchecked(base, extra);
        let report = validate_space(&space);
        if report.is_pass() {
            Ok(space)
        } else {
            Err(invalid(report.violations.join("; ")))
        }
    }

    pub fn unchecked(base: FiniteSpace, extra: Vec<Vec<f64>>) -> Self {
        Self { base, extra }
    }

    /// Convenience constructor with numeric labels.
    pub fn from_weights(p0: Vec<f64>, extra: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(FiniteSpace::from_weights(p0)?, extra)
    }

    pub fn base(&self) -> &FiniteSpace {
        &self.base
    }

    pub fn n_atoms(&self) -> usize {
        self.base.len()
    }

    /// Number of extra measures `n`.
    pub fn n_measures(&self) -> usize {
        self.extra.len()
    }

    /// Measure `i`, where `0` is the base measure.
    pub fn measure(&self, i: usize) -> &[f64] {
        if i == 0 {
            self.base.weights()
        } else {
            &self.extra[i - 1]
        }
    }

    /// `(P0(atom), ..., Pn(atom))`.
    pub fn profile(&self, atom: usize) -> Vec<f64> {
        (0..=self.n_measures())
            .map(|i| self.measure(i)[atom])
            .collect()
    }

    /// The vector `(dP1/dP0, ..., dPn/dP0)` at `atom`; ones on null atoms.
    pub fn rn_vector(&self, atom: usize) -> Vec<f64> {
        let p0 = self.base.weights[atom];
        self.extra
            .iter()
            .map(|m| if p0 > 0.0 { m[atom] / p0 } else { 1.0 })
            .collect()
    }

    /// Column `i` (zero-based) of the rn vectors, one entry per atom.
    pub fn rn_vector_column(&self, i: usize) -> Vec<f64> {
        (0..self.n_atoms()).map(|a| self.rn_vector(a)[i]).collect()
    }

    /// Same space with the atoms reordered: new atom `k` is old atom `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let labels = order.iter().map(|&i| self.base.labels[i].clone()).collect();
        let weights = order.iter().map(|&i| self.base.weights[i]).collect();
        let extra = self
            .extra
            .iter()
            .map(|m| order.iter().map(|&i| m[i]).collect())
            .collect();
        Self::unchecked(FiniteSpace::unchecked(labels, weights), extra)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_space(space: &MultiMeasureSpace) -> ValidationReport {
    let mut violations = Vec::new();
    space.base.collect_violations(&mut violations);
    let n = space.n_atoms();
    for (k, m) in space.extra.iter().enumerate() {
        let name = format!("P{}", k + 1);
        if m.len() != n {
            violations.push(format!("{name}: {} entries for {n} atoms", m.len()));
            continue;
        }
        check_measure(&name, m, &mut violations);
        for atom in 0..n {
            if (m[atom] > 0.0) != (space.base.weights[atom] > 0.0) {
                violations.push(format!("equivalence violated at atom {atom}"));
            }
        }
    }
    ValidationReport { violations }
}

/// `dPi/dP0` per atom, `1 <= i <= n`. Null atoms carry the marker value 1.
pub fn rn_derivative(space: &MultiMeasureSpace, i: usize) -> Result<Vec<f64>> {
    if i == 0 || i > space.n_measures() {
        return Err(Error::IndexOutOfRange {
            index: i,
            count: space.n_measures(),
        });
    }
    let p0 = space.base.weights();
    Ok(space.extra[i - 1]
        .iter()
        .zip(p0)
        .map(|(pi, p)| if *p > 0.0 { pi / p } else { 1.0 })
        .collect())
}

/// A real payoff per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Payoff(pub Vec<f64>);

impl Payoff {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn aligned(&self, space: &MultiMeasureSpace) -> Result<()> {
        if self.0.len() == space.n_atoms() {
            Ok(())
        } else {
            Err(Error::Misaligned {
                expected: space.n_atoms(),
                got: self.0.len(),
            })
        }
    }

    /// `E_{Pi}[payoff]`.
    pub fn expectation(&self, space: &MultiMeasureSpace, i: usize) -> f64 {
        self.0
            .iter()
            .zip(space.measure(i))
            .map(|(x, w)| x * w)
            .sum()
    }
}

/// Atom correspondence `(left atom, right atom)` between non-null atoms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomBijection {
    pub pairs: Vec<(usize, usize)>,
}

impl AtomBijection {
    pub fn image(&self, left: usize) -> Option<usize> {
        self.pairs.iter().find(|(l, _)| *l == left).map(|(_, r)| *r)
    }

    /// True when every measure agrees on each pair within `tol`.
    pub fn preserves(&self, a: &MultiMeasureSpace, b: &MultiMeasureSpace, tol: f64) -> bool {
        a.n_measures() == b.n_measures()
            && self.pairs.iter().all(|&(l, r)| {
                (0..=a.n_measures()).all(|i| tol::close(a.measure(i)[l], b.measure(i)[r], tol))
            })
    }
}

fn sorted_support(space: &FiniteSpace) -> Vec<usize> {
    let mut atoms = space.support();
    atoms.sort_by(|&i, &j| {
        space.weights[i]
            .total_cmp(&space.weights[j])
            .then_with(|| space.labels[i].cmp(&space.labels[j]))
    });
    atoms
}

/// Measure-preserving bijection between the non-null atoms, if one exists.
pub fn mod0_isomorphic(s1: &FiniteSpace, s2: &FiniteSpace) -> Option<AtomBijection> {
    let a = sorted_support(s1);
    let b = sorted_support(s2);
    if a.len() != b.len() {
        return None;
    }
    let matches = a
        .iter()
        .zip(&b)
        .all(|(&i, &j)| tol::close(s1.weights[i], s2.weights[j], tol::CONSTRUCTION));
    matches.then(|| AtomBijection {
        pairs: a.into_iter().zip(b).collect(),
    })
}

/// A finite group of atom permutations. `perm[i]` is the image of atom `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationGroup {
    n_atoms: usize,
    generators: Vec<Vec<usize>>,
    /// Set when the group is the full symmetric group on each class.
    classes: Option<Vec<Vec<usize>>>,
}

impl PermutationGroup {
    pub fn trivial(n_atoms: usize) -> Self {
        Self {
            n_atoms,
            generators: Vec::new(),
            classes: Some(Vec::new()),
        }
    }

    pub fn from_generators(n_atoms: usize, generators: Vec<Vec<usize>>) -> Result<Self> {
        for g in &generators {
            let mut seen = vec![false; n_atoms];
            if g.len() != n_atoms || g.iter().any(|&k| k >= n_atoms || std::mem::replace(&mut seen[k], true)) {
                return Err(invalid(format!("generator {g:?} is not a permutation of {n_atoms} atoms")));
            }
        }
        Ok(Self {
            n_atoms,
            generators,
            classes: None,
        })
    }

    /// Full symmetric group on each class, generated by adjacent transpositions.
    pub fn symmetric_on_classes(n_atoms: usize, classes: Vec<Vec<usize>>) -> Self {
        let classes: Vec<Vec<usize>> = classes.into_iter().filter(|c| c.len() > 1).collect();
        let mut generators = Vec::new();
        for class in &classes {
            for pair in class.windows(2) {
                let mut g: Vec<usize> = (0..n_atoms).collect();
                g.swap(pair[0], pair[1]);
                generators.push(g);
            }
        }
        Self {
            n_atoms,
            generators,
            classes: Some(classes),
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Group order when known without enumeration.
    pub fn structured_order(&self) -> Option<u128> {
        self.classes.as_ref().map(|classes| {
            classes.iter().fold(1u128, |acc, c| {
                (2..=c.len() as u128).fold(acc, |a, k| a.saturating_mul(k))
            })
        })
    }

    /// Every element of the group, refusing groups larger than `cap`.
    pub fn elements(&self, cap: u64) -> Result<Vec<Vec<usize>>> {
        if let Some(order) = self.structured_order() {
            if order > cap as u128 {
                return Err(Error::GroupTooLarge { order, cap });
            }
            return Ok(self.structured_elements());
        }
        self.closure(cap)
    }

    fn structured_elements(&self) -> Vec<Vec<usize>> {
        let classes = self.classes.as_deref().unwrap_or(&[]);
        let identity: Vec<usize> = (0..self.n_atoms).collect();
        if classes.is_empty() {
            return vec![identity];
        }
        classes
            .iter()
            .map(|c| c.iter().copied().permutations(c.len()).collect::<Vec<_>>())
            .multi_cartesian_product()
            .map(|images| {
                let mut g = identity.clone();
                for (class, image) in classes.iter().zip(&images) {
                    for (&from, &to) in class.iter().zip(image) {
                        g[from] = to;
                    }
                }
                g
            })
            .collect()
    }

    fn closure(&self, cap: u64) -> Result<Vec<Vec<usize>>> {
        let identity: Vec<usize> = (0..self.n_atoms).collect();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut order = vec![identity.clone()];
        seen.insert(identity.clone());
        let mut queue = VecDeque::from([identity]);
        while let Some(g) = queue.pop_front() {
            for h in &self.generators {
                let gh = compose(h, &g);
                if seen.insert(gh.clone()) {
                    if seen.len() as u64 > cap {
                        return Err(Error::GroupTooLarge {
                            order: seen.len() as u128,
                            cap,
                        });
                    }
                    order.push(gh.clone());
                    queue.push_back(gh);
                }
            }
        }
        Ok(order)
    }

    /// True when every generator preserves every measure of `space` exactly.
    pub fn preserves_measures(&self, space: &MultiMeasureSpace) -> bool {
        self.n_atoms == space.n_atoms()
            && self.generators.iter().all(|g| {
                (0..self.n_atoms).all(|a| {
                    tol::close_slice(&space.profile(a), &space.profile(g[a]), tol::CONSTRUCTION)
                })
            })
    }
}

/// `(outer ∘ inner)[i] = outer[inner[i]]`.
pub fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&i| outer[i]).collect()
}

/// Stabilizer of all measures, as transpositions within profile classes.
///
/// Atoms are grouped by their full profile `(P0, ..., Pn)` (per-coordinate
/// tolerance 1e-12); classes are listed by smallest label.
pub fn automorphisms(space: &MultiMeasureSpace) -> PermutationGroup {
    let mut atoms: Vec<usize> = (0..space.n_atoms()).collect();
    let profiles: Vec<Vec<f64>> = atoms.iter().map(|&a| space.profile(a)).collect();
    let labels = space.base.labels();
    atoms.sort_by(|&a, &b| {
        tol::lex_cmp(&profiles[a], &profiles[b], tol::CONSTRUCTION).then_with(|| labels[a].cmp(&labels[b]))
    });
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for a in atoms {
        match classes.last_mut() {
            Some(class) if tol::close_slice(&profiles[class[0]], &profiles[a], tol::CONSTRUCTION) => {
                class.push(a)
            }
            _ => classes.push(vec![a]),
        }
    }
    classes.sort_by(|x, y| labels[x[0]].cmp(&labels[y[0]]));
    PermutationGroup::symmetric_on_classes(space.n_atoms(), classes)
}

/// `output(ω) = (1/|G|) Σ_g payoff(g⁻¹ω)`.
pub fn group_average(
    space: &MultiMeasureSpace,
    group: &PermutationGroup,
    payoff: &Payoff,
    cap: u64,
) -> Result<Payoff> {
    payoff.aligned(space)?;
    if group.n_atoms() != space.n_atoms() {
        return Err(invalid("group acts on a different atom count"));
    }
    let elements = group.elements(cap)?;
    let x = payoff.values();
    let mut sum = vec![0.0; x.len()];
    for g in &elements {
        // Σ_g X(g⁻¹ω) = Σ_g X(gω) over a group
        for (omega, s) in sum.iter_mut().enumerate() {
            *s += x[g[omega]];
        }
    }
    let order = elements.len() as f64;
    Ok(Payoff(sum.into_iter().map(|s| s / order).collect()))
}

/// Product with a `K`-cell casino: every measure is split uniformly.
pub fn product_with_casino(space: &MultiMeasureSpace, k: usize) -> Result<MultiMeasureSpace> {
    if k == 0 {
        return Err(invalid("casino grid K must be at least 1"));
    }
    let scale = 1.0 / k as f64;
    let n = space.n_atoms();
    let mut labels = Vec::with_capacity(n * k);
    let mut weights = Vec::with_capacity(n * k);
    for a in 0..n {
        for j in 0..k {
            labels.push(format!("{}/{}", space.base.labels[a], j));
            weights.push(space.base.weights[a] * scale);
        }
    }
    let extra = space
        .extra
        .iter()
        .map(|m| m.iter().flat_map(|w| std::iter::repeat_n(w * scale, k)).collect())
        .collect();
    Ok(MultiMeasureSpace::unchecked(
        FiniteSpace::unchecked(labels, weights),
        extra,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(p0: &[f64], extra: &[&[f64]]) -> MultiMeasureSpace {
        MultiMeasureSpace::from_weights(p0.to_vec(), extra.iter().map(|m| m.to_vec()).collect()).unwrap()
    }

    #[test]
    fn validation_reports() {
        let ok = MultiMeasureSpace::unchecked(FiniteSpace::from_weights(vec![0.5, 0.5]).unwrap(), vec![]);
        assert!(validate_space(&ok).is_pass());

        let heavy = MultiMeasureSpace::unchecked(
            FiniteSpace::unchecked(vec!["a".into(), "b".into()], vec![0.5, 0.6]),
            vec![],
        );
        let report = validate_space(&heavy);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].contains("mass 1.1"));

        let inequivalent = MultiMeasureSpace::unchecked(
            FiniteSpace::from_weights(vec![0.0, 1.0]).unwrap(),
            vec![vec![0.5, 0.5]],
        );
        let report = validate_space(&inequivalent);
        assert_eq!(report.violations, vec!["equivalence violated at atom 0".to_string()]);
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(FiniteSpace::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn rn_derivative_examples() {
        let s = space(&[0.5, 0.5], &[&[0.25, 0.75]]);
        assert_eq!(rn_derivative(&s, 1).unwrap(), vec![0.5, 1.5]);

        let s = space(&[0.5, 0.5], &[&[0.5, 0.5]]);
        assert_eq!(rn_derivative(&s, 1).unwrap(), vec![1.0, 1.0]);

        let s = space(&[0.2, 0.3, 0.5], &[&[0.1, 0.3, 0.6]]);
        let q = rn_derivative(&s, 1).unwrap();
        for (got, want) in q.iter().zip([0.5, 1.0, 1.2]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let mean: f64 = q.iter().zip(s.measure(0)).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-10);

        assert!(matches!(rn_derivative(&s, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(rn_derivative(&s, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn null_atoms_carry_marker() {
        let s = space(&[0.0, 1.0], &[&[0.0, 1.0]]);
        assert_eq!(rn_derivative(&s, 1).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn mod0_examples() {
        let a = FiniteSpace::from_weights(vec![0.3, 0.7]).unwrap();
        let b = FiniteSpace::from_weights(vec![0.7, 0.3]).unwrap();
        let map = mod0_isomorphic(&a, &b).unwrap();
        assert_eq!(map.image(0), Some(1));
        assert_eq!(map.image(1), Some(0));

        let with_null = FiniteSpace::from_weights(vec![0.3, 0.7, 0.0]).unwrap();
        let map = mod0_isomorphic(&with_null, &a).unwrap();
        assert_eq!(map.pairs.len(), 2);
        assert_eq!(map.image(2), None);

        let c = FiniteSpace::from_weights(vec![0.4, 0.6]).unwrap();
        assert!(mod0_isomorphic(&a, &c).is_none());
    }

    #[test]
    fn automorphism_examples() {
        let s = space(&[0.25, 0.25, 0.5], &[&[0.25, 0.25, 0.5]]);
        let g = automorphisms(&s);
        assert_eq!(g.generators(), &[vec![1, 0, 2]]);
        assert_eq!(g.elements(GROUP_CAP_TEST).unwrap().len(), 2);

        let s = space(&[0.2, 0.3, 0.5], &[]);
        assert_eq!(automorphisms(&s).elements(GROUP_CAP_TEST).unwrap().len(), 1);

        let third = 1.0 / 3.0;
        let s = space(&[third, third, 1.0 - 2.0 * third], &[]);
        let g = automorphisms(&s);
        assert!(g.preserves_measures(&s));
        assert_eq!(g.elements(GROUP_CAP_TEST).unwrap().len(), 6);
    }

    const GROUP_CAP_TEST: u64 = 1_000;

    #[test]
    fn structured_enumeration_matches_closure() {
        let s = space(&[0.125; 8], &[]);
        let g = automorphisms(&s);
        let generic = PermutationGroup::from_generators(8, g.generators().to_vec()).unwrap();
        let mut a = g.elements(100_000).unwrap();
        let mut b = generic.elements(100_000).unwrap();
        a.sort();
        b.sort();
        assert_eq!(a.len(), 40_320);
        assert_eq!(a, b);
    }

    #[test]
    fn group_too_large() {
        let s = space(&[0.1; 10], &[]);
        let g = automorphisms(&s);
        assert!(matches!(
            group_average(&s, &g, &Payoff(vec![0.0; 10]), 1000),
            Err(Error::GroupTooLarge { .. })
        ));
        let generic = PermutationGroup::from_generators(10, g.generators().to_vec()).unwrap();
        assert!(matches!(generic.elements(1000), Err(Error::GroupTooLarge { .. })));
    }

    #[test]
    fn group_average_examples() {
        let s = space(&[0.5, 0.5], &[]);
        let g = automorphisms(&s);
        let avg = group_average(&s, &g, &Payoff(vec![1.0, 2.0]), GROUP_CAP_TEST).unwrap();
        assert_eq!(avg.values(), &[1.5, 1.5]);

        let trivial = PermutationGroup::trivial(2);
        let same = group_average(&s, &trivial, &Payoff(vec![1.0, 2.0]), GROUP_CAP_TEST).unwrap();
        assert_eq!(same.values(), &[1.0, 2.0]);

        let third = 1.0 / 3.0;
        let s = space(&[third, third, 1.0 - 2.0 * third], &[]);
        let g = automorphisms(&s);
        let avg = group_average(&s, &g, &Payoff(vec![1.0, 2.0, 3.0]), GROUP_CAP_TEST).unwrap();
        for v in avg.values() {
            assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-12);
        }
        for e in g.elements(GROUP_CAP_TEST).unwrap() {
            for w in 0..3 {
                assert_abs_diff_eq!(avg.values()[e[w]], avg.values()[w], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn misaligned_payoff() {
        let s = space(&[0.5, 0.5], &[]);
        let g = automorphisms(&s);
        assert!(matches!(
            group_average(&s, &g, &Payoff(vec![1.0]), GROUP_CAP_TEST),
            Err(Error::Misaligned { .. })
        ));
    }

    #[test]
    fn casino_product() {
        let s = space(&[0.4, 0.6], &[&[0.2, 0.8]]);
        let p = product_with_casino(&s, 4).unwrap();
        assert_eq!(p.n_atoms(), 8);
        assert!(validate_space(&p).is_pass());
        for i in 0..=1 {
            assert_abs_diff_eq!(p.measure(i).iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(p.measure(0)[0], 0.1, epsilon = 1e-15);
        let q = rn_derivative(&s, 1).unwrap();
        let qp = rn_derivative(&p, 1).unwrap();
        let expected: Vec<f64> = q.iter().flat_map(|v| std::iter::repeat_n(*v, 4)).collect();
        assert!(tol::close_slice(&qp, &expected, 1e-12));
        assert!(product_with_casino(&s, 0).is_err());
    }
}
