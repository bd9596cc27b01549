use std::collections::BTreeSet;

use itertools::Itertools;
use proptest::prelude::*;

use isomarket_core::finprob::{automorphisms, group_average, MultiMeasureSpace, Payoff};
use isomarket_core::onep::{
    casino_equivalence, classification_invariant, isomorphic_up_to_casino, jointly_isomorphic, price,
    project_onto_q, quantile_market, CasinoEquivalence, CompleteMarket1P, StepFunction,
};
use isomarket_core::rearrange::{composite_rearrange, dominance_violation, law_discrepancy, rearrange_pm, CasinoSample, Sign};
use isomarket_core::tol;

fn normalize(w: &[u32]) -> Vec<f64> {
    let s: u32 = w.iter().sum();
    w.iter().map(|v| f64::from(*v) / f64::from(s)).collect()
}

/// `P0` weights (zeros mark null atoms) and `n` extra measures on the support.
fn int_space(max_atoms: usize, n: usize) -> impl Strategy<Value = (Vec<u32>, Vec<Vec<u32>>)> {
    (1..=max_atoms)
        .prop_flat_map(move |atoms| {
            (
                prop::collection::vec(0u32..=3, atoms),
                prop::collection::vec(prop::collection::vec(1u32..=3, atoms), n),
            )
        })
        .prop_filter("some mass", |(p0, _)| p0.iter().any(|w| *w > 0))
        .prop_map(|(p0, extra)| {
            let extra = extra
                .into_iter()
                .map(|m| m.iter().zip(&p0).map(|(v, w)| if *w == 0 { 0 } else { *v }).collect())
                .collect();
            (p0, extra)
        })
}

fn build(p0: &[u32], extra: &[Vec<u32>]) -> MultiMeasureSpace {
    MultiMeasureSpace::from_weights(normalize(p0), extra.iter().map(|m| normalize(m)).collect()).unwrap()
}

fn brute_isomorphic(a: &MultiMeasureSpace, b: &MultiMeasureSpace) -> bool {
    let (sa, sb) = (a.base().support(), b.base().support());
    a.n_measures() == b.n_measures()
        && sa.len() == sb.len()
        && sb.iter().copied().permutations(sb.len()).any(|perm| {
            sa.iter()
                .zip(&perm)
                .all(|(&x, &y)| (0..=a.n_measures()).all(|i| (a.measure(i)[x] - b.measure(i)[y]).abs() <= 1e-12))
        })
}

fn stabilizer(space: &MultiMeasureSpace) -> BTreeSet<Vec<usize>> {
    let n = space.n_atoms();
    (0..n)
        .permutations(n)
        .filter(|g| (0..n).all(|a| space.profile(a) == space.profile(g[a])))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn isomorphism_matches_exhaustive_search(
        (p0, extra) in int_space(6, 2),
        (q0, qextra) in int_space(6, 2),
    ) {
        let (a, b) = (build(&p0, &extra), build(&q0, &qextra));
        let got = jointly_isomorphic(&a, &b);
        prop_assert_eq!(got.is_some(), brute_isomorphic(&a, &b));
        if let Some(bij) = got {
            prop_assert!(bij.preserves(&a, &b, 1e-12));
        }
    }

    #[test]
    fn relabeling_is_isomorphic_and_transitive(
        (p0, extra) in int_space(7, 2),
        seed in any::<u64>(),
    ) {
        let a = build(&p0, &extra);
        let n = a.n_atoms();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left((seed % n as u64) as usize);
        let b = a.permuted(&order);
        order.reverse();
        let c = b.permuted(&order);
        let ab = jointly_isomorphic(&a, &b).expect("relabeling");
        let bc = jointly_isomorphic(&b, &c).expect("relabeling");
        let ac = jointly_isomorphic(&a, &c).expect("transitivity");
        prop_assert!(ab.preserves(&a, &b, 1e-12) && bc.preserves(&b, &c, 1e-12) && ac.preserves(&a, &c, 1e-12));
        prop_assert!(classification_invariant(&a).approx_eq(&classification_invariant(&c), tol::DERIVED));
    }

    #[test]
    fn automorphisms_match_brute_force((p0, extra) in int_space(6, 1)) {
        let s = build(&p0, &extra);
        let group: BTreeSet<Vec<usize>> = automorphisms(&s).elements(tol::GROUP_CAP).unwrap().into_iter().collect();
        prop_assert_eq!(group, stabilizer(&s));
    }

    #[test]
    fn group_average_keeps_every_expectation(
        (p0, extra) in int_space(6, 2),
        values in prop::collection::vec(-5.0f64..5.0, 6),
    ) {
        let s = build(&p0, &extra);
        let x = Payoff(values[..s.n_atoms()].to_vec());
        let avg = group_average(&s, &automorphisms(&s), &x, tol::GROUP_CAP).unwrap();
        for i in 0..=s.n_measures() {
            prop_assert!((x.expectation(&s, i) - avg.expectation(&s, i)).abs() <= 1e-12);
        }
        for a in 0..s.n_atoms() {
            for b in 0..s.n_atoms() {
                if s.profile(a) == s.profile(b) {
                    prop_assert!((avg.values()[a] - avg.values()[b]).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn projection_onto_q_keeps_every_expectation(
        (p0, extra) in int_space(8, 2),
        values in prop::collection::vec(-5.0f64..5.0, 8),
    ) {
        let s = build(&p0, &extra);
        let x = Payoff(values[..s.n_atoms()].to_vec());
        let y = project_onto_q(&s, &x).unwrap();
        for i in 0..=s.n_measures() {
            prop_assert!((x.expectation(&s, i) - y.expectation(&s, i)).abs() <= tol::DERIVED);
        }
    }

    #[test]
    fn quantile_market_prices_constants_and_relabelings(
        (p0, extra) in int_space(8, 1),
        c in 0.5f64..1.5,
    ) {
        let s = build(&p0, &extra);
        let m = CompleteMarket1P::new(s.clone(), c).unwrap();
        let qm = quantile_market(&m);
        prop_assert!((qm.price_step(&StepFunction::constant(1.0)) - c).abs() <= tol::DERIVED);
        let ones = Payoff(vec![1.0; s.n_atoms()]);
        prop_assert!((price(&m, &ones).unwrap() - c).abs() <= tol::DERIVED);

        let order: Vec<usize> = (0..s.n_atoms()).rev().collect();
        let relabeled = CompleteMarket1P::new(s.permuted(&order), c).unwrap();
        prop_assert!(isomorphic_up_to_casino(&m, &relabeled));
        let rescaled = CompleteMarket1P::new(s, c * 1.1).unwrap();
        prop_assert_eq!(casino_equivalence(&m, &rescaled), CasinoEquivalence::Distinct);
    }

    #[test]
    fn scalar_rearrangement_invariants(
        (p0, extra) in int_space(8, 1),
        values in prop::collection::vec(0u8..4, 8),
        k in 1usize..16,
    ) {
        let s = build(&p0, &extra);
        let x = Payoff(values[..s.n_atoms()].iter().map(|v| f64::from(*v)).collect());
        let sample = CasinoSample::from_space(&s, &x, k).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let out = rearrange_pm(&sample, sign).unwrap();
            prop_assert!(law_discrepancy(&sample, &out, 0) <= tol::CONSTRUCTION);
            prop_assert!(dominance_violation(&sample, &out, 1, sign) <= tol::CONSTRUCTION);
            // applying the same rearrangement again changes nothing
            let again = rearrange_pm(&out, sign).unwrap();
            prop_assert!(law_discrepancy(&out, &again, 1) <= tol::CONSTRUCTION);
        }
    }

    #[test]
    fn composite_rearrangement_keeps_base_law(
        (p0, extra) in int_space(6, 2),
        values in prop::collection::vec(0u8..4, 6),
        plus in any::<[bool; 2]>(),
    ) {
        let s = build(&p0, &extra);
        let x = Payoff(values[..s.n_atoms()].iter().map(|v| f64::from(*v)).collect());
        let sample = CasinoSample::from_space(&s, &x, 8).unwrap();
        let signs = plus.map(|p| if p { Sign::Plus } else { Sign::Minus });
        let out = composite_rearrange(&sample, &signs).unwrap();
        prop_assert!(law_discrepancy(&sample, &out, 0) <= tol::CONSTRUCTION);
    }
}
