use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use isomarket_core::ctsmkt::{price_mc, ClaimSpec, LocalVol, SdeModel, SimConfig};

const S0: f64 = 100.0;
const R: f64 = 0.03;
const SIGMA: f64 = 0.25;
const T: f64 = 1.0;

fn gbm(growth: f64) -> SdeModel {
    SdeModel::new(R, T, vec![S0], Arc::new(LocalVol::gbm(vec![growth], &[SIGMA]).unwrap())).unwrap()
}

fn black_scholes(k: f64) -> (f64, f64) {
    let n = Normal::standard();
    let d1 = ((S0 / k).ln() + (R + 0.5 * SIGMA * SIGMA) * T) / (SIGMA * T.sqrt());
    let d2 = d1 - SIGMA * T.sqrt();
    let df = (-R * T).exp();
    (S0 * n.cdf(d1) - k * df * n.cdf(d2), k * df * n.cdf(-d2) - S0 * n.cdf(-d1))
}

#[test]
fn calls_and_puts_match_black_scholes_for_any_growth() {
    for (growth, seed) in [(0.08, 11), (-0.02, 12)] {
        let model = gbm(growth);
        let cfg = SimConfig::over(&model, 100, 20_000, seed);
        for k in [80.0, 100.0, 125.0] {
            let (call, put) = black_scholes(k);
            let c = price_mc(&model, &ClaimSpec::Call { asset: 0, strike: k }, &cfg).unwrap();
            let p = price_mc(&model, &ClaimSpec::Put { asset: 0, strike: k }, &cfg).unwrap();
            assert!((c.price - call).abs() <= 4.0 * c.std_error, "m={growth} K={k}: call {} ± {} vs {call}", c.price, c.std_error);
            assert!((p.price - put).abs() <= 4.0 * p.std_error, "m={growth} K={k}: put {} ± {} vs {put}", p.price, p.std_error);
        }
    }
}

#[test]
fn put_call_parity_holds_pathwise_up_to_the_forward() {
    let model = gbm(0.05);
    let cfg = SimConfig::over(&model, 50, 5_000, 3);
    let k = 95.0;
    let c = price_mc(&model, &ClaimSpec::Call { asset: 0, strike: k }, &cfg).unwrap();
    let p = price_mc(&model, &ClaimSpec::Put { asset: 0, strike: k }, &cfg).unwrap();
    let fwd = price_mc(&model, &ClaimSpec::Linear { weights: vec![1.0] }, &cfg).unwrap();
    let bond = price_mc(&model, &ClaimSpec::Constant { value: k }, &cfg).unwrap();
    // same paths on both sides, so only rounding separates them
    assert!((c.price - p.price - (fwd.price - bond.price)).abs() <= 1e-9 * S0);
    assert!((fwd.price - S0).abs() <= 4.0 * fwd.std_error);
    assert!((bond.price - k * (-R * T).exp()).abs() <= 4.0 * bond.std_error);
}

#[test]
fn antithetic_pairs_shrink_the_error_of_a_deep_call() {
    let model = gbm(0.05);
    let plain = SimConfig::over(&model, 50, 4_000, 9);
    let paired = plain.with_antithetic(true);
    let claim = ClaimSpec::Call { asset: 0, strike: 60.0 };
    let a = price_mc(&model, &claim, &plain).unwrap();
    let b = price_mc(&model, &claim, &paired).unwrap();
    let (call, _) = black_scholes(60.0);
    assert!((b.price - call).abs() <= 4.0 * b.std_error);
    assert!(b.std_error < a.std_error, "{} vs {}", b.std_error, a.std_error);
}
