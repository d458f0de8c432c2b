use std::path::Path;

use snell_core::lower::backward_submartingale_check;
use snell_core::models::load_explicit_model;
use snell_core::{
    binomial_kappa, lower_snell, BinomialParams, Exact, Model, Payoff, RandomVariable, RectangularFamily, Scalar,
    StoppingTime,
};

fn params<S: Scalar>(steps: usize, payoff: Payoff<S>) -> BinomialParams<S> {
    BinomialParams {
        steps,
        s0: S::from_ratio(100, 1),
        up: S::from_ratio(11, 10),
        down: S::from_ratio(9, 10),
        p_lo: S::from_ratio(2, 5),
        p_hi: S::from_ratio(3, 5),
        payoff,
        strike: S::from_ratio(100, 1),
    }
}

/// The same tree with every up-probability on a 0.01 grid across the interval.
fn grid_family(model: &Model<f64>, lo: i64, hi: i64) -> RectangularFamily<f64> {
    let t = &model.tree;
    let sets = t
        .nodes()
        .map(|n| {
            if t.is_leaf(n) {
                Vec::new()
            } else {
                (lo..=hi).map(|k| vec![k as f64 / 100.0, 1.0 - k as f64 / 100.0]).collect()
            }
        })
        .collect();
    RectangularFamily::new(t, sets).unwrap()
}

#[test]
fn one_step_put_takes_the_high_up_probability() {
    let m = binomial_kappa(&params::<f64>(1, Payoff::Put)).unwrap();
    let res = lower_snell(&m.tree, &m.family, &m.payoff).unwrap();
    assert!((res.root_value - 4.0).abs() < 1e-12);
}

#[test]
fn two_step_put_matches_hand_value() {
    // Node u: min_p (1 - p) * 1 = 0.4. Node d: max(10, 0.4 * 19 + 0.6 * 1) = 10.
    // Root: min_p p * 0.4 + (1 - p) * 10 = 4.24.
    let m = binomial_kappa(&params::<Exact>(2, Payoff::Put)).unwrap();
    let res = lower_snell(&m.tree, &m.family, &m.payoff).unwrap();
    assert_eq!(res.root_value, Exact::from_ratio(106, 25));
    let d = m.tree.children(m.tree.root())[1];
    assert!(res.tau_down.contains(d));
}

#[test]
fn endpoints_reproduce_the_whole_interval() {
    for payoff in [Payoff::Put, Payoff::Call] {
        let m = binomial_kappa(&params::<f64>(6, payoff)).unwrap();
        let endpoints = lower_snell(&m.tree, &m.family, &m.payoff).unwrap();
        let grid = lower_snell(&m.tree, &grid_family(&m, 40, 60), &m.payoff).unwrap();
        for n in m.tree.nodes() {
            assert!((endpoints.envelope.value(n) - grid.envelope.value(n)).abs() < 1e-12);
        }
        assert_eq!(endpoints.tau_down, grid.tau_down);
    }
}

#[test]
fn interior_subinterval_is_never_cheaper() {
    let m = binomial_kappa(&params::<f64>(5, Payoff::Put)).unwrap();
    let full = lower_snell(&m.tree, &m.family, &m.payoff).unwrap();
    let inner = lower_snell(&m.tree, &grid_family(&m, 45, 55), &m.payoff).unwrap();
    for n in m.tree.nodes() {
        assert!(full.envelope.value(n) <= &(inner.envelope.value(n) + 1e-12));
    }
}

#[test]
fn backward_chain_on_binomial_is_strictly_submartingale_somewhere() {
    let m = binomial_kappa(&params::<f64>(3, Payoff::Put)).unwrap();
    let t = &m.tree;
    let y = m.payoff.sample(&StoppingTime::at_leaves(t)).unwrap();
    let chain: Vec<StoppingTime> = (0..=3).rev().map(|d| StoppingTime::at_depth(t, d).unwrap()).collect();
    let report = backward_submartingale_check(t, &m.family, &y, &chain, 1_000_000).unwrap();
    assert!(report.passed);
    assert!(report.strict_somewhere);
    assert!(report.min_slack >= -1e-12);
}

#[test]
fn singleton_family_has_no_strict_slack() {
    let mut p = params::<f64>(3, Payoff::Put);
    p.p_hi = p.p_lo;
    let m = binomial_kappa(&p).unwrap();
    let t = &m.tree;
    let y = RandomVariable::on_leaves_from(t, (0..t.leaves().len()).map(|i| i as f64).collect()).unwrap();
    let chain: Vec<StoppingTime> = (0..=3).rev().map(|d| StoppingTime::at_depth(t, d).unwrap()).collect();
    let report = backward_submartingale_check(t, &m.family, &y, &chain, 1_000_000).unwrap();
    assert!(report.passed);
    assert!(!report.strict_somewhere);
}

#[test]
fn binomial_json_round_trip_is_exact() {
    let m = binomial_kappa(&params::<Exact>(3, Payoff::Call)).unwrap();
    let back = Model::<Exact>::from_json(&m.to_json()).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.hash(), m.hash());
}

#[test]
fn shipped_fixtures_load_in_both_modes() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for seed in [11, 12, 13] {
        let path = dir.join(format!("unstable_seed{seed}.json"));
        let f = load_explicit_model::<f64>(&path).unwrap();
        let e = load_explicit_model::<Exact>(&path).unwrap();
        assert_eq!(f.seed, Some(seed));
        assert_eq!(e.family.len(), 2);
    }
}
