//! Certifiers against brute-force enumeration on small random instances.

mod support;

use std::sync::Arc;

use devcert_core::certify::{
    certify_additive_vs_additive, certify_additive_vs_tree, certify_ensemble_vs_tree,
    certify_tree_tree,
};
use devcert_core::models::{Aggregation, Link, PostLink};
use devcert_core::{
    synth, CertificationSet, DecisionTree, DeviationFn, EnsembleOptions, FeatureSpace, Norm, Scale,
};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TOL: f64 = 1e-9;

fn space(r: &mut StdRng) -> Arc<FeatureSpace> {
    let d = r.random_range(1..=3);
    let cat = usize::from(d >= 2 && r.random_bool(0.5));
    synth::space(d - cat, cat, 3)
}

fn tree(r: &mut StdRng, space: &Arc<FeatureSpace>, max_leaves: usize) -> DecisionTree {
    let leaves = r.random_range(1..=max_leaves);
    synth::tree(r, space, leaves, (-1.0, 1.0))
}

fn certset(r: &mut StdRng, space: &FeatureSpace) -> CertificationSet {
    match r.random_range(0..3) {
        0 => CertificationSet::FullSpace,
        1 => CertificationSet::finite(synth::points(r, space, 4)),
        _ => {
            let radius = [0.0, 0.1, 0.4, 1.2][r.random_range(0..4)];
            CertificationSet::balls(synth::points(r, space, 2), radius, Norm::LInf).unwrap()
        }
    }
}

fn deviation(r: &mut StdRng) -> DeviationFn {
    if r.random_bool(0.5) {
        DeviationFn::abs_diff()
    } else {
        DeviationFn::power_diff(2.0).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_tree_matches_grid(seed in any::<u64>()) {
        let mut r = StdRng::seed_from_u64(seed);
        let space = space(&mut r);
        let f = tree(&mut r, &space, 12);
        let f0 = tree(&mut r, &space, 12);
        let cert = certset(&mut r, &space);
        let d = deviation(&mut r);
        let res = certify_tree_tree(&f, &f0, &d, &cert).unwrap();
        let want = support::grid_tree_tree(&f, &f0, &d, &cert);
        prop_assert!(res.exact);
        prop_assert!((res.lower - want).abs() <= TOL, "lower {} vs {}", res.lower, want);
        prop_assert!((res.upper - want).abs() <= TOL, "upper {} vs {}", res.upper, want);
    }

    #[test]
    fn tree_tree_is_symmetric_for_abs(seed in any::<u64>()) {
        let mut r = StdRng::seed_from_u64(seed);
        let space = space(&mut r);
        let f = tree(&mut r, &space, 10);
        let f0 = tree(&mut r, &space, 10);
        let cert = certset(&mut r, &space);
        let d = DeviationFn::abs_diff();
        let a = certify_tree_tree(&f, &f0, &d, &cert).unwrap();
        let b = certify_tree_tree(&f0, &f, &d, &cert).unwrap();
        prop_assert!((a.upper - b.upper).abs() <= TOL);
    }

    #[test]
    fn additive_vs_tree_matches_enumeration(seed in any::<u64>(), logit in any::<bool>()) {
        let mut r = StdRng::seed_from_u64(seed);
        let space = space(&mut r);
        let link = if logit { Link::Logit } else { Link::Identity };
        let f = synth::additive(&mut r, &space, 6, link);
        let f0 = tree(&mut r, &space, 6);
        let cert = certset(&mut r, &space);
        let d = deviation(&mut r);
        let res = certify_additive_vs_tree(&f, &f0, &d, &cert, Scale::Output).unwrap();
        let want = support::enum_additive_vs_tree(&f, &f0, &d, &cert, Scale::Output);
        prop_assert!((res.lower - want).abs() <= TOL, "lower {} vs {}", res.lower, want);
        prop_assert!((res.upper - want).abs() <= TOL, "upper {} vs {}", res.upper, want);
    }

    #[test]
    fn additive_vs_additive_matches_enumeration(seed in any::<u64>()) {
        let mut r = StdRng::seed_from_u64(seed);
        let space = space(&mut r);
        let f = synth::additive(&mut r, &space, 6, Link::Identity);
        let f0 = synth::additive(&mut r, &space, 6, Link::Identity);
        let cert = certset(&mut r, &space);
        let d = DeviationFn::abs_diff();
        let res = certify_additive_vs_additive(&f, &f0, &d, &cert).unwrap();
        let want = support::enum_additive_vs_additive(&f, &f0, &d, &cert);
        prop_assert!((res.lower - want).abs() <= TOL, "lower {} vs {}", res.lower, want);
        prop_assert!((res.upper - want).abs() <= TOL, "upper {} vs {}", res.upper, want);
    }

    #[test]
    fn ensemble_vs_tree_matches_enumeration(seed in any::<u64>()) {
        let mut r = StdRng::seed_from_u64(seed);
        let space = space(&mut r);
        let agg = if r.random_bool(0.5) { Aggregation::Sum } else { Aggregation::Mean };
        let link = if r.random_bool(0.5) { PostLink::Identity } else { PostLink::Logistic };
        let k = r.random_range(1..=3);
        let l = r.random_range(2..=4);
        let e = synth::ensemble(&mut r, &space, k, l, agg, link);
        let f0 = tree(&mut r, &space, 4);
        let cert = if r.random_bool(0.5) {
            CertificationSet::FullSpace
        } else {
            CertificationSet::balls(synth::points(&mut r, &space, 2), 0.3, Norm::LInf).unwrap()
        };
        let d = DeviationFn::abs_diff();
        let res = certify_ensemble_vs_tree(&e, &f0, &d, &cert, &EnsembleOptions::default()).unwrap();
        let want = support::enum_ensemble_vs_tree(&e, &f0, &d, &cert);
        prop_assert!(res.exact);
        prop_assert!((res.lower - want).abs() <= TOL, "lower {} vs {}", res.lower, want);
        prop_assert!((res.upper - want).abs() <= TOL, "upper {} vs {}", res.upper, want);
    }
}
