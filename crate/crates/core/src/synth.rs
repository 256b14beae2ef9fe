//! Seeded random models for tests, benchmarks and fixtures.
//!
//! Thresholds and breakpoints are drawn strictly inside the current region so
//! every split produces two non-empty children.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::models::tree::split_regions;
use crate::models::{
    AdditiveModel, Aggregation, Condition, DecisionTree, Link, Node, PostLink, Rule, RuleEnsemble,
    RuleList, Shape, Split, Term, TreeEnsemble, WeightedRule,
};
use crate::region::{CategorySet, Component, FeatureBox};
use crate::space::{FeatureSpace, FeatureSpec, Point};

/// `d_num` continuous features on `[0, 1]` followed by `d_cat` categorical
/// features with `n_cat` categories each, identity normalization.
pub fn space(d_num: usize, d_cat: usize, n_cat: usize) -> Arc<FeatureSpace> {
    let mut features: Vec<FeatureSpec> = (0..d_num)
        .map(|j| FeatureSpec::continuous(format!("x{j}"), 0.0, 1.0))
        .collect();
    features.extend(
        (0..d_cat).map(|j| {
            FeatureSpec::categorical(format!("c{j}"), (0..n_cat).map(|k| format!("v{k}")))
        }),
    );
    Arc::new(FeatureSpace::new(features).expect("distinct names"))
}

fn splittable(region: &FeatureBox) -> Vec<usize> {
    region
        .components()
        .iter()
        .enumerate()
        .filter(|(_, c)| match c {
            Component::Interval(i) => i.width() > 1e-6,
            Component::Categories(s) => s.len() > 1,
        })
        .map(|(j, _)| j)
        .collect()
}

fn random_split<R: Rng + ?Sized>(rng: &mut R, region: &FeatureBox, j: usize) -> Split {
    match region.component(j) {
        Component::Interval(i) => {
            let t = i.lo + i.width() * rng.random_range(0.1..0.9);
            Split::Threshold(t)
        }
        Component::Categories(s) => {
            let mut members: Vec<usize> = s.iter().collect();
            members.shuffle(rng);
            let take = rng.random_range(1..members.len());
            Split::Categories(CategorySet::from_indices(
                s.universe(),
                members[..take].iter().copied(),
            ))
        }
    }
}

fn build<R: Rng + ?Sized>(
    rng: &mut R,
    region: &FeatureBox,
    leaves: usize,
    values: (f64, f64),
) -> Node {
    let candidates = splittable(region);
    if leaves <= 1 || candidates.is_empty() {
        return Node::Leaf(rng.random_range(values.0..=values.1));
    }
    let j = candidates[rng.random_range(0..candidates.len())];
    let split = random_split(rng, region, j);
    let (lr, rr) = split_regions(region, j, &split);
    let nl = rng.random_range(1..leaves);
    let left = build(rng, &lr, nl, values);
    let right = build(rng, &rr, leaves - nl, values);
    Node::split(j, split, left, right)
}

/// Tree with up to `leaves` leaves (fewer only when regions become too thin to
/// split) and leaf values uniform in `values`.
pub fn tree<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FeatureSpace>,
    leaves: usize,
    values: (f64, f64),
) -> DecisionTree {
    let root = build(rng, &space.domain_box(), leaves.max(1), values);
    DecisionTree::from_structure(space.clone(), root).expect("generated tree is valid")
}

pub fn ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FeatureSpace>,
    trees: usize,
    leaves: usize,
    aggregation: Aggregation,
    post_link: PostLink,
) -> TreeEnsemble {
    let values = match post_link {
        PostLink::Identity => (0.0, 1.0),
        PostLink::Logistic => (-1.0, 1.0),
    };
    let members = (0..trees)
        .map(|_| tree(rng, space, leaves, values))
        .collect();
    TreeEnsemble::new(members, aggregation, post_link, 0.0).expect("generated ensemble is valid")
}

fn breakpoints<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (1..bins)
        .map(|_| lo + (hi - lo) * rng.random_range(0.02..0.98))
        .collect();
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Random shape for feature `j`: a linear, piecewise-constant or stepped
/// term on continuous features (at most `max_bins` pieces), a table on
/// categorical ones.
pub fn shape<R: Rng + ?Sized>(
    rng: &mut R,
    space: &FeatureSpace,
    j: usize,
    max_bins: usize,
) -> Shape {
    let dom = space.domain_box();
    match dom.component(j) {
        Component::Categories(s) => Shape::CategoryTable {
            values: (0..s.universe())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect(),
        },
        Component::Interval(i) => {
            let bins = rng.random_range(1..=max_bins.max(1));
            let bps = breakpoints(rng, i.lo, i.hi, bins);
            let values: Vec<f64> = (0..=bps.len())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect();
            match rng.random_range(0..3) {
                0 => Shape::Linear {
                    w: rng.random_range(-1.0..1.0),
                },
                1 => Shape::PiecewiseConstant {
                    breakpoints: bps,
                    values,
                },
                _ => Shape::SteppedLinear {
                    slope: rng.random_range(-1.0..1.0),
                    breakpoints: bps,
                    values,
                },
            }
        }
    }
}

/// GAM with one term per feature (each term kept with probability 0.8).
pub fn additive<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FeatureSpace>,
    max_bins: usize,
    link: Link,
) -> AdditiveModel {
    let mut terms = Vec::new();
    for j in 0..space.len() {
        if rng.random_bool(0.8) {
            terms.push(Term {
                feature: j,
                shape: shape(rng, space, j, max_bins),
            });
        }
    }
    AdditiveModel::new(space.clone(), rng.random_range(-0.5..0.5), terms, link)
        .expect("generated GAM is valid")
}

/// GLM: one linear term per continuous feature and a table per categorical.
pub fn glm<R: Rng + ?Sized>(rng: &mut R, space: &Arc<FeatureSpace>, link: Link) -> AdditiveModel {
    let terms = (0..space.len())
        .map(|j| Term {
            feature: j,
            shape: if space.feature(j).is_categorical() {
                shape(rng, space, j, 1)
            } else {
                Shape::Linear {
                    w: rng.random_range(-2.0..2.0),
                }
            },
        })
        .collect();
    AdditiveModel::new(space.clone(), rng.random_range(-0.5..0.5), terms, link)
        .expect("generated GLM is valid")
}

fn condition<R: Rng + ?Sized>(rng: &mut R, space: &FeatureSpace) -> Condition {
    let dom = space.domain_box();
    let j = rng.random_range(0..space.len());
    match random_split(rng, &dom, j) {
        Split::Threshold(t) if rng.random_bool(0.5) => Condition::Le {
            feature: j,
            threshold: t,
        },
        Split::Threshold(t) => Condition::Gt {
            feature: j,
            threshold: t,
        },
        Split::Categories(categories) => Condition::In {
            feature: j,
            categories,
        },
    }
}

pub fn rule_list<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FeatureSpace>,
    rules: usize,
) -> RuleList {
    let rules = (0..rules)
        .map(|_| Rule {
            conditions: vec![condition(rng, space)],
            output: rng.random_range(0.0..1.0),
        })
        .collect();
    RuleList::new(space.clone(), rules, rng.random_range(0.0..1.0))
        .expect("generated rule list is valid")
}

/// Rule ensemble whose rules hold 1 to `max_conditions` conditions each.
pub fn rule_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<FeatureSpace>,
    rules: usize,
    max_conditions: usize,
) -> RuleEnsemble {
    let rules = (0..rules)
        .map(|_| WeightedRule {
            conditions: (0..rng.random_range(1..=max_conditions.max(1)))
                .map(|_| condition(rng, space))
                .collect(),
            weight: rng.random_range(-1.0..1.0),
        })
        .collect();
    RuleEnsemble::new(space.clone(), rng.random_range(-0.5..0.5), rules)
        .expect("generated rule ensemble is valid")
}

pub fn points<R: Rng + ?Sized>(rng: &mut R, space: &FeatureSpace, n: usize) -> Vec<Point> {
    let dom = space.domain_box();
    (0..n).map(|_| dom.sample(rng)).collect()
}
