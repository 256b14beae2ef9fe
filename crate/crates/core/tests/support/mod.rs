//! Brute-force reference computations. They share only the model types with
//! the library; regions, enumeration and aggregation are re-derived here.

#![allow(dead_code)]

use devcert_core::models::{Aggregation, Link, PostLink, Shape};
use devcert_core::{
    AdditiveModel, CertificationSet, Component, DecisionTree, DeviationFn, FeatureBox, FeatureKind,
    FeatureSpace, Norm, Point, Scale, TreeEnsemble, Value,
};

/// Interval with explicit openness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Iv {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Iv {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Iv {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn meet(&self, o: &Iv) -> Option<Iv> {
        let (lo, lo_open) = if self.lo > o.lo {
            (self.lo, self.lo_open)
        } else if o.lo > self.lo {
            (o.lo, o.lo_open)
        } else {
            (self.lo, self.lo_open || o.lo_open)
        };
        let (hi, hi_open) = if self.hi < o.hi {
            (self.hi, self.hi_open)
        } else if o.hi < self.hi {
            (o.hi, o.hi_open)
        } else {
            (self.hi, self.hi_open || o.hi_open)
        };
        let r = Iv {
            lo,
            hi,
            lo_open,
            hi_open,
        };
        (!r.is_empty()).then_some(r)
    }

    pub fn holds(&self, x: f64) -> bool {
        (x > self.lo || (x == self.lo && !self.lo_open))
            && (x < self.hi || (x == self.hi && !self.hi_open))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Comp {
    Iv(Iv),
    Cats(Vec<bool>),
}

pub type Region = Vec<Comp>;

pub fn region_of(b: &FeatureBox) -> Region {
    b.components()
        .iter()
        .map(|c| match c {
            Component::Interval(i) => Comp::Iv(Iv {
                lo: i.lo,
                hi: i.hi,
                lo_open: i.lo_open,
                hi_open: i.hi_open,
            }),
            Component::Categories(s) => {
                Comp::Cats((0..s.universe()).map(|k| s.contains(k)).collect())
            }
        })
        .collect()
}

pub fn domain(space: &FeatureSpace) -> Region {
    space
        .features()
        .iter()
        .enumerate()
        .map(|(j, f)| match &f.kind {
            FeatureKind::Continuous { lo, hi, .. } => Comp::Iv(Iv::closed(
                space.standardize_value(j, *lo),
                space.standardize_value(j, *hi),
            )),
            FeatureKind::Categorical { categories } => Comp::Cats(vec![true; categories.len()]),
        })
        .collect()
}

pub fn meet(a: &Region, b: &Region) -> Option<Region> {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (Comp::Iv(p), Comp::Iv(q)) => p.meet(q).map(Comp::Iv),
            (Comp::Cats(p), Comp::Cats(q)) => {
                let m: Vec<bool> = p.iter().zip(q).map(|(u, v)| *u && *v).collect();
                m.iter().any(|v| *v).then_some(Comp::Cats(m))
            }
            _ => panic!("component kinds differ"),
        })
        .collect()
}

pub fn contains(r: &Region, x: &Point) -> bool {
    r.iter().zip(x.values()).all(|(c, v)| match (c, v) {
        (Comp::Iv(i), Value::Num(x)) => i.holds(*x),
        (Comp::Cats(s), Value::Cat(k)) => s[*k],
        _ => false,
    })
}

/// Domain intersected with the l-infinity ball; a categorical coordinate is
/// pinned to the center's category unless `r >= 1`.
pub fn linf_ball(space: &FeatureSpace, c: &Point, r: f64) -> Option<Region> {
    let ball: Region = c
        .values()
        .iter()
        .zip(space.features())
        .map(|(v, f)| match (v, &f.kind) {
            (Value::Num(x), _) => Comp::Iv(Iv::closed(x - r, x + r)),
            (Value::Cat(k), FeatureKind::Categorical { categories }) => {
                Comp::Cats((0..categories.len()).map(|i| r >= 1.0 || i == *k).collect())
            }
            _ => panic!("point does not match the space"),
        })
        .collect();
    meet(&domain(space), &ball)
}

/// The set as a list of regions; only l-infinity balls are supported.
pub fn regions(space: &FeatureSpace, cert: &CertificationSet) -> Vec<Region> {
    match cert {
        CertificationSet::FullSpace => vec![domain(space)],
        CertificationSet::FiniteSet { points } => points
            .iter()
            .filter_map(|p| linf_ball(space, p, 0.0))
            .collect(),
        CertificationSet::BallUnion {
            centers,
            radius,
            norm,
        } => {
            assert_eq!(*norm, Norm::LInf, "oracle handles l-infinity balls only");
            centers
                .iter()
                .filter_map(|c| linf_ball(space, c, *radius))
                .collect()
        }
    }
}

fn sorted_grid(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mids: Vec<f64> = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    v.extend(mids);
    v.sort_by(f64::total_cmp);
    v
}

/// Per-feature grid holding every cut, the midpoints between consecutive
/// cuts and all categories: each cell of the induced partition holds a point.
pub fn grid(space: &FeatureSpace, cuts: &[Vec<f64>]) -> Vec<Vec<Value>> {
    domain(space)
        .iter()
        .zip(cuts)
        .map(|(c, cuts)| match c {
            Comp::Iv(i) => sorted_grid(cuts.clone(), i.lo, i.hi)
                .into_iter()
                .map(Value::Num)
                .collect(),
            Comp::Cats(s) => (0..s.len()).map(Value::Cat).collect(),
        })
        .collect()
}

pub fn for_each_point(grid: &[Vec<Value>], mut f: impl FnMut(&Point)) {
    let mut idx = vec![0usize; grid.len()];
    if grid.iter().any(|g| g.is_empty()) {
        return;
    }
    loop {
        let p = Point(idx.iter().zip(grid).map(|(i, g)| g[*i]).collect());
        f(&p);
        let mut j = 0;
        loop {
            if j == grid.len() {
                return;
            }
            idx[j] += 1;
            if idx[j] < grid[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn region_cuts(r: &Region, cuts: &mut [Vec<f64>]) {
    for (c, out) in r.iter().zip(cuts.iter_mut()) {
        if let Comp::Iv(i) = c {
            out.push(i.lo);
            out.push(i.hi);
        }
    }
}

pub fn tree_cuts(t: &DecisionTree, cuts: &mut [Vec<f64>]) {
    for l in t.leaves() {
        region_cuts(&region_of(&l.region), cuts);
    }
}

/// Max of `D(f(x), f0(x))` over a grid refined past every threshold of both
/// trees and every ball face.
pub fn grid_tree_tree(
    f: &DecisionTree,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
) -> f64 {
    let space = f.space();
    let regs = regions(space, cert);
    let mut cuts = vec![Vec::new(); space.len()];
    tree_cuts(f, &mut cuts);
    tree_cuts(f0, &mut cuts);
    for r in &regs {
        region_cuts(r, &mut cuts);
    }
    let g = grid(space, &cuts);
    let mut best = f64::NEG_INFINITY;
    for_each_point(&g, |x| {
        if regs.iter().any(|r| contains(r, x)) {
            let y = f.predict(x).unwrap();
            let y0 = f0.predict(x).unwrap();
            best = best.max(d.evaluate(y, y0));
        }
    });
    best
}

/// `(slope, offset, segment)` pieces of a continuous shape; segments are
/// `[b_{i-1}, b_i)`.
fn shape_pieces(shape: Option<&Shape>) -> Vec<(f64, f64, Iv)> {
    let all = Iv {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
        lo_open: true,
        hi_open: true,
    };
    let (slope, bps, vals): (f64, &[f64], Vec<f64>) = match shape {
        None => return vec![(0.0, 0.0, all)],
        Some(Shape::Linear { w }) => return vec![(*w, 0.0, all)],
        Some(Shape::PiecewiseConstant {
            breakpoints,
            values,
        }) => (0.0, breakpoints, values.clone()),
        Some(Shape::SteppedLinear {
            slope,
            breakpoints,
            values,
        }) => (*slope, breakpoints, values.clone()),
        Some(Shape::CategoryTable { .. }) => panic!("categorical shape on a continuous feature"),
    };
    (0..vals.len())
        .map(|i| {
            let lo = if i == 0 {
                f64::NEG_INFINITY
            } else {
                bps[i - 1]
            };
            let hi = bps.get(i).copied().unwrap_or(f64::INFINITY);
            (
                slope,
                vals[i],
                Iv {
                    lo,
                    hi,
                    lo_open: i == 0,
                    hi_open: true,
                },
            )
        })
        .collect()
}

fn term(f: &AdditiveModel, j: usize) -> Option<&Shape> {
    f.terms().iter().find(|t| t.feature == j).map(|t| &t.shape)
}

/// `[min, max]` (sup and inf over closures) of `sign_f * f_j - sign_g * g_j`
/// on every piece of the bin product of the two shapes within `c`.
fn feature_ranges(
    f: &AdditiveModel,
    g: Option<&AdditiveModel>,
    j: usize,
    c: &Comp,
) -> Vec<(f64, f64)> {
    match c {
        Comp::Cats(s) => (0..s.len())
            .filter(|k| s[*k])
            .map(|k| {
                let val = |m: &AdditiveModel| match term(m, j) {
                    Some(Shape::CategoryTable { values }) => values[k],
                    None => 0.0,
                    Some(_) => panic!("continuous shape on a categorical feature"),
                };
                let v = val(f) - g.map_or(0.0, val);
                (v, v)
            })
            .collect(),
        Comp::Iv(iv) => {
            let gp = match g {
                Some(g) => shape_pieces(term(g, j)),
                None => shape_pieces(None),
            };
            let mut out = Vec::new();
            for (sf, vf, segf) in shape_pieces(term(f, j)) {
                for (sg, vg, segg) in &gp {
                    let Some(p) = segf.meet(segg).and_then(|p| p.meet(iv)) else {
                        continue;
                    };
                    let (s, v) = (sf - sg, vf - vg);
                    let (a, b) = (s * p.lo + v, s * p.hi + v);
                    out.push((a.min(b), a.max(b)));
                }
            }
            out
        }
    }
}

/// Every combination of per-feature ranges as a `(min, max)` sum.
fn product_sums(ranges: &[Vec<(f64, f64)>], base: f64, mut visit: impl FnMut(f64, f64)) {
    fn rec(ranges: &[Vec<(f64, f64)>], lo: f64, hi: f64, visit: &mut dyn FnMut(f64, f64)) {
        match ranges.split_first() {
            None => visit(lo, hi),
            Some((first, rest)) => {
                for (a, b) in first {
                    rec(rest, lo + a, hi + b, visit);
                }
            }
        }
    }
    rec(ranges, base, base, &mut visit);
}

fn inverse_link(link: Link, z: f64) -> f64 {
    match link {
        Link::Identity => z,
        Link::Logit => 1.0 / (1.0 + (-z).exp()),
        Link::Log => z.exp(),
    }
}

/// Enumeration over reference leaf x set element x bin product.
pub fn enum_additive_vs_tree(
    f: &AdditiveModel,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
    scale: Scale,
) -> f64 {
    let space = f.space();
    let out = |z: f64| match scale {
        Scale::Output => inverse_link(f.link, z),
        Scale::Link => z,
    };
    let mut best = f64::NEG_INFINITY;
    for leaf in f0.leaves() {
        for r in regions(space, cert) {
            let Some(c) = meet(&region_of(&leaf.region), &r) else {
                continue;
            };
            let ranges: Vec<_> = (0..space.len())
                .map(|j| feature_ranges(f, None, j, &c[j]))
                .collect();
            product_sums(&ranges, f.intercept, |lo, hi| {
                best = best
                    .max(d.evaluate(out(hi), leaf.value))
                    .max(d.evaluate(out(lo), leaf.value));
            });
        }
    }
    best
}

/// Enumeration over set element x joint bin product of two identity-link
/// additive models, for a difference-based `D`.
pub fn enum_additive_vs_additive(
    f: &AdditiveModel,
    f0: &AdditiveModel,
    d: &DeviationFn,
    cert: &CertificationSet,
) -> f64 {
    let space = f.space();
    let mut best = f64::NEG_INFINITY;
    for c in regions(space, cert) {
        let ranges: Vec<_> = (0..space.len())
            .map(|j| feature_ranges(f, Some(f0), j, &c[j]))
            .collect();
        product_sums(&ranges, f.intercept - f0.intercept, |lo, hi| {
            best = best.max(d.evaluate(hi, 0.0)).max(d.evaluate(lo, 0.0));
        });
    }
    best
}

fn ensemble_output(e: &TreeEnsemble, values: &[f64]) -> f64 {
    let sum: f64 = values.iter().sum();
    let agg = match e.aggregation {
        Aggregation::Sum => sum,
        Aggregation::Mean => sum / values.len() as f64,
    };
    let z = agg + e.bias;
    match e.post_link {
        PostLink::Identity => z,
        PostLink::Logistic => 1.0 / (1.0 + (-z).exp()),
    }
}

/// Visits every leaf combination (one per ensemble tree plus one reference
/// leaf) whose regions intersect inside some set element, with its member
/// leaf values and the reference value.
pub fn for_each_clique(
    e: &TreeEnsemble,
    f0: &DecisionTree,
    cert: &CertificationSet,
    mut visit: impl FnMut(&[f64], f64),
) {
    let space = e.space();
    let regs = regions(space, cert);
    let mut parts: Vec<&DecisionTree> = e.trees().iter().collect();
    parts.push(f0);
    fn rec(
        parts: &[&DecisionTree],
        running: &Region,
        regs: &[Region],
        values: &mut Vec<f64>,
        visit: &mut dyn FnMut(&[f64], f64),
    ) {
        let Some((t, rest)) = parts.split_first() else {
            if regs.iter().any(|r| meet(running, r).is_some()) {
                let (y0, members) = values.split_last().expect("reference leaf chosen");
                visit(members, *y0);
            }
            return;
        };
        for l in t.leaves() {
            if let Some(next) = meet(running, &region_of(&l.region)) {
                values.push(l.value);
                rec(rest, &next, regs, values, visit);
                values.pop();
            }
        }
    }
    rec(&parts, &domain(space), &regs, &mut Vec::new(), &mut visit);
}

pub fn enum_ensemble_vs_tree(
    e: &TreeEnsemble,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_clique(e, f0, cert, |vals, y0| {
        best = best.max(d.evaluate(ensemble_output(e, vals), y0));
    });
    best
}

pub fn count_cliques(e: &TreeEnsemble, f0: &DecisionTree, cert: &CertificationSet) -> u64 {
    let mut n = 0;
    for_each_clique(e, f0, cert, |_, _| n += 1);
    n
}

/// Max over leaf pairs of `f - f0` on their intersection.
pub fn max_tree_difference(f: &DecisionTree, f0: &DecisionTree) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in f.leaves() {
        for b in f0.leaves() {
            if meet(&region_of(&a.region), &region_of(&b.region)).is_some() {
                best = best.max(a.value - b.value);
            }
        }
    }
    best
}

/// Worst-case 0-1 loss over the corners of the clipped l-infinity box of a
/// model that is linear in its continuous features.
pub fn corner_robust_loss(f: &AdditiveModel, x: &Point, label: i8, eps: f64, threshold: f64) -> u8 {
    let space = f.space();
    let dom = domain(space);
    let axes: Vec<Vec<Value>> = x
        .values()
        .iter()
        .zip(&dom)
        .map(|(v, c)| match (v, c) {
            (Value::Num(x), Comp::Iv(i)) => vec![
                Value::Num((x - eps).max(i.lo)),
                Value::Num((x + eps).min(i.hi)),
            ],
            (Value::Cat(k), Comp::Cats(s)) if eps >= 1.0 => (0..s.len())
                .map(Value::Cat)
                .collect::<Vec<_>>()
                .into_iter()
                .chain([Value::Cat(*k)])
                .collect(),
            (v, _) => vec![*v],
        })
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for_each_point(&axes, |p| {
        let z = f.predict_link(p).unwrap();
        lo = lo.min(z);
        hi = hi.max(z);
    });
    match label {
        1 => u8::from(lo <= threshold),
        _ => u8::from(hi > threshold),
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
