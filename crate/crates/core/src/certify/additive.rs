use std::collections::HashMap;

use crate::certify::{
    element_regions, relax_lower, same_space, CertResult, Contribution, LeafBreakdown, Maximizer,
    TIE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::models::additive::{segment, AdditiveModel, Link, Shape};
use crate::models::{DecisionTree, Scale};
use crate::region::{CategorySet, Component, FeatureBox, Interval};
use crate::space::{Point, Value};
use crate::types::{CertificationSet, DeviationFn};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    fn sign(self) -> f64 {
        match self {
            Sense::Max => 1.0,
            Sense::Min => -1.0,
        }
    }
}

/// Extremum of the additive score over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremum {
    /// Link-scale value, intercept included.
    pub value: f64,
    /// Product of the per-feature extremizing sets.
    pub argmax: FeatureBox,
    /// Per-term extremum in term order.
    pub terms: Vec<Contribution>,
    pub segment_evals: u64,
}

/// Extremum of one shape over one box component, with its extremizing set
/// and the number of segments scanned.
fn extremize_shape(shape: &Shape, comp: &Component, sense: Sense) -> (f64, Component, u64) {
    let s = sense.sign();
    match (shape, comp) {
        (Shape::Linear { w }, Component::Interval(i)) => {
            let (v, at) = if w * s > 0.0 {
                (w * i.hi, Interval::point(i.hi))
            } else if w * s < 0.0 {
                (w * i.lo, Interval::point(i.lo))
            } else {
                (0.0, *i)
            };
            (v, Component::Interval(at), 1)
        }
        (
            Shape::PiecewiseConstant {
                breakpoints,
                values,
            },
            Component::Interval(i),
        ) => {
            let mut best = f64::NAN;
            let mut run: Option<(Interval, Interval)> = None;
            let mut extending = false;
            for (k, v) in values.iter().enumerate() {
                let part = segment(breakpoints, k).intersect(i);
                if part.is_empty() {
                    extending = false;
                    continue;
                }
                if run.is_none() || s * v > s * best {
                    best = *v;
                    run = Some((part, part));
                    extending = true;
                } else if extending && *v == best {
                    if let Some(r) = run.as_mut() {
                        r.1 = part;
                    }
                } else {
                    extending = false;
                }
            }
            let (first, last) = run.expect("non-empty interval meets some segment");
            let at = Interval::with_openness(first.lo, last.hi, first.lo_open, last.hi_open);
            (best, Component::Interval(at), values.len() as u64)
        }
        (
            Shape::SteppedLinear {
                slope,
                breakpoints,
                values,
            },
            Component::Interval(i),
        ) => {
            let mut best: Option<(f64, Interval)> = None;
            for (k, v) in values.iter().enumerate() {
                let part = segment(breakpoints, k).intersect(i);
                if part.is_empty() {
                    continue;
                }
                let cand = if slope * s > 0.0 {
                    (v + slope * part.hi, Interval::point(part.hi))
                } else if slope * s < 0.0 {
                    (v + slope * part.lo, Interval::point(part.lo))
                } else {
                    (*v, part)
                };
                if best.as_ref().is_none_or(|b| s * cand.0 > s * b.0) {
                    best = Some(cand);
                }
            }
            let (v, at) = best.expect("non-empty interval meets some segment");
            (v, Component::Interval(at), values.len() as u64)
        }
        (Shape::CategoryTable { values }, Component::Categories(set)) => {
            let best = set.iter().map(|k| values[k]).fold(f64::NAN, |b, v| {
                if b.is_nan() || s * v > s * b {
                    v
                } else {
                    b
                }
            });
            let at = CategorySet::from_indices(
                set.universe(),
                set.iter().filter(|k| values[*k] == best),
            );
            (best, Component::Categories(at), values.len() as u64)
        }
        _ => unreachable!("shape kinds are checked against the feature space"),
    }
}

/// Maximizes or minimizes the additive score over `s`, one feature at a time.
pub fn extremize_additive(f: &AdditiveModel, s: &FeatureBox, sense: Sense) -> Result<Extremum> {
    if s.dim() != f.space().len() {
        return Err(Error::SchemaMismatch(
            "region does not match the model's feature space".into(),
        ));
    }
    if s.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut argmax = s.clone();
    let mut value = f.intercept;
    let mut terms = Vec::with_capacity(f.terms().len());
    let mut evals = 0;
    for t in f.terms() {
        let (v, at, n) = extremize_shape(&t.shape, s.component(t.feature), sense);
        value += v;
        evals += n;
        *argmax.component_mut(t.feature) = at.clone();
        terms.push(Contribution {
            feature: t.feature,
            contribution: v,
            values: at,
        });
    }
    Ok(Extremum {
        value,
        argmax,
        terms,
        segment_evals: evals,
    })
}

/// Per-feature extrema over `region`, largest magnitude first.
pub fn feature_contributions(
    f: &AdditiveModel,
    region: &FeatureBox,
    sense: Sense,
) -> Result<Vec<Contribution>> {
    let mut terms = extremize_additive(f, region, sense)?.terms;
    terms.sort_by(|a, b| {
        b.contribution
            .abs()
            .total_cmp(&a.contribution.abs())
            .then(a.feature.cmp(&b.feature))
    });
    Ok(terms)
}

fn to_scale(link: Link, scale: Scale, z: f64) -> f64 {
    match scale {
        Scale::Output => link.inverse(z),
        Scale::Link => z,
    }
}

fn require_monotone(d: &DeviationFn) -> Result<()> {
    if d.monotone {
        Ok(())
    } else {
        Err(Error::AssumptionViolated(
            "the deviation function must be declared monotone for additive certification".into(),
        ))
    }
}

/// Both extremizations of one region and the deviations they give against `y0`.
struct RegionEval {
    hi: Extremum,
    lo: Extremum,
}

/// Exact maximum of `D(f(x), y0)` over `s` by extremizing in both directions.
pub fn certify_additive_vs_constant(
    f: &AdditiveModel,
    y0: f64,
    d: &DeviationFn,
    s: &FeatureBox,
    scale: Scale,
) -> Result<CertResult> {
    require_monotone(d)?;
    let hi = extremize_additive(f, s, Sense::Max)?;
    let lo = extremize_additive(f, s, Sense::Min)?;
    let y_hi = to_scale(f.link, scale, hi.value);
    let y_lo = to_scale(f.link, scale, lo.value);
    let (dev_hi, dev_lo) = (d.evaluate(y_hi, y0), d.evaluate(y_lo, y0));
    let best = dev_hi.max(dev_lo);
    let mut result = CertResult::exact(best);
    result.stats.extremizations = 2;
    result.stats.segment_evals = hi.segment_evals + lo.segment_evals;
    result.signed_range = Some((y_hi - y0, y_lo - y0));
    for (dev, y, ext) in [(dev_hi, y_hi, &hi), (dev_lo, y_lo, &lo)] {
        if dev >= best - TIE_TOLERANCE {
            if result.contributions.is_empty() {
                result.contributions = ext.terms.clone();
            }
            result.maximizers.push(Maximizer {
                region: ext.argmax.clone(),
                model_score: y,
                reference_score: y0,
                deviation: dev,
                reference_leaf: None,
                witness: None,
            });
        }
    }
    Ok(result)
}

/// Exact maximum deviation of an additive model from a tree: one pair of
/// extremizations per reference leaf and certification-set element it meets.
pub fn certify_additive_vs_tree(
    f: &AdditiveModel,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
    scale: Scale,
) -> Result<CertResult> {
    same_space(f.space(), f0.space())?;
    require_monotone(d)?;
    let mut cache: HashMap<Vec<u64>, RegionEval> = HashMap::new();
    let mut result = CertResult::exact(f64::NEG_INFINITY);
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<(Maximizer, Vec<Contribution>)> = Vec::new();
    let (mut signed_hi, mut signed_lo) = (f64::NEG_INFINITY, f64::INFINITY);

    for (m, leaf) in f0.leaves().iter().enumerate() {
        let regions = element_regions(&leaf.region, cert);
        if regions.is_empty() {
            continue;
        }
        let y0 = leaf.value;
        let mut group: Option<LeafBreakdown> = None;
        for (witness, region) in regions {
            let ev = match cache.entry(region.key()) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let hi = extremize_additive(f, &region, Sense::Max)?;
                    let lo = extremize_additive(f, &region, Sense::Min)?;
                    result.stats.extremizations += 2;
                    result.stats.segment_evals += hi.segment_evals + lo.segment_evals;
                    e.insert(RegionEval { hi, lo })
                }
            };
            let y_hi = to_scale(f.link, scale, ev.hi.value);
            let y_lo = to_scale(f.link, scale, ev.lo.value);
            signed_hi = signed_hi.max(y_hi - y0);
            signed_lo = signed_lo.min(y_lo - y0);
            let g = group.get_or_insert_with(|| LeafBreakdown {
                leaf: m,
                region: leaf.region.clone(),
                reference_score: y0,
                model_min: f64::INFINITY,
                model_max: f64::NEG_INFINITY,
                deviation: f64::NEG_INFINITY,
                maximizer: region.clone(),
            });
            g.model_min = g.model_min.min(y_lo);
            g.model_max = g.model_max.max(y_hi);
            for (y, ext) in [(y_hi, &ev.hi), (y_lo, &ev.lo)] {
                let dev = d.evaluate(y, y0);
                if dev > g.deviation {
                    g.deviation = dev;
                    g.maximizer = ext.argmax.clone();
                }
                if dev >= best - TIE_TOLERANCE {
                    best = best.max(dev);
                    ties.retain(|t| t.0.deviation >= best - TIE_TOLERANCE);
                    let duplicate = ties.iter().any(|t| t.0.region == ext.argmax);
                    if !duplicate {
                        ties.push((
                            Maximizer {
                                region: ext.argmax.clone(),
                                model_score: y,
                                reference_score: y0,
                                deviation: dev,
                                reference_leaf: Some(m),
                                witness,
                            },
                            ext.terms.clone(),
                        ));
                    }
                }
            }
        }
        result.breakdown.extend(group);
    }
    if result.breakdown.is_empty() {
        return Err(Error::EmptyCertSet);
    }
    result.lower = best;
    result.upper = best;
    result.signed_range = Some((signed_hi, signed_lo));
    if let Some((_, terms)) = ties.first() {
        result.contributions = terms.clone();
    }
    result.maximizers = ties.into_iter().map(|t| t.0).collect();
    relax_lower(&mut result, cert, |x| {
        let y = match scale {
            Scale::Output => f.predict(x)?,
            Scale::Link => f.predict_link(x)?,
        };
        Ok(d.evaluate(y, f0.predict(x)?))
    })?;
    Ok(result)
}

/// Exact maximum deviation between two identity-link additive models, via
/// the additive difference `f - f0`.
pub fn certify_additive_vs_additive(
    f: &AdditiveModel,
    f0: &AdditiveModel,
    d: &DeviationFn,
    cert: &CertificationSet,
) -> Result<CertResult> {
    same_space(f.space(), f0.space())?;
    if f.link != Link::Identity || f0.link != Link::Identity {
        return Err(Error::AssumptionViolated(
            "additive-vs-additive certification needs identity links on both models".into(),
        ));
    }
    if !d.difference || !d.monotone {
        return Err(Error::AssumptionViolated(
            "the deviation function must depend only on the difference and be monotone".into(),
        ));
    }
    let h = f.difference(f0)?;
    let regions = element_regions(&f.space().domain_box(), cert);
    if regions.is_empty() {
        return Err(Error::EmptyCertSet);
    }
    let mut seen = HashMap::new();
    let mut result = CertResult::exact(f64::NEG_INFINITY);
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<(Maximizer, Vec<Contribution>)> = Vec::new();
    let (mut signed_hi, mut signed_lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (witness, region) in regions {
        if seen.insert(region.key(), ()).is_some() {
            continue;
        }
        let hi = extremize_additive(&h, &region, Sense::Max)?;
        let lo = extremize_additive(&h, &region, Sense::Min)?;
        result.stats.extremizations += 2;
        result.stats.segment_evals += hi.segment_evals + lo.segment_evals;
        signed_hi = signed_hi.max(hi.value);
        signed_lo = signed_lo.min(lo.value);
        for ext in [&hi, &lo] {
            let dev = d.evaluate(ext.value, 0.0);
            if dev >= best - TIE_TOLERANCE {
                best = best.max(dev);
                ties.retain(|t| t.0.deviation >= best - TIE_TOLERANCE);
                if ties.iter().all(|t| t.0.region != ext.argmax) {
                    let probe = ext.argmax.center();
                    ties.push((
                        Maximizer {
                            region: ext.argmax.clone(),
                            model_score: f.predict(&probe)?,
                            reference_score: f0.predict(&probe)?,
                            deviation: dev,
                            reference_leaf: None,
                            witness,
                        },
                        ext.terms.clone(),
                    ));
                }
            }
        }
    }
    result.lower = best;
    result.upper = best;
    result.signed_range = Some((signed_hi, signed_lo));
    if let Some((_, terms)) = ties.first() {
        result.contributions = terms.clone();
    }
    result.maximizers = ties.into_iter().map(|t| t.0).collect();
    relax_lower(&mut result, cert, |x| {
        Ok(d.evaluate(f.predict(x)?, f0.predict(x)?))
    })?;
    Ok(result)
}

/// l-infinity box of radius `eps` around a standardized point, clipped to
/// the domain. Categorical features stay pinned unless `eps >= 1`.
fn eps_box(f: &AdditiveModel, x: &Point, eps: f64) -> Result<FeatureBox> {
    let b = FeatureBox::new(
        x.values()
            .iter()
            .enumerate()
            .map(|(j, v)| match v {
                Value::Num(z) => Component::Interval(Interval::new(z - eps, z + eps)),
                Value::Cat(k) => {
                    let n = f.space().feature(j).num_categories();
                    if eps < 1.0 {
                        Component::Categories(CategorySet::singleton(n, *k))
                    } else {
                        Component::Categories(CategorySet::full(n))
                    }
                }
            })
            .collect(),
    );
    b.intersect(&f.space().domain_box())
        .ok_or(Error::EmptyRegion)
}

/// Worst-case 0-1 loss over the l-infinity ball of radius `eps` around `x`.
/// A point is predicted positive when its link-scale score exceeds
/// `threshold`. Labels are `+1` or `-1`.
pub fn robust_loss_additive(
    f: &AdditiveModel,
    x: &Point,
    label: i8,
    eps: f64,
    threshold: f64,
) -> Result<u8> {
    f.space().check_point(x)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    let b = eps_box(f, x, eps)?;
    match label {
        1 => Ok(u8::from(
            extremize_additive(f, &b, Sense::Min)?.value <= threshold,
        )),
        -1 => Ok(u8::from(
            extremize_additive(f, &b, Sense::Max)?.value > threshold,
        )),
        other => Err(Error::InvalidArgument(format!(
            "labels must be +1 or -1, got {other}"
        ))),
    }
}

/// `1 - mean robust loss` over a labelled dataset.
pub fn robust_accuracy(
    f: &AdditiveModel,
    points: &[Point],
    labels: &[i8],
    eps: f64,
    threshold: f64,
) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "robust accuracy needs at least one point".into(),
        ));
    }
    let mut losses = 0u64;
    for (x, y) in points.iter().zip(labels) {
        losses += u64::from(robust_loss_additive(f, x, *y, eps, threshold)?);
    }
    Ok(1.0 - losses as f64 / points.len() as f64)
}
