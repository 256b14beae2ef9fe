//! Box algebra and certification-set predicates.
//!
//! Everything here is in standardized coordinates. A categorical feature
//! sits at one-hot distance 1 (l-infinity) from any other category, so an
//! l-infinity ball of radius `r < 1` pins it to the center's category and
//! `r >= 1` frees it.

use crate::error::{Error, Result};
use crate::region::{CategorySet, Component, FeatureBox, Interval};
use crate::space::{Point, Value};
use crate::types::{CertificationSet, Norm};

/// Which points or balls of a certification set a box touches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeetResult {
    pub nonempty: bool,
    pub witnesses: Vec<usize>,
    /// Set when an l1/l2 ball was replaced by its bounding l-infinity box.
    pub relaxed: bool,
}

impl MeetResult {
    fn from_witnesses(witnesses: Vec<usize>, relaxed: bool) -> Self {
        MeetResult {
            nonempty: !witnesses.is_empty(),
            witnesses,
            relaxed,
        }
    }
}

fn same_shape(a: &FeatureBox, b: &FeatureBox) -> Result<()> {
    let ok = a.dim() == b.dim()
        && a.components()
            .iter()
            .zip(b.components())
            .all(|(x, y)| match (x, y) {
                (Component::Interval(_), Component::Interval(_)) => true,
                (Component::Categories(s), Component::Categories(t)) => {
                    s.universe() == t.universe()
                }
                _ => false,
            });
    if ok {
        Ok(())
    } else {
        Err(Error::SchemaMismatch(
            "boxes are over different feature spaces".into(),
        ))
    }
}

/// Componentwise intersection; `Ok(None)` when empty.
pub fn box_intersect(a: &FeatureBox, b: &FeatureBox) -> Result<Option<FeatureBox>> {
    same_shape(a, b)?;
    Ok(a.intersect(b))
}

/// The l-infinity ball of radius `r` around `center`, shaped like `like`.
pub fn ball_box(like: &FeatureBox, center: &Point, r: f64) -> FeatureBox {
    FeatureBox::new(
        like.components()
            .iter()
            .zip(center.values())
            .map(|(c, v)| match (c, v) {
                (Component::Interval(_), Value::Num(x)) => {
                    Component::Interval(Interval::new(x - r, x + r))
                }
                (Component::Categories(s), Value::Cat(k)) => {
                    if r < 1.0 {
                        Component::Categories(CategorySet::singleton(s.universe(), *k))
                    } else {
                        Component::Categories(CategorySet::full(s.universe()))
                    }
                }
                _ => panic!("center does not match the box schema"),
            })
            .collect(),
    )
}

/// Whether box `b` meets the l-infinity ball around `center` (no allocation).
pub fn box_meets_ball(b: &FeatureBox, center: &Point, r: f64) -> bool {
    b.components()
        .iter()
        .zip(center.values())
        .all(|(c, v)| match (c, v) {
            (Component::Interval(i), Value::Num(x)) => i.intersects(&Interval::new(x - r, x + r)),
            (Component::Categories(s), Value::Cat(k)) => {
                if r < 1.0 {
                    s.contains(*k)
                } else {
                    !s.is_empty()
                }
            }
            _ => false,
        })
}

/// `b` intersected with the l-infinity ball around `center`.
pub fn clip_box_to_ball(b: &FeatureBox, center: &Point, r: f64) -> Option<FeatureBox> {
    b.intersect(&ball_box(b, center, r))
}

/// Exact test of a box against a certification set. l1 and l2 balls are
/// rejected; see [`box_meets_certset_relaxed`].
pub fn box_meets_certset(b: &FeatureBox, cert: &CertificationSet) -> Result<MeetResult> {
    if let CertificationSet::BallUnion { norm, .. } = cert {
        if *norm != Norm::LInf {
            return Err(Error::UnsupportedNorm(*norm));
        }
    }
    Ok(box_meets_certset_relaxed(b, cert))
}

/// Like [`box_meets_certset`] but replaces l1/l2 balls with their bounding
/// l-infinity box. The answer over-approximates, so upper bounds stay valid.
pub fn box_meets_certset_relaxed(b: &FeatureBox, cert: &CertificationSet) -> MeetResult {
    if b.is_empty() {
        return MeetResult::from_witnesses(Vec::new(), false);
    }
    match cert {
        CertificationSet::FullSpace => MeetResult {
            nonempty: true,
            witnesses: Vec::new(),
            relaxed: false,
        },
        CertificationSet::FiniteSet { points } => MeetResult::from_witnesses(
            points
                .iter()
                .enumerate()
                .filter(|(_, p)| b.contains(p))
                .map(|(i, _)| i)
                .collect(),
            false,
        ),
        CertificationSet::BallUnion {
            centers,
            radius,
            norm,
        } => MeetResult::from_witnesses(
            centers
                .iter()
                .enumerate()
                .filter(|(_, c)| box_meets_ball(b, c, *radius))
                .map(|(i, _)| i)
                .collect(),
            *norm != Norm::LInf,
        ),
    }
}

/// The region of certification-set element `i` (a ball's bounding box or a
/// degenerate point box) intersected with `b`.
pub fn clip_to_element(b: &FeatureBox, cert: &CertificationSet, i: usize) -> Option<FeatureBox> {
    match cert {
        CertificationSet::FullSpace => Some(b.clone()),
        CertificationSet::FiniteSet { points } => clip_box_to_ball(b, &points[i], 0.0),
        CertificationSet::BallUnion {
            centers, radius, ..
        } => clip_box_to_ball(b, &centers[i], *radius),
    }
}

/// Distance in the one-hot encoding between two standardized points.
pub fn encoded_distance(a: &Point, b: &Point, norm: Norm) -> f64 {
    let mut acc = 0.0f64;
    for (x, y) in a.values().iter().zip(b.values()) {
        let (diff, count) = match (x, y) {
            (Value::Num(x), Value::Num(y)) => ((x - y).abs(), 1.0),
            (Value::Cat(x), Value::Cat(y)) => (if x == y { 0.0 } else { 1.0 }, 2.0),
            _ => (f64::INFINITY, 1.0),
        };
        match norm {
            Norm::LInf => acc = acc.max(diff),
            Norm::L1 => acc += count * diff,
            Norm::L2 => acc += count * diff * diff,
        }
    }
    if norm == Norm::L2 {
        acc.sqrt()
    } else {
        acc
    }
}

/// Maximum of `w . x` over the lp ball of radius `r` around `center`:
/// `w . center + r * ||w||_q` with `1/p + 1/q = 1`.
pub fn linear_max_over_lp_ball(w: &[f64], center: &[f64], r: f64, p: Norm) -> Result<f64> {
    if w.len() != center.len() {
        return Err(Error::SchemaMismatch(format!(
            "weight vector has {} entries, center has {}",
            w.len(),
            center.len()
        )));
    }
    let base: f64 = w.iter().zip(center).map(|(a, b)| a * b).sum();
    let dual = match p {
        Norm::LInf => w.iter().map(|a| a.abs()).sum::<f64>(),
        Norm::L2 => w.iter().map(|a| a * a).sum::<f64>().sqrt(),
        Norm::L1 => w.iter().fold(0.0f64, |m, a| m.max(a.abs())),
    };
    Ok(base + r * dual)
}
