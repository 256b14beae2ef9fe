use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Interval;
use crate::space::{FeatureKind, FeatureSpace, Point, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Identity,
    Logit,
    Log,
}

impl Link {
    /// `g^-1`: additive score to output scale.
    pub fn inverse(self, z: f64) -> f64 {
        match self {
            Link::Identity => z,
            Link::Logit => 1.0 / (1.0 + (-z).exp()),
            Link::Log => z.exp(),
        }
    }

    /// `g`: output scale to additive score.
    pub fn apply(self, y: f64) -> f64 {
        match self {
            Link::Identity => y,
            Link::Logit => (y / (1.0 - y)).ln(),
            Link::Log => y.ln(),
        }
    }
}

/// One-dimensional shape function. Breakpoints split the line into segments
/// `[b_i, b_{i+1})`; the value index at `x` is the number of breakpoints `<= x`.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Linear {
        w: f64,
    },
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `slope * x + values[segment]`. Arises as the difference of a linear
    /// and a piecewise-constant term.
    SteppedLinear {
        slope: f64,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Value per category index.
    CategoryTable {
        values: Vec<f64>,
    },
}

pub fn segment_index(breakpoints: &[f64], x: f64) -> usize {
    breakpoints.partition_point(|b| *b <= x)
}

/// Segment `i` as an interval with a closed left and open right end.
pub fn segment(breakpoints: &[f64], i: usize) -> Interval {
    let lo = if i == 0 {
        f64::NEG_INFINITY
    } else {
        breakpoints[i - 1]
    };
    let hi = breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
    Interval::with_openness(lo, hi, false, true)
}

impl Shape {
    pub fn eval(&self, v: Value) -> f64 {
        match (self, v) {
            (Shape::Linear { w }, Value::Num(x)) => w * x,
            (
                Shape::PiecewiseConstant {
                    breakpoints,
                    values,
                },
                Value::Num(x),
            ) => values[segment_index(breakpoints, x)],
            (
                Shape::SteppedLinear {
                    slope,
                    breakpoints,
                    values,
                },
                Value::Num(x),
            ) => slope * x + values[segment_index(breakpoints, x)],
            (Shape::CategoryTable { values }, Value::Cat(k)) => values[k],
            _ => f64::NAN,
        }
    }

    /// Number of pieces the extremizer scans.
    pub fn num_segments(&self) -> usize {
        match self {
            Shape::Linear { .. } => 1,
            Shape::PiecewiseConstant { values, .. } | Shape::SteppedLinear { values, .. } => {
                values.len()
            }
            Shape::CategoryTable { values } => values.len(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, Shape::CategoryTable { .. })
    }

    /// `(slope, breakpoints, values)` view of a continuous shape.
    fn stepped(&self) -> (f64, Vec<f64>, Vec<f64>) {
        match self {
            Shape::Linear { w } => (*w, Vec::new(), vec![0.0]),
            Shape::PiecewiseConstant {
                breakpoints,
                values,
            } => (0.0, breakpoints.clone(), values.clone()),
            Shape::SteppedLinear {
                slope,
                breakpoints,
                values,
            } => (*slope, breakpoints.clone(), values.clone()),
            Shape::CategoryTable { .. } => unreachable!("categorical shape"),
        }
    }

    fn from_stepped(slope: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Shape {
        if breakpoints.is_empty() && values[0] == 0.0 {
            Shape::Linear { w: slope }
        } else if slope == 0.0 {
            Shape::PiecewiseConstant {
                breakpoints,
                values,
            }
        } else {
            Shape::SteppedLinear {
                slope,
                breakpoints,
                values,
            }
        }
    }

    /// `self - other` on the same feature.
    pub fn difference(&self, other: &Shape) -> Shape {
        if let (Shape::CategoryTable { values: a }, Shape::CategoryTable { values: b }) =
            (self, other)
        {
            return Shape::CategoryTable {
                values: a.iter().zip(b).map(|(x, y)| x - y).collect(),
            };
        }
        let (sa, ba, va) = self.stepped();
        let (sb, bb, vb) = other.stepped();
        let mut merged: Vec<f64> = ba.iter().chain(&bb).copied().collect();
        merged.sort_by(f64::total_cmp);
        merged.dedup();
        // Segment i of the merged grid starts at merged[i - 1]; probe there.
        let values = (0..=merged.len())
            .map(|i| {
                let probe = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    merged[i - 1]
                };
                va[segment_index(&ba, probe)] - vb[segment_index(&bb, probe)]
            })
            .collect();
        Shape::from_stepped(sa - sb, merged, values)
    }

    pub fn negate(&self) -> Shape {
        match self {
            Shape::Linear { w } => Shape::Linear { w: -w },
            Shape::PiecewiseConstant {
                breakpoints,
                values,
            } => Shape::PiecewiseConstant {
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| -v).collect(),
            },
            Shape::SteppedLinear {
                slope,
                breakpoints,
                values,
            } => Shape::SteppedLinear {
                slope: -slope,
                breakpoints: breakpoints.clone(),
                values: values.iter().map(|v| -v).collect(),
            },
            Shape::CategoryTable { values } => Shape::CategoryTable {
                values: values.iter().map(|v| -v).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub feature: usize,
    pub shape: Shape,
}

/// `g^-1(intercept + sum_j f_j(x_j))` over standardized coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveModel {
    space: Arc<FeatureSpace>,
    pub intercept: f64,
    terms: Vec<Term>,
    pub link: Link,
}

impl AdditiveModel {
    pub fn new(
        space: Arc<FeatureSpace>,
        intercept: f64,
        terms: Vec<Term>,
        link: Link,
    ) -> Result<Self> {
        if !intercept.is_finite() {
            return Err(Error::Schema("intercept is not finite".into()));
        }
        let mut seen = HashSet::new();
        let domain = space.domain_box();
        for t in &terms {
            let j = t.feature;
            if j >= space.len() {
                return Err(Error::Schema(format!("term on unknown feature index {j}")));
            }
            let name = &space.feature(j).name;
            if !seen.insert(j) {
                return Err(Error::Schema(format!(
                    "feature `{name}` has more than one term"
                )));
            }
            match (&t.shape, &space.feature(j).kind) {
                (Shape::Linear { w }, FeatureKind::Continuous { .. }) => {
                    if !w.is_finite() {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: weight is not finite"
                        )));
                    }
                }
                (
                    Shape::PiecewiseConstant {
                        breakpoints,
                        values,
                    }
                    | Shape::SteppedLinear {
                        breakpoints,
                        values,
                        ..
                    },
                    FeatureKind::Continuous { .. },
                ) => {
                    if values.len() != breakpoints.len() + 1 {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: {} breakpoints need {} values, got {}",
                            breakpoints.len(),
                            breakpoints.len() + 1,
                            values.len()
                        )));
                    }
                    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: breakpoints must be strictly ascending"
                        )));
                    }
                    let bounds = domain.interval(j);
                    if breakpoints.iter().any(|b| !bounds.contains(*b)) {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: breakpoints must lie within the feature bounds"
                        )));
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: shape values must be finite"
                        )));
                    }
                    if let Shape::SteppedLinear { slope, .. } = &t.shape {
                        if !slope.is_finite() {
                            return Err(Error::Schema(format!(
                                "feature `{name}`: slope is not finite"
                            )));
                        }
                    }
                }
                (Shape::CategoryTable { values }, FeatureKind::Categorical { categories }) => {
                    if values.len() != categories.len() {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: table has {} values for {} categories",
                            values.len(),
                            categories.len()
                        )));
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Schema(format!(
                            "feature `{name}`: table values must be finite"
                        )));
                    }
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "feature `{name}`: shape kind does not match the feature kind"
                    )))
                }
            }
        }
        Ok(AdditiveModel {
            space,
            intercept,
            terms,
            link,
        })
    }

    /// Constant model `g^-1(intercept)`.
    pub fn constant(space: Arc<FeatureSpace>, intercept: f64, link: Link) -> Self {
        AdditiveModel {
            space,
            intercept,
            terms: Vec::new(),
            link,
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_for(&self, feature: usize) -> Option<&Shape> {
        self.terms
            .iter()
            .find(|t| t.feature == feature)
            .map(|t| &t.shape)
    }

    /// Additive score before the inverse link.
    pub fn predict_link(&self, x: &Point) -> Result<f64> {
        self.space.check_point(x)?;
        Ok(self.intercept
            + self
                .terms
                .iter()
                .map(|t| t.shape.eval(x[t.feature]))
                .sum::<f64>())
    }

    pub fn predict(&self, x: &Point) -> Result<f64> {
        Ok(self.link.inverse(self.predict_link(x)?))
    }

    /// Term-by-term `self - other`, on the link scale. Links are ignored; the
    /// caller decides whether the difference is meaningful.
    pub fn difference(&self, other: &AdditiveModel) -> Result<AdditiveModel> {
        if self.space != other.space {
            return Err(Error::SchemaMismatch(
                "additive models use different feature spaces".into(),
            ));
        }
        let mut terms = Vec::new();
        for j in 0..self.space.len() {
            let shape = match (self.term_for(j), other.term_for(j)) {
                (Some(a), Some(b)) => a.difference(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.negate(),
                (None, None) => continue,
            };
            terms.push(Term { feature: j, shape });
        }
        AdditiveModel::new(
            self.space.clone(),
            self.intercept - other.intercept,
            terms,
            Link::Identity,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::FeatureSpec;

    #[test]
    fn linear_sum() {
        let space = Arc::new(FeatureSpace::unit_box(2, 0.0, 1.0));
        let m = AdditiveModel::new(
            space,
            0.0,
            vec![
                Term {
                    feature: 0,
                    shape: Shape::Linear { w: 1.0 },
                },
                Term {
                    feature: 1,
                    shape: Shape::Linear { w: 2.0 },
                },
            ],
            Link::Identity,
        )
        .unwrap();
        assert_eq!(m.predict(&Point::numeric(&[1.0, 1.0])).unwrap(), 3.0);
    }

    #[test]
    fn piecewise_segments_are_left_closed() {
        let s = Shape::PiecewiseConstant {
            breakpoints: vec![0.5],
            values: vec![0.1, 0.4],
        };
        assert_eq!(s.eval(Value::Num(0.49)), 0.1);
        assert_eq!(s.eval(Value::Num(0.5)), 0.4);
    }

    #[test]
    fn rejects_bad_terms() {
        let space = Arc::new(
            FeatureSpace::new(vec![
                FeatureSpec::continuous("x", 0.0, 1.0),
                FeatureSpec::categorical("c", ["a", "b"]),
            ])
            .unwrap(),
        );
        let bad = |shape: Shape, feature: usize| {
            AdditiveModel::new(
                space.clone(),
                0.0,
                vec![Term { feature, shape }],
                Link::Identity,
            )
            .is_err()
        };
        assert!(bad(
            Shape::PiecewiseConstant {
                breakpoints: vec![0.5, 0.2],
                values: vec![0.0; 3]
            },
            0
        ));
        assert!(bad(
            Shape::PiecewiseConstant {
                breakpoints: vec![2.0],
                values: vec![0.0; 2]
            },
            0
        ));
        assert!(bad(Shape::CategoryTable { values: vec![0.0] }, 1));
        assert!(bad(Shape::Linear { w: 1.0 }, 1));
        assert!(AdditiveModel::new(
            space.clone(),
            0.0,
            vec![
                Term {
                    feature: 0,
                    shape: Shape::Linear { w: 1.0 }
                },
                Term {
                    feature: 0,
                    shape: Shape::Linear { w: 2.0 }
                }
            ],
            Link::Identity
        )
        .is_err());
    }

    #[test]
    fn difference_of_linear_and_steps() {
        let a = Shape::Linear { w: 2.0 };
        let b = Shape::PiecewiseConstant {
            breakpoints: vec![0.5],
            values: vec![1.0, 3.0],
        };
        let d = a.difference(&b);
        for x in [0.0, 0.3, 0.5, 0.9] {
            assert_eq!(
                d.eval(Value::Num(x)),
                a.eval(Value::Num(x)) - b.eval(Value::Num(x))
            );
        }
    }

    #[test]
    fn link_round_trip() {
        for link in [Link::Identity, Link::Logit, Link::Log] {
            let y = 0.3;
            assert!((link.inverse(link.apply(y)) - y).abs() < 1e-15);
        }
    }
}
