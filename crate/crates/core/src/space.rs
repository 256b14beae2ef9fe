//! Feature schemas, points, and the standardization used by every certifier.
//!
//! Points come in two flavors. A *raw* point carries feature values in the
//! units the model was trained on. A *standardized* point carries continuous
//! values as `(x - mean) / std` and categorical values as category indices.
//! All geometry and every certifier work on standardized points; the one-hot
//! [`NormalizedPoint`] is the flat encoding under which ball radii are measured.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::region::{CategorySet, Component, FeatureBox, Interval};

#[derive(Clone, Debug, PartialEq)]
pub enum FeatureKind {
    Continuous {
        lo: f64,
        hi: f64,
        mean: f64,
        std: f64,
    },
    Categorical {
        categories: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn continuous(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self::standardized(name, lo, hi, 0.0, 1.0)
    }

    pub fn standardized(name: impl Into<String>, lo: f64, hi: f64, mean: f64, std: f64) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Continuous { lo, hi, mean, std },
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical { .. })
    }

    pub fn num_categories(&self) -> usize {
        match &self.kind {
            FeatureKind::Categorical { categories } => categories.len(),
            FeatureKind::Continuous { .. } => 0,
        }
    }
}

/// A single feature value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(usize),
}

impl Value {
    pub fn as_num(self) -> Option<f64> {
        match self {
            Value::Num(x) => Some(x),
            Value::Cat(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(x) => write!(f, "{x}"),
            Value::Cat(c) => write!(f, "#{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<Value>);

impl Point {
    /// All-continuous point.
    pub fn numeric(values: &[f64]) -> Self {
        Point(values.iter().copied().map(Value::Num).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn num(&self, j: usize) -> f64 {
        match self.0[j] {
            Value::Num(x) => x,
            Value::Cat(c) => c as f64,
        }
    }
}

impl std::ops::Index<usize> for Point {
    type Output = Value;

    fn index(&self, j: usize) -> &Value {
        &self.0[j]
    }
}

/// Flat encoding: standardized continuous coordinates, one-hot blocks for
/// categorical features, in feature order.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedPoint(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpace {
    features: Vec<FeatureSpec>,
}

impl FeatureSpace {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        let mut names = HashSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate feature name `{}`",
                    f.name
                )));
            }
            match &f.kind {
                FeatureKind::Continuous { lo, hi, mean, std } => {
                    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                        return Err(Error::Schema(format!(
                            "feature `{}`: bounds [{lo}, {hi}] must be finite with lo <= hi",
                            f.name
                        )));
                    }
                    if !(*std > 0.0) || !std.is_finite() || !mean.is_finite() {
                        return Err(Error::Schema(format!(
                            "feature `{}`: std must be positive and finite",
                            f.name
                        )));
                    }
                }
                FeatureKind::Categorical { categories } => {
                    if categories.is_empty() {
                        return Err(Error::Schema(format!(
                            "feature `{}`: no categories",
                            f.name
                        )));
                    }
                    let mut seen = HashSet::new();
                    for c in categories {
                        if !seen.insert(c) {
                            return Err(Error::Schema(format!(
                                "feature `{}`: duplicate category `{c}`",
                                f.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(FeatureSpace { features })
    }

    /// `d` continuous features on `[lo, hi]` with identity standardization.
    pub fn unit_box(d: usize, lo: f64, hi: f64) -> Self {
        let features = (0..d)
            .map(|j| FeatureSpec::continuous(format!("x{j}"), lo, hi))
            .collect();
        FeatureSpace { features }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn feature(&self, j: usize) -> &FeatureSpec {
        &self.features[j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn category_index(&self, j: usize, name: &str) -> Option<usize> {
        match &self.features[j].kind {
            FeatureKind::Categorical { categories } => categories.iter().position(|c| c == name),
            FeatureKind::Continuous { .. } => None,
        }
    }

    /// Width of the flat one-hot encoding.
    pub fn encoded_len(&self) -> usize {
        self.features
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Continuous { .. } => 1,
                FeatureKind::Categorical { categories } => categories.len(),
            })
            .sum()
    }

    /// The whole feature space as a box in standardized coordinates.
    pub fn domain_box(&self) -> FeatureBox {
        FeatureBox::new(
            self.features
                .iter()
                .map(|f| match &f.kind {
                    FeatureKind::Continuous { lo, hi, mean, std } => {
                        Component::Interval(Interval::new((lo - mean) / std, (hi - mean) / std))
                    }
                    FeatureKind::Categorical { categories } => {
                        Component::Categories(CategorySet::full(categories.len()))
                    }
                })
                .collect(),
        )
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::SchemaMismatch(format!(
                "point has {} values, feature space has {}",
                x.len(),
                self.len()
            )));
        }
        for (j, (v, f)) in x.0.iter().zip(&self.features).enumerate() {
            match (v, &f.kind) {
                (Value::Num(x), FeatureKind::Continuous { .. }) if x.is_finite() => {}
                (Value::Cat(c), FeatureKind::Categorical { categories })
                    if *c < categories.len() => {}
                _ => {
                    return Err(Error::SchemaMismatch(format!(
                        "value {v} does not fit feature {j} (`{}`)",
                        f.name
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn standardize_value(&self, j: usize, x: f64) -> f64 {
        match &self.features[j].kind {
            FeatureKind::Continuous { mean, std, .. } => (x - mean) / std,
            FeatureKind::Categorical { .. } => x,
        }
    }

    pub fn destandardize_value(&self, j: usize, z: f64) -> f64 {
        match &self.features[j].kind {
            FeatureKind::Continuous { mean, std, .. } => z * std + mean,
            FeatureKind::Categorical { .. } => z,
        }
    }

    /// Scale factor between one standardized unit and one raw unit of feature `j`.
    pub fn scale(&self, j: usize) -> f64 {
        match &self.features[j].kind {
            FeatureKind::Continuous { std, .. } => *std,
            FeatureKind::Categorical { .. } => 1.0,
        }
    }

    /// Raw point to standardized point.
    pub fn standardize(&self, raw: &Point) -> Result<Point> {
        self.check_point(raw)?;
        Ok(Point(
            raw.0
                .iter()
                .enumerate()
                .map(|(j, v)| match v {
                    Value::Num(x) => Value::Num(self.standardize_value(j, *x)),
                    c => *c,
                })
                .collect(),
        ))
    }

    pub fn destandardize(&self, z: &Point) -> Result<Point> {
        if z.len() != self.len() {
            return Err(Error::SchemaMismatch("wrong arity".into()));
        }
        Ok(Point(
            z.0.iter()
                .enumerate()
                .map(|(j, v)| match v {
                    Value::Num(x) => Value::Num(self.destandardize_value(j, *x)),
                    c => *c,
                })
                .collect(),
        ))
    }

    /// Raw point to the flat one-hot encoding.
    pub fn normalize_point(&self, raw: &Point) -> Result<NormalizedPoint> {
        self.check_point(raw)?;
        let mut out = Vec::with_capacity(self.encoded_len());
        for (j, (v, f)) in raw.0.iter().zip(&self.features).enumerate() {
            match (v, &f.kind) {
                (Value::Num(x), FeatureKind::Continuous { .. }) => {
                    out.push(self.standardize_value(j, *x))
                }
                (Value::Cat(c), FeatureKind::Categorical { categories }) => {
                    out.extend((0..categories.len()).map(|k| if k == *c { 1.0 } else { 0.0 }))
                }
                _ => unreachable!("checked above"),
            }
        }
        Ok(NormalizedPoint(out))
    }

    /// Inverse of [`FeatureSpace::normalize_point`]. A one-hot block decodes to
    /// its largest coordinate.
    pub fn denormalize_point(&self, z: &NormalizedPoint) -> Result<Point> {
        if z.0.len() != self.encoded_len() {
            return Err(Error::SchemaMismatch(format!(
                "encoded point has {} coordinates, expected {}",
                z.0.len(),
                self.encoded_len()
            )));
        }
        let mut values = Vec::with_capacity(self.len());
        let mut at = 0;
        for (j, f) in self.features.iter().enumerate() {
            match &f.kind {
                FeatureKind::Continuous { .. } => {
                    values.push(Value::Num(self.destandardize_value(j, z.0[at])));
                    at += 1;
                }
                FeatureKind::Categorical { categories } => {
                    let block = &z.0[at..at + categories.len()];
                    let best =
                        block
                            .iter()
                            .enumerate()
                            .fold(0, |best, (k, v)| if *v > block[best] { k } else { best });
                    values.push(Value::Cat(best));
                    at += categories.len();
                }
            }
        }
        Ok(Point(values))
    }
}
