//! Certification sets, deviation functions, and predictions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{FeatureSpace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Norm {
    L1,
    L2,
    LInf,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::LInf => "inf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Norm::L1),
            "2" => Ok(Norm::L2),
            "inf" | "Inf" | "infinity" => Ok(Norm::LInf),
            other => Err(Error::InvalidArgument(format!("unknown norm `{other}`"))),
        }
    }
}

/// The set of inputs over which deviation is maximized. Points and centers
/// are standardized; the radius is measured in the one-hot encoding.
#[derive(Clone, Debug, PartialEq)]
pub enum CertificationSet {
    FullSpace,
    FiniteSet {
        points: Vec<Point>,
    },
    BallUnion {
        centers: Vec<Point>,
        radius: f64,
        norm: Norm,
    },
}

impl CertificationSet {
    pub fn finite(points: Vec<Point>) -> Self {
        CertificationSet::FiniteSet { points }
    }

    pub fn balls(centers: Vec<Point>, radius: f64, norm: Norm) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be non-negative, got {radius}"
            )));
        }
        Ok(CertificationSet::BallUnion {
            centers,
            radius,
            norm,
        })
    }

    /// `r = inf` maps to the full space.
    pub fn balls_or_full(centers: Vec<Point>, radius: f64, norm: Norm) -> Result<Self> {
        if radius.is_infinite() && radius > 0.0 {
            Ok(CertificationSet::FullSpace)
        } else {
            Self::balls(centers, radius, norm)
        }
    }

    /// Number of points or balls; `None` for the full space.
    pub fn count(&self) -> Option<usize> {
        match self {
            CertificationSet::FullSpace => None,
            CertificationSet::FiniteSet { points } => Some(points.len()),
            CertificationSet::BallUnion { centers, .. } => Some(centers.len()),
        }
    }

    pub fn validate(&self, space: &FeatureSpace) -> Result<()> {
        let domain = space.domain_box();
        let pts = match self {
            CertificationSet::FullSpace => return Ok(()),
            CertificationSet::FiniteSet { points } => points,
            CertificationSet::BallUnion { centers, .. } => centers,
        };
        for (i, p) in pts.iter().enumerate() {
            space.check_point(p)?;
            if !domain.contains(p) {
                return Err(Error::SchemaMismatch(format!(
                    "point {i} lies outside the feature space bounds"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub enum DeviationKind {
    AbsDiff,
    PowerDiff { p: f64 },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for DeviationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviationKind::AbsDiff => write!(f, "AbsDiff"),
            DeviationKind::PowerDiff { p } => write!(f, "PowerDiff({p})"),
            DeviationKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A deviation measure `D(y, y0)` with its declared structural properties.
///
/// `monotone`: `D(y, y) = 0` and `D` grows as `y` moves away from `y0` in
/// either direction. `difference`: `D` depends on `y - y0` only.
#[derive(Clone, Debug)]
pub struct DeviationFn {
    kind: DeviationKind,
    pub monotone: bool,
    pub difference: bool,
    pub symmetric: bool,
    abstain_value: Option<f64>,
    max_value: Option<f64>,
}

impl DeviationFn {
    pub fn abs_diff() -> Self {
        DeviationFn {
            kind: DeviationKind::AbsDiff,
            monotone: true,
            difference: true,
            symmetric: true,
            abstain_value: None,
            max_value: None,
        }
    }

    pub fn power_diff(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "power must be positive, got {p}"
            )));
        }
        Ok(DeviationFn {
            kind: DeviationKind::PowerDiff { p },
            ..Self::abs_diff()
        })
    }

    pub fn custom(
        evaluator: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        monotone: bool,
        difference: bool,
        symmetric: bool,
    ) -> Self {
        DeviationFn {
            kind: DeviationKind::Custom(Arc::new(evaluator)),
            monotone,
            difference,
            symmetric,
            abstain_value: None,
            max_value: None,
        }
    }

    /// Declares the largest value `D` can take (e.g. 1 for probabilities).
    pub fn with_max(mut self, max: f64) -> Self {
        self.max_value = Some(max);
        self
    }

    /// Value reported whenever either model abstains. Must lie strictly
    /// between 0 and the declared maximum.
    pub fn with_abstain(mut self, d: f64) -> Result<Self> {
        let upper = self.max_value.unwrap_or(f64::INFINITY);
        if !(d > 0.0 && d < upper) {
            return Err(Error::InvalidArgument(format!(
                "abstain value {d} must lie strictly between 0 and {upper}"
            )));
        }
        self.abstain_value = Some(d);
        Ok(self)
    }

    pub fn kind(&self) -> &DeviationKind {
        &self.kind
    }

    pub fn abstain_value(&self) -> Option<f64> {
        self.abstain_value
    }

    pub fn max_value(&self) -> Option<f64> {
        self.max_value
    }

    pub fn evaluate(&self, y: f64, y0: f64) -> f64 {
        match &self.kind {
            DeviationKind::AbsDiff => (y - y0).abs(),
            DeviationKind::PowerDiff { p } => (y - y0).abs().powf(*p),
            DeviationKind::Custom(f) => f(y, y0),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DeviationKind::AbsDiff => "abs".into(),
            DeviationKind::PowerDiff { p } => format!("pow:{p}"),
            DeviationKind::Custom(_) => "custom".into(),
        }
    }
}

impl FromStr for DeviationFn {
    type Err = Error;

    /// `abs` or `pow:P`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "abs" {
            return Ok(DeviationFn::abs_diff());
        }
        if let Some(p) = s.strip_prefix("pow:") {
            let p: f64 = p
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad power in `{s}`")))?;
            return DeviationFn::power_diff(p);
        }
        Err(Error::InvalidArgument(format!(
            "unknown deviation `{s}` (expected abs or pow:P)"
        )))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prediction {
    Score(f64),
    Abstain,
}

impl Prediction {
    pub fn score(self) -> Option<f64> {
        match self {
            Prediction::Score(y) => Some(y),
            Prediction::Abstain => None,
        }
    }
}

/// `D(a, b)`, with abstention mapped to the configured abstain value.
pub fn deviation(d: &DeviationFn, a: Prediction, b: Prediction) -> Result<f64> {
    match (a, b) {
        (Prediction::Score(y), Prediction::Score(y0)) => Ok(d.evaluate(y, y0)),
        _ => d.abstain_value.ok_or(Error::AbstainUnconfigured),
    }
}

/// Separable multi-output deviation: the sum of per-output scalar deviations.
#[derive(Clone, Debug)]
pub struct SumDeviation(pub Vec<DeviationFn>);

impl SumDeviation {
    pub fn evaluate(&self, y: &[Prediction], y0: &[Prediction]) -> Result<f64> {
        if y.len() != self.0.len() || y0.len() != self.0.len() {
            return Err(Error::SchemaMismatch(format!(
                "expected {} outputs, got {} and {}",
                self.0.len(),
                y.len(),
                y0.len()
            )));
        }
        self.0
            .iter()
            .zip(y.iter().zip(y0))
            .map(|(d, (a, b))| deviation(d, *a, *b))
            .sum()
    }
}
