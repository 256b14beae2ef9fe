//! Certification set specifications: `full`, `points:FILE.csv`,
//! `balls:FILE.csv:r=R[:p=inf|1|2]`. Radii are in standardized units;
//! `r=inf` is the full space.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::dataset::read_points;
use crate::error::{Error, Result};
use crate::space::FeatureSpace;
use crate::types::{CertificationSet, Norm};

#[derive(Clone, Debug, PartialEq)]
pub enum CertSpec {
    Full,
    Points(PathBuf),
    Balls {
        path: PathBuf,
        radius: f64,
        norm: Norm,
    },
}

impl CertSpec {
    /// The same centers with another radius; `None` unless this is a ball spec.
    pub fn with_radius(&self, r: f64) -> Option<CertSpec> {
        match self {
            CertSpec::Balls { path, norm, .. } => Some(CertSpec::Balls {
                path: path.clone(),
                radius: r,
                norm: *norm,
            }),
            _ => None,
        }
    }

    pub fn load(&self, space: &FeatureSpace) -> Result<CertificationSet> {
        let cert = match self {
            CertSpec::Full => CertificationSet::FullSpace,
            CertSpec::Points(path) => CertificationSet::finite(read_points(path, space)?),
            CertSpec::Balls { path, radius, norm } => {
                CertificationSet::balls_or_full(read_points(path, space)?, *radius, *norm)?
            }
        };
        cert.validate(space)?;
        Ok(cert)
    }
}

impl FromStr for CertSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidArgument(format!("certset `{s}`: {why}"));
        if s == "full" {
            return Ok(CertSpec::Full);
        }
        if let Some(path) = s.strip_prefix("points:") {
            if path.is_empty() {
                return Err(bad("missing file"));
            }
            return Ok(CertSpec::Points(PathBuf::from(path)));
        }
        let Some(rest) = s.strip_prefix("balls:") else {
            return Err(bad(
                "expected `full`, `points:FILE` or `balls:FILE:r=R[:p=P]`",
            ));
        };
        let mut parts: Vec<&str> = rest.split(':').collect();
        let mut radius = None;
        let mut norm = Norm::LInf;
        while let Some(last) = parts.last() {
            if let Some(r) = last.strip_prefix("r=") {
                radius = Some(
                    r.parse::<f64>()
                        .map_err(|_| bad("radius is not a number"))?,
                );
            } else if let Some(p) = last.strip_prefix("p=") {
                norm = p.parse()?;
            } else {
                break;
            }
            parts.pop();
        }
        let path = parts.join(":");
        if path.is_empty() {
            return Err(bad("missing file"));
        }
        let radius = radius.ok_or_else(|| bad("missing `r=`"))?;
        if !(radius >= 0.0) {
            return Err(bad("radius must be non-negative"));
        }
        Ok(CertSpec::Balls {
            path: PathBuf::from(path),
            radius,
            norm,
        })
    }
}

impl fmt::Display for CertSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertSpec::Full => write!(f, "full"),
            CertSpec::Points(p) => write!(f, "points:{}", p.display()),
            CertSpec::Balls { path, radius, norm } => {
                write!(f, "balls:{}:r={radius}:p={norm}", path.display())
            }
        }
    }
}
