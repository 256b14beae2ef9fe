//! Maximum-deviation certifiers for each supported model pair.

pub mod additive;
pub mod dispatch;
pub mod ensemble;
pub mod tree;

pub use additive::{
    certify_additive_vs_additive, certify_additive_vs_constant, certify_additive_vs_tree,
    extremize_additive, feature_contributions, robust_accuracy, robust_loss_additive, Extremum,
    Sense,
};
pub use dispatch::{breakdown_models, certify_models};
pub use ensemble::{
    breakdown_ensemble, build_leaf_graph, certify_ensemble_vs_tree,
    certify_ensemble_vs_tree_streaming, heuristic_bound, Budget, EnsembleOptions, LeafGraph,
    Objective, PartialClique, Search,
};
pub use tree::{breakdown_by_reference_leaf, certify_tree_tree};

use crate::error::{Error, Result};
use crate::geometry::clip_to_element;
use crate::region::{Component, FeatureBox};
use crate::space::{FeatureSpace, Point};
use crate::types::{CertificationSet, Norm};

/// Scores within this distance of the maximum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// One region on which the maximum deviation is attained.
#[derive(Clone, Debug, PartialEq)]
pub struct Maximizer {
    pub region: FeatureBox,
    pub model_score: f64,
    pub reference_score: f64,
    pub deviation: f64,
    pub reference_leaf: Option<usize>,
    /// Ball or point of the certification set the region was clipped to.
    pub witness: Option<usize>,
}

/// Maximum deviation restricted to one leaf of the reference tree.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafBreakdown {
    pub leaf: usize,
    pub region: FeatureBox,
    pub reference_score: f64,
    pub model_min: f64,
    pub model_max: f64,
    pub deviation: f64,
    pub maximizer: FeatureBox,
}

/// Extremum of one shape function over a region.
#[derive(Clone, Debug, PartialEq)]
pub struct Contribution {
    pub feature: usize,
    pub contribution: f64,
    pub values: Component,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub edges_evaluated: u64,
    pub extremizations: u64,
    pub segment_evals: u64,
    pub nodes_expanded: u64,
    pub cliques_completed: u64,
    pub heuristic_evals: u64,
    pub pruned: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertResult {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub maximizers: Vec<Maximizer>,
    pub breakdown: Vec<LeafBreakdown>,
    pub contributions: Vec<Contribution>,
    pub stats: SearchStats,
    /// l1/l2 balls were replaced by their bounding boxes; `upper` is still an
    /// upper bound and `lower` comes from evaluating the centers.
    pub certset_relaxed: bool,
    /// Largest and smallest signed difference `f - f0`, when computed.
    pub signed_range: Option<(f64, f64)>,
    /// `(lower, upper)` after every search step, when requested.
    pub trace: Vec<(f64, f64)>,
}

impl CertResult {
    pub(crate) fn exact(value: f64) -> Self {
        CertResult {
            lower: value,
            upper: value,
            exact: true,
            maximizers: Vec::new(),
            breakdown: Vec::new(),
            contributions: Vec::new(),
            stats: SearchStats::default(),
            certset_relaxed: false,
            signed_range: None,
            trace: Vec::new(),
        }
    }

    pub fn value(&self) -> f64 {
        self.upper
    }
}

pub(crate) fn same_space(a: &FeatureSpace, b: &FeatureSpace) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SchemaMismatch(
            "model and reference use different feature spaces".into(),
        ))
    }
}

pub(crate) fn is_relaxed(cert: &CertificationSet) -> bool {
    matches!(cert, CertificationSet::BallUnion { norm, .. } if *norm != Norm::LInf)
}

/// Regions of `b` cut by each certification-set element it meets, with the
/// element index. The full space yields `b` itself.
pub(crate) fn element_regions(
    b: &FeatureBox,
    cert: &CertificationSet,
) -> Vec<(Option<usize>, FeatureBox)> {
    let meet = crate::geometry::box_meets_certset_relaxed(b, cert);
    if !meet.nonempty {
        return Vec::new();
    }
    if let CertificationSet::FullSpace = cert {
        return vec![(None, b.clone())];
    }
    meet.witnesses
        .into_iter()
        .filter_map(|i| clip_to_element(b, cert, i).map(|r| (Some(i), r)))
        .collect()
}

/// For relaxed balls, `lower` becomes the best deviation among the centers,
/// which do lie in the certification set.
pub(crate) fn relax_lower(
    result: &mut CertResult,
    cert: &CertificationSet,
    eval: impl Fn(&Point) -> Result<f64>,
) -> Result<()> {
    if let CertificationSet::BallUnion { centers, .. } = cert {
        if is_relaxed(cert) {
            let mut best = f64::NEG_INFINITY;
            for c in centers {
                best = best.max(eval(c)?);
            }
            result.certset_relaxed = true;
            result.lower = best.min(result.upper);
            result.exact = result.lower == result.upper;
        }
    }
    Ok(())
}
