//! Maximum-deviation certification between a model and a reference model.
//!
//! Exact certifiers cover decision trees, rule lists and generalized additive
//! models; tree ensembles get anytime lower/upper bounds from a clique search;
//! black-box models are handled by a hierarchical optimistic optimizer.
//!
//! All geometry works in standardized coordinates: continuous features as
//! `(x - mean) / std`, categorical features as category indices, with ball
//! radii measured in the one-hot encoding. [`io`] converts at the boundary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blackbox;
pub mod certify;
pub mod error;
pub mod geometry;
pub mod io;
pub mod models;
pub mod region;
pub mod space;
pub mod synth;
pub mod types;

pub use blackbox::{
    hoo_maximize, partitioned_maximize, Noise, OptRun, Oracle, PartitionSpec, Smoothness,
};
pub use certify::{
    certify_models, Budget, CertResult, Contribution, EnsembleOptions, LeafBreakdown, Maximizer,
    SearchStats,
};
pub use error::{Error, Result};
pub use io::{CertReport, CertSpec, ModelFile};
pub use models::{AdditiveModel, DecisionTree, Model, RuleEnsemble, RuleList, Scale, TreeEnsemble};
pub use region::{CategorySet, Component, FeatureBox, Interval};
pub use space::{FeatureKind, FeatureSpace, FeatureSpec, NormalizedPoint, Point, Value};
pub use types::{deviation, CertificationSet, DeviationFn, Norm, Prediction, SumDeviation};
