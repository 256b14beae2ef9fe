//! Picks the certifier for a model pair.
//!
//! Rule lists are certified as trees and rule ensembles as tree ensembles.
//! Pairs with the tree on the model side and an additive model or ensemble
//! on the reference side are certified with the roles swapped, which needs a
//! symmetric deviation function.

use super::additive::{certify_additive_vs_additive, certify_additive_vs_tree};
use super::ensemble::{breakdown_ensemble, certify_ensemble_vs_tree_streaming, EnsembleOptions};
use super::tree::certify_tree_tree;
use super::{CertResult, LeafBreakdown};
use crate::error::{Error, Result};
use crate::models::{AdditiveModel, DecisionTree, Link, Model, Scale, TreeEnsemble};
use crate::types::{CertificationSet, DeviationFn};

enum Canon {
    Tree(DecisionTree),
    Additive(AdditiveModel),
    Ensemble(TreeEnsemble),
}

fn canon(m: &Model) -> Result<Canon> {
    Ok(match m {
        Model::Tree(t) => Canon::Tree(t.clone()),
        Model::RuleList(r) => Canon::Tree(r.to_tree()?),
        Model::Additive(a) => Canon::Additive(a.clone()),
        Model::Ensemble(e) => Canon::Ensemble(e.clone()),
        Model::RuleEnsemble(r) => Canon::Ensemble(r.to_ensemble()?),
    })
}

fn unsupported(f: &Model, f0: &Model, why: &str) -> Error {
    Error::UnsupportedPair(format!(
        "cannot certify a {} model against a {} reference{why}",
        f.kind(),
        f0.kind()
    ))
}

/// Maximizer scores and the signed range seen from the other side.
fn swap_roles(mut r: CertResult) -> CertResult {
    for m in &mut r.maximizers {
        std::mem::swap(&mut m.model_score, &mut m.reference_score);
        m.reference_leaf = None;
    }
    r.breakdown.clear();
    r.signed_range = r.signed_range.map(|(hi, lo)| (-lo, -hi));
    r
}

fn with_identity_link(a: &AdditiveModel) -> AdditiveModel {
    let mut a = a.clone();
    a.link = Link::Identity;
    a
}

/// Certifies `D(f(x), f0(x))` over `cert` with the certifier matching the
/// pair. `progress(lower, upper)` is called by anytime searches.
pub fn certify_models(
    f: &Model,
    f0: &Model,
    d: &DeviationFn,
    cert: &CertificationSet,
    opts: &EnsembleOptions,
    progress: &mut dyn FnMut(f64, f64),
) -> Result<CertResult> {
    if f.space() != f0.space() {
        return Err(Error::SchemaMismatch(
            "model and reference files declare different feature spaces".into(),
        ));
    }
    // A monotone D is non-negative, so 0 is a valid lower bound before any
    // candidate is found.
    let floor = if d.monotone { 0.0 } else { f64::NEG_INFINITY };
    let progress = &mut |lo: f64, hi: f64| progress(lo.max(floor), hi);
    let mut r = certify_pair(f, f0, d, cert, opts, progress)?;
    r.lower = r.lower.max(floor);
    Ok(r)
}

fn certify_pair(
    f: &Model,
    f0: &Model,
    d: &DeviationFn,
    cert: &CertificationSet,
    opts: &EnsembleOptions,
    progress: &mut dyn FnMut(f64, f64),
) -> Result<CertResult> {
    let swapped = || {
        if d.symmetric {
            Ok(())
        } else {
            Err(unsupported(
                f,
                f0,
                " with an asymmetric deviation function; swap --model and --reference",
            ))
        }
    };
    match (canon(f)?, canon(f0)?) {
        (Canon::Tree(a), Canon::Tree(b)) => certify_tree_tree(&a, &b, d, cert),
        (Canon::Additive(a), Canon::Tree(b)) => certify_additive_vs_tree(&a, &b, d, cert, opts.scale),
        (Canon::Tree(a), Canon::Additive(b)) => {
            swapped()?;
            certify_additive_vs_tree(&b, &a, d, cert, opts.scale).map(swap_roles)
        }
        (Canon::Additive(a), Canon::Additive(b)) => match opts.scale {
            Scale::Link => certify_additive_vs_additive(&with_identity_link(&a), &with_identity_link(&b), d, cert),
            Scale::Output if a.link == Link::Identity && b.link == Link::Identity => {
                certify_additive_vs_additive(&a, &b, d, cert)
            }
            Scale::Output => Err(Error::AssumptionViolated(
                "two additive models with non-identity links can only be compared on the link scale (--scale link)"
                    .into(),
            )),
        },
        (Canon::Ensemble(e), Canon::Tree(b)) => certify_ensemble_vs_tree_streaming(&e, &b, d, cert, opts, progress),
        (Canon::Tree(a), Canon::Ensemble(e)) => {
            swapped()?;
            certify_ensemble_vs_tree_streaming(&e, &a, d, cert, opts, progress).map(swap_roles)
        }
        (Canon::Ensemble(_), Canon::Additive(_)) | (Canon::Additive(_), Canon::Ensemble(_)) => {
            Err(unsupported(f, f0, "; ensembles are certified against a single tree"))
        }
        (Canon::Ensemble(_), Canon::Ensemble(_)) => {
            Err(unsupported(f, f0, "; the reference must be a single tree"))
        }
    }
}

/// Per-reference-leaf maxima; the reference must be a tree or rule list.
pub fn breakdown_models(
    f: &Model,
    f0: &Model,
    d: &DeviationFn,
    cert: &CertificationSet,
    opts: &EnsembleOptions,
) -> Result<Vec<LeafBreakdown>> {
    let reference = match canon(f0)? {
        Canon::Tree(t) => t,
        _ => return Err(unsupported(f, f0, "; the breakdown needs a tree reference")),
    };
    let r0 = Model::Tree(reference.clone());
    match canon(f)? {
        Canon::Ensemble(e) => breakdown_ensemble(&e, &reference, d, cert, opts),
        _ => Ok(certify_models(f, &r0, d, cert, opts, &mut |_, _| {})?.breakdown),
    }
}
