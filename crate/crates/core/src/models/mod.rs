//! Model classes, prediction, and the rule-to-tree conversions.

pub mod additive;
pub mod ensemble;
pub mod rules;
pub mod tree;

use std::sync::Arc;

pub use additive::{AdditiveModel, Link, Shape, Term};
pub use ensemble::{Aggregation, PostLink, TreeEnsemble};
pub use rules::{Condition, Rule, RuleEnsemble, RuleList, WeightedRule};
pub use tree::{DecisionTree, Leaf, Node, Split};

use crate::error::Result;
use crate::space::{FeatureSpace, Point};
use crate::types::Prediction;

/// Scale on which scores are compared. `Output` is the probability scale for
/// classifiers; `Link` is the additive or aggregated score before the link.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scale {
    #[default]
    Output,
    Link,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Tree(DecisionTree),
    RuleList(RuleList),
    Additive(AdditiveModel),
    Ensemble(TreeEnsemble),
    RuleEnsemble(RuleEnsemble),
}

impl Model {
    pub fn space(&self) -> &FeatureSpace {
        self.space_arc()
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        match self {
            Model::Tree(m) => m.space_arc(),
            Model::RuleList(m) => m.space_arc(),
            Model::Additive(m) => m.space_arc(),
            Model::Ensemble(m) => m.space_arc(),
            Model::RuleEnsemble(m) => m.space_arc(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Tree(_) => "tree",
            Model::RuleList(_) => "rulelist",
            Model::Additive(_) => "additive",
            Model::Ensemble(_) => "ensemble",
            Model::RuleEnsemble(_) => "ruleensemble",
        }
    }

    /// Score at a standardized point on the output scale.
    pub fn predict(&self, x: &Point) -> Result<Prediction> {
        self.predict_on(x, Scale::Output)
    }

    pub fn predict_on(&self, x: &Point, scale: Scale) -> Result<Prediction> {
        let y = match (self, scale) {
            (Model::Tree(m), _) => m.predict(x)?,
            (Model::RuleList(m), _) => m.predict(x)?,
            (Model::RuleEnsemble(m), _) => m.predict(x)?,
            (Model::Additive(m), Scale::Output) => m.predict(x)?,
            (Model::Additive(m), Scale::Link) => m.predict_link(x)?,
            (Model::Ensemble(m), Scale::Output) => m.predict(x)?,
            (Model::Ensemble(m), Scale::Link) => m.predict_raw(x)?,
        };
        Ok(Prediction::Score(y))
    }
}
