use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::tree::DecisionTree;
use crate::space::{FeatureSpace, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostLink {
    Identity,
    /// Logistic sigmoid, the inverse of the logit.
    Logistic,
}

impl PostLink {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            PostLink::Identity => z,
            PostLink::Logistic => 1.0 / (1.0 + (-z).exp()),
        }
    }
}

/// `post_link(aggregate(tree values) + bias)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeEnsemble {
    trees: Vec<DecisionTree>,
    pub aggregation: Aggregation,
    pub post_link: PostLink,
    pub bias: f64,
}

impl TreeEnsemble {
    pub fn new(
        trees: Vec<DecisionTree>,
        aggregation: Aggregation,
        post_link: PostLink,
        bias: f64,
    ) -> Result<Self> {
        let Some(first) = trees.first() else {
            return Err(Error::Schema("ensemble needs at least one tree".into()));
        };
        if trees.iter().any(|t| t.space() != first.space()) {
            return Err(Error::SchemaMismatch(
                "ensemble trees use different feature spaces".into(),
            ));
        }
        if !bias.is_finite() {
            return Err(Error::Schema("ensemble bias is not finite".into()));
        }
        Ok(TreeEnsemble {
            trees,
            aggregation,
            post_link,
            bias,
        })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn space(&self) -> &FeatureSpace {
        self.trees[0].space()
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        self.trees[0].space_arc()
    }

    /// Aggregated score before the post link, from a sum of tree values.
    pub fn raw_from_sum(&self, sum: f64) -> f64 {
        match self.aggregation {
            Aggregation::Mean => sum / self.trees.len() as f64 + self.bias,
            Aggregation::Sum => sum + self.bias,
        }
    }

    pub fn predict_raw(&self, x: &Point) -> Result<f64> {
        let mut sum = 0.0;
        for t in &self.trees {
            sum += t.predict(x)?;
        }
        Ok(self.raw_from_sum(sum))
    }

    pub fn predict(&self, x: &Point) -> Result<f64> {
        Ok(self.post_link.apply(self.predict_raw(x)?))
    }
}
