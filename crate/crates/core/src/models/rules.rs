use std::sync::Arc;

use crate::error::{Error, Result};
use crate::models::ensemble::{Aggregation, PostLink, TreeEnsemble};
use crate::models::tree::{DecisionTree, Node, Split};
use crate::region::CategorySet;
use crate::space::{FeatureKind, FeatureSpace, Point, Value};

/// Single-feature predicate.
#[derive(Clone, Debug, PartialEq)]
pub enum Condition {
    Le {
        feature: usize,
        threshold: f64,
    },
    Gt {
        feature: usize,
        threshold: f64,
    },
    In {
        feature: usize,
        categories: CategorySet,
    },
}

impl Condition {
    pub fn feature(&self) -> usize {
        match self {
            Condition::Le { feature, .. }
            | Condition::Gt { feature, .. }
            | Condition::In { feature, .. } => *feature,
        }
    }

    pub fn holds(&self, x: &Point) -> bool {
        match (self, x[self.feature()]) {
            (Condition::Le { threshold, .. }, Value::Num(v)) => v <= *threshold,
            (Condition::Gt { threshold, .. }, Value::Num(v)) => v > *threshold,
            (Condition::In { categories, .. }, Value::Cat(k)) => categories.contains(k),
            _ => false,
        }
    }

    /// Node that sends satisfying points to `pass` and the rest to `fail`.
    fn node(&self, pass: Node, fail: Node) -> Node {
        match self {
            Condition::Le { feature, threshold } => {
                Node::split(*feature, Split::Threshold(*threshold), pass, fail)
            }
            Condition::Gt { feature, threshold } => {
                Node::split(*feature, Split::Threshold(*threshold), fail, pass)
            }
            Condition::In {
                feature,
                categories,
            } => Node::split(*feature, Split::Categories(categories.clone()), pass, fail),
        }
    }

    fn check(&self, space: &FeatureSpace) -> Result<()> {
        let j = self.feature();
        if j >= space.len() {
            return Err(Error::Schema(format!(
                "condition on unknown feature index {j}"
            )));
        }
        match (self, &space.feature(j).kind) {
            (
                Condition::Le { threshold, .. } | Condition::Gt { threshold, .. },
                FeatureKind::Continuous { .. },
            ) if threshold.is_finite() => Ok(()),
            (Condition::In { categories, .. }, FeatureKind::Categorical { categories: names })
                if categories.universe() == names.len() =>
            {
                Ok(())
            }
            _ => Err(Error::Schema(format!(
                "condition does not fit feature `{}`",
                space.feature(j).name
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    /// Conjunction. Rule lists accept exactly one condition per rule.
    pub conditions: Vec<Condition>,
    pub output: f64,
}

/// Ordered IF-THEN-ELSE list: the first rule whose condition holds decides.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleList {
    space: Arc<FeatureSpace>,
    pub rules: Vec<Rule>,
    pub default_output: f64,
}

impl RuleList {
    pub fn new(space: Arc<FeatureSpace>, rules: Vec<Rule>, default_output: f64) -> Result<Self> {
        for rule in &rules {
            for c in &rule.conditions {
                c.check(&space)?;
            }
        }
        Ok(RuleList {
            space,
            rules,
            default_output,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn predict(&self, x: &Point) -> Result<f64> {
        self.space.check_point(x)?;
        Ok(self
            .rules
            .iter()
            .find(|r| r.conditions.iter().all(|c| c.holds(x)))
            .map_or(self.default_output, |r| r.output))
    }

    /// One-sided tree with one leaf per reachable rule plus the default.
    pub fn to_tree(&self) -> Result<DecisionTree> {
        let mut node = Node::Leaf(self.default_output);
        for (i, rule) in self.rules.iter().enumerate().rev() {
            let [cond] = rule.conditions.as_slice() else {
                return Err(Error::UnsupportedCondition(format!(
                    "rule {i} has {} conditions; rule lists need exactly one single-feature condition per rule",
                    rule.conditions.len()
                )));
            };
            node = cond.node(Node::Leaf(rule.output), node);
        }
        DecisionTree::from_structure(self.space.clone(), node)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedRule {
    pub conditions: Vec<Condition>,
    pub weight: f64,
}

/// `intercept + sum of weights of rules whose conjunction holds`.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleEnsemble {
    space: Arc<FeatureSpace>,
    pub intercept: f64,
    pub rules: Vec<WeightedRule>,
}

impl RuleEnsemble {
    pub fn new(space: Arc<FeatureSpace>, intercept: f64, rules: Vec<WeightedRule>) -> Result<Self> {
        for rule in &rules {
            for c in &rule.conditions {
                c.check(&space)?;
            }
        }
        Ok(RuleEnsemble {
            space,
            intercept,
            rules,
        })
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn predict(&self, x: &Point) -> Result<f64> {
        self.space.check_point(x)?;
        Ok(self.intercept
            + self
                .rules
                .iter()
                .filter(|r| r.conditions.iter().all(|c| c.holds(x)))
                .map(|r| r.weight)
                .sum::<f64>())
    }

    /// One one-sided tree per rule, summed, with the intercept as bias.
    pub fn to_ensemble(&self) -> Result<TreeEnsemble> {
        let mut trees = Vec::with_capacity(self.rules.len().max(1));
        for rule in &self.rules {
            let mut node = Node::Leaf(rule.weight);
            for c in rule.conditions.iter().rev() {
                node = c.node(node, Node::Leaf(0.0));
            }
            trees.push(DecisionTree::from_structure(self.space.clone(), node)?);
        }
        if trees.is_empty() {
            trees.push(DecisionTree::constant(self.space.clone(), 0.0));
        }
        TreeEnsemble::new(trees, Aggregation::Sum, PostLink::Identity, self.intercept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize) -> Arc<FeatureSpace> {
        Arc::new(FeatureSpace::unit_box(d, -2.0, 2.0))
    }

    #[test]
    fn two_rules_give_three_leaves() {
        let rl = RuleList::new(
            unit(2),
            vec![
                Rule {
                    conditions: vec![Condition::Le {
                        feature: 0,
                        threshold: 0.0,
                    }],
                    output: 1.0,
                },
                Rule {
                    conditions: vec![Condition::Gt {
                        feature: 1,
                        threshold: 1.0,
                    }],
                    output: 2.0,
                },
            ],
            3.0,
        )
        .unwrap();
        let t = rl.to_tree().unwrap();
        assert_eq!(t.num_leaves(), 3);
        let x = Point::numeric(&[0.5, 1.5]);
        assert_eq!(t.predict(&x).unwrap(), 2.0);
        assert_eq!(rl.predict(&x).unwrap(), 2.0);
    }

    #[test]
    fn default_only_is_constant() {
        let rl = RuleList::new(unit(1), vec![], 0.4).unwrap();
        let t = rl.to_tree().unwrap();
        assert_eq!(t.num_leaves(), 1);
        assert_eq!(t.leaves()[0].value, 0.4);
    }

    #[test]
    fn multi_feature_rule_is_rejected() {
        let rl = RuleList::new(
            unit(2),
            vec![Rule {
                conditions: vec![
                    Condition::Le {
                        feature: 0,
                        threshold: 0.0,
                    },
                    Condition::Le {
                        feature: 1,
                        threshold: 0.0,
                    },
                ],
                output: 1.0,
            }],
            0.0,
        )
        .unwrap();
        assert!(matches!(rl.to_tree(), Err(Error::UnsupportedCondition(_))));
    }

    #[test]
    fn conjunction_becomes_one_sided_tree() {
        let re = RuleEnsemble::new(
            unit(2),
            0.1,
            vec![WeightedRule {
                conditions: vec![
                    Condition::Gt {
                        feature: 0,
                        threshold: 0.0,
                    },
                    Condition::Le {
                        feature: 1,
                        threshold: 1.0,
                    },
                ],
                weight: 0.7,
            }],
        )
        .unwrap();
        let e = re.to_ensemble().unwrap();
        assert_eq!(e.trees().len(), 1);
        assert_eq!(e.trees()[0].num_leaves(), 3);
        let x = Point::numeric(&[0.5, 0.5]);
        assert!((e.predict(&x).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(re.predict(&x).unwrap(), e.predict(&x).unwrap());
    }

    #[test]
    fn degree_one_rule_is_a_stump() {
        let re = RuleEnsemble::new(
            unit(1),
            0.0,
            vec![WeightedRule {
                conditions: vec![Condition::Le {
                    feature: 0,
                    threshold: 0.0,
                }],
                weight: 1.0,
            }],
        )
        .unwrap();
        assert_eq!(re.to_ensemble().unwrap().trees()[0].num_leaves(), 2);
    }
}
