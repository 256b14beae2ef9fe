use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::box_meets_certset;
use crate::region::{CategorySet, Component, FeatureBox, Interval};
use crate::space::{FeatureKind, FeatureSpace, Point, Value};
use crate::types::CertificationSet;

/// Test applied at an internal node. Points satisfying it go left.
#[derive(Clone, Debug, PartialEq)]
pub enum Split {
    /// `x <= t`.
    Threshold(f64),
    /// Category is a member of the set.
    Categories(CategorySet),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        split: Split,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn split(feature: usize, split: Split, left: Node, right: Node) -> Node {
        Node::Split {
            feature,
            split,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn stump(feature: usize, threshold: f64, left: f64, right: f64) -> Node {
        Node::split(
            feature,
            Split::Threshold(threshold),
            Node::Leaf(left),
            Node::Leaf(right),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub region: FeatureBox,
    pub value: f64,
}

/// Axis-aligned decision tree over standardized coordinates.
///
/// Certifiers read the flattened leaf list. The split structure is kept when
/// the tree was built from one and is used for prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionTree {
    space: Arc<FeatureSpace>,
    leaves: Vec<Leaf>,
    root: Option<Node>,
}

impl DecisionTree {
    pub fn from_structure(space: Arc<FeatureSpace>, root: Node) -> Result<Self> {
        check_node(&space, &root)?;
        let mut leaves = Vec::new();
        flatten(&root, space.domain_box(), &mut leaves);
        Ok(DecisionTree {
            space,
            leaves,
            root: Some(root),
        })
    }

    /// Builds a tree from explicit leaf boxes, which are clipped to the domain
    /// and must partition it.
    pub fn from_leaves(space: Arc<FeatureSpace>, leaves: Vec<Leaf>) -> Result<Self> {
        let domain = space.domain_box();
        let mut clipped = Vec::with_capacity(leaves.len());
        for (i, leaf) in leaves.into_iter().enumerate() {
            if !leaf.value.is_finite() {
                return Err(Error::Schema(format!("leaf {i}: value is not finite")));
            }
            if leaf.region.dim() != space.len() {
                return Err(Error::Schema(format!(
                    "leaf {i}: box has the wrong number of features"
                )));
            }
            match crate::geometry::box_intersect(&leaf.region, &domain) {
                Ok(Some(region)) => clipped.push(Leaf {
                    region,
                    value: leaf.value,
                }),
                Ok(None) => {}
                Err(_) => {
                    return Err(Error::Schema(format!(
                        "leaf {i}: box does not match the feature space"
                    )))
                }
            }
        }
        check_partition(&space, &clipped)?;
        Ok(DecisionTree {
            space,
            leaves: clipped,
            root: None,
        })
    }

    pub fn constant(space: Arc<FeatureSpace>, value: f64) -> Self {
        let region = space.domain_box();
        DecisionTree {
            space,
            leaves: vec![Leaf { region, value }],
            root: Some(Node::Leaf(value)),
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FeatureSpace> {
        &self.space
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> Option<&Node> {
        self.root.as_ref()
    }

    /// Prediction at a standardized point.
    pub fn predict(&self, x: &Point) -> Result<f64> {
        self.space.check_point(x)?;
        match &self.root {
            Some(root) => Ok(descend(root, x)),
            None => self
                .leaf_index(x)
                .map(|i| self.leaves[i].value)
                .ok_or_else(|| Error::SchemaMismatch("point is not covered by any leaf".into())),
        }
    }

    /// First leaf whose region contains `x`.
    pub fn leaf_index(&self, x: &Point) -> Option<usize> {
        self.leaves.iter().position(|l| l.region.contains(x))
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.leaves
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
                (lo.min(l.value), hi.max(l.value))
            })
    }

    /// Indices of leaves whose region meets the certification set.
    pub fn leaves_meeting(&self, cert: &CertificationSet) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (i, leaf) in self.leaves.iter().enumerate() {
            if box_meets_certset(&leaf.region, cert)?.nonempty {
                out.push(i);
            }
        }
        Ok(out)
    }

    /// Like [`DecisionTree::leaves_meeting`], with l1/l2 balls replaced by
    /// their bounding boxes.
    pub fn leaves_meeting_relaxed(&self, cert: &CertificationSet) -> Vec<usize> {
        self.leaves
            .iter()
            .enumerate()
            .filter(|(_, l)| crate::geometry::box_meets_certset_relaxed(&l.region, cert).nonempty)
            .map(|(i, _)| i)
            .collect()
    }

    /// Re-checks the partition invariant on the flattened leaves.
    pub fn validate(&self) -> Result<()> {
        check_partition(&self.space, &self.leaves)
    }
}

fn check_node(space: &FeatureSpace, node: &Node) -> Result<()> {
    match node {
        Node::Leaf(v) => {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Schema("leaf value is not finite".into()))
            }
        }
        Node::Split {
            feature,
            split,
            left,
            right,
        } => {
            if *feature >= space.len() {
                return Err(Error::Schema(format!(
                    "split on unknown feature index {feature}"
                )));
            }
            match (split, &space.feature(*feature).kind) {
                (Split::Threshold(t), FeatureKind::Continuous { .. }) if t.is_finite() => {}
                (Split::Categories(s), FeatureKind::Categorical { categories })
                    if s.universe() == categories.len() => {}
                _ => {
                    return Err(Error::Schema(format!(
                        "split does not fit feature `{}`",
                        space.feature(*feature).name
                    )))
                }
            }
            check_node(space, left)?;
            check_node(space, right)
        }
    }
}

/// Left and right regions of `region` under a split.
pub fn split_regions(
    region: &FeatureBox,
    feature: usize,
    split: &Split,
) -> (FeatureBox, FeatureBox) {
    let mut left = region.clone();
    let mut right = region.clone();
    match (split, region.component(feature)) {
        (Split::Threshold(t), Component::Interval(i)) => {
            let l = i.intersect(&Interval::with_openness(
                f64::NEG_INFINITY,
                *t,
                false,
                false,
            ));
            let r = i.intersect(&Interval::with_openness(*t, f64::INFINITY, true, false));
            *left.component_mut(feature) = Component::Interval(l);
            *right.component_mut(feature) = Component::Interval(r);
        }
        (Split::Categories(s), Component::Categories(c)) => {
            *left.component_mut(feature) = Component::Categories(c.intersect(s));
            *right.component_mut(feature) = Component::Categories(c.difference(s));
        }
        _ => unreachable!("split kind checked against the feature space"),
    }
    (left, right)
}

fn flatten(node: &Node, region: FeatureBox, out: &mut Vec<Leaf>) {
    if region.is_empty() {
        return;
    }
    match node {
        Node::Leaf(value) => out.push(Leaf {
            region,
            value: *value,
        }),
        Node::Split {
            feature,
            split,
            left,
            right,
        } => {
            let (l, r) = split_regions(&region, *feature, split);
            flatten(left, l, out);
            flatten(right, r, out);
        }
    }
}

fn descend(mut node: &Node, x: &Point) -> f64 {
    loop {
        match node {
            Node::Leaf(v) => return *v,
            Node::Split {
                feature,
                split,
                left,
                right,
            } => {
                let go_left = match (split, x[*feature]) {
                    (Split::Threshold(t), Value::Num(v)) => v <= *t,
                    (Split::Categories(s), Value::Cat(k)) => s.contains(k),
                    _ => false,
                };
                node = if go_left { left } else { right };
            }
        }
    }
}

/// Volume with degenerate domain features ignored, so a domain that is flat
/// in some feature still has positive volume.
fn volume(b: &FeatureBox, domain: &FeatureBox) -> f64 {
    b.components()
        .iter()
        .zip(domain.components())
        .map(|(c, d)| match (c, d) {
            (Component::Interval(i), Component::Interval(di)) => {
                if di.width() > 0.0 {
                    i.width().max(0.0)
                } else {
                    1.0
                }
            }
            (Component::Categories(s), _) => s.len() as f64,
            _ => 0.0,
        })
        .product()
}

fn interiors_overlap(a: &FeatureBox, b: &FeatureBox, domain: &FeatureBox) -> bool {
    a.components()
        .iter()
        .zip(b.components())
        .zip(domain.components())
        .all(|((x, y), d)| match (x, y, d) {
            (Component::Interval(x), Component::Interval(y), Component::Interval(d)) => {
                let i = x.intersect(y);
                if d.width() > 0.0 {
                    i.width() > 0.0
                } else {
                    !i.is_empty()
                }
            }
            (Component::Categories(x), Component::Categories(y), _) => x.intersects(y),
            _ => false,
        })
}

fn check_partition(space: &FeatureSpace, leaves: &[Leaf]) -> Result<()> {
    if leaves.is_empty() {
        return Err(Error::Schema(
            "tree has no leaves covering the feature space".into(),
        ));
    }
    let domain = space.domain_box();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            if interiors_overlap(&leaves[i].region, &leaves[j].region, &domain) {
                return Err(Error::Schema(format!(
                    "leaves {i} and {j} overlap; leaf regions must partition the feature space"
                )));
            }
        }
    }
    let total = volume(&domain, &domain);
    let covered: f64 = leaves.iter().map(|l| volume(&l.region, &domain)).sum();
    if (covered - total).abs() > 1e-9 * total.max(1.0) {
        return Err(Error::Schema(format!(
            "leaves cover volume {covered} of {total}; leaf regions must partition the feature space"
        )));
    }
    Ok(())
}
