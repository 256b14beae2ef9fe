//! JSON model files.
//!
//! A model file carries the feature space in raw units (bounds plus the
//! `mean`/`std` used for standardization) and the model parameters in
//! standardized units, the coordinates every model consumes. Features and
//! categories are referenced by name.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{read_text, schema_error, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::models::{
    AdditiveModel, Aggregation, Condition, DecisionTree, Leaf, Link, Model, Node, PostLink, Rule,
    RuleEnsemble, RuleList, Shape, Split, Term, TreeEnsemble, WeightedRule,
};
use crate::region::{CategorySet, Component, FeatureBox, Interval};
use crate::space::{FeatureKind, FeatureSpace, FeatureSpec};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_notes: Option<String>,
}

/// A model together with its feature space and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub model: Model,
    pub metadata: Metadata,
}

impl ModelFile {
    pub fn new(model: Model) -> Self {
        ModelFile {
            model,
            metadata: Metadata::default(),
        }
    }

    pub fn space(&self) -> &FeatureSpace {
        self.model.space()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDto {
    format_version: u32,
    feature_space: SpaceDto,
    model: ModelDto,
    #[serde(default)]
    metadata: Metadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDto {
    pub features: Vec<FeatureDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureDto {
    Continuous {
        name: String,
        lo: f64,
        hi: f64,
        mean: f64,
        std: f64,
    },
    Categorical {
        name: String,
        categories: Vec<String>,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ModelDto {
    Tree(TreeDto),
    Rulelist {
        rules: Vec<RuleDto>,
        default_output: f64,
    },
    Additive {
        intercept: f64,
        link: Link,
        terms: Vec<TermDto>,
    },
    Ensemble {
        aggregation: Aggregation,
        post_link: PostLink,
        bias: f64,
        trees: Vec<TreeDto>,
    },
    Ruleensemble {
        intercept: f64,
        rules: Vec<WeightedRuleDto>,
    },
}

/// Either a split structure or a leaf list; exactly one must be present.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<NodeDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    leaves: Option<Vec<LeafDto>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDto {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<String>,
    /// Points with `x <= threshold` go left.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    /// Points whose category is listed go left.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Box<NodeDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Box<NodeDto>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeafDto {
    region: Vec<ComponentDto>,
    value: f64,
}

/// One feature's extent: an interval (missing ends are unbounded) or a
/// category list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDto {
    pub feature: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub lo_open: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub hi_open: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConditionDto {
    feature: String,
    op: Op,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Op {
    Le,
    Gt,
    In,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleDto {
    conditions: Vec<ConditionDto>,
    output: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightedRuleDto {
    conditions: Vec<ConditionDto>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDto {
    feature: String,
    shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ShapeKind {
    Linear,
    PiecewiseConstant,
    SteppedLinear,
    CategoryTable,
}

pub fn space_from_dto(dto: &SpaceDto) -> Result<FeatureSpace> {
    FeatureSpace::new(
        dto.features
            .iter()
            .map(|f| match f {
                FeatureDto::Continuous {
                    name,
                    lo,
                    hi,
                    mean,
                    std,
                } => FeatureSpec::standardized(name.clone(), *lo, *hi, *mean, *std),
                FeatureDto::Categorical { name, categories } => {
                    FeatureSpec::categorical(name.clone(), categories.clone())
                }
            })
            .collect(),
    )
}

pub fn space_to_dto(space: &FeatureSpace) -> SpaceDto {
    SpaceDto {
        features: space
            .features()
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Continuous { lo, hi, mean, std } => FeatureDto::Continuous {
                    name: f.name.clone(),
                    lo: *lo,
                    hi: *hi,
                    mean: *mean,
                    std: *std,
                },
                FeatureKind::Categorical { categories } => FeatureDto::Categorical {
                    name: f.name.clone(),
                    categories: categories.clone(),
                },
            })
            .collect(),
    }
}

struct Names<'a>(&'a FeatureSpace);

impl Names<'_> {
    fn feature(&self, name: &str) -> Result<usize> {
        self.0
            .index_of(name)
            .ok_or_else(|| Error::Schema(format!("unknown feature `{name}`")))
    }

    fn categories(&self, j: usize, names: &[String]) -> Result<CategorySet> {
        let n = self.0.feature(j).num_categories();
        if !self.0.feature(j).is_categorical() {
            return Err(Error::Schema(format!(
                "feature `{}` is continuous but a category list was given",
                self.0.feature(j).name
            )));
        }
        let mut set = CategorySet::empty(n);
        for c in names {
            let k = self.0.category_index(j, c).ok_or_else(|| {
                Error::Schema(format!(
                    "unknown category `{c}` for feature `{}`",
                    self.0.feature(j).name
                ))
            })?;
            set.insert(k);
        }
        Ok(set)
    }

    fn category_names(&self, j: usize, set: &CategorySet) -> Vec<String> {
        match &self.0.feature(j).kind {
            FeatureKind::Categorical { categories } => {
                set.iter().map(|k| categories[k].clone()).collect()
            }
            FeatureKind::Continuous { .. } => Vec::new(),
        }
    }

    fn name(&self, j: usize) -> String {
        self.0.feature(j).name.clone()
    }
}

fn node_from_dto(n: &Names, dto: &NodeDto) -> Result<Node> {
    match (dto.value, &dto.feature, &dto.left, &dto.right) {
        (Some(v), None, None, None) if dto.threshold.is_none() && dto.categories.is_none() => Ok(Node::Leaf(v)),
        (None, Some(f), Some(l), Some(r)) => {
            let j = n.feature(f)?;
            let split = match (dto.threshold, &dto.categories) {
                (Some(t), None) if !n.0.feature(j).is_categorical() => Split::Threshold(t),
                (None, Some(cs)) => Split::Categories(n.categories(j, cs)?),
                _ => {
                    return Err(Error::Schema(format!(
                        "split on `{f}` needs a threshold (continuous) or categories (categorical)"
                    )))
                }
            };
            Ok(Node::split(j, split, node_from_dto(n, l)?, node_from_dto(n, r)?))
        }
        _ => Err(Error::Schema(
            "tree node must be a leaf {\"value\"} or a split {\"feature\", \"threshold\"|\"categories\", \"left\", \"right\"}"
                .into(),
        )),
    }
}

fn node_to_dto(n: &Names, node: &Node) -> NodeDto {
    match node {
        Node::Leaf(v) => NodeDto {
            value: Some(*v),
            feature: None,
            threshold: None,
            categories: None,
            left: None,
            right: None,
        },
        Node::Split {
            feature,
            split,
            left,
            right,
        } => {
            let (threshold, categories) = match split {
                Split::Threshold(t) => (Some(*t), None),
                Split::Categories(s) => (None, Some(n.category_names(*feature, s))),
            };
            NodeDto {
                value: None,
                feature: Some(n.name(*feature)),
                threshold,
                categories,
                left: Some(Box::new(node_to_dto(n, left))),
                right: Some(Box::new(node_to_dto(n, right))),
            }
        }
    }
}

/// Standardized box from per-feature components; omitted features span the
/// whole domain.
pub(crate) fn box_from_dto(space: &FeatureSpace, comps: &[ComponentDto]) -> Result<FeatureBox> {
    let n = Names(space);
    let mut b = FeatureBox::new(
        space
            .features()
            .iter()
            .map(|f| match &f.kind {
                FeatureKind::Continuous { .. } => {
                    Component::Interval(Interval::new(f64::NEG_INFINITY, f64::INFINITY))
                }
                FeatureKind::Categorical { categories } => {
                    Component::Categories(CategorySet::full(categories.len()))
                }
            })
            .collect(),
    );
    let mut seen = vec![false; space.len()];
    for c in comps {
        let j = n.feature(&c.feature)?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::Schema(format!(
                "feature `{}` listed twice in a region",
                c.feature
            )));
        }
        *b.component_mut(j) = if space.feature(j).is_categorical() {
            match (&c.categories, c.lo, c.hi) {
                (Some(cs), None, None) => Component::Categories(n.categories(j, cs)?),
                _ => {
                    return Err(Error::Schema(format!(
                        "categorical feature `{}` needs a category list",
                        c.feature
                    )))
                }
            }
        } else {
            if c.categories.is_some() {
                return Err(Error::Schema(format!(
                    "continuous feature `{}` takes lo/hi, not categories",
                    c.feature
                )));
            }
            Component::Interval(Interval::with_openness(
                c.lo.unwrap_or(f64::NEG_INFINITY),
                c.hi.unwrap_or(f64::INFINITY),
                c.lo_open,
                c.hi_open,
            ))
        };
    }
    Ok(b)
}

/// Per-feature components of a box; infinite ends are omitted.
pub(crate) fn box_to_dto(space: &FeatureSpace, b: &FeatureBox) -> Vec<ComponentDto> {
    let n = Names(space);
    b.components()
        .iter()
        .enumerate()
        .map(|(j, c)| match c {
            Component::Interval(i) => ComponentDto {
                feature: n.name(j),
                lo: i.lo.is_finite().then_some(i.lo),
                hi: i.hi.is_finite().then_some(i.hi),
                lo_open: i.lo_open && i.lo.is_finite(),
                hi_open: i.hi_open && i.hi.is_finite(),
                categories: None,
            },
            Component::Categories(s) => ComponentDto {
                feature: n.name(j),
                lo: None,
                hi: None,
                lo_open: false,
                hi_open: false,
                categories: Some(n.category_names(j, s)),
            },
        })
        .collect()
}

fn tree_from_dto(space: &Arc<FeatureSpace>, dto: &TreeDto) -> Result<DecisionTree> {
    match (&dto.root, &dto.leaves) {
        (Some(root), None) => {
            DecisionTree::from_structure(space.clone(), node_from_dto(&Names(space), root)?)
        }
        (None, Some(leaves)) => {
            let leaves = leaves
                .iter()
                .map(|l| {
                    Ok(Leaf {
                        region: box_from_dto(space, &l.region)?,
                        value: l.value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            DecisionTree::from_leaves(space.clone(), leaves)
        }
        _ => Err(Error::Schema(
            "tree needs exactly one of `root` or `leaves`".into(),
        )),
    }
}

fn tree_to_dto(t: &DecisionTree) -> TreeDto {
    match t.root() {
        Some(root) => TreeDto {
            root: Some(node_to_dto(&Names(t.space()), root)),
            leaves: None,
        },
        None => TreeDto {
            root: None,
            leaves: Some(
                t.leaves()
                    .iter()
                    .map(|l| LeafDto {
                        region: box_to_dto(t.space(), &l.region),
                        value: l.value,
                    })
                    .collect(),
            ),
        },
    }
}

fn condition_from_dto(n: &Names, c: &ConditionDto) -> Result<Condition> {
    let feature = n.feature(&c.feature)?;
    match (c.op, c.threshold, &c.categories) {
        (Op::Le, Some(threshold), None) => Ok(Condition::Le { feature, threshold }),
        (Op::Gt, Some(threshold), None) => Ok(Condition::Gt { feature, threshold }),
        (Op::In, None, Some(cs)) => Ok(Condition::In {
            feature,
            categories: n.categories(feature, cs)?,
        }),
        _ => Err(Error::Schema(format!(
            "condition on `{}`: `le`/`gt` take a threshold, `in` takes categories",
            c.feature
        ))),
    }
}

fn condition_to_dto(n: &Names, c: &Condition) -> ConditionDto {
    match c {
        Condition::Le { feature, threshold } => ConditionDto {
            feature: n.name(*feature),
            op: Op::Le,
            threshold: Some(*threshold),
            categories: None,
        },
        Condition::Gt { feature, threshold } => ConditionDto {
            feature: n.name(*feature),
            op: Op::Gt,
            threshold: Some(*threshold),
            categories: None,
        },
        Condition::In {
            feature,
            categories,
        } => ConditionDto {
            feature: n.name(*feature),
            op: Op::In,
            threshold: None,
            categories: Some(n.category_names(*feature, categories)),
        },
    }
}

fn term_from_dto(n: &Names, t: &TermDto) -> Result<Term> {
    let feature = n.feature(&t.feature)?;
    let bad = || {
        Error::Schema(format!(
            "term on `{}` has fields that do not match its shape",
            t.feature
        ))
    };
    let shape = match (t.shape, t.slope, &t.breakpoints, &t.values) {
        (ShapeKind::Linear, Some(w), None, None) => Shape::Linear { w },
        (ShapeKind::PiecewiseConstant, None, Some(b), Some(v)) => Shape::PiecewiseConstant {
            breakpoints: b.clone(),
            values: v.clone(),
        },
        (ShapeKind::SteppedLinear, Some(slope), Some(b), Some(v)) => Shape::SteppedLinear {
            slope,
            breakpoints: b.clone(),
            values: v.clone(),
        },
        (ShapeKind::CategoryTable, None, None, Some(v)) => {
            Shape::CategoryTable { values: v.clone() }
        }
        _ => return Err(bad()),
    };
    Ok(Term { feature, shape })
}

fn term_to_dto(n: &Names, t: &Term) -> TermDto {
    let (shape, slope, breakpoints, values) = match &t.shape {
        Shape::Linear { w } => (ShapeKind::Linear, Some(*w), None, None),
        Shape::PiecewiseConstant {
            breakpoints,
            values,
        } => (
            ShapeKind::PiecewiseConstant,
            None,
            Some(breakpoints.clone()),
            Some(values.clone()),
        ),
        Shape::SteppedLinear {
            slope,
            breakpoints,
            values,
        } => (
            ShapeKind::SteppedLinear,
            Some(*slope),
            Some(breakpoints.clone()),
            Some(values.clone()),
        ),
        Shape::CategoryTable { values } => {
            (ShapeKind::CategoryTable, None, None, Some(values.clone()))
        }
    };
    TermDto {
        feature: n.name(t.feature),
        shape,
        slope,
        breakpoints,
        values,
    }
}

fn model_from_dto(space: Arc<FeatureSpace>, dto: &ModelDto) -> Result<Model> {
    let n = Names(&space);
    Ok(match dto {
        ModelDto::Tree(t) => Model::Tree(tree_from_dto(&space, t)?),
        ModelDto::Rulelist {
            rules,
            default_output,
        } => {
            let rules = rules
                .iter()
                .map(|r| {
                    Ok(Rule {
                        conditions: r
                            .conditions
                            .iter()
                            .map(|c| condition_from_dto(&n, c))
                            .collect::<Result<_>>()?,
                        output: r.output,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Model::RuleList(RuleList::new(space.clone(), rules, *default_output)?)
        }
        ModelDto::Additive {
            intercept,
            link,
            terms,
        } => {
            let terms = terms
                .iter()
                .map(|t| term_from_dto(&n, t))
                .collect::<Result<Vec<_>>>()?;
            Model::Additive(AdditiveModel::new(space.clone(), *intercept, terms, *link)?)
        }
        ModelDto::Ensemble {
            aggregation,
            post_link,
            bias,
            trees,
        } => {
            let trees = trees
                .iter()
                .map(|t| tree_from_dto(&space, t))
                .collect::<Result<Vec<_>>>()?;
            Model::Ensemble(TreeEnsemble::new(trees, *aggregation, *post_link, *bias)?)
        }
        ModelDto::Ruleensemble { intercept, rules } => {
            let rules = rules
                .iter()
                .map(|r| {
                    Ok(WeightedRule {
                        conditions: r
                            .conditions
                            .iter()
                            .map(|c| condition_from_dto(&n, c))
                            .collect::<Result<_>>()?,
                        weight: r.weight,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Model::RuleEnsemble(RuleEnsemble::new(space.clone(), *intercept, rules)?)
        }
    })
}

fn model_to_dto(m: &Model) -> ModelDto {
    let n = Names(m.space());
    match m {
        Model::Tree(t) => ModelDto::Tree(tree_to_dto(t)),
        Model::RuleList(r) => ModelDto::Rulelist {
            rules: r
                .rules
                .iter()
                .map(|r| RuleDto {
                    conditions: r
                        .conditions
                        .iter()
                        .map(|c| condition_to_dto(&n, c))
                        .collect(),
                    output: r.output,
                })
                .collect(),
            default_output: r.default_output,
        },
        Model::Additive(a) => ModelDto::Additive {
            intercept: a.intercept,
            link: a.link,
            terms: a.terms().iter().map(|t| term_to_dto(&n, t)).collect(),
        },
        Model::Ensemble(e) => ModelDto::Ensemble {
            aggregation: e.aggregation,
            post_link: e.post_link,
            bias: e.bias,
            trees: e.trees().iter().map(tree_to_dto).collect(),
        },
        Model::RuleEnsemble(r) => ModelDto::Ruleensemble {
            intercept: r.intercept,
            rules: r
                .rules
                .iter()
                .map(|r| WeightedRuleDto {
                    conditions: r
                        .conditions
                        .iter()
                        .map(|c| condition_to_dto(&n, c))
                        .collect(),
                    weight: r.weight,
                })
                .collect(),
        },
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u32>,
}

/// Parses a model file; `origin` names the source in error messages.
pub fn model_from_str(text: &str, origin: &str) -> Result<ModelFile> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| schema_error(origin, &e))?;
    match probe.format_version {
        Some(FORMAT_VERSION) => {}
        Some(found) => {
            return Err(Error::Version {
                found,
                expected: FORMAT_VERSION,
            })
        }
        None => {
            return Err(Error::Schema(format!(
                "{origin}: missing field `format_version`"
            )))
        }
    }
    let dto: FileDto = serde_json::from_str(text).map_err(|e| schema_error(origin, &e))?;
    let space = Arc::new(space_from_dto(&dto.feature_space).map_err(|e| prefix(origin, e))?);
    let model = model_from_dto(space, &dto.model).map_err(|e| prefix(origin, e))?;
    Ok(ModelFile {
        model,
        metadata: dto.metadata,
    })
}

fn prefix(origin: &str, e: Error) -> Error {
    match e {
        Error::Schema(m) => Error::Schema(format!("{origin}: {m}")),
        Error::SchemaMismatch(m) => Error::Schema(format!("{origin}: {m}")),
        other => other,
    }
}

pub fn model_to_string(file: &ModelFile) -> String {
    let dto = FileDto {
        format_version: FORMAT_VERSION,
        feature_space: space_to_dto(file.space()),
        model: model_to_dto(&file.model),
        metadata: file.metadata.clone(),
    };
    let mut s = serde_json::to_string_pretty(&dto).expect("model DTOs serialize");
    s.push('\n');
    s
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    model_from_str(&read_text(path)?, &path.display().to_string())
}

pub fn save_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_string(file))?;
    Ok(())
}
