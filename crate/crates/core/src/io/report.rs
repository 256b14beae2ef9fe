//! JSON reports. Boxes and points are converted back to raw feature units;
//! the wall-clock time is the only field that varies between identical runs.

use serde::{Deserialize, Serialize};

use super::model::{box_from_dto, box_to_dto, space_to_dto, ComponentDto, SpaceDto};
use super::FORMAT_VERSION;
use crate::blackbox::OptRun;
use crate::certify::{CertResult, SearchStats};
use crate::error::{Error, Result};
use crate::region::{Component, FeatureBox, Interval};
use crate::space::{FeatureKind, FeatureSpace, Point, Value};
use crate::types::CertificationSet;

/// Slack allowed when re-checking raw-unit boxes against the set.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximizerRow {
    pub region: Vec<ComponentDto>,
    pub model_score: f64,
    pub reference_score: f64,
    pub deviation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_leaf: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakdownRow {
    pub leaf: usize,
    pub region: Vec<ComponentDto>,
    pub reference_score: f64,
    pub model_min: f64,
    pub model_max: f64,
    pub deviation: f64,
    pub maximizer: Vec<ComponentDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContributionRow {
    pub feature: String,
    pub contribution: f64,
    pub values: ComponentDto,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsRow {
    pub edges_evaluated: u64,
    pub extremizations: u64,
    pub segment_evals: u64,
    pub nodes_expanded: u64,
    pub cliques_completed: u64,
    pub heuristic_evals: u64,
    pub pruned: u64,
}

impl From<&SearchStats> for StatsRow {
    fn from(s: &SearchStats) -> Self {
        StatsRow {
            edges_evaluated: s.edges_evaluated,
            extremizations: s.extremizations,
            segment_evals: s.segment_evals,
            nodes_expanded: s.nodes_expanded,
            cliques_completed: s.cliques_completed,
            heuristic_evals: s.heuristic_evals,
            pruned: s.pruned,
        }
    }
}

/// What was certified, for the report header.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportContext {
    pub inputs_digest: String,
    pub model: String,
    pub reference: String,
    pub certset: String,
    pub deviation: String,
    pub scale: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertReport {
    pub format_version: u32,
    pub inputs_digest: String,
    pub model: String,
    pub reference: String,
    pub certset: String,
    pub deviation: String,
    pub scale: String,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub certset_relaxed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signed_range: Option<[f64; 2]>,
    pub feature_space: SpaceDto,
    pub maximizers: Vec<MaximizerRow>,
    pub breakdown: Vec<BreakdownRow>,
    pub contributions: Vec<ContributionRow>,
    pub stats: StatsRow,
    pub wall_time_s: f64,
}

/// Standardized box to raw units.
pub fn raw_box(space: &FeatureSpace, b: &FeatureBox) -> FeatureBox {
    FeatureBox::new(
        b.components()
            .iter()
            .enumerate()
            .map(|(j, c)| match c {
                Component::Interval(i) => Component::Interval(Interval::with_openness(
                    space.destandardize_value(j, i.lo),
                    space.destandardize_value(j, i.hi),
                    i.lo_open,
                    i.hi_open,
                )),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Raw box to standardized units.
pub fn standardized_box(space: &FeatureSpace, b: &FeatureBox) -> FeatureBox {
    FeatureBox::new(
        b.components()
            .iter()
            .enumerate()
            .map(|(j, c)| match c {
                Component::Interval(i) => Component::Interval(Interval::with_openness(
                    space.standardize_value(j, i.lo),
                    space.standardize_value(j, i.hi),
                    i.lo_open,
                    i.hi_open,
                )),
                other => other.clone(),
            })
            .collect(),
    )
}

/// Standardized box as raw-unit components.
pub fn raw_components(space: &FeatureSpace, b: &FeatureBox) -> Vec<ComponentDto> {
    box_to_dto(space, &raw_box(space, b))
}

/// Raw-unit components back to a standardized box.
pub fn components_to_box(space: &FeatureSpace, comps: &[ComponentDto]) -> Result<FeatureBox> {
    Ok(standardized_box(space, &box_from_dto(space, comps)?))
}

fn within_ball(b: &FeatureBox, center: &Point, r: f64) -> bool {
    b.components()
        .iter()
        .zip(center.values())
        .all(|(c, v)| match (c, v) {
            (Component::Interval(i), Value::Num(x)) => {
                i.lo >= x - r - MEMBERSHIP_TOLERANCE && i.hi <= x + r + MEMBERSHIP_TOLERANCE
            }
            (Component::Categories(s), Value::Cat(k)) => {
                r >= 1.0 || (s.len() == 1 && s.contains(*k))
            }
            _ => false,
        })
}

fn within_domain(space: &FeatureSpace, b: &FeatureBox) -> bool {
    let dom = space.domain_box();
    b.components()
        .iter()
        .zip(dom.components())
        .all(|(c, d)| match (c, d) {
            (Component::Interval(i), Component::Interval(d)) => {
                i.lo >= d.lo - MEMBERSHIP_TOLERANCE && i.hi <= d.hi + MEMBERSHIP_TOLERANCE
            }
            (Component::Categories(s), Component::Categories(d)) => s.is_subset(d),
            _ => false,
        })
}

/// Re-normalizes the report's raw maximizer boxes and checks that each lies
/// in the domain and, when clipped to a set element, inside that element.
/// l1/l2 balls are checked against their bounding boxes.
pub fn verify_maximizers(
    report: &CertReport,
    space: &FeatureSpace,
    cert: &CertificationSet,
) -> Result<()> {
    for (k, m) in report.maximizers.iter().enumerate() {
        let b = components_to_box(space, &m.region)?;
        let inside = within_domain(space, &b)
            && match (m.witness, cert) {
                (Some(i), CertificationSet::FiniteSet { points }) => {
                    points.get(i).is_some_and(|p| within_ball(&b, p, 0.0))
                }
                (
                    Some(i),
                    CertificationSet::BallUnion {
                        centers, radius, ..
                    },
                ) => centers.get(i).is_some_and(|c| within_ball(&b, c, *radius)),
                _ => true,
            };
        if !inside {
            return Err(Error::AssumptionViolated(format!(
                "maximizer {k} does not lie inside the certification set"
            )));
        }
    }
    Ok(())
}

impl CertReport {
    pub fn new(ctx: ReportContext, space: &FeatureSpace, r: &CertResult, wall_time_s: f64) -> Self {
        let name = |j: usize| space.feature(j).name.clone();
        CertReport {
            format_version: FORMAT_VERSION,
            inputs_digest: ctx.inputs_digest,
            model: ctx.model,
            reference: ctx.reference,
            certset: ctx.certset,
            deviation: ctx.deviation,
            scale: ctx.scale,
            lower: r.lower,
            upper: r.upper,
            exact: r.exact,
            certset_relaxed: r.certset_relaxed,
            signed_range: r.signed_range.map(|(a, b)| [a, b]),
            feature_space: space_to_dto(space),
            maximizers: r
                .maximizers
                .iter()
                .map(|m| MaximizerRow {
                    region: raw_components(space, &m.region),
                    model_score: m.model_score,
                    reference_score: m.reference_score,
                    deviation: m.deviation,
                    reference_leaf: m.reference_leaf,
                    witness: m.witness,
                })
                .collect(),
            breakdown: r
                .breakdown
                .iter()
                .map(|b| BreakdownRow {
                    leaf: b.leaf,
                    region: raw_components(space, &b.region),
                    reference_score: b.reference_score,
                    model_min: b.model_min,
                    model_max: b.model_max,
                    deviation: b.deviation,
                    maximizer: raw_components(space, &b.maximizer),
                })
                .collect(),
            contributions: r
                .contributions
                .iter()
                .map(|c| {
                    let mut b = space.domain_box();
                    *b.component_mut(c.feature) = c.values.clone();
                    let values = raw_components(space, &b).swap_remove(c.feature);
                    ContributionRow {
                        feature: name(c.feature),
                        contribution: c.contribution,
                        values,
                    }
                })
                .collect(),
            stats: StatsRow::from(&r.stats),
            wall_time_s,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// One feature value in raw units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Num(f64),
    Cat(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedValue {
    pub feature: String,
    pub value: RawValue,
}

/// Standardized point as named raw-unit values.
pub fn raw_point(space: &FeatureSpace, x: &Point) -> Result<Vec<NamedValue>> {
    let raw = space.destandardize(x)?;
    Ok(raw
        .values()
        .iter()
        .zip(space.features())
        .map(|(v, f)| NamedValue {
            feature: f.name.clone(),
            value: match (v, &f.kind) {
                (Value::Cat(k), FeatureKind::Categorical { categories }) => {
                    RawValue::Cat(categories[*k].clone())
                }
                (v, _) => RawValue::Num(v.as_num().unwrap_or(f64::NAN)),
            },
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptReport {
    pub format_version: u32,
    pub inputs_digest: String,
    pub oracle: String,
    pub budget: usize,
    pub partition: String,
    pub cells: usize,
    pub queries_used: usize,
    pub best_value: f64,
    pub best_point: Vec<NamedValue>,
    pub regret_curve: Vec<f64>,
    pub wall_time_s: f64,
}

impl OptReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        inputs_digest: String,
        oracle: String,
        budget: usize,
        partition: String,
        cells: usize,
        space: &FeatureSpace,
        run: &OptRun,
        wall_time_s: f64,
    ) -> Result<Self> {
        Ok(OptReport {
            format_version: FORMAT_VERSION,
            inputs_digest,
            oracle,
            budget,
            partition,
            cells,
            queries_used: run.queries_used,
            best_value: run.best_value,
            best_point: raw_point(space, &run.best_point)?,
            regret_curve: run.regret_curve.clone(),
            wall_time_s,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
