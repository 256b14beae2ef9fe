//! Model files, datasets, certification set specs and reports.

pub mod certspec;
pub mod dataset;
pub mod model;
pub mod report;

use std::path::Path;

pub use certspec::CertSpec;
pub use dataset::{
    dataset_from_str, load_dataset, points_from_str, points_to_csv, read_column, read_points,
    ColumnKind, ColumnSpec, Dataset, Manifest, TrainingSplit,
};
pub use model::{
    load_model, model_from_str, model_to_string, save_model, space_from_dto, space_to_dto,
    ComponentDto, FeatureDto, Metadata, ModelFile, SpaceDto,
};
pub use report::{
    components_to_box, raw_box, raw_components, raw_point, standardized_box, verify_maximizers,
    BreakdownRow, CertReport, ContributionRow, MaximizerRow, NamedValue, OptReport, RawValue,
    ReportContext, StatsRow,
};

use crate::error::{Error, Result};

/// Version written to and required of every model file, manifest and report.
pub const FORMAT_VERSION: u32 = 1;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

/// Syntax errors become [`Error::Parse`], shape errors [`Error::Schema`];
/// both carry the line and column.
pub(crate) fn schema_error(origin: &str, e: &serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof => Error::Parse(format!("{origin}: {e}")),
        Category::Data => Error::Schema(format!("{origin}: {e}")),
        Category::Io => Error::Io(std::io::Error::other(format!("{origin}: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use rand::rngs::StdRng;
    use rand::SeedableRng;

    use super::*;
    use crate::models::{Aggregation, DecisionTree, Link, Model, Node, PostLink};
    use crate::region::FeatureBox;
    use crate::space::{FeatureSpace, FeatureSpec, Point, Value};
    use crate::synth;

    fn round_trip(m: Model) {
        let file = ModelFile::new(m);
        let text = model_to_string(&file);
        let back = model_from_str(&text, "mem").unwrap();
        assert_eq!(back, file);
        assert_eq!(model_to_string(&back), text);
    }

    #[test]
    fn every_model_kind_round_trips() {
        let mut rng = StdRng::seed_from_u64(11);
        let s = synth::space(2, 1, 3);
        round_trip(Model::Tree(synth::tree(&mut rng, &s, 9, (0.0, 1.0))));
        round_trip(Model::Ensemble(synth::ensemble(
            &mut rng,
            &s,
            3,
            5,
            Aggregation::Sum,
            PostLink::Logistic,
        )));
        round_trip(Model::Additive(synth::additive(
            &mut rng,
            &s,
            6,
            Link::Logit,
        )));
        round_trip(Model::RuleList(synth::rule_list(&mut rng, &s, 4)));
        round_trip(Model::RuleEnsemble(synth::rule_ensemble(
            &mut rng, &s, 4, 2,
        )));
    }

    #[test]
    fn leaf_list_round_trips_with_openness() {
        let s = Arc::new(FeatureSpace::unit_box(1, 0.0, 1.0));
        let t = DecisionTree::from_structure(s.clone(), Node::stump(0, 0.5, 0.1, 0.9)).unwrap();
        let leaves = DecisionTree::from_leaves(s, t.leaves().to_vec()).unwrap();
        round_trip(Model::Tree(leaves));
    }

    const STUMP: &str = r#"{
  "format_version": 1,
  "feature_space": {"features": [{"kind": "continuous", "name": "x", "lo": 0, "hi": 1, "mean": 0, "std": 1}]},
  "model": {"type": "tree", "root": {"feature": "x", "threshold": 0.5, "left": {"value": 0.2}, "right": {"value": 0.8}}}
}"#;

    #[test]
    fn parses_a_stump() {
        let f = model_from_str(STUMP, "stump").unwrap();
        let Model::Tree(t) = &f.model else { panic!() };
        assert_eq!(t.num_leaves(), 2);
        assert_eq!(t.predict(&Point::numeric(&[0.5])).unwrap(), 0.2);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = STUMP.replace("\"threshold\": 0.5,", "\"threshold\": 0.5, \"gain\": 3,");
        let err = model_from_str(&text, "m").unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
        assert!(err.to_string().contains("gain"), "{err}");
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn syntax_error_is_a_parse_error() {
        let err = model_from_str("{\"format_version\": 1,", "m").unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn version_is_checked() {
        let err = model_from_str(
            &STUMP.replace("\"format_version\": 1", "\"format_version\": 7"),
            "m",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::Version {
                found: 7,
                expected: 1
            }
        ));
    }

    #[test]
    fn overlapping_leaves_are_rejected() {
        let text = r#"{
  "format_version": 1,
  "feature_space": {"features": [{"kind": "continuous", "name": "x", "lo": 0, "hi": 1, "mean": 0, "std": 1}]},
  "model": {"type": "tree", "leaves": [
    {"region": [{"feature": "x", "hi": 0.6}], "value": 0.1},
    {"region": [{"feature": "x", "lo": 0.4}], "value": 0.9}
  ]}
}"#;
        let err = model_from_str(text, "m").unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err}");
        assert!(err.to_string().contains("partition"), "{err}");
    }

    fn manifest(stats: bool) -> Manifest {
        let (mean, std) = if stats {
            (Some(10.0), Some(2.0))
        } else {
            (None, None)
        };
        Manifest {
            format_version: 1,
            columns: vec![
                ColumnSpec {
                    name: "age".into(),
                    kind: ColumnKind::Continuous,
                    lo: Some(0.0),
                    hi: Some(100.0),
                    mean,
                    std,
                    categories: None,
                },
                ColumnSpec {
                    name: "color".into(),
                    kind: ColumnKind::Categorical,
                    lo: None,
                    hi: None,
                    mean: None,
                    std: None,
                    categories: Some(vec!["red".into(), "blue".into()]),
                },
            ],
            label: Some("y".into()),
            training_split: None,
        }
    }

    const CSV: &str = "age,color,y\n12,red,1\n8,blue,0\n10,red,1\n";

    #[test]
    fn dataset_with_declared_stats() {
        let d = dataset_from_str(CSV, &manifest(true), "d.csv").unwrap();
        assert_eq!(d.points.len(), 3);
        assert_eq!(d.points[0], Point(vec![Value::Num(1.0), Value::Cat(0)]));
        assert_eq!(d.labels, Some(vec![1.0, 0.0, 1.0]));
    }

    #[test]
    fn unseen_category_names_row_and_column() {
        let err = dataset_from_str(
            "age,color,y\n12,red,1\n8,green,0\n",
            &manifest(true),
            "d.csv",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        let msg = err.to_string();
        assert!(
            msg.contains("row 3") && msg.contains("color") && msg.contains("green"),
            "{msg}"
        );
    }

    #[test]
    fn missing_stats_need_a_training_split() {
        let err = dataset_from_str(CSV, &manifest(false), "d.csv").unwrap_err();
        assert!(matches!(err, Error::MissingStats(_)), "{err}");
        let mut m = manifest(false);
        m.training_split = Some(TrainingSplit {
            column: None,
            value: None,
        });
        let d = dataset_from_str(CSV, &m, "d.csv").unwrap();
        let crate::space::FeatureKind::Continuous { mean, std, .. } = d.space.feature(0).kind
        else {
            panic!()
        };
        assert_eq!(mean, 10.0);
        assert!((std - (8.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normalization_round_trips() {
        let d = dataset_from_str(CSV, &manifest(true), "d.csv").unwrap();
        for (p, raw) in d.points.iter().zip([12.0, 8.0, 10.0]) {
            let back = d.space.destandardize(p).unwrap();
            assert!((back.num(0) - raw).abs() <= 1e-12);
        }
        let csv = points_to_csv(&d.points, &d.space).unwrap();
        assert_eq!(points_from_str(&csv, &d.space, "x").unwrap(), d.points);
    }

    #[test]
    fn raw_boxes_round_trip() {
        let s =
            FeatureSpace::new(vec![FeatureSpec::standardized("a", -5.0, 5.0, 1.5, 0.25)]).unwrap();
        let b = FeatureBox::from_intervals(&[(-0.5, 2.0)]);
        let comps = raw_components(&s, &b);
        assert_eq!(comps[0].lo, Some(1.375));
        let back = components_to_box(&s, &comps).unwrap();
        assert_eq!(back, b);
    }
}
