//! Writes the bundled fixtures to `fixtures/`, or to the directory given as
//! the first argument. Output depends only on the fixed seeds below.

use std::path::Path;
use std::sync::Arc;

use devcert_core::io::{points_to_csv, save_model, ColumnKind, ColumnSpec, Manifest, Metadata};
use devcert_core::models::{Aggregation, Link, Node, PostLink};
use devcert_core::{
    synth, DecisionTree, FeatureKind, FeatureSpace, FeatureSpec, Model, ModelFile, Result,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn save(dir: &Path, name: &str, model: Model, note: &str) -> Result<()> {
    let file = ModelFile {
        model,
        metadata: Metadata {
            name: Some(name.into()),
            source: Some("gen-fixtures".into()),
            training_notes: Some(note.into()),
        },
    };
    save_model(&file, dir.join(format!("{name}.json")))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn mixed_space() -> Result<Arc<FeatureSpace>> {
    Ok(Arc::new(FeatureSpace::new(vec![
        FeatureSpec::standardized("age", 18.0, 90.0, 40.0, 12.0),
        FeatureSpec::standardized("income", 0.0, 200.0, 60.0, 30.0),
        FeatureSpec::categorical("color", ["blue", "green", "red"]),
    ])?))
}

fn manifest(space: &FeatureSpace, label: Option<&str>) -> Manifest {
    let columns = space
        .features()
        .iter()
        .map(|f| match &f.kind {
            FeatureKind::Continuous { lo, hi, mean, std } => ColumnSpec {
                name: f.name.clone(),
                kind: ColumnKind::Continuous,
                lo: Some(*lo),
                hi: Some(*hi),
                mean: Some(*mean),
                std: Some(*std),
                categories: None,
            },
            FeatureKind::Categorical { categories } => ColumnSpec {
                name: f.name.clone(),
                kind: ColumnKind::Categorical,
                lo: None,
                hi: None,
                mean: None,
                std: None,
                categories: Some(categories.clone()),
            },
        })
        .collect();
    Manifest {
        format_version: 1,
        columns,
        label: label.map(String::from),
        training_split: None,
    }
}

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let dir = Path::new(&dir);
    std::fs::create_dir_all(dir)?;

    let unit = Arc::new(FeatureSpace::new(vec![FeatureSpec::continuous(
        "x", 0.0, 1.0,
    )])?);
    let stump = DecisionTree::from_structure(unit.clone(), Node::stump(0, 0.5, 0.2, 0.8))?;
    save(
        dir,
        "stump",
        Model::Tree(stump),
        "0.2 for x <= 0.5, 0.8 above",
    )?;
    save(
        dir,
        "constant",
        Model::Tree(DecisionTree::constant(unit, 0.5)),
        "0.5 everywhere",
    )?;

    let space = mixed_space()?;
    let mut rng = StdRng::seed_from_u64(20240601);
    let tree_a = synth::tree(&mut rng, &space, 8, (0.0, 1.0));
    let tree_b = synth::tree(&mut rng, &space, 6, (0.0, 1.0));
    save(dir, "tree_a", Model::Tree(tree_a), "random tree, 8 leaves")?;
    save(dir, "tree_b", Model::Tree(tree_b), "random tree, 6 leaves")?;
    let gam = synth::additive(&mut rng, &space, 6, Link::Logit);
    let gam_b = synth::additive(&mut rng, &space, 4, Link::Logit);
    save(
        dir,
        "gam",
        Model::Additive(gam.clone()),
        "random logistic additive model",
    )?;
    save(
        dir,
        "gam_b",
        Model::Additive(gam_b),
        "random logistic additive model",
    )?;
    let forest = synth::ensemble(&mut rng, &space, 4, 6, Aggregation::Sum, PostLink::Logistic);
    save(
        dir,
        "forest",
        Model::Ensemble(forest),
        "4 boosted trees, 6 leaves each",
    )?;
    save(
        dir,
        "rulelist",
        Model::RuleList(synth::rule_list(&mut rng, &space, 4)),
        "4 rules",
    )?;
    save(
        dir,
        "ruleensemble",
        Model::RuleEnsemble(synth::rule_ensemble(&mut rng, &space, 5, 2)),
        "5 weighted rules",
    )?;

    let centers = synth::points(&mut rng, &space, 20);
    write(dir, "centers.csv", &points_to_csv(&centers, &space)?)?;

    let data = synth::points(&mut rng, &space, 200);
    let table = points_to_csv(&data, &space)?;
    let mut lines = table.lines();
    let mut csv = format!("{},y\n", lines.next().unwrap_or_default());
    for (line, x) in lines.zip(&data) {
        let p = gam.predict(x)?;
        let flip = rng.random_bool(0.1);
        let y = u8::from((p > 0.5) != flip);
        csv.push_str(&format!("{line},{y}\n"));
    }
    write(dir, "data.csv", &csv)?;
    let m = manifest(&space, Some("y"));
    let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    text.push('\n');
    write(dir, "manifest.json", &text)?;
    Ok(())
}
