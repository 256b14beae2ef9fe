//! CSV datasets and their manifests.
//!
//! A manifest lists the feature columns with their kind and normalization
//! stats, an optional label column and an optional training split. Missing
//! stats are computed from the training split: mean and population standard
//! deviation for continuous columns, the sorted observed vocabulary for
//! categorical ones. Missing bounds default to the observed range.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_text, schema_error, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::space::{FeatureKind, FeatureSpace, FeatureSpec, Point, Value};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub columns: Vec<ColumnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_split: Option<TrainingSplit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

/// Rows whose `column` equals `value` form the training split; with no
/// column every row does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSplit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub space: FeatureSpace,
    /// Standardized points.
    pub points: Vec<Point>,
    pub labels: Option<Vec<f64>>,
}

impl Manifest {
    pub fn from_str(text: &str, origin: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| schema_error(origin, &e))?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Version {
                found: m.format_version,
                expected: FORMAT_VERSION,
            });
        }
        Ok(m)
    }
}

struct Table {
    header: Vec<String>,
    /// `(line, fields)` per data row.
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(text: &str, origin: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("{origin}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{origin}: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(Table { header, rows })
}

fn column(t: &Table, name: &str, origin: &str) -> Result<usize> {
    t.header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Parse(format!("{origin}: missing column `{name}`")))
}

fn parse_num(field: &str, origin: &str, line: u64, col: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Parse(format!(
            "{origin}: row {line}, column `{col}`: `{field}` is not a finite number"
        ))),
    }
}

fn parse_value(
    space: &FeatureSpace,
    j: usize,
    field: &str,
    origin: &str,
    line: u64,
) -> Result<Value> {
    let f = space.feature(j);
    match &f.kind {
        FeatureKind::Continuous { .. } => parse_num(field, origin, line, &f.name).map(Value::Num),
        FeatureKind::Categorical { .. } => space
            .category_index(j, field)
            .map(Value::Cat)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "{origin}: row {line}, column `{}`: unseen category `{field}`",
                    f.name
                ))
            }),
    }
}

fn rows_to_points(
    space: &FeatureSpace,
    t: &Table,
    cols: &[usize],
    origin: &str,
) -> Result<Vec<Point>> {
    t.rows
        .iter()
        .map(|(line, fields)| {
            let raw = Point(
                cols.iter()
                    .enumerate()
                    .map(|(j, c)| parse_value(space, j, &fields[*c], origin, *line))
                    .collect::<Result<_>>()?,
            );
            space.standardize(&raw)
        })
        .collect()
}

fn resolve_space(
    m: &Manifest,
    t: &Table,
    cols: &[usize],
    train: &[usize],
    origin: &str,
) -> Result<FeatureSpace> {
    let mut features = Vec::with_capacity(m.columns.len());
    for (spec, &c) in m.columns.iter().zip(cols) {
        let missing = |what: &str| {
            Error::MissingStats(format!(
                "column `{}` has no {what} and the manifest declares no training split",
                spec.name
            ))
        };
        match spec.kind {
            ColumnKind::Continuous => {
                let parse_rows = |rows: &mut dyn Iterator<Item = usize>| -> Result<Vec<f64>> {
                    rows.map(|i| {
                        let (line, fields) = &t.rows[i];
                        parse_num(&fields[c], origin, *line, &spec.name)
                    })
                    .collect()
                };
                let (mean, std) = match (spec.mean, spec.std) {
                    (Some(m), Some(s)) => (m, s),
                    _ if m.training_split.is_none() => return Err(missing("mean/std")),
                    _ => {
                        let xs = parse_rows(&mut train.iter().copied())?;
                        if xs.is_empty() {
                            return Err(Error::MissingStats(format!(
                                "column `{}`: the training split is empty",
                                spec.name
                            )));
                        }
                        let n = xs.len() as f64;
                        let mean = xs.iter().sum::<f64>() / n;
                        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
                        (spec.mean.unwrap_or(mean), spec.std.unwrap_or(std))
                    }
                };
                let (lo, hi) = match (spec.lo, spec.hi) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => {
                        let xs = parse_rows(&mut (0..t.rows.len()))?;
                        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        if xs.is_empty() {
                            return Err(Error::MissingStats(format!(
                                "column `{}` has no bounds and no rows",
                                spec.name
                            )));
                        }
                        (spec.lo.unwrap_or(lo), spec.hi.unwrap_or(hi))
                    }
                };
                features.push(FeatureSpec::standardized(
                    spec.name.clone(),
                    lo,
                    hi,
                    mean,
                    std,
                ));
            }
            ColumnKind::Categorical => {
                let categories = match &spec.categories {
                    Some(cs) => cs.clone(),
                    None if m.training_split.is_none() => return Err(missing("categories")),
                    None => {
                        let seen: BTreeSet<&str> =
                            train.iter().map(|i| t.rows[*i].1[c].as_str()).collect();
                        seen.into_iter().map(str::to_string).collect()
                    }
                };
                features.push(FeatureSpec::categorical(spec.name.clone(), categories));
            }
        }
    }
    FeatureSpace::new(features)
}

/// Parses a dataset; `origin` names the CSV in error messages.
pub fn dataset_from_str(csv_text: &str, manifest: &Manifest, origin: &str) -> Result<Dataset> {
    let t = read_table(csv_text, origin)?;
    let cols: Vec<usize> = manifest
        .columns
        .iter()
        .map(|c| column(&t, &c.name, origin))
        .collect::<Result<_>>()?;
    let train: Vec<usize> = match &manifest.training_split {
        None => Vec::new(),
        Some(TrainingSplit { column: None, .. }) => (0..t.rows.len()).collect(),
        Some(TrainingSplit {
            column: Some(name),
            value,
        }) => {
            let c = column(&t, name, origin)?;
            let value = value.as_deref().unwrap_or("train");
            (0..t.rows.len())
                .filter(|i| t.rows[*i].1[c] == value)
                .collect()
        }
    };
    let space = resolve_space(manifest, &t, &cols, &train, origin)?;
    let points = rows_to_points(&space, &t, &cols, origin)?;
    let labels = match &manifest.label {
        None => None,
        Some(name) => {
            let c = column(&t, name, origin)?;
            Some(
                t.rows
                    .iter()
                    .map(|(line, fields)| parse_num(&fields[c], origin, *line, name))
                    .collect::<Result<_>>()?,
            )
        }
    };
    Ok(Dataset {
        space,
        points,
        labels,
    })
}

pub fn load_dataset(
    csv_path: impl AsRef<Path>,
    manifest_path: impl AsRef<Path>,
) -> Result<Dataset> {
    let mp = manifest_path.as_ref();
    let manifest = Manifest::from_str(&read_text(mp)?, &mp.display().to_string())?;
    let cp = csv_path.as_ref();
    dataset_from_str(&read_text(cp)?, &manifest, &cp.display().to_string())
}

/// Standardized points from a CSV whose header names every feature of
/// `space`; other columns are ignored.
pub fn points_from_str(csv_text: &str, space: &FeatureSpace, origin: &str) -> Result<Vec<Point>> {
    let t = read_table(csv_text, origin)?;
    let cols: Vec<usize> = space
        .features()
        .iter()
        .map(|f| column(&t, &f.name, origin))
        .collect::<Result<_>>()?;
    rows_to_points(space, &t, &cols, origin)
}

pub fn read_points(path: impl AsRef<Path>, space: &FeatureSpace) -> Result<Vec<Point>> {
    let p = path.as_ref();
    points_from_str(&read_text(p)?, space, &p.display().to_string())
}

/// Values of one numeric column, in row order.
pub fn read_column(path: impl AsRef<Path>, name: &str) -> Result<Vec<f64>> {
    let p = path.as_ref();
    let origin = p.display().to_string();
    let t = read_table(&read_text(p)?, &origin)?;
    let c = column(&t, name, &origin)?;
    t.rows
        .iter()
        .map(|(line, fields)| parse_num(&fields[c], &origin, *line, name))
        .collect()
}

/// Writes standardized points as a raw-unit CSV with a header row.
pub fn points_to_csv(points: &[Point], space: &FeatureSpace) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(space.features().iter().map(|f| f.name.as_str()))
        .map_err(io)?;
    for p in points {
        let raw = space.destandardize(p)?;
        let fields: Vec<String> = raw
            .values()
            .iter()
            .zip(space.features())
            .map(|(v, f)| match (v, &f.kind) {
                (Value::Cat(k), FeatureKind::Categorical { categories }) => categories[*k].clone(),
                (v, _) => v.as_num().map_or_else(String::new, |x| format!("{x}")),
            })
            .collect();
        w.write_record(&fields).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
