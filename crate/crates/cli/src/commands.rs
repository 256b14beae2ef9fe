//! Subcommand implementations.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use devcert_core::blackbox::{model_partition, ProcessOracle};
use devcert_core::certify::{breakdown_models, feature_contributions, robust_accuracy, Sense};
use devcert_core::io::{
    load_model, model_from_str, model_to_string, raw_box, read_column, read_points, space_from_dto,
    verify_maximizers, Manifest, OptReport, ReportContext, FORMAT_VERSION,
};
use devcert_core::models::Link;
use devcert_core::{
    certify_models, partitioned_maximize, AdditiveModel, CertReport, CertResult, CertSpec,
    CertificationSet, Contribution, DeviationFn, Error, FeatureBox, FeatureSpace, Model, ModelFile,
    Noise, Oracle, PartitionSpec, Point, Prediction, Result, Scale, Smoothness,
};
use serde_json::json;

use crate::common::{
    box_text, component_text, csv_line, emit, fmt_num, pair_digest, parse_list, scale, scale_name,
    InputDigest, Pair,
};
use crate::svg;
use crate::{PairArgs, ScaleArg};

pub enum Outcome {
    Done,
    BudgetExpired,
}

/// Cap on the number of cells `--partition from-models` may produce.
const PARTITION_CAP: usize = 100_000;

#[derive(Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Comma-separated radii in standardized units; `inf` is the full space.
    #[arg(long)]
    pub radii: String,
    /// CSV of `r,lower,upper,exact`; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Line plot of the bounds against the radius.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Maximizer table per radius with features ranked by mean contribution.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args)]
pub struct BreakdownArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ContribArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Rows to print.
    #[arg(long, default_value_t = 6)]
    pub top_k: usize,
    /// Index of the maximizer to explain.
    #[arg(long, default_value_t = 0, conflicts_with = "leaf")]
    pub maximizer: usize,
    /// Explain the maximizer inside this reference leaf instead.
    #[arg(long)]
    pub leaf: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RobustAccArgs {
    /// Additive model file.
    #[arg(long)]
    pub model: PathBuf,
    /// CSV with the model's feature columns and a label column.
    #[arg(long)]
    pub data: PathBuf,
    /// Label column; values above 0.5 are the positive class.
    #[arg(long)]
    pub labels: String,
    /// Comma-separated l-infinity radii in standardized units.
    #[arg(long, default_value = "0,0.1")]
    pub eps: String,
    /// Decision threshold on the output scale; defaults to the link's zero.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PartitionArg {
    FromModels,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum NoiseArg {
    Deterministic,
    Noisy,
}

#[derive(Args)]
pub struct BlackboxArgs {
    /// Reference model file; also supplies the feature space.
    #[arg(long)]
    pub reference: PathBuf,
    /// Model file queried as a black box.
    #[arg(long, required_unless_present = "oracle", conflicts_with = "oracle")]
    pub model: Option<PathBuf>,
    /// Shell command answering one query per line on stdin/stdout.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Number of queries.
    #[arg(long)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = PartitionArg::FromModels)]
    pub partition: PartitionArg,
    #[arg(long, value_enum, default_value_t = NoiseArg::Deterministic)]
    pub noise: NoiseArg,
    /// Confidence width multiplier for noisy observations.
    #[arg(long, default_value_t = 1.0)]
    pub exploration: f64,
    /// Hölder constant of the black box.
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Hölder exponent of the black box.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Maximize `D(f, f0)` instead of `f - f0`.
    #[arg(long)]
    pub deviation: Option<String>,
    #[arg(long, value_enum, default_value_t = ScaleArg::Prob)]
    pub scale: ScaleArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ConvertFrom {
    Rulelist,
    Ruleensemble,
}

#[derive(Args)]
pub struct ConvertArgs {
    #[arg(long, value_enum)]
    pub from: ConvertFrom,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Model files, dataset manifests or reports.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

fn budget_given(p: &Pair) -> bool {
    p.opts.budget.time_limit.is_some() || p.opts.budget.node_limit.is_some()
}

fn expired(p: &Pair, r: &CertResult) -> bool {
    budget_given(p) && !r.exact && !r.certset_relaxed
}

fn run(p: &Pair, cert: &CertificationSet, stream: bool) -> Result<CertResult> {
    let mut progress = |lower: f64, upper: f64| {
        if stream {
            eprintln!("{}", json!({ "lower": lower, "upper": upper }));
        }
    };
    certify_models(
        &p.model.model,
        &p.reference.model,
        &p.deviation,
        cert,
        &p.opts,
        &mut progress,
    )
}

fn report(
    p: &Pair,
    a: &PairArgs,
    spec: &CertSpec,
    digest: String,
    cert: &CertificationSet,
    r: &CertResult,
    t0: Instant,
) -> Result<CertReport> {
    let ctx = ReportContext {
        inputs_digest: digest,
        model: a.model.display().to_string(),
        reference: a.reference.display().to_string(),
        certset: spec.to_string(),
        deviation: p.deviation.label(),
        scale: scale_name(a.scale).into(),
    };
    let rep = CertReport::new(ctx, p.space(), r, t0.elapsed().as_secs_f64());
    verify_maximizers(&rep, p.space(), cert)?;
    Ok(rep)
}

pub fn certify(a: CertifyArgs) -> Result<Outcome> {
    let t0 = Instant::now();
    let p = Pair::load(&a.pair)?;
    let digest = pair_digest("certify", &a.pair, &p.spec)?.hex();
    let cert = p.certset()?;
    let r = run(&p, &cert, a.pair.stream)?;
    let rep = report(&p, &a.pair, &p.spec, digest, &cert, &r, t0)?;
    emit(a.out.as_ref(), &rep.to_json())?;
    Ok(if expired(&p, &r) {
        Outcome::BudgetExpired
    } else {
        Outcome::Done
    })
}

/// The additive side of the pair and the direction it was pushed at a
/// maximizer with the given scores.
fn additive_view(
    f: &Model,
    f0: &Model,
    model_score: f64,
    reference_score: f64,
) -> Result<(AdditiveModel, Sense)> {
    let up = if model_score >= reference_score {
        Sense::Max
    } else {
        Sense::Min
    };
    let down = match up {
        Sense::Max => Sense::Min,
        Sense::Min => Sense::Max,
    };
    match (f, f0) {
        (Model::Additive(a), Model::Additive(b)) => Ok((a.difference(b)?, up)),
        (Model::Additive(a), _) => Ok((a.clone(), up)),
        (_, Model::Additive(b)) => Ok((b.clone(), down)),
        _ => Err(Error::UnsupportedPair(format!(
            "feature contributions need an additive model, got {} and {}",
            f.kind(),
            f0.kind()
        ))),
    }
}

fn contributions_at(
    p: &Pair,
    region: &FeatureBox,
    model_score: f64,
    reference_score: f64,
) -> Result<Vec<Contribution>> {
    let (h, sense) = additive_view(
        &p.model.model,
        &p.reference.model,
        model_score,
        reference_score,
    )?;
    feature_contributions(&h, region, sense)
}

fn has_additive(p: &Pair) -> bool {
    matches!(p.model.model, Model::Additive(_)) || matches!(p.reference.model, Model::Additive(_))
}

pub fn sweep(a: SweepArgs) -> Result<Outcome> {
    let p = Pair::load(&a.pair)?;
    if !matches!(p.spec, CertSpec::Balls { .. }) {
        return Err(Error::InvalidArgument(
            "sweep needs a balls:FILE:r=R certification set".into(),
        ));
    }
    let radii = parse_list("--radii", &a.radii)?;
    if radii.is_empty() || radii.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidArgument(
            "--radii must list non-negative numbers".into(),
        ));
    }
    let space = p.space().clone();
    let mut rows = Vec::new();
    let mut any_expired = false;
    let mut csv = csv_line(&["r", "lower", "upper", "exact"].map(String::from));
    for &r in &radii {
        let spec = p.spec.with_radius(r).expect("ball spec");
        let cert = spec.load(&space)?;
        let res = run(&p, &cert, a.pair.stream)?;
        any_expired |= expired(&p, &res);
        csv.push_str(&csv_line(&[
            fmt_num(r),
            format!("{}", res.lower),
            format!("{}", res.upper),
            res.exact.to_string(),
        ]));
        rows.push((r, res));
    }
    emit(a.out.as_ref(), &csv)?;
    if let Some(path) = &a.svg {
        let pts: Vec<(f64, f64, f64)> = rows.iter().map(|(r, s)| (*r, s.lower, s.upper)).collect();
        emit(Some(path), &svg::sweep_plot(&pts))?;
    }
    if let Some(path) = &a.table {
        emit(Some(path), &sweep_table(&p, &space, &rows)?)?;
    }
    Ok(if any_expired {
        Outcome::BudgetExpired
    } else {
        Outcome::Done
    })
}

/// One row per feature, ranked by the magnitude of its contribution averaged
/// over the radii (feature index breaks ties; without an additive model the
/// order is the feature order), with the top maximizer's values per radius.
fn sweep_table(p: &Pair, space: &FeatureSpace, rows: &[(f64, CertResult)]) -> Result<String> {
    let d = space.len();
    let mut mean = vec![0.0; d];
    let additive = has_additive(p);
    if additive {
        for (_, res) in rows {
            if let Some(m) = res.maximizers.first() {
                for c in contributions_at(p, &m.region, m.model_score, m.reference_score)? {
                    mean[c.feature] += c.contribution / rows.len() as f64;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    if additive {
        order.sort_by(|&i, &j| mean[j].abs().total_cmp(&mean[i].abs()).then(i.cmp(&j)));
    }
    let mut header: Vec<String> = ["rank", "feature", "mean_contribution"]
        .map(String::from)
        .to_vec();
    header.extend(rows.iter().map(|(r, _)| format!("r={}", fmt_num(*r))));
    let mut out = csv_line(&header);
    let raw: Vec<Option<FeatureBox>> = rows
        .iter()
        .map(|(_, res)| res.maximizers.first().map(|m| raw_box(space, &m.region)))
        .collect();
    for (rank, &j) in order.iter().enumerate() {
        let mut fields = vec![
            (rank + 1).to_string(),
            space.feature(j).name.clone(),
            if additive {
                format!("{}", mean[j])
            } else {
                String::new()
            },
        ];
        fields.extend(raw.iter().map(|b| {
            b.as_ref()
                .map_or_else(String::new, |b| component_text(space, j, b.component(j)))
        }));
        out.push_str(&csv_line(&fields));
    }
    Ok(out)
}

pub fn breakdown(a: BreakdownArgs) -> Result<Outcome> {
    let p = Pair::load(&a.pair)?;
    let cert = p.certset()?;
    let rows = breakdown_models(
        &p.model.model,
        &p.reference.model,
        &p.deviation,
        &cert,
        &p.opts,
    )?;
    let space = p.space();
    let mut out = csv_line(
        &[
            "leaf",
            "region",
            "model_min",
            "model_max",
            "reference_score",
            "deviation",
            "maximizer",
        ]
        .map(String::from),
    );
    for b in &rows {
        out.push_str(&csv_line(&[
            b.leaf.to_string(),
            box_text(space, &b.region),
            format!("{}", b.model_min),
            format!("{}", b.model_max),
            format!("{}", b.reference_score),
            format!("{}", b.deviation),
            box_text(space, &b.maximizer),
        ]));
    }
    emit(a.out.as_ref(), &out)?;
    Ok(Outcome::Done)
}

pub fn contrib(a: ContribArgs) -> Result<Outcome> {
    let p = Pair::load(&a.pair)?;
    if !has_additive(&p) {
        return Err(Error::UnsupportedPair(
            "contrib needs an additive model on either side".into(),
        ));
    }
    let cert = p.certset()?;
    let (region, ms, rs) = match a.leaf {
        Some(leaf) => {
            let rows = breakdown_models(
                &p.model.model,
                &p.reference.model,
                &p.deviation,
                &cert,
                &p.opts,
            )?;
            let b = rows.iter().find(|b| b.leaf == leaf).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "reference leaf {leaf} does not meet the certification set"
                ))
            })?;
            let hi = p.deviation.evaluate(b.model_max, b.reference_score);
            let lo = p.deviation.evaluate(b.model_min, b.reference_score);
            let score = if hi >= lo { b.model_max } else { b.model_min };
            (b.maximizer.clone(), score, b.reference_score)
        }
        None => {
            let r = run(&p, &cert, false)?;
            let m = r.maximizers.get(a.maximizer).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "maximizer {} requested but {} found",
                    a.maximizer,
                    r.maximizers.len()
                ))
            })?;
            (m.region.clone(), m.model_score, m.reference_score)
        }
    };
    let space = p.space();
    let raw = raw_box(space, &region);
    let terms = contributions_at(&p, &region, ms, rs)?;
    let mut out = csv_line(&["rank", "feature", "contribution", "values"].map(String::from));
    for (rank, c) in terms.iter().take(a.top_k).enumerate() {
        out.push_str(&csv_line(&[
            (rank + 1).to_string(),
            space.feature(c.feature).name.clone(),
            format!("{}", c.contribution),
            component_text(space, c.feature, raw.component(c.feature)),
        ]));
    }
    emit(a.out.as_ref(), &out)?;
    Ok(Outcome::Done)
}

pub fn robust_acc(a: RobustAccArgs) -> Result<Outcome> {
    let file = load_model(&a.model)?;
    let Model::Additive(f) = &file.model else {
        return Err(Error::UnsupportedPair(format!(
            "robust-acc needs an additive model, got {}",
            file.model.kind()
        )));
    };
    let eps = parse_list("--eps", &a.eps)?;
    let threshold = a.threshold.unwrap_or(match f.link {
        Link::Identity => 0.0,
        Link::Logit => 0.5,
        Link::Log => 1.0,
    });
    let z = f.link.apply(threshold);
    if !z.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} is outside the range of the {:?} link",
            f.link
        )));
    }
    let points = read_points(&a.data, file.space())?;
    let labels: Vec<i8> = read_column(&a.data, &a.labels)?
        .into_iter()
        .map(|y| if y > 0.5 { 1 } else { -1 })
        .collect();
    let mut digest = InputDigest::new("robust-acc");
    digest.file("model", &a.model)?;
    digest.file("data", &a.data)?;
    digest.option("labels", &a.labels);
    digest.option("eps", &a.eps);
    digest.option("threshold", &format!("{threshold}"));
    let mut results = Vec::new();
    for &e in &eps {
        let acc = robust_accuracy(f, &points, &labels, e, z)?;
        results.push(json!({ "eps": e, "robust_accuracy": acc }));
    }
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "inputs_digest": digest.hex(),
        "model": a.model.display().to_string(),
        "data": a.data.display().to_string(),
        "threshold": threshold,
        "points": points.len(),
        "results": results,
    });
    emit(a.out.as_ref(), &pretty(&doc))?;
    Ok(Outcome::Done)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

/// The model as compared on `scale`; additive models lose their link on the
/// link scale so that partition smoothness is measured there.
fn on_scale(m: &Model, s: Scale) -> Model {
    match (m, s) {
        (Model::Additive(a), Scale::Link) => {
            let mut a = a.clone();
            a.link = Link::Identity;
            Model::Additive(a)
        }
        _ => m.clone(),
    }
}

fn score(m: &Model, x: &Point, s: Scale) -> Result<f64> {
    match m.predict_on(x, s)? {
        Prediction::Score(y) => Ok(y),
        Prediction::Abstain => Err(Error::AbstainUnconfigured),
    }
}

pub fn blackbox(a: BlackboxArgs) -> Result<Outcome> {
    let t0 = Instant::now();
    let reference = load_model(&a.reference)?;
    let space = reference.space().clone();
    let sc = scale(a.scale);
    let deviation: Option<DeviationFn> = a.deviation.as_deref().map(str::parse).transpose()?;
    let model = a.model.as_ref().map(load_model).transpose()?;
    if let Some(m) = &model {
        if m.space() != &space {
            return Err(Error::SchemaMismatch(
                "model and reference files declare different feature spaces".into(),
            ));
        }
    }
    if !(a.c >= 0.0) || !(a.beta > 0.0 && a.beta <= 1.0) {
        return Err(Error::InvalidArgument(
            "--c must be non-negative and --beta in (0, 1]".into(),
        ));
    }
    let noise = match a.noise {
        NoiseArg::Deterministic => Noise::Deterministic,
        NoiseArg::Noisy => Noise::BoundedVariance {
            exploration: a.exploration,
        },
    };
    let user = Smoothness {
        c: a.c,
        beta: a.beta,
    };
    let domain = space.domain_box();
    let partition = match a.partition {
        PartitionArg::None => PartitionSpec::single(domain, user),
        PartitionArg::FromModels => {
            let p0 = model_partition(&on_scale(&reference.model, sc), PARTITION_CAP)?;
            let pf = match &model {
                Some(m) => model_partition(&on_scale(&m.model, sc), PARTITION_CAP)?,
                None => PartitionSpec::single(domain, user),
            };
            let p = p0.intersect(&pf);
            if p.len() > PARTITION_CAP {
                return Err(Error::InvalidArgument(format!(
                    "model partition exceeds {PARTITION_CAP} cells; use --partition none"
                )));
            }
            p
        }
    };
    let mut digest = InputDigest::new("blackbox");
    digest.file("reference", &a.reference)?;
    let oracle_label = match (&a.model, &a.oracle) {
        (Some(path), _) => {
            digest.file("model", path)?;
            format!("model:{}", path.display())
        }
        (None, Some(cmd)) => {
            digest.option("oracle", cmd);
            format!("command:{cmd}")
        }
        (None, None) => unreachable!("clap requires --model or --oracle"),
    };
    let partition_label = match a.partition {
        PartitionArg::FromModels => "from-models",
        PartitionArg::None => "none",
    };
    digest.option("budget", &a.budget.to_string());
    digest.option("partition", partition_label);
    digest.option("noise", &format!("{noise:?}"));
    digest.option("smoothness", &format!("{} {}", a.c, a.beta));
    digest.option("deviation", a.deviation.as_deref().unwrap_or("difference"));
    digest.option("scale", scale_name(a.scale));

    let f0 = reference.model.clone();
    let objective = move |y: f64, x: &Point| -> Result<f64> {
        let y0 = score(&f0, x, sc)?;
        Ok(match &deviation {
            Some(d) => d.evaluate(y, y0),
            None => y - y0,
        })
    };
    let mut process = match &a.oracle {
        Some(cmd) if model.is_none() => Some(ProcessOracle::spawn(cmd, space.clone())?),
        _ => None,
    };
    let mut query = |x: &Point| -> Result<f64> {
        let y = match (&model, process.as_mut()) {
            (Some(m), _) => score(&m.model, x, sc)?,
            (None, Some(o)) => o.query(x)?,
            (None, None) => unreachable!("an oracle is always present"),
        };
        objective(y, x)
    };
    let run = partitioned_maximize(&mut query, &partition, a.budget, noise)?;
    let rep = OptReport::new(
        digest.hex(),
        oracle_label,
        a.budget,
        partition_label.into(),
        partition.len(),
        &space,
        &run,
        t0.elapsed().as_secs_f64(),
    )?;
    emit(a.out.as_ref(), &rep.to_json())?;
    Ok(Outcome::Done)
}

pub fn convert(a: ConvertArgs) -> Result<Outcome> {
    let file = load_model(&a.model)?;
    let model = match (a.from, &file.model) {
        (ConvertFrom::Rulelist, Model::RuleList(r)) => Model::Tree(r.to_tree()?),
        (ConvertFrom::Ruleensemble, Model::RuleEnsemble(r)) => Model::Ensemble(r.to_ensemble()?),
        (from, m) => {
            let want = match from {
                ConvertFrom::Rulelist => "rulelist",
                ConvertFrom::Ruleensemble => "ruleensemble",
            };
            return Err(Error::InvalidArgument(format!(
                "{}: expected a {want} model, found {}",
                a.model.display(),
                m.kind()
            )));
        }
    };
    let out = ModelFile {
        model,
        metadata: file.metadata.clone(),
    };
    emit(a.out.as_ref(), &model_to_string(&out))?;
    Ok(Outcome::Done)
}

/// Checks a report's own invariants and that its maximizers lie in its
/// feature space.
fn check_cert_report(text: &str, origin: &str) -> Result<()> {
    let rep: CertReport =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("{origin}: {e}")))?;
    if rep.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: rep.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if !(rep.lower <= rep.upper) || (rep.exact && rep.lower != rep.upper) {
        return Err(Error::AssumptionViolated(format!(
            "{origin}: bounds [{}, {}] with exact={} are inconsistent",
            rep.lower, rep.upper, rep.exact
        )));
    }
    let space = space_from_dto(&rep.feature_space)?;
    verify_maximizers(&rep, &space, &CertificationSet::FullSpace)
}

fn check_opt_report(text: &str, origin: &str) -> Result<()> {
    let rep: OptReport =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("{origin}: {e}")))?;
    if rep.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: rep.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if rep.regret_curve.len() != rep.queries_used
        || rep.regret_curve.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::AssumptionViolated(format!(
            "{origin}: the best-value curve must be non-decreasing with one entry per query"
        )));
    }
    Ok(())
}

/// Kind sniffed from the top-level keys, then the matching strict check.
fn check_file(path: &PathBuf) -> (String, Result<()>) {
    let origin = path.display().to_string();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return (
                "unknown".into(),
                Err(Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{origin}: {e}"),
                ))),
            )
        }
    };
    let keys: BTreeMap<String, serde_json::Value> = serde_json::from_str(&text).unwrap_or_default();
    let kind = if keys.contains_key("columns") {
        "manifest"
    } else if keys.contains_key("lower") {
        "cert_report"
    } else if keys.contains_key("regret_curve") {
        "opt_report"
    } else {
        "model"
    };
    let result = match kind {
        "manifest" => Manifest::from_str(&text, &origin).map(|_| ()),
        "cert_report" => check_cert_report(&text, &origin),
        "opt_report" => check_opt_report(&text, &origin),
        _ => model_from_str(&text, &origin).map(|_| ()),
    };
    (kind.into(), result)
}

pub fn validate(a: ValidateArgs) -> Result<Outcome> {
    let mut entries = Vec::new();
    let mut first_error = None;
    for path in &a.files {
        let (kind, result) = check_file(path);
        let mut entry = json!({
            "path": path.display().to_string(),
            "kind": kind,
            "valid": result.is_ok(),
        });
        if let Err(e) = result {
            entry["error"] = json!(e.to_string());
            first_error.get_or_insert(e);
        }
        entries.push(entry);
    }
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "valid": first_error.is_none(),
        "files": entries,
    });
    emit(None, &pretty(&doc))?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(Outcome::Done),
    }
}
