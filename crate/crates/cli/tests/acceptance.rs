//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use devcert_core::blackbox::{combine_lipschitz, model_partition, PartitionCell};
use devcert_core::certify::{
    certify_additive_vs_additive, certify_additive_vs_constant, certify_additive_vs_tree,
    certify_ensemble_vs_tree, certify_tree_tree, extremize_additive, robust_loss_additive, Sense,
};
use devcert_core::models::{Aggregation, Link, PostLink, Shape, Term};
use devcert_core::{
    certify_models, partitioned_maximize, synth, AdditiveModel, Budget, CertResult, CertSpec,
    CertificationSet, DeviationFn, EnsembleOptions, FeatureSpace, ModelFile, Noise, Norm,
    PartitionSpec, Point, Result, Scale, Smoothness,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const TREE_TOL: f64 = 1e-12;
const TREE_TIME: Duration = Duration::from_secs(30);
const SCALE_TIME: Duration = Duration::from_secs(1);
const SCALE_EDGES: u64 = 1_000_000;
const ADDITIVE_TOL: f64 = 1e-9;
const ADDITIVE_TIME: Duration = Duration::from_secs(60);
const ENSEMBLE_TOL: f64 = 1e-9;
const PRUNING_RATIO: f64 = 0.2;
const MONOTONE_TOL: f64 = 1e-12;
const TWO_SIDED_TOL: f64 = 1e-9;
const HOLDER_SLACK: f64 = 1e-12;
const BLACKBOX_TOL: f64 = 1e-12;
const RADII: [f64; 6] = [0.0, 0.1, 0.2, 0.5, 1.0, f64::INFINITY];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random small space: 1..=`max_d` features, at most one categorical.
fn random_space(r: &mut StdRng, max_d: usize) -> Arc<FeatureSpace> {
    let d = r.random_range(1..=max_d);
    let cat = usize::from(d >= 2 && r.random_bool(0.4));
    synth::space(d - cat, cat, 3)
}

fn random_tree(
    r: &mut StdRng,
    space: &Arc<FeatureSpace>,
    min_leaves: usize,
    max_leaves: usize,
) -> devcert_core::DecisionTree {
    let leaves = r.random_range(min_leaves..=max_leaves);
    synth::tree(r, space, leaves, (0.0, 1.0))
}

/// Full space on even instances, a union of three l-infinity balls otherwise.
fn random_certset(r: &mut StdRng, space: &FeatureSpace, i: usize) -> CertificationSet {
    if i.is_multiple_of(2) {
        return CertificationSet::FullSpace;
    }
    let radius = [0.0, 0.05, 0.2, 0.6, 1.5][r.random_range(0..5)];
    CertificationSet::balls(synth::points(r, space, 3), radius, Norm::LInf).unwrap()
}

fn tree_tree_exactness() -> Verdict {
    let mut r = rng(1);
    let d = DeviationFn::abs_diff();
    let (mut worst, mut spent) = (0.0f64, Duration::ZERO);
    for i in 0..200 {
        let space = random_space(&mut r, 3);
        let f = random_tree(&mut r, &space, 1, 16);
        let f0 = random_tree(&mut r, &space, 1, 16);
        let cert = random_certset(&mut r, &space, i);
        let t = Instant::now();
        let res = certify_tree_tree(&f, &f0, &d, &cert).unwrap();
        spent += t.elapsed();
        let want = support::grid_tree_tree(&f, &f0, &d, &cert);
        worst = worst
            .max((res.lower - want).abs())
            .max((res.upper - want).abs());
    }
    verdict(
        worst <= TREE_TOL && spent < TREE_TIME,
        format!(
            "200 instances, max error {worst:.2e} (tol {TREE_TOL:.0e}), certify time {spent:.2?}"
        ),
    )
}

fn thousand_leaf_scale() -> Verdict {
    let mut r = rng(2);
    let space = synth::space(3, 0, 0);
    let f = synth::tree(&mut r, &space, 1000, (0.0, 1.0));
    let f0 = synth::tree(&mut r, &space, 1000, (0.0, 1.0));
    let d = DeviationFn::abs_diff();
    let t = Instant::now();
    let res = certify_tree_tree(&f, &f0, &d, &CertificationSet::FullSpace).unwrap();
    let spent = t.elapsed();
    let sampled = synth::points(&mut r, &space, 20_000)
        .iter()
        .map(|x| d.evaluate(f.predict(x).unwrap(), f0.predict(x).unwrap()))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = res.exact
        && spent < SCALE_TIME
        && res.stats.edges_evaluated <= SCALE_EDGES
        && sampled <= res.upper;
    verdict(
        pass,
        format!(
            "L = L0 = {}/{}: exact={} in {spent:.2?}, {} edge evaluations, value {:.6} >= sampled {sampled:.6}",
            f.num_leaves(),
            f0.num_leaves(),
            res.exact,
            res.stats.edges_evaluated,
            res.upper
        ),
    )
}

fn additive_exactness() -> Verdict {
    let mut r = rng(3);
    let d = DeviationFn::abs_diff();
    let (mut worst, mut spent) = (0.0f64, Duration::ZERO);
    for i in 0..200 {
        let space = random_space(&mut r, 4);
        let cert = random_certset(&mut r, &space, i / 2);
        let (got, want) = if i % 2 == 0 {
            let f = synth::additive(&mut r, &space, 8, Link::Logit);
            let f0 = random_tree(&mut r, &space, 1, 8);
            let t = Instant::now();
            let res = certify_additive_vs_tree(&f, &f0, &d, &cert, Scale::Output).unwrap();
            spent += t.elapsed();
            (
                res,
                support::enum_additive_vs_tree(&f, &f0, &d, &cert, Scale::Output),
            )
        } else {
            let f = synth::additive(&mut r, &space, 8, Link::Identity);
            let f0 = synth::additive(&mut r, &space, 8, Link::Identity);
            let t = Instant::now();
            let res = certify_additive_vs_additive(&f, &f0, &d, &cert).unwrap();
            spent += t.elapsed();
            (res, support::enum_additive_vs_additive(&f, &f0, &d, &cert))
        };
        worst = worst
            .max((got.lower - want).abs())
            .max((got.upper - want).abs());
    }
    verdict(
        worst <= ADDITIVE_TOL && spent < ADDITIVE_TIME,
        format!(
            "100 GAM-vs-tree + 100 GAM-vs-GAM, max error {worst:.2e} (tol {ADDITIVE_TOL:.0e}), certify time {spent:.2?}"
        ),
    )
}

struct EnsembleRun {
    want: f64,
    full: CertResult,
    budgeted: Vec<CertResult>,
}

/// The 100 small ensemble instances, run to completion with a trace and
/// again under small node budgets.
fn ensemble_runs() -> &'static Vec<EnsembleRun> {
    static RUNS: OnceLock<Vec<EnsembleRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let mut r = rng(4);
        let d = DeviationFn::abs_diff();
        (0..100)
            .map(|i| {
                let space = random_space(&mut r, 3);
                let agg = if r.random_bool(0.5) {
                    Aggregation::Sum
                } else {
                    Aggregation::Mean
                };
                let link = if r.random_bool(0.5) {
                    PostLink::Identity
                } else {
                    PostLink::Logistic
                };
                let k = r.random_range(1..=4);
                let l = r.random_range(2..=5);
                let e = synth::ensemble(&mut r, &space, k, l, agg, link);
                let f0 = random_tree(&mut r, &space, 1, 5);
                let cert = random_certset(&mut r, &space, i);
                let opts = EnsembleOptions {
                    trace: true,
                    ..EnsembleOptions::default()
                };
                let full = certify_ensemble_vs_tree(&e, &f0, &d, &cert, &opts).unwrap();
                let budgeted = [1, 2, 5, 20]
                    .iter()
                    .map(|&n| {
                        let opts = EnsembleOptions {
                            budget: Budget {
                                time_limit: None,
                                node_limit: Some(n),
                            },
                            ..EnsembleOptions::default()
                        };
                        certify_ensemble_vs_tree(&e, &f0, &d, &cert, &opts).unwrap()
                    })
                    .collect();
                EnsembleRun {
                    want: support::enum_ensemble_vs_tree(&e, &f0, &d, &cert),
                    full,
                    budgeted,
                }
            })
            .collect()
    })
}

fn ensemble_exactness() -> Verdict {
    let runs = ensemble_runs();
    let mut worst = 0.0f64;
    let mut inexact = 0;
    for run in runs {
        inexact += usize::from(!run.full.exact);
        worst = worst
            .max((run.full.lower - run.want).abs())
            .max((run.full.upper - run.want).abs());
    }
    verdict(
        worst <= ENSEMBLE_TOL && inexact == 0,
        format!(
            "{} instances (K <= 4, L <= 5, d <= 3), max error {worst:.2e} (tol {ENSEMBLE_TOL:.0e}), {inexact} not exact",
            runs.len()
        ),
    )
}

fn anytime_soundness() -> Verdict {
    let (mut steps, mut violations) = (0usize, 0usize);
    for run in ensemble_runs() {
        let exact = run.want;
        let mut prev = (f64::NEG_INFINITY, f64::INFINITY);
        for &(lo, hi) in &run.full.trace {
            steps += 1;
            let bad = lo > exact + ENSEMBLE_TOL
                || hi < exact - ENSEMBLE_TOL
                || lo < prev.0
                || hi > prev.1;
            violations += usize::from(bad);
            prev = (lo, hi);
        }
        for b in &run.budgeted {
            steps += 1;
            violations +=
                usize::from(b.lower > exact + ENSEMBLE_TOL || b.upper < exact - ENSEMBLE_TOL);
        }
    }
    verdict(
        violations == 0 && steps > 0,
        format!("{steps} recorded steps and budgeted stops, {violations} violations"),
    )
}

fn pruning_effectiveness() -> Verdict {
    let d = DeviationFn::abs_diff();
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let mut r = rng(500 + seed);
        let space = synth::space(3, 0, 0);
        let e = synth::ensemble(&mut r, &space, 6, 10, Aggregation::Sum, PostLink::Logistic);
        let f0 = synth::tree(&mut r, &space, 10, (0.0, 1.0));
        let cert = CertificationSet::FullSpace;
        let res =
            certify_ensemble_vs_tree(&e, &f0, &d, &cert, &EnsembleOptions::default()).unwrap();
        let all = support::count_cliques(&e, &f0, &cert);
        ratios.push(res.stats.cliques_completed as f64 / all as f64);
    }
    let med = support::median(ratios.clone());
    verdict(
        med < PRUNING_RATIO,
        format!(
            "K = 6, L = 10, 20 seeds: median completed/exhaustive cliques {med:.4} (max {:.4}, bound {PRUNING_RATIO})",
            ratios.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(name: &str) -> ModelFile {
    devcert_core::io::load_model(fixtures().join(format!("{name}.json"))).unwrap()
}

fn certify_fixture(f: &ModelFile, f0: &ModelFile, scale: Scale, spec: &CertSpec) -> Result<f64> {
    let cert = spec.load(f.space())?;
    let opts = EnsembleOptions {
        scale,
        ..EnsembleOptions::default()
    };
    let r = certify_models(
        &f.model,
        &f0.model,
        &DeviationFn::abs_diff(),
        &cert,
        &opts,
        &mut |_, _| {},
    )?;
    assert!(r.exact, "fixture runs are unbudgeted");
    Ok(r.upper)
}

const FIXTURE_PAIRS: [(&str, &str, Scale); 8] = [
    ("tree_a", "tree_b", Scale::Output),
    ("gam", "tree_b", Scale::Output),
    ("tree_b", "gam", Scale::Output),
    ("gam", "gam_b", Scale::Link),
    ("forest", "tree_b", Scale::Output),
    ("rulelist", "tree_b", Scale::Output),
    ("ruleensemble", "tree_b", Scale::Output),
    ("rulelist", "tree_a", Scale::Output),
];

fn monotonicity_sweep() -> Verdict {
    let centers = fixtures().join("centers.csv");
    let mut failures = Vec::new();
    for (m, r0, scale) in FIXTURE_PAIRS {
        let (f, f0) = (load(m), load(r0));
        let finite = certify_fixture(&f, &f0, scale, &CertSpec::Points(centers.clone())).unwrap();
        let values: Vec<f64> = RADII
            .iter()
            .map(|&radius| {
                let spec = CertSpec::Balls {
                    path: centers.clone(),
                    radius,
                    norm: Norm::LInf,
                };
                certify_fixture(&f, &f0, scale, &spec).unwrap()
            })
            .collect();
        let ordered = values.windows(2).all(|w| w[0] <= w[1] + MONOTONE_TOL);
        let above_finite = values.iter().all(|v| finite <= v + MONOTONE_TOL);
        if !(ordered && above_finite) {
            failures.push(format!("{m} vs {r0}: finite {finite}, balls {values:?}"));
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!(
                "{} fixture pairs over r in {{0, 0.1, 0.2, 0.5, 1, inf}}: non-decreasing, finite set below every ball union",
                FIXTURE_PAIRS.len()
            )
        } else {
            failures.join("; ")
        },
    )
}

type Phi = fn(f64) -> f64;
const PHIS: [Phi; 5] = [
    |t| t,
    |t| t * t,
    f64::sqrt,
    |t| t.exp() - 1.0,
    |t| (1.0 + t).ln(),
];

fn two_sided_extremization() -> Verdict {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let space = random_space(&mut r, 3);
        let terms: Vec<Term> = (0..space.len())
            .map(|j| {
                let shape = match synth::shape(&mut r, &space, j, 8) {
                    Shape::SteppedLinear {
                        breakpoints,
                        values,
                        ..
                    } => Shape::PiecewiseConstant {
                        breakpoints,
                        values,
                    },
                    s => s,
                };
                Term { feature: j, shape }
            })
            .collect();
        let link = if r.random_bool(0.5) {
            Link::Identity
        } else {
            Link::Logit
        };
        let f = AdditiveModel::new(space.clone(), r.random_range(-0.5..0.5), terms, link).unwrap();
        let y0 = match link {
            Link::Logit => r.random_range(0.05..0.95),
            _ => r.random_range(-2.0..2.0),
        };
        let (a, b) = (r.random_range(0.1..2.0), r.random_range(0.1..2.0));
        let (p, q) = (PHIS[r.random_range(0..5)], PHIS[r.random_range(0..5)]);
        let d = DeviationFn::custom(
            move |y, y0| a * p((y - y0).max(0.0)) + b * q((y0 - y).max(0.0)),
            true,
            true,
            false,
        );
        let got =
            certify_additive_vs_constant(&f, y0, &d, &space.domain_box(), Scale::Output).unwrap();
        let mut cuts = vec![Vec::new(); space.len()];
        for t in f.terms() {
            if let Shape::PiecewiseConstant { breakpoints, .. } = &t.shape {
                cuts[t.feature].extend(breakpoints);
            }
        }
        let mut want = f64::NEG_INFINITY;
        support::for_each_point(&support::grid(&space, &cuts), |x| {
            want = want.max(d.evaluate(f.predict(x).unwrap(), y0));
        });
        worst = worst
            .max((got.lower - want).abs())
            .max((got.upper - want).abs());
    }
    verdict(
        worst <= TWO_SIDED_TOL,
        format!("100 random monotone D and GAMs vs grid maximum, max error {worst:.2e} (tol {TWO_SIDED_TOL:.0e})"),
    )
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn holder_difference_pairs() -> Verdict {
    let mut r = rng(9);
    let mut violations = 0u64;
    let mut checks = 0u64;
    for _ in 0..50 {
        let dim = r.random_range(1..=4);
        let mut holder = || {
            let s = Smoothness {
                c: r.random_range(0.1..3.0),
                beta: r.random_range(0.2..=1.0),
            };
            let a: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..1.0)).collect();
            (s, a)
        };
        let ((s1, a1), (s2, a2)) = (holder(), holder());
        let h = |x: &[f64]| s1.c * linf(x, &a1).powf(s1.beta) - s2.c * linf(x, &a2).powf(s2.beta);
        let bound = combine_lipschitz(s1, s2);
        for k in 0..100_000 {
            let x: Vec<f64> = (0..dim).map(|_| r.random_range(0.0..1.0)).collect();
            let y: Vec<f64> = if k % 2 == 0 {
                (0..dim).map(|_| r.random_range(0.0..1.0)).collect()
            } else {
                let scale = 10f64.powi(-r.random_range(1..8));
                x.iter()
                    .map(|v| (v + scale * r.random_range(-1.0..1.0)).clamp(0.0, 1.0))
                    .collect()
            };
            let gap = (h(&x) - h(&y)).abs();
            let allowed = bound.c * linf(&x, &y).powf(bound.beta);
            checks += 1;
            violations += u64::from(gap > allowed + HOLDER_SLACK);
        }
    }
    verdict(
        violations == 0,
        format!("50 pairs x 1e5 point pairs: {violations} violations of (2 max c, min beta) in {checks} checks"),
    )
}

fn best_of(
    f: &dyn Fn(&Point) -> f64,
    partition: &PartitionSpec,
    budget: usize,
) -> devcert_core::OptRun {
    let mut oracle = |x: &Point| Ok(f(x));
    partitioned_maximize(&mut oracle, partition, budget, Noise::Deterministic).unwrap()
}

fn blackbox_regimes() -> Verdict {
    let mut exact_fail = 0;
    for seed in 0..20 {
        let mut r = rng(1000 + seed);
        let space = synth::space(2, 0, 0);
        let f = random_tree(&mut r, &space, 2, 8);
        let f0 = random_tree(&mut r, &space, 2, 8);
        let part = model_partition(&devcert_core::Model::Tree(f.clone()), 10_000)
            .unwrap()
            .intersect(&model_partition(&devcert_core::Model::Tree(f0.clone()), 10_000).unwrap());
        let delta = |x: &Point| f.predict(x).unwrap() - f0.predict(x).unwrap();
        let run = best_of(&delta, &part, part.len());
        let want = support::max_tree_difference(&f, &f0);
        if run.queries_used != part.len() || (run.best_value - want).abs() > BLACKBOX_TOL {
            exact_fail += 1;
        }
    }

    let (mut diffs, mut reg_p, mut reg_u) = (Vec::new(), Vec::new(), Vec::new());
    for seed in 0..20 {
        let mut r = rng(2000 + seed);
        let space = synth::space(2, 0, 0);
        let terms = (0..2)
            .map(|j| {
                let shape = match synth::shape(&mut r, &space, j, 3) {
                    Shape::PiecewiseConstant {
                        breakpoints,
                        values,
                    } => Shape::SteppedLinear {
                        slope: r.random_range(-1.0..1.0),
                        breakpoints,
                        values,
                    },
                    s => s,
                };
                Term { feature: j, shape }
            })
            .collect();
        let f = AdditiveModel::new(space.clone(), 0.0, terms, Link::Identity).unwrap();
        let f0 = synth::tree(&mut r, &space, 4, (0.0, 1.0));
        let part = model_partition(&devcert_core::Model::Additive(f.clone()), 10_000)
            .unwrap()
            .intersect(&model_partition(&devcert_core::Model::Tree(f0.clone()), 10_000).unwrap());
        let c = part
            .cells
            .iter()
            .map(|cell: &PartitionCell| cell.smoothness.c)
            .fold(0.0, f64::max);
        let single = PartitionSpec::single(space.domain_box(), Smoothness { c, beta: 1.0 });
        let budget = 4 * part.len();
        let delta = |x: &Point| f.predict(x).unwrap() - f0.predict(x).unwrap();
        let sup = f0
            .leaves()
            .iter()
            .map(|l| extremize_additive(&f, &l.region, Sense::Max).unwrap().value - l.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let p = sup - best_of(&delta, &part, budget).best_value;
        let u = sup - best_of(&delta, &single, budget).best_value;
        diffs.push(p - u);
        reg_p.push(p);
        reg_u.push(u);
    }
    let med = support::median(diffs);
    verdict(
        exact_fail == 0 && med <= 0.0,
        format!(
            "tree pairs exact with q = cells: {}/20; piecewise-linear median regret partitioned {:.3e} vs unpartitioned {:.3e} (median paired difference {med:.3e})",
            20 - exact_fail,
            support::median(reg_p),
            support::median(reg_u)
        ),
    )
}

fn robust_accuracy_corners() -> Verdict {
    let mut r = rng(11);
    let (mut checks, mut mismatches) = (0, 0);
    for _ in 0..30 {
        let d = r.random_range(1..=10);
        let cat = usize::from(d >= 2 && r.random_bool(0.3));
        let space = synth::space(d - cat, cat, 3);
        let f = synth::glm(&mut r, &space, Link::Logit);
        for x in synth::points(&mut r, &space, 20) {
            let label = if r.random_bool(0.5) { 1 } else { -1 };
            for eps in [0.0, 0.1] {
                let got = robust_loss_additive(&f, &x, label, eps, 0.0).unwrap();
                let want = support::corner_robust_loss(&f, &x, label, eps, 0.0);
                checks += 1;
                mismatches += usize::from(got != want);
            }
        }
    }
    verdict(
        mismatches == 0,
        format!(
            "random GLMs, d <= 10, eps in {{0, 0.1}}: {mismatches} mismatches in {checks} points"
        ),
    )
}

/// Output with the wall-clock line removed.
fn strip_time(s: &[u8]) -> String {
    String::from_utf8_lossy(s)
        .lines()
        .filter(|l| !l.contains("\"wall_time_s\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_devcert");
    let fx = fixtures();
    let p = |n: &str| fx.join(n).display().to_string();
    let tmp = std::env::temp_dir().join(format!("devcert-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let t = |n: &str| tmp.join(n).display().to_string();
    let balls = format!("balls:{}:r=0.5", p("centers.csv"));
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let pair = |m: &str, r0: &str| {
        s(&[
            "--model",
            &p(&format!("{m}.json")),
            "--reference",
            &p(&format!("{r0}.json")),
        ])
    };
    let with = |mut a: Vec<String>, b: &[&str]| {
        a.extend(s(b));
        a
    };
    let runs: Vec<(Vec<String>, Vec<String>)> = vec![
        (
            with(s(&["certify"]), &[])
                .into_iter()
                .chain(pair("stump", "constant"))
                .collect(),
            vec![],
        ),
        (
            with(
                [s(&["certify"]), pair("tree_a", "tree_b")].concat(),
                &["--certset", &balls],
            ),
            vec![],
        ),
        (
            with(
                [s(&["certify"]), pair("gam", "tree_b")].concat(),
                &["--certset", &balls],
            ),
            vec![],
        ),
        (
            with(
                [s(&["certify"]), pair("gam", "gam_b")].concat(),
                &["--scale", "link"],
            ),
            vec![],
        ),
        (
            with([s(&["certify"]), pair("forest", "tree_b")].concat(), &[]),
            vec![],
        ),
        (
            with(
                [s(&["certify"]), pair("forest", "tree_b")].concat(),
                &["--node-limit", "5"],
            ),
            vec![],
        ),
        (
            with([s(&["certify"]), pair("rulelist", "tree_b")].concat(), &[]),
            vec![],
        ),
        (
            with(
                [s(&["certify"]), pair("ruleensemble", "tree_b")].concat(),
                &["--certset", &balls],
            ),
            vec![],
        ),
        (
            with(
                [s(&["sweep"]), pair("gam", "tree_b")].concat(),
                &[
                    "--certset",
                    &balls,
                    "--radii",
                    "0,0.1,0.5,1,inf",
                    "--svg",
                    &t("s.svg"),
                    "--table",
                    &t("t.csv"),
                ],
            ),
            vec![t("s.svg"), t("t.csv")],
        ),
        (
            with([s(&["breakdown"]), pair("forest", "tree_b")].concat(), &[]),
            vec![],
        ),
        (
            with(
                [s(&["breakdown"]), pair("gam", "tree_b")].concat(),
                &["--certset", &balls],
            ),
            vec![],
        ),
        (
            with(
                [s(&["contrib"]), pair("gam", "tree_b")].concat(),
                &["--top-k", "3"],
            ),
            vec![],
        ),
        (
            s(&[
                "robust-acc",
                "--model",
                &p("gam.json"),
                "--data",
                &p("data.csv"),
                "--labels",
                "y",
            ]),
            vec![],
        ),
        (
            s(&[
                "blackbox",
                "--reference",
                &p("tree_b.json"),
                "--model",
                &p("gam.json"),
                "--budget",
                "120",
            ]),
            vec![],
        ),
        (
            s(&[
                "blackbox",
                "--reference",
                &p("tree_b.json"),
                "--oracle",
                "while read l; do echo ${#l}; done",
                "--budget",
                "40",
                "--partition",
                "none",
            ]),
            vec![],
        ),
        (
            s(&[
                "convert",
                "--from",
                "rulelist",
                "--model",
                &p("rulelist.json"),
            ]),
            vec![],
        ),
        (
            s(&[
                "convert",
                "--from",
                "ruleensemble",
                "--model",
                &p("ruleensemble.json"),
            ]),
            vec![],
        ),
        (
            s(&[
                "validate",
                &p("gam.json"),
                &p("forest.json"),
                &p("manifest.json"),
            ]),
            vec![],
        ),
    ];
    let mut differing = Vec::new();
    for (args, files) in &runs {
        let once = || {
            let out = Command::new(exe).args(args).output().unwrap();
            let extra: Vec<String> = files
                .iter()
                .map(|f| strip_time(&std::fs::read(f).unwrap()))
                .collect();
            (out.status.code(), strip_time(&out.stdout), extra)
        };
        let (a, b) = (once(), once());
        if a != b || a.0.is_none() || a.1.is_empty() {
            differing.push(args[0].clone());
        }
    }
    let _ = std::fs::remove_dir_all(&tmp);
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            format!(
                "{} invocations covering every subcommand: byte-identical apart from wall_time_s",
                runs.len()
            )
        } else {
            format!("differing or failed runs: {differing:?}")
        },
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 12] = [
        ("tree x tree exactness", tree_tree_exactness),
        ("1000 x 1000 leaf scale", thousand_leaf_scale),
        ("additive certifiers", additive_exactness),
        ("ensemble exactness", ensemble_exactness),
        ("anytime soundness", anytime_soundness),
        ("pruning effectiveness", pruning_effectiveness),
        ("monotonicity sweep", monotonicity_sweep),
        ("two-extremization property", two_sided_extremization),
        ("Hölder difference bound", holder_difference_pairs),
        ("black-box regimes", blackbox_regimes),
        ("robust accuracy", robust_accuracy_corners),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!v.pass);
        println!(
            "{} {name}: {} [{:.2?}]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
