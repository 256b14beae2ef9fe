//! Query-based maximization of `delta(x) = f(x) - f0(x)`.
//!
//! [`hoo_maximize`] grows a binary tree of cells over a box, always refining
//! the cell with the largest optimistic index `mean + width + c * diam^beta`.
//! [`partitioned_maximize`] splits the budget across the cells of a known
//! partition on which `delta` is smoother, spending one query on cells where
//! it is constant.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use crate::certify::additive::{extremize_additive, Sense};
use crate::error::{Error, Result};
use crate::models::{AdditiveModel, Link, Model, Shape};
use crate::region::{Component, FeatureBox, Interval};
use crate::space::{FeatureKind, FeatureSpace, Point, Value};

/// Anything that can be queried at a standardized point.
pub trait Oracle {
    fn query(&mut self, x: &Point) -> Result<f64>;
}

impl<F: FnMut(&Point) -> Result<f64>> Oracle for F {
    fn query(&mut self, x: &Point) -> Result<f64> {
        self(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise {
    Deterministic,
    /// Observations are noisy; confidence widths scale with `exploration`.
    BoundedVariance {
        exploration: f64,
    },
}

/// Hölder smoothness `|h(x) - h(y)| <= c * l(x, y)^beta` in the normalized
/// l-infinity metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Smoothness {
    pub c: f64,
    pub beta: f64,
}

impl Default for Smoothness {
    fn default() -> Self {
        Smoothness { c: 1.0, beta: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptRun {
    pub queries_used: usize,
    pub best_point: Point,
    pub best_value: f64,
    /// Best value seen after each query.
    pub regret_curve: Vec<f64>,
}

impl OptRun {
    fn record(&mut self, x: &Point, y: f64) {
        self.queries_used += 1;
        if self.regret_curve.is_empty() || y > self.best_value {
            self.best_value = y;
            self.best_point = x.clone();
        }
        self.regret_curve.push(self.best_value);
    }

    fn empty() -> Self {
        OptRun {
            queries_used: 0,
            best_point: Point(Vec::new()),
            best_value: f64::NEG_INFINITY,
            regret_curve: Vec::new(),
        }
    }
}

struct Cell {
    region: FeatureBox,
    children: Option<(usize, usize)>,
    n: u64,
    sum: f64,
    b: f64,
    /// Queried and unsplittable under deterministic noise: nothing left to learn.
    exhausted: bool,
}

impl Cell {
    fn new(region: FeatureBox) -> Self {
        Cell {
            region,
            children: None,
            n: 0,
            sum: 0.0,
            b: f64::INFINITY,
            exhausted: false,
        }
    }
}

/// Halves the longest normalized edge; `None` when the cell is a point.
fn bisect(b: &FeatureBox) -> Option<(FeatureBox, FeatureBox)> {
    let (j, extent) = b
        .components()
        .iter()
        .map(Component::extent)
        .enumerate()
        .fold(
            (0, 0.0),
            |best, (j, e)| if e > best.1 { (j, e) } else { best },
        );
    if extent <= 0.0 {
        return None;
    }
    let (mut left, mut right) = (b.clone(), b.clone());
    match b.component(j) {
        Component::Interval(i) => {
            let mid = i.midpoint();
            *left.component_mut(j) =
                Component::Interval(Interval::with_openness(i.lo, mid, i.lo_open, false));
            *right.component_mut(j) =
                Component::Interval(Interval::with_openness(mid, i.hi, false, i.hi_open));
        }
        Component::Categories(s) => {
            let (a, c) = s.halves();
            *left.component_mut(j) = Component::Categories(a);
            *right.component_mut(j) = Component::Categories(c);
        }
    }
    Some((left, right))
}

/// Hierarchical optimistic optimization over `region` with at most `budget`
/// queries. Stops early once every cell is exhausted.
pub fn hoo_maximize(
    oracle: &mut dyn Oracle,
    region: &FeatureBox,
    budget: usize,
    noise: Noise,
    smoothness: Smoothness,
) -> Result<OptRun> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if budget == 0 {
        return Err(Error::InvalidArgument(
            "query budget must be at least 1".into(),
        ));
    }
    let width = match noise {
        Noise::Deterministic => 0.0,
        Noise::BoundedVariance { exploration } => exploration,
    };
    let mut cells = vec![Cell::new(region.clone())];
    let mut run = OptRun::empty();
    for t in 1..=budget {
        let mut path = vec![0usize];
        let mut node = 0;
        while let Some((l, r)) = cells[node].children {
            node = if cells[r].b > cells[l].b { r } else { l };
            path.push(node);
        }
        if cells[node].b == f64::NEG_INFINITY {
            break;
        }
        if cells[node].n > 0 {
            match bisect(&cells[node].region) {
                Some((l, r)) => {
                    let li = cells.len();
                    cells.push(Cell::new(l));
                    cells.push(Cell::new(r));
                    cells[node].children = Some((li, li + 1));
                    node = li;
                    path.push(node);
                }
                None if width == 0.0 => {
                    cells[node].exhausted = true;
                }
                None => {}
            }
        }
        if !cells[node].exhausted {
            let x = cells[node].region.center();
            let y = oracle.query(&x)?;
            if !y.is_finite() {
                return Err(Error::OracleFailure(format!("oracle returned {y}")));
            }
            run.record(&x, y);
            for &p in &path {
                cells[p].n += 1;
                cells[p].sum += y;
            }
        }
        // Refresh indices bottom-up along the path.
        let ln_t = (t as f64).ln();
        for &p in path.iter().rev() {
            let cell = &cells[p];
            let u = if cell.exhausted && cell.children.is_none() {
                f64::NEG_INFINITY
            } else if cell.n == 0 {
                f64::INFINITY
            } else {
                let n = cell.n as f64;
                cell.sum / n
                    + width * (2.0 * ln_t / n).sqrt()
                    + smoothness.c * cell.region.diameter().powf(smoothness.beta)
            };
            let b = match cell.children {
                Some((l, r)) => u.min(cells[l].b.max(cells[r].b)),
                None => u,
            };
            cells[p].b = b;
        }
    }
    Ok(run)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionCell {
    pub region: FeatureBox,
    pub smoothness: Smoothness,
}

/// Cover of the search region by cells on which `delta` has known smoothness.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSpec {
    pub cells: Vec<PartitionCell>,
}

impl PartitionSpec {
    pub fn single(region: FeatureBox, smoothness: Smoothness) -> Self {
        PartitionSpec {
            cells: vec![PartitionCell { region, smoothness }],
        }
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Non-empty pairwise intersections of two partitions, with combined
    /// smoothness.
    pub fn intersect(&self, other: &PartitionSpec) -> PartitionSpec {
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if let Some(region) = a.region.intersect(&b.region) {
                    cells.push(PartitionCell {
                        region,
                        smoothness: combine_lipschitz(a.smoothness, b.smoothness),
                    });
                }
            }
        }
        PartitionSpec { cells }
    }
}

/// Smoothness certified for `h0 - h1` from the smoothness of each part.
pub fn combine_lipschitz(a: Smoothness, b: Smoothness) -> Smoothness {
    Smoothness {
        c: 2.0 * a.c.max(b.c),
        beta: a.beta.min(b.beta),
    }
}

/// Splits `budget` across the cells and keeps the best result. Constant
/// cells get a single query; the rest share the remainder equally, with any
/// leftover going to the largest cells. Cells run in order.
pub fn partitioned_maximize(
    oracle: &mut dyn Oracle,
    partition: &PartitionSpec,
    budget: usize,
    noise: Noise,
) -> Result<OptRun> {
    let pi = partition.len();
    if pi == 0 {
        return Err(Error::EmptyRegion);
    }
    if budget < pi {
        return Err(Error::BudgetTooSmall { budget, cells: pi });
    }
    let constant: Vec<bool> = partition
        .cells
        .iter()
        .map(|c| c.smoothness.c == 0.0)
        .collect();
    let varying: Vec<usize> = (0..pi).filter(|i| !constant[*i]).collect();
    let mut alloc: Vec<usize> = constant.iter().map(|c| usize::from(*c)).collect();
    if !varying.is_empty() {
        let rest = budget - (pi - varying.len());
        let share = rest / varying.len();
        let mut extra = rest % varying.len();
        let mut by_size = varying.clone();
        by_size.sort_by(|a, b| {
            partition.cells[*b]
                .region
                .measure()
                .total_cmp(&partition.cells[*a].region.measure())
                .then(a.cmp(b))
        });
        for &i in &varying {
            alloc[i] = share;
        }
        for &i in &by_size {
            if extra == 0 {
                break;
            }
            alloc[i] += 1;
            extra -= 1;
        }
    }
    let mut run = OptRun::empty();
    for (cell, q) in partition.cells.iter().zip(alloc) {
        let sub = hoo_maximize(oracle, &cell.region, q, noise, cell.smoothness)?;
        let before = run.best_value;
        run.queries_used += sub.queries_used;
        run.regret_curve
            .extend(sub.regret_curve.iter().map(|y| before.max(*y)));
        if sub.best_value > run.best_value {
            run.best_value = sub.best_value;
            run.best_point = sub.best_point;
        }
    }
    Ok(run)
}

fn additive_partition(m: &AdditiveModel, cap: usize) -> Result<PartitionSpec> {
    let domain = m.space().domain_box();
    let mut boxes = vec![domain.clone()];
    for t in m.terms() {
        let bps: &[f64] = match &t.shape {
            Shape::PiecewiseConstant { breakpoints, .. }
            | Shape::SteppedLinear { breakpoints, .. } => breakpoints,
            _ => continue,
        };
        let dom = domain.interval(t.feature);
        let pieces: Vec<Interval> = (0..=bps.len())
            .map(|i| crate::models::additive::segment(bps, i).intersect(&dom))
            .filter(|i| !i.is_empty())
            .collect();
        if boxes.len() * pieces.len() > cap {
            return Err(Error::InvalidArgument(format!(
                "model partition exceeds {cap} cells; use --partition none"
            )));
        }
        boxes = boxes
            .into_iter()
            .flat_map(|b| {
                pieces.iter().map(move |p| {
                    let mut nb = b.clone();
                    *nb.component_mut(t.feature) = Component::Interval(*p);
                    nb
                })
            })
            .collect();
    }
    let slope: f64 = m
        .terms()
        .iter()
        .map(|t| match &t.shape {
            Shape::Linear { w } => w.abs(),
            Shape::SteppedLinear { slope, .. } => slope.abs(),
            _ => 0.0,
        })
        .sum();
    let mut cells = Vec::with_capacity(boxes.len());
    for region in boxes {
        let scale = match m.link {
            Link::Identity => 1.0,
            Link::Logit => 0.25,
            Link::Log => extremize_additive(m, &region, Sense::Max)?.value.exp(),
        };
        cells.push(PartitionCell {
            region,
            smoothness: Smoothness {
                c: slope * scale,
                beta: 1.0,
            },
        });
    }
    Ok(PartitionSpec { cells })
}

fn tree_partition(t: &crate::models::DecisionTree) -> PartitionSpec {
    PartitionSpec {
        cells: t
            .leaves()
            .iter()
            .map(|l| PartitionCell {
                region: l.region.clone(),
                smoothness: Smoothness { c: 0.0, beta: 1.0 },
            })
            .collect(),
    }
}

/// Cells on which a model's output-scale prediction is constant (trees,
/// rules, ensembles) or Lipschitz (additive models).
pub fn model_partition(m: &Model, cap: usize) -> Result<PartitionSpec> {
    let check = |p: PartitionSpec| {
        if p.len() > cap {
            Err(Error::InvalidArgument(format!(
                "model partition exceeds {cap} cells; use --partition none"
            )))
        } else {
            Ok(p)
        }
    };
    match m {
        Model::Tree(t) => Ok(tree_partition(t)),
        Model::RuleList(r) => Ok(tree_partition(&r.to_tree()?)),
        Model::Additive(a) => additive_partition(a, cap),
        Model::Ensemble(e) => {
            let mut p = tree_partition(&e.trees()[0]);
            for t in &e.trees()[1..] {
                p = check(p.intersect(&tree_partition(t)))?;
            }
            Ok(p)
        }
        Model::RuleEnsemble(r) => model_partition(&Model::Ensemble(r.to_ensemble()?), cap),
    }
}

/// External model queried over a line protocol: each request is one line of
/// comma-separated raw feature values (category names for categorical
/// features), each response one line holding a number.
pub struct ProcessOracle {
    space: FeatureSpace,
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ProcessOracle {
    pub fn spawn(command: &str, space: FeatureSpace) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::OracleFailure(format!("cannot start `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessOracle {
            space,
            child,
            stdin,
            stdout,
        })
    }

    fn request_line(&self, x: &Point) -> Result<String> {
        let raw = self.space.destandardize(x)?;
        let fields: Vec<String> = raw
            .values()
            .iter()
            .zip(self.space.features())
            .map(|(v, f)| match (v, &f.kind) {
                (Value::Cat(k), FeatureKind::Categorical { categories }) => categories[*k].clone(),
                (v, _) => v.as_num().map_or_else(String::new, |x| format!("{x}")),
            })
            .collect();
        Ok(fields.join(","))
    }
}

impl Oracle for ProcessOracle {
    fn query(&mut self, x: &Point) -> Result<f64> {
        let line = self.request_line(x)?;
        writeln!(self.stdin, "{line}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| Error::OracleFailure(format!("write to oracle failed: {e}")))?;
        let mut reply = String::new();
        let n = self
            .stdout
            .read_line(&mut reply)
            .map_err(|e| Error::OracleFailure(format!("read from oracle failed: {e}")))?;
        if n == 0 {
            return Err(Error::OracleFailure("oracle closed its output".into()));
        }
        reply.trim().parse().map_err(|_| {
            Error::OracleFailure(format!(
                "oracle replied `{}`, expected a number",
                reply.trim()
            ))
        })
    }
}

impl Drop for ProcessOracle {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
