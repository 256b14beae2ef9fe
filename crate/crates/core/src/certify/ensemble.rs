//! Anytime clique search on the (K+1)-partite leaf-intersection graph.
//!
//! Vertices are the leaves of the reference tree and of every ensemble tree
//! that meet the certification set; edges join overlapping leaves of
//! different trees. A clique with one leaf per tree is a non-empty region on
//! which both models are constant. The search is depth-first, covers the
//! partite with the fewest compatible leaves next, and prunes a branch when
//! its heuristic bound cannot beat the best completed clique.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use crate::certify::tree::{element, filtered_leaves};
use crate::certify::{relax_lower, same_space, CertResult, LeafBreakdown, Maximizer, SearchStats};
use crate::error::{Error, Result};
use crate::geometry::{box_meets_ball, clip_to_element};
use crate::models::{DecisionTree, Scale, TreeEnsemble};
use crate::region::FeatureBox;
use crate::types::{CertificationSet, DeviationFn};

#[derive(Clone, Debug)]
pub struct Vertex {
    pub partite: usize,
    /// Leaf index inside its tree.
    pub leaf: usize,
    pub region: FeatureBox,
    pub value: f64,
    /// Certification-set elements the leaf meets (unused for the full space).
    pub witnesses: FixedBitSet,
}

#[derive(Clone, Debug)]
pub struct Partite {
    /// Ensemble tree index, or `None` for the reference tree.
    pub tree: Option<usize>,
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct LeafGraph {
    /// Search order: smallest partite first.
    pub partites: Vec<Partite>,
    pub vertices: Vec<Vertex>,
    pub adjacency: Vec<FixedBitSet>,
    pub full_space: bool,
    pub elements: usize,
}

impl LeafGraph {
    pub fn reference_partite(&self) -> usize {
        self.partites
            .iter()
            .position(|p| p.tree.is_none())
            .expect("graph has a reference partite")
    }
}

/// A tree of the search (`None` for the reference) with its surviving
/// leaves and the certification-set elements each one meets.
type FilteredTree<'a> = (Option<usize>, &'a DecisionTree, Vec<(usize, Vec<usize>)>);

/// Builds the certification-set-filtered leaf graph. Fails with
/// `EmptyCertSet` when some tree has no leaf meeting the set.
pub fn build_leaf_graph(
    f: &TreeEnsemble,
    f0: &DecisionTree,
    cert: &CertificationSet,
) -> Result<LeafGraph> {
    same_space(f.space(), f0.space())?;
    let elements = cert.count().unwrap_or(0);
    let mut parts: Vec<(Option<usize>, &DecisionTree)> = vec![(None, f0)];
    parts.extend(f.trees().iter().enumerate().map(|(k, t)| (Some(k), t)));
    let mut filtered: Vec<FilteredTree<'_>> = parts
        .into_iter()
        .map(|(tree, t)| (tree, t, filtered_leaves(t, cert)))
        .collect();
    if filtered.iter().any(|p| p.2.is_empty()) {
        return Err(Error::EmptyCertSet);
    }
    filtered.sort_by_key(|p| p.2.len());

    let mut partites = Vec::with_capacity(filtered.len());
    let mut vertices = Vec::new();
    for (p, (tree, t, leaves)) in filtered.into_iter().enumerate() {
        let mut ids = Vec::with_capacity(leaves.len());
        for (leaf, wit) in leaves {
            let mut witnesses = FixedBitSet::with_capacity(elements);
            for w in wit {
                witnesses.insert(w);
            }
            ids.push(vertices.len());
            vertices.push(Vertex {
                partite: p,
                leaf,
                region: t.leaves()[leaf].region.clone(),
                value: t.leaves()[leaf].value,
                witnesses,
            });
        }
        partites.push(Partite {
            tree,
            vertices: ids,
        });
    }
    let n = vertices.len();
    let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
    for i in 0..n {
        for j in i + 1..n {
            if vertices[i].partite != vertices[j].partite
                && vertices[i].region.intersects(&vertices[j].region)
            {
                adjacency[i].insert(j);
                adjacency[j].insert(i);
            }
        }
    }
    Ok(LeafGraph {
        partites,
        vertices,
        adjacency,
        full_space: matches!(cert, CertificationSet::FullSpace),
        elements,
    })
}

/// Quantity maximized by a search run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `D(y, y0)`.
    Deviation,
    /// `y - y0`.
    MaxDiff,
    /// `y0 - y`.
    MinDiff,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Budget {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleOptions {
    pub scale: Scale,
    pub budget: Budget,
    /// Workers for root splitting; 1 searches sequentially.
    pub threads: usize,
    /// Record `(lower, upper)` after every step (sequential runs only).
    pub trace: bool,
    /// Run the signed max and min searches and combine them through `D`.
    /// Needs a difference-based deviation.
    pub signed: bool,
    /// Restrict the reference tree to this leaf.
    pub reference_leaf: Option<usize>,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            scale: Scale::Output,
            budget: Budget::default(),
            threads: 1,
            trace: false,
            signed: false,
            reference_leaf: None,
        }
    }
}

/// Partial clique: at most one vertex per partite, with the common region,
/// the certification-set elements meeting it, and the compatibility mask.
#[derive(Clone, Debug)]
pub struct PartialClique {
    pub chosen: Vec<Option<usize>>,
    pub running: FeatureBox,
    pub witnesses: FixedBitSet,
    pub z: FixedBitSet,
    /// Sum of the chosen ensemble leaf values.
    pub sum: f64,
    pub reference: Option<f64>,
}

impl PartialClique {
    pub fn is_complete(&self) -> bool {
        self.chosen.iter().all(Option::is_some)
    }
}

/// Everything the search needs besides the graph.
pub struct Search<'a> {
    graph: LeafGraph,
    ensemble: &'a TreeEnsemble,
    d: &'a DeviationFn,
    cert: &'a CertificationSet,
    scale: Scale,
    objective: Objective,
    reference_partite: usize,
}

struct Analysis {
    /// Per partite: number of compatible vertices (0 for covered partites).
    counts: Vec<usize>,
    lo: f64,
    hi: f64,
    reference_values: Vec<f64>,
}

impl<'a> Search<'a> {
    pub fn new(
        f: &'a TreeEnsemble,
        f0: &DecisionTree,
        d: &'a DeviationFn,
        cert: &'a CertificationSet,
        scale: Scale,
        objective: Objective,
    ) -> Result<Self> {
        let graph = build_leaf_graph(f, f0, cert)?;
        let reference_partite = graph.reference_partite();
        Ok(Search {
            graph,
            ensemble: f,
            d,
            cert,
            scale,
            objective,
            reference_partite,
        })
    }

    pub fn graph(&self) -> &LeafGraph {
        &self.graph
    }

    fn restrict_reference(&mut self, leaf: usize) -> Result<()> {
        let p = self.reference_partite;
        let keep: Vec<usize> = self.graph.partites[p]
            .vertices
            .iter()
            .copied()
            .filter(|v| self.graph.vertices[*v].leaf == leaf)
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyCertSet);
        }
        self.graph.partites[p].vertices = keep;
        Ok(())
    }

    pub fn root(&self) -> PartialClique {
        let n = self.graph.vertices.len();
        let mut z = FixedBitSet::with_capacity(n);
        z.insert_range(..);
        let mut witnesses = FixedBitSet::with_capacity(self.graph.elements);
        witnesses.insert_range(..);
        PartialClique {
            chosen: vec![None; self.graph.partites.len()],
            running: self.ensemble.space().domain_box(),
            witnesses,
            z,
            sum: 0.0,
            reference: None,
        }
    }

    fn compatible(&self, s: &PartialClique, v: usize) -> bool {
        let vx = &self.graph.vertices[v];
        s.z.contains(v)
            && vx.region.intersects(&s.running)
            && (self.graph.full_space || !s.witnesses.is_disjoint(&vx.witnesses))
    }

    /// `s` extended by `v`, or `None` if the common region leaves the
    /// certification set.
    pub fn add(&self, s: &PartialClique, v: usize) -> Option<PartialClique> {
        let vx = &self.graph.vertices[v];
        let running = s.running.intersect(&vx.region)?;
        let mut witnesses = s.witnesses.clone();
        if !self.graph.full_space {
            witnesses.intersect_with(&vx.witnesses);
            let stale: Vec<usize> = witnesses
                .ones()
                .filter(|i| {
                    let (c, r) = element(self.cert, *i);
                    !box_meets_ball(&running, c, r)
                })
                .collect();
            for i in stale {
                witnesses.set(i, false);
            }
            if witnesses.is_clear() {
                return None;
            }
        }
        let mut z = s.z.clone();
        z.intersect_with(&self.graph.adjacency[v]);
        let mut chosen = s.chosen.clone();
        chosen[vx.partite] = Some(v);
        let (sum, reference) = if vx.partite == self.reference_partite {
            (s.sum, Some(vx.value))
        } else {
            (s.sum + vx.value, s.reference)
        };
        Some(PartialClique {
            chosen,
            running,
            witnesses,
            z,
            sum,
            reference,
        })
    }

    /// Model score for a sum of ensemble leaf values.
    pub fn score(&self, sum: f64) -> f64 {
        let raw = self.ensemble.raw_from_sum(sum);
        match self.scale {
            Scale::Output => self.ensemble.post_link.apply(raw),
            Scale::Link => raw,
        }
    }

    fn phi(&self, y: f64, y0: f64) -> f64 {
        match self.objective {
            Objective::Deviation => self.d.evaluate(y, y0),
            Objective::MaxDiff => y - y0,
            Objective::MinDiff => y0 - y,
        }
    }

    /// Objective of a complete clique.
    pub fn clique_value(&self, s: &PartialClique) -> f64 {
        self.phi(
            self.score(s.sum),
            s.reference.expect("complete clique has a reference leaf"),
        )
    }

    fn analyze(&self, s: &PartialClique) -> Option<Analysis> {
        let mut counts = vec![0; self.graph.partites.len()];
        let (mut lo, mut hi) = (s.sum, s.sum);
        let mut reference_values = Vec::new();
        for (p, part) in self.graph.partites.iter().enumerate() {
            if s.chosen[p].is_some() {
                continue;
            }
            let (mut pmin, mut pmax) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in &part.vertices {
                if self.compatible(s, v) {
                    counts[p] += 1;
                    let val = self.graph.vertices[v].value;
                    pmin = pmin.min(val);
                    pmax = pmax.max(val);
                    if p == self.reference_partite {
                        reference_values.push(val);
                    }
                }
            }
            if counts[p] == 0 {
                return None;
            }
            if p != self.reference_partite {
                lo += pmin;
                hi += pmax;
            }
        }
        if let Some(y0) = s.reference {
            reference_values.push(y0);
        }
        reference_values.sort_by(f64::total_cmp);
        reference_values.dedup();
        Some(Analysis {
            counts,
            lo,
            hi,
            reference_values,
        })
    }

    fn bound_from(&self, a: &Analysis) -> f64 {
        let (y_lo, y_hi) = (self.score(a.lo), self.score(a.hi));
        a.reference_values
            .iter()
            .map(|y0| self.phi(y_hi, *y0).max(self.phi(y_lo, *y0)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Upper bound on the objective over every completion of `s`: each
    /// uncovered tree contributes its largest or smallest compatible leaf
    /// value, checked against `s` only. `-inf` when some tree has no
    /// compatible leaf.
    pub fn heuristic(&self, s: &PartialClique) -> f64 {
        if s.is_complete() {
            return self.clique_value(s);
        }
        self.analyze(s)
            .map_or(f64::NEG_INFINITY, |a| self.bound_from(&a))
    }

    /// Children of `s` on the partite with the fewest compatible vertices,
    /// best heuristic first, ties to the lower vertex index.
    fn expand(&self, s: &PartialClique, stats: &mut SearchStats) -> Vec<Child> {
        let Some(a) = self.analyze(s) else {
            return Vec::new();
        };
        let p = (0..a.counts.len())
            .filter(|p| s.chosen[*p].is_none())
            .min_by_key(|p| (a.counts[*p], *p))
            .expect("incomplete clique has an uncovered partite");
        let mut children: Vec<Child> = self.graph.partites[p]
            .vertices
            .iter()
            .filter(|v| self.compatible(s, **v))
            .filter_map(|&v| {
                let child = self.add(s, v)?;
                stats.heuristic_evals += 1;
                let h = self.heuristic(&child);
                (h > f64::NEG_INFINITY).then_some(Child { h, v, state: child })
            })
            .collect();
        children.sort_by(|x, y| y.h.total_cmp(&x.h).then(x.v.cmp(&y.v)));
        children
    }

    fn maximizer(&self, s: &PartialClique) -> Maximizer {
        let witness =
            (!self.graph.full_space).then(|| s.witnesses.minimum().expect("clique meets the set"));
        let region = match witness {
            Some(i) => clip_to_element(&s.running, self.cert, i).expect("witness meets the region"),
            None => s.running.clone(),
        };
        let reference_vertex = s.chosen[self.reference_partite].expect("complete clique");
        Maximizer {
            region,
            model_score: self.score(s.sum),
            reference_score: s.reference.expect("complete clique"),
            deviation: self
                .d
                .evaluate(self.score(s.sum), s.reference.expect("complete clique")),
            reference_leaf: Some(self.graph.vertices[reference_vertex].leaf),
            witness,
        }
    }
}

struct Child {
    h: f64,
    v: usize,
    state: PartialClique,
}

struct Frame {
    children: Vec<Child>,
    next: usize,
}

/// Best primal value shared between workers; only ever increases.
struct SharedBound(AtomicU64);

impl SharedBound {
    fn new() -> Self {
        SharedBound(AtomicU64::new(f64::NEG_INFINITY.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn raise(&self, v: f64) {
        let mut cur = self.0.load(Ordering::Relaxed);
        while v > f64::from_bits(cur) {
            match self.0.compare_exchange_weak(
                cur,
                v.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
    }
}

struct WorkerOut {
    best: f64,
    best_state: Option<PartialClique>,
    /// Largest heuristic left unexplored, or `-inf` when finished.
    frontier: f64,
    stats: SearchStats,
}

struct Limits {
    start: Instant,
    budget: Budget,
    nodes: AtomicU64,
    expired: AtomicBool,
}

impl Limits {
    fn over(&self, step: u64) -> bool {
        if self.expired.load(Ordering::Relaxed) {
            return true;
        }
        let hit = self
            .budget
            .node_limit
            .is_some_and(|n| self.nodes.load(Ordering::Relaxed) >= n)
            || (step.is_multiple_of(64)
                && self
                    .budget
                    .time_limit
                    .is_some_and(|t| self.start.elapsed() >= t));
        if hit {
            self.expired.store(true, Ordering::Relaxed);
        }
        hit
    }
}

fn frontier_max(stack: &[Frame]) -> f64 {
    stack
        .iter()
        .filter_map(|f| f.children.get(f.next).map(|c| c.h))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn run_worker(
    search: &Search<'_>,
    roots: Vec<Child>,
    shared: &SharedBound,
    limits: &Limits,
    mut trace: Option<&mut Vec<(f64, f64)>>,
    progress: &mut dyn FnMut(f64, f64),
) -> WorkerOut {
    let mut stats = SearchStats::default();
    let mut best = f64::NEG_INFINITY;
    let mut best_state = None;
    let mut stack = vec![Frame {
        children: roots,
        next: 0,
    }];
    let mut dual_seen = f64::INFINITY;
    let mut step = 0u64;

    while let Some(top) = stack.last_mut() {
        if top.next >= top.children.len() {
            stack.pop();
            continue;
        }
        step += 1;
        if limits.over(step) {
            break;
        }
        let lb = best.max(shared.get());
        let child = &top.children[top.next];
        top.next += 1;
        if child.h <= lb {
            // Children are sorted, so nothing left in this frame can win.
            stats.pruned += (top.children.len() - top.next + 1) as u64;
            top.next = top.children.len();
        } else if child.state.is_complete() {
            stats.cliques_completed += 1;
            if child.h > best {
                best = child.h;
                best_state = Some(child.state.clone());
                shared.raise(best);
            }
        } else {
            stats.nodes_expanded += 1;
            limits.nodes.fetch_add(1, Ordering::Relaxed);
            let state = child.state.clone();
            let children = search.expand(&state, &mut stats);
            stack.push(Frame { children, next: 0 });
        }
        let lb = best.max(shared.get());
        let dual = lb.max(frontier_max(&stack));
        if dual < dual_seen || trace.is_some() {
            dual_seen = dual_seen.min(dual);
            if let Some(t) = trace.as_deref_mut() {
                t.push((lb, dual_seen));
            }
        }
        progress(lb, dual_seen);
        if dual_seen <= lb {
            stats.pruned += stack
                .iter()
                .map(|f| (f.children.len() - f.next) as u64)
                .sum::<u64>();
            stack.clear();
        }
    }
    WorkerOut {
        best,
        best_state,
        frontier: frontier_max(&stack),
        stats,
    }
}

fn merge_stats(into: &mut SearchStats, s: &SearchStats) {
    into.nodes_expanded += s.nodes_expanded;
    into.cliques_completed += s.cliques_completed;
    into.heuristic_evals += s.heuristic_evals;
    into.pruned += s.pruned;
}

/// One search run for a fixed objective.
fn search_once(
    search: &Search<'_>,
    opts: &EnsembleOptions,
    start: Instant,
    progress: &mut dyn FnMut(f64, f64),
) -> Result<(CertResult, Option<PartialClique>)> {
    let mut stats = SearchStats::default();
    let root = search.root();
    let root_h = search.heuristic(&root);
    if root_h == f64::NEG_INFINITY {
        return Err(Error::EmptyCertSet);
    }
    stats.nodes_expanded += 1;
    let roots = search.expand(&root, &mut stats);
    let limits = Limits {
        start,
        budget: opts.budget,
        nodes: AtomicU64::new(1),
        expired: AtomicBool::new(false),
    };
    let shared = SharedBound::new();
    let mut trace = Vec::new();
    let threads = opts.threads.max(1).min(roots.len().max(1));
    let outs: Vec<WorkerOut> = if threads == 1 {
        let t = opts.trace.then_some(&mut trace);
        if let Some(t) = t {
            t.push((f64::NEG_INFINITY, root_h));
            vec![run_worker(
                search,
                roots,
                &shared,
                &limits,
                Some(t),
                progress,
            )]
        } else {
            vec![run_worker(search, roots, &shared, &limits, None, progress)]
        }
    } else {
        let mut buckets: Vec<Vec<Child>> = (0..threads).map(|_| Vec::new()).collect();
        for (i, c) in roots.into_iter().enumerate() {
            buckets[i % threads].push(c);
        }
        std::thread::scope(|scope| {
            let handles: Vec<_> = buckets
                .into_iter()
                .map(|b| {
                    let (shared, limits) = (&shared, &limits);
                    scope.spawn(move || run_worker(search, b, shared, limits, None, &mut |_, _| {}))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("search worker panicked"))
                .collect()
        })
    };

    let mut best = f64::NEG_INFINITY;
    let mut best_state = None;
    let mut frontier = f64::NEG_INFINITY;
    for o in outs {
        merge_stats(&mut stats, &o.stats);
        frontier = frontier.max(o.frontier);
        if o.best > best {
            best = o.best;
            best_state = o.best_state;
        }
    }
    let expired = limits.expired.load(Ordering::Relaxed);
    if !expired && best == f64::NEG_INFINITY {
        return Err(Error::EmptyCertSet);
    }
    let upper = if expired {
        best.max(frontier).min(root_h)
    } else {
        best
    };
    let mut result = CertResult::exact(best);
    result.upper = upper;
    result.exact = !expired || best >= upper;
    result.stats = stats;
    result.trace = trace;
    Ok((result, best_state))
}

/// Anytime bounds on the maximum deviation of a tree ensemble from a single
/// reference tree. Without a budget the search runs to completion and the
/// result is exact; on expiry `lower` is the best clique found and `upper`
/// the largest heuristic left on the frontier.
pub fn certify_ensemble_vs_tree(
    f: &TreeEnsemble,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
    opts: &EnsembleOptions,
) -> Result<CertResult> {
    certify_ensemble_vs_tree_streaming(f, f0, d, cert, opts, &mut |_, _| {})
}

/// Like [`certify_ensemble_vs_tree`], calling `progress(lower, upper)` after
/// every search step of a sequential run.
pub fn certify_ensemble_vs_tree_streaming(
    f: &TreeEnsemble,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
    opts: &EnsembleOptions,
    progress: &mut dyn FnMut(f64, f64),
) -> Result<CertResult> {
    if !d.monotone {
        return Err(Error::AssumptionViolated(
            "ensemble certification needs a monotone deviation function".into(),
        ));
    }
    let start = Instant::now();
    let mut result = if opts.signed {
        if !d.difference {
            return Err(Error::AssumptionViolated(
                "signed search needs a deviation that depends only on the difference".into(),
            ));
        }
        let mut runs = Vec::with_capacity(2);
        for objective in [Objective::MaxDiff, Objective::MinDiff] {
            let mut s = Search::new(f, f0, d, cert, opts.scale, objective)?;
            if let Some(leaf) = opts.reference_leaf {
                s.restrict_reference(leaf)?;
            }
            let (r, state) = search_once(&s, opts, start, progress)?;
            let m = state.map(|st| s.maximizer(&st));
            runs.push((r, m));
        }
        let (lo_run, lo_max) = runs.pop().expect("two runs");
        let (hi_run, hi_max) = runs.pop().expect("two runs");
        let phi = |delta: f64| {
            if delta.is_finite() {
                d.evaluate(delta, 0.0)
            } else {
                f64::NEG_INFINITY
            }
        };
        let lower = phi(hi_run.lower).max(phi(-lo_run.lower));
        let upper = phi(hi_run.upper).max(phi(-lo_run.upper));
        let mut stats = hi_run.stats.clone();
        merge_stats(&mut stats, &lo_run.stats);
        let mut result = CertResult::exact(lower);
        result.upper = upper.max(lower);
        result.exact = hi_run.exact && lo_run.exact;
        result.stats = stats;
        result.signed_range = Some((hi_run.upper, -lo_run.upper));
        let (a, b) = (phi(hi_run.lower), phi(-lo_run.lower));
        result.maximizers = [(a, hi_max), (b, lo_max)]
            .into_iter()
            .filter(|(v, _)| *v >= lower - crate::certify::TIE_TOLERANCE)
            .filter_map(|(_, m)| m)
            .collect();
        result
    } else {
        let mut s = Search::new(f, f0, d, cert, opts.scale, Objective::Deviation)?;
        if let Some(leaf) = opts.reference_leaf {
            s.restrict_reference(leaf)?;
        }
        let (mut r, state) = search_once(&s, opts, start, progress)?;
        r.maximizers = state.iter().map(|st| s.maximizer(st)).collect();
        r
    };
    relax_lower(&mut result, cert, |x| {
        let y = match opts.scale {
            Scale::Output => f.predict(x)?,
            Scale::Link => f.predict_raw(x)?,
        };
        Ok(d.evaluate(y, f0.predict(x)?))
    })?;
    Ok(result)
}

/// Per-reference-leaf maxima, one search per reference leaf meeting the set.
pub fn breakdown_ensemble(
    f: &TreeEnsemble,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
    opts: &EnsembleOptions,
) -> Result<Vec<LeafBreakdown>> {
    let mut out = Vec::new();
    for m in f0.leaves_meeting_relaxed(cert) {
        let leaf_opts = EnsembleOptions {
            reference_leaf: Some(m),
            signed: d.difference,
            trace: false,
            ..opts.clone()
        };
        let r = match certify_ensemble_vs_tree(f, f0, d, cert, &leaf_opts) {
            Ok(r) => r,
            Err(Error::EmptyCertSet) => continue,
            Err(e) => return Err(e),
        };
        let y0 = f0.leaves()[m].value;
        let (model_max, model_min) = match r.signed_range {
            Some((hi, lo)) => (y0 + hi, y0 + lo),
            None => {
                let y = r.maximizers.first().map_or(f64::NAN, |x| x.model_score);
                (y, y)
            }
        };
        out.push(LeafBreakdown {
            leaf: m,
            region: f0.leaves()[m].region.clone(),
            reference_score: y0,
            model_min,
            model_max,
            deviation: r.upper,
            maximizer: r
                .maximizers
                .first()
                .map_or_else(|| f0.leaves()[m].region.clone(), |x| x.region.clone()),
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyCertSet);
    }
    Ok(out)
}

/// Heuristic bound of a partial clique; see [`Search::heuristic`].
pub fn heuristic_bound(search: &Search<'_>, s: &PartialClique) -> f64 {
    search.heuristic(s)
}
