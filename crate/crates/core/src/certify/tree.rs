use crate::certify::{
    relax_lower, same_space, CertResult, LeafBreakdown, Maximizer, TIE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::geometry::{box_meets_ball, box_meets_certset_relaxed, clip_to_element};
use crate::models::DecisionTree;
use crate::region::FeatureBox;
use crate::space::Point;
use crate::types::{CertificationSet, DeviationFn};

/// Center and radius of element `i`; finite-set points are radius-0 balls.
pub(crate) fn element(cert: &CertificationSet, i: usize) -> (&Point, f64) {
    match cert {
        CertificationSet::FiniteSet { points } => (&points[i], 0.0),
        CertificationSet::BallUnion {
            centers, radius, ..
        } => (&centers[i], *radius),
        CertificationSet::FullSpace => unreachable!("the full space has no elements"),
    }
}

/// Leaves meeting the set, with their witnesses (empty for the full space).
pub(crate) fn filtered_leaves(
    t: &DecisionTree,
    cert: &CertificationSet,
) -> Vec<(usize, Vec<usize>)> {
    t.leaves()
        .iter()
        .enumerate()
        .filter_map(|(i, l)| {
            let m = box_meets_certset_relaxed(&l.region, cert);
            m.nonempty.then_some((i, m.witnesses))
        })
        .collect()
}

/// First element of the set meeting `a ∩ b`, or `None` if there is none.
/// For the full space this is `Some(None)` whenever the boxes intersect.
fn common_witness(
    a: &FeatureBox,
    wa: &[usize],
    b: &FeatureBox,
    wb: &[usize],
    cert: &CertificationSet,
) -> Option<Option<usize>> {
    if !a.intersects(b) {
        return None;
    }
    if let CertificationSet::FullSpace = cert {
        return Some(None);
    }
    let inter = a.intersect(b)?;
    let (mut i, mut k) = (0, 0);
    while i < wa.len() && k < wb.len() {
        match wa[i].cmp(&wb[k]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => k += 1,
            std::cmp::Ordering::Equal => {
                let (center, r) = element(cert, wa[i]);
                if box_meets_ball(&inter, center, r) {
                    return Some(Some(wa[i]));
                }
                i += 1;
                k += 1;
            }
        }
    }
    None
}

fn maximizer_region(
    a: &FeatureBox,
    b: &FeatureBox,
    cert: &CertificationSet,
    witness: Option<usize>,
) -> FeatureBox {
    let inter = a.intersect(b).expect("edge regions are non-empty");
    match witness {
        Some(i) => clip_to_element(&inter, cert, i).expect("witness meets the edge region"),
        None => inter,
    }
}

struct Group {
    best: f64,
    arg: (usize, Option<usize>),
    model_min: f64,
    model_max: f64,
}

/// Exact maximum deviation between two trees: the largest `D(y_l, y0_m)` over
/// leaf pairs whose intersection meets the certification set.
pub fn certify_tree_tree(
    f: &DecisionTree,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
) -> Result<CertResult> {
    same_space(f.space(), f0.space())?;
    let fl = filtered_leaves(f, cert);
    let gl = filtered_leaves(f0, cert);
    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<(usize, usize, Option<usize>, f64)> = Vec::new();
    let mut groups: Vec<Option<Group>> = (0..f0.num_leaves()).map(|_| None).collect();
    let mut edges = 0u64;

    for (l, wl) in &fl {
        let leaf = &f.leaves()[*l];
        for (m, wm) in &gl {
            let reference = &f0.leaves()[*m];
            let Some(witness) = common_witness(&leaf.region, wl, &reference.region, wm, cert)
            else {
                continue;
            };
            edges += 1;
            let dev = d.evaluate(leaf.value, reference.value);
            let g = groups[*m].get_or_insert(Group {
                best: f64::NEG_INFINITY,
                arg: (*l, witness),
                model_min: f64::INFINITY,
                model_max: f64::NEG_INFINITY,
            });
            if dev > g.best {
                g.best = dev;
                g.arg = (*l, witness);
            }
            g.model_min = g.model_min.min(leaf.value);
            g.model_max = g.model_max.max(leaf.value);
            if dev >= best - TIE_TOLERANCE {
                if dev > best + TIE_TOLERANCE {
                    ties.retain(|t| t.3 >= dev - TIE_TOLERANCE);
                }
                best = best.max(dev);
                ties.push((*l, *m, witness, dev));
            }
        }
    }
    if edges == 0 {
        return Err(Error::EmptyCertSet);
    }

    let mut result = CertResult::exact(best);
    result.stats.edges_evaluated = edges;
    result.maximizers = ties
        .into_iter()
        .filter(|t| t.3 >= best - TIE_TOLERANCE)
        .map(|(l, m, witness, dev)| Maximizer {
            region: maximizer_region(&f.leaves()[l].region, &f0.leaves()[m].region, cert, witness),
            model_score: f.leaves()[l].value,
            reference_score: f0.leaves()[m].value,
            deviation: dev,
            reference_leaf: Some(m),
            witness,
        })
        .collect();
    result.breakdown = groups
        .into_iter()
        .enumerate()
        .filter_map(|(m, g)| {
            let g = g?;
            let reference = &f0.leaves()[m];
            Some(LeafBreakdown {
                leaf: m,
                region: reference.region.clone(),
                reference_score: reference.value,
                model_min: g.model_min,
                model_max: g.model_max,
                deviation: g.best,
                maximizer: maximizer_region(
                    &f.leaves()[g.arg.0].region,
                    &reference.region,
                    cert,
                    g.arg.1,
                ),
            })
        })
        .collect();
    relax_lower(&mut result, cert, |x| {
        Ok(d.evaluate(f.predict(x)?, f0.predict(x)?))
    })?;
    Ok(result)
}

/// Per-reference-leaf maxima. Leaves not meeting the set are absent.
pub fn breakdown_by_reference_leaf(
    f: &DecisionTree,
    f0: &DecisionTree,
    d: &DeviationFn,
    cert: &CertificationSet,
) -> Result<Vec<LeafBreakdown>> {
    Ok(certify_tree_tree(f, f0, d, cert)?.breakdown)
}
