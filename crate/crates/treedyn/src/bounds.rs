//! Entropy-bound calculators: the subsystem Lipschitz bound driven by the
//! defect cycle-mean, the defect-frequency check for extensions, and the
//! endpoint-count bound with constructive star/comb extraction.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::Ratio;
use num::traits::ToPrimitive;
use thiserror::Error;

use crate::constructions::ExtensionResult;
use crate::spectral::max_cycle_mean;
use crate::tree::{MetricTree, TreeError};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("empty subsystem")]
    EmptySubsystem,
    #[error("degenerate tree: fewer than 2 endpoints")]
    DegenerateTree,
    #[error("fewer than 3 endpoints")]
    TooFewEndpoints,
}

/// Per-arc Lipschitz data over a transition graph, with a designated
/// subsystem whose complement is charged by the cycle-mean frequency.
#[derive(Debug, Clone)]
pub struct LipschitzSpec {
    pub adjacency: Vec<Vec<usize>>,
    pub constants: Vec<f64>,
    pub subsystem: BTreeSet<usize>,
}

fn log_plus(x: f64) -> f64 {
    x.ln().max(0.0)
}

/// Upper entropy bound log+ L_B + 2 theta_B log+ L_A, where theta_B is
/// the maximal asymptotic frequency of arcs outside the subsystem.
pub fn p_lipschitz_bound(spec: &LipschitzSpec) -> Result<f64, BoundsError> {
    if spec.subsystem.is_empty() {
        return Err(BoundsError::EmptySubsystem);
    }
    assert_eq!(spec.adjacency.len(), spec.constants.len());
    let weights: Vec<u64> = (0..spec.adjacency.len())
        .map(|v| u64::from(!spec.subsystem.contains(&v)))
        .collect();
    let theta = max_cycle_mean(&spec.adjacency, &weights);
    let l_sub = spec
        .subsystem
        .iter()
        .map(|&v| spec.constants[v])
        .fold(0.0_f64, f64::max);
    let l_all = spec.constants.iter().cloned().fold(0.0_f64, f64::max);
    Ok(log_plus(l_sub) + 2.0 * theta.to_f64().unwrap() * log_plus(l_all))
}

/// The defect frequency of an extension: the maximum cycle mean of visits
/// to the defect set D, checked against 2/(N-5).
pub fn theta_defect(ext: &ExtensionResult) -> (Ratio<i64>, bool) {
    let td = ext.map.transition();
    let weights: Vec<u64> = (0..ext.map.arc_count())
        .map(|a| u64::from(ext.defect.contains(&a)))
        .collect();
    let theta = max_cycle_mean(&td.adjacency, &weights);
    let bound = Ratio::new(2, (ext.big_n - 5) as i64);
    (theta, theta <= bound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubtreeKind {
    Star,
    Comb,
}

/// A certified low-entropy witness subtree: a (k+1)-star or a 2^r-comb
/// whose endpoint count alone bounds the entropy infimum.
#[derive(Debug, Clone)]
pub struct ExtractionReport {
    pub kind: SubtreeKind,
    pub subtree: MetricTree,
    pub endpoints: Vec<String>,
    pub k: usize,
    pub certified_bound: f64,
}

/// View of a connected vertex subset of a host tree.
struct Subtree<'a> {
    tree: &'a MetricTree,
    vertices: BTreeSet<usize>,
}

impl<'a> Subtree<'a> {
    fn whole(tree: &'a MetricTree) -> Self {
        Subtree { tree, vertices: (0..tree.vertex_count()).collect() }
    }

    fn degree(&self, v: usize) -> usize {
        self.tree.neighbors(v).iter().filter(|(_, w)| self.vertices.contains(w)).count()
    }

    fn endpoints(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.vertices.iter().copied().filter(|&v| self.degree(v) == 1).collect();
        out.sort_by(|&a, &b| self.tree.vertex_name(a).cmp(self.tree.vertex_name(b)));
        out
    }

    fn branch_points(&self) -> Vec<usize> {
        self.vertices.iter().copied().filter(|&v| self.degree(v) >= 3).collect()
    }

    /// Vertex path inside the view (the host geodesic stays inside a
    /// connected vertex set).
    fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let mut prev: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([a]);
        prev.insert(a, a);
        while let Some(v) = queue.pop_front() {
            if v == b {
                break;
            }
            for &(_, w) in self.tree.neighbors(v) {
                if self.vertices.contains(&w) && !prev.contains_key(&w) {
                    prev.insert(w, v);
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![b];
        let mut v = b;
        while v != a {
            v = prev[&v];
            path.push(v);
        }
        path.reverse();
        path
    }

    /// First branch point on the walk from endpoint `e` into the view.
    fn nearest_branch(&self, e: usize) -> Option<usize> {
        let mut prev = e;
        let mut v = e;
        loop {
            if self.degree(v) >= 3 {
                return Some(v);
            }
            let next = self
                .tree
                .neighbors(v)
                .iter()
                .map(|&(_, w)| w)
                .find(|w| self.vertices.contains(w) && *w != prev)?;
            prev = v;
            v = next;
        }
    }

    /// Connected components of the view minus one vertex.
    fn components_without(&self, cut: usize) -> Vec<BTreeSet<usize>> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut comps = Vec::new();
        for &(_, start) in self.tree.neighbors(cut) {
            if !self.vertices.contains(&start) || seen.contains(&start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = std::collections::VecDeque::from([start]);
            comp.insert(start);
            while let Some(v) = queue.pop_front() {
                for &(_, w) in self.tree.neighbors(v) {
                    if w != cut && self.vertices.contains(&w) && comp.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            comps.push(comp);
        }
        comps
    }
}

/// A comb inside the host: the spine vertex path plus teeth hanging off
/// spine vertices. The anchor end of the spine is spine[0].
#[derive(Debug, Clone)]
struct CombShape {
    spine: Vec<usize>,
    teeth: Vec<Vec<usize>>,
}

impl CombShape {
    fn endpoint_count(&self) -> usize {
        2 + self.teeth.len()
    }

    fn vertex_set(&self) -> BTreeSet<usize> {
        let mut set: BTreeSet<usize> = self.spine.iter().copied().collect();
        for tooth in &self.teeth {
            set.extend(tooth.iter().copied());
        }
        set
    }
}

/// Walks from `v` away from `avoid` down to an endpoint of the view,
/// always taking the smallest-id continuation.
fn walk_to_endpoint(view: &Subtree, v: usize, avoid: &BTreeSet<usize>) -> Vec<usize> {
    let mut path = vec![v];
    let mut prev = v;
    let mut current = *view
        .tree
        .neighbors(v)
        .iter()
        .map(|(_, w)| w)
        .filter(|w| view.vertices.contains(w) && !avoid.contains(w))
        .min_by_key(|&&w| view.tree.vertex_name(w).to_string())
        .expect("free direction exists");
    path.push(current);
    loop {
        let next = view
            .tree
            .neighbors(current)
            .iter()
            .map(|&(_, w)| w)
            .filter(|&w| view.vertices.contains(&w) && w != prev)
            .min_by_key(|&w| view.tree.vertex_name(w).to_string());
        match next {
            Some(w) => {
                path.push(w);
                prev = current;
                current = w;
            }
            None => return path,
        }
    }
}

/// Extracts a (p+3)-comb from a view with at least k^p branch points, all
/// of order at most k. The anchor, when given, becomes the first spine
/// endpoint. Splits at the branch point nearest an endpoint and recurses
/// into the component richest in branch points.
fn extract_comb(view: &Subtree, anchor: Option<usize>, p: usize) -> CombShape {
    let e = anchor.unwrap_or_else(|| view.endpoints()[0]);
    let b = view.nearest_branch(e).expect("comb extraction needs a branch point");
    let toward_e = view.path(b, e);
    if p == 0 {
        // a 3-comb: the free arc to e, one continuation, one tooth
        let avoid: BTreeSet<usize> = toward_e.iter().copied().skip(1).collect();
        let cont = walk_to_endpoint(view, b, &avoid);
        let mut avoid2 = avoid.clone();
        avoid2.extend(cont.iter().copied().skip(1));
        let tooth = walk_to_endpoint(view, b, &avoid2);
        let mut spine: Vec<usize> = toward_e.iter().rev().copied().collect();
        spine.extend(cont.into_iter().skip(1));
        return CombShape { spine, teeth: vec![tooth] };
    }
    let comps = view.components_without(b);
    // ignore the component holding e; recurse into the richest remainder
    let mut candidates: Vec<(usize, String, &BTreeSet<usize>)> = comps
        .iter()
        .filter(|c| !c.contains(&e))
        .map(|c| {
            let sub = Subtree { tree: view.tree, vertices: c.iter().copied().chain([b]).collect() };
            let riches = sub.branch_points().len();
            let smallest = c
                .iter()
                .map(|&v| view.tree.vertex_name(v).to_string())
                .min()
                .expect("component is non-empty");
            (riches, smallest, c)
        })
        .collect();
    // richest first; ties broken by smallest vertex id
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    let richest = candidates[0].2;
    let sub = Subtree { tree: view.tree, vertices: richest.iter().copied().chain([b]).collect() };
    let inner = extract_comb(&sub, Some(b), p - 1);
    // a second free direction at b supplies the new tooth
    let mut used: BTreeSet<usize> = inner.vertex_set();
    used.extend(toward_e.iter().copied().skip(1));
    let tooth = walk_to_endpoint(view, b, &used);
    let mut spine: Vec<usize> = toward_e.iter().rev().copied().collect();
    debug_assert_eq!(inner.spine[0], b);
    spine.extend(inner.spine.iter().copied().skip(1));
    let mut teeth = inner.teeth;
    teeth.push(tooth);
    CombShape { spine, teeth }
}

/// Builds the host subtree spanned by the given vertex paths.
fn subtree_from_paths(tree: &MetricTree, paths: &[&[usize]]) -> MetricTree {
    let mut vertices: BTreeSet<usize> = BTreeSet::new();
    let mut edge_set: BTreeSet<usize> = BTreeSet::new();
    for path in paths {
        vertices.extend(path.iter().copied());
        for pair in path.windows(2) {
            let (e, _) = tree
                .neighbors(pair[0])
                .iter()
                .find(|(_, w)| *w == pair[1])
                .expect("consecutive path vertices are adjacent");
            edge_set.insert(*e);
        }
    }
    let names: Vec<String> = vertices.iter().map(|&v| tree.vertex_name(v).to_string()).collect();
    let edges = edge_set
        .iter()
        .map(|&e| {
            let edge = tree.edge(e);
            (
                edge.id.clone(),
                tree.vertex_name(edge.from).to_string(),
                tree.vertex_name(edge.to).to_string(),
                edge.len.clone(),
            )
        })
        .collect();
    MetricTree::build(names, edges).expect("paths in a tree span a subtree")
}

/// The unique integer with sqrt(log n) - 1 <= k < sqrt(log n), at least 1.
fn extraction_k(n: usize) -> usize {
    let target = (n as f64).ln().sqrt();
    (target.ceil() as usize).saturating_sub(1).max(1)
}

/// Extracts a star or comb witness subtree and certifies the entropy
/// bound log 2 / (its endpoint count); the bound never exceeds
/// log 2 / sqrt(log n).
pub fn extract_and_bound(tree: &MetricTree) -> Result<ExtractionReport, BoundsError> {
    let view = Subtree::whole(tree);
    let endpoints = view.endpoints();
    let n = endpoints.len();
    if n < 2 {
        return Err(BoundsError::DegenerateTree);
    }
    let ln2 = 2f64.ln();
    if n == 2 {
        // the tree is an arc; certify log 2 / 2
        let path = view.path(endpoints[0], endpoints[1]);
        let subtree = subtree_from_paths(tree, &[&path]);
        return Ok(ExtractionReport {
            kind: SubtreeKind::Star,
            endpoints: subtree_endpoint_names(&subtree),
            subtree,
            k: 1,
            certified_bound: ln2 / 2.0,
        });
    }
    let k = extraction_k(n);
    let max_order = (0..tree.vertex_count()).map(|v| tree.degree(v)).max().unwrap();
    if max_order > k {
        // a (k+1)-star at a vertex of maximal order, smallest id on ties
        let hub = (0..tree.vertex_count())
            .filter(|&v| tree.degree(v) == max_order)
            .min_by_key(|&v| tree.vertex_name(v).to_string())
            .unwrap();
        let mut used: BTreeSet<usize> = BTreeSet::new();
        let mut paths: Vec<Vec<usize>> = Vec::new();
        for _ in 0..(k + 1) {
            let leg = walk_to_endpoint(&view, hub, &used);
            used.extend(leg.iter().copied().skip(1));
            paths.push(leg);
        }
        let borrowed: Vec<&[usize]> = paths.iter().map(|p| p.as_slice()).collect();
        let subtree = subtree_from_paths(tree, &borrowed);
        return Ok(ExtractionReport {
            kind: SubtreeKind::Star,
            endpoints: subtree_endpoint_names(&subtree),
            subtree,
            k,
            certified_bound: ln2 / (k + 1) as f64,
        });
    }
    // all branch orders <= k (so k >= 3 here): extract a (2k+2)-comb and
    // keep the largest power-of-two subcomb
    let branch_count = view.branch_points().len();
    let p_target = 2 * k - 1;
    debug_assert!(branch_count >= k.pow(p_target as u32));
    let comb = extract_comb(&view, None, p_target);
    debug_assert_eq!(comb.endpoint_count(), p_target + 3);
    let r = (usize::BITS - 1 - (2 * k + 2).leading_zeros()) as usize; // floor log2
    let keep = (1usize << r) - 2;
    // drop teeth farthest along the spine first
    let mut teeth = comb.teeth.clone();
    teeth.sort_by_key(|tooth| comb.spine.iter().position(|&v| v == tooth[0]).unwrap());
    teeth.truncate(keep);
    let mut paths: Vec<&[usize]> = vec![&comb.spine];
    for tooth in &teeth {
        paths.push(tooth);
    }
    let subtree = subtree_from_paths(tree, &paths);
    Ok(ExtractionReport {
        kind: SubtreeKind::Comb,
        endpoints: subtree_endpoint_names(&subtree),
        subtree,
        k,
        certified_bound: ln2 / (1u64 << r) as f64,
    })
}

fn subtree_endpoint_names(subtree: &MetricTree) -> Vec<String> {
    let pc = subtree.point_class();
    pc.endpoints.into_iter().collect()
}

/// Structural check that a tree with n >= 3 endpoints and maximal branch
/// order k has at least n/k branch points.
pub fn branch_count_check(tree: &MetricTree) -> Result<bool, BoundsError> {
    let pc = tree.point_class();
    let n = pc.endpoints.len();
    if n < 3 {
        return Err(BoundsError::TooFewEndpoints);
    }
    let k = pc.branch_points.iter().map(|b| pc.orders[b]).max().unwrap();
    Ok(pc.branch_points.len() * k >= n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{extend_exact, star_map, StarVariant};
    use crate::rational::int;
    use crate::tree::{make_comb, make_star, make_ye_tree, MetricTree};

    #[test]
    fn lipschitz_bound_with_full_subsystem() {
        let spec = LipschitzSpec {
            adjacency: vec![vec![1], vec![0]],
            constants: vec![3.0, 5.0],
            subsystem: [0, 1].into(),
        };
        let b = p_lipschitz_bound(&spec).unwrap();
        assert!((b - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bound_two_cycle() {
        // 2-cycle, L = (2, 8), subsystem = {first}: theta = 1/2
        let spec = LipschitzSpec {
            adjacency: vec![vec![1], vec![0]],
            constants: vec![2.0, 8.0],
            subsystem: [0].into(),
        };
        let b = p_lipschitz_bound(&spec).unwrap();
        assert!((b - (2f64.ln() + 8f64.ln())).abs() < 1e-12);
        let empty = LipschitzSpec {
            adjacency: vec![vec![]],
            constants: vec![1.0],
            subsystem: BTreeSet::new(),
        };
        assert!(matches!(p_lipschitz_bound(&empty), Err(BoundsError::EmptySubsystem)));
    }

    #[test]
    fn theta_defect_for_small_extensions() {
        let (base, s) = star_map(2, StarVariant::FixedHub).unwrap();
        let ext = extend_exact(&base, &s, 10).unwrap();
        let (theta, ok) = theta_defect(&ext);
        assert!(ok, "theta = {theta}");
        assert!(theta <= Ratio::new(2, 5));
        assert!(theta > Ratio::new(0, 1));
        // degenerate control: with no weighted arcs at all the frequency
        // vanishes even though the graph is full of cycles
        let td = ext.map.transition();
        let zeros = vec![0u64; ext.map.arc_count()];
        assert_eq!(max_cycle_mean(&td.adjacency, &zeros), Ratio::new(0, 1));
    }

    #[test]
    fn extraction_on_arc() {
        let arc = MetricTree::build(
            vec!["u".into(), "v".into()],
            vec![("e".into(), "u".into(), "v".into(), int(1))],
        )
        .unwrap();
        let report = extract_and_bound(&arc).unwrap();
        assert_eq!(report.kind, SubtreeKind::Star);
        assert!((report.certified_bound - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(report.endpoints.len(), 2);
    }

    #[test]
    fn extraction_on_stars_and_small_trees() {
        let s5 = make_star(5, int(1)).unwrap();
        let report = extract_and_bound(&s5).unwrap();
        assert_eq!(report.kind, SubtreeKind::Star);
        assert_eq!(report.endpoints.len(), report.k + 1);
        let n = 5f64;
        assert!(report.certified_bound <= 2f64.ln() / n.ln().sqrt() + 1e-12);
    }

    #[test]
    fn comb_lemma_extraction_on_caterpillar() {
        // 3 branch points of order 3 on a spine: k = 3, p = 1 gives a 4-comb
        let cat = make_comb(5).unwrap(); // 3 branch points, orders 3
        let view = Subtree::whole(&cat);
        let comb = extract_comb(&view, None, 1);
        assert_eq!(comb.endpoint_count(), 4);
        let paths: Vec<&[usize]> = std::iter::once(comb.spine.as_slice())
            .chain(comb.teeth.iter().map(|t| t.as_slice()))
            .collect();
        let subtree = subtree_from_paths(&cat, &paths);
        let pc = subtree.point_class();
        assert_eq!(pc.endpoints.len(), 4);
        assert_eq!(pc.branch_points.len(), 2);
        assert!(pc.branch_points.iter().all(|b| pc.orders[b] == 3));
    }

    #[test]
    fn extraction_comb_branch_on_big_caterpillar() {
        // enough endpoints that sqrt(log n) exceeds every branch order
        let big = make_comb(12000).unwrap();
        let report = extract_and_bound(&big).unwrap();
        assert_eq!(report.kind, SubtreeKind::Comb);
        assert_eq!(report.k, 3);
        assert_eq!(report.endpoints.len(), 8); // largest 2^r <= 2k+2
        assert!((report.certified_bound - 2f64.ln() / 8.0).abs() < 1e-15);
        assert!(report.certified_bound <= 2f64.ln() / (12000f64).ln().sqrt() + 1e-12);
        // the witness is a genuine comb inside the host
        let pc = report.subtree.point_class();
        assert_eq!(pc.branch_points.len(), 6);
        assert!(pc.branch_points.iter().all(|b| pc.orders[b] == 3));
    }

    #[test]
    fn binary_tree_extraction() {
        // complete binary tree with 64 leaves
        let tree = complete_binary_tree(6);
        assert_eq!(tree.endpoint_count(), 64);
        let report = extract_and_bound(&tree).unwrap();
        assert!(report.certified_bound <= 2f64.ln() / 64f64.ln().sqrt() + 1e-12);
        assert!(report.certified_bound <= 0.3401);
        assert!(branch_count_check(&tree).unwrap());
    }

    pub(crate) fn complete_binary_tree(depth: usize) -> MetricTree {
        let mut vertices = vec!["r".to_string()];
        let mut edges = Vec::new();
        let mut level = vec!["r".to_string()];
        for d in 0..depth {
            let mut next = Vec::new();
            for (i, parent) in level.iter().enumerate() {
                for side in 0..2 {
                    let child = format!("n{d}_{}", 2 * i + side);
                    vertices.push(child.clone());
                    edges.push((format!("e{d}_{}", 2 * i + side), parent.clone(), child.clone(), int(1)));
                    next.push(child);
                }
            }
            level = next;
        }
        MetricTree::build(vertices, edges).unwrap()
    }

    #[test]
    fn branch_count_check_examples() {
        assert!(branch_count_check(&make_star(3, int(1)).unwrap()).unwrap());
        assert!(branch_count_check(&make_comb(8).unwrap()).unwrap());
        assert!(branch_count_check(&make_ye_tree(&[3, 2], 2).unwrap()).unwrap());
        let arc = MetricTree::build(
            vec!["u".into(), "v".into()],
            vec![("e".into(), "u".into(), "v".into(), int(1))],
        )
        .unwrap();
        assert!(matches!(branch_count_check(&arc), Err(BoundsError::TooFewEndpoints)));
    }
}
