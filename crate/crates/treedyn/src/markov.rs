//! P-linear Markov maps on metric trees.
//!
//! A map is given combinatorially by a marked invariant point set P and a
//! point-image assignment. After normalization P is exactly the vertex
//! set, the basic arcs are the edges, and the image of a basic arc is the
//! geodesic between its endpoint images; the map itself is the unique
//! length-proportional realization on each arc. Everything downstream —
//! transition matrix, slopes, entropy, transitivity/exactness, constant
//! slope re-metrization — derives from that data.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::traits::Zero;
use thiserror::Error;

use crate::rational::Rational;
use crate::spectral::{self, SpectralError, SquareMatrix};
use crate::tree::{MetricTree, TreeError, TreePoint};

#[derive(Debug, Error)]
pub enum MarkovError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("duplicate mark at the same point: {0}")]
    DuplicateMark(String),
    #[error("marks miss a branch point: {0}")]
    MarksMissVertex(String),
    #[error("image not in P: {0}")]
    ImageNotInP(String),
    #[error("no image for mark {0}")]
    MissingImage(String),
    #[error("degenerate arc image on [{0}, {1}]")]
    DegenerateArcImage(String, String),
    #[error("methods disagree beyond tol: rome {0} vs power {1}")]
    MethodsDisagree(f64, f64),
    #[error("not transitive")]
    NotTransitive,
    #[error("orbit not finite within cap (point {0})")]
    OrbitNotFinite(String),
}

/// A Markov map: normalized tree (P = vertex set) plus vertex images.
#[derive(Debug, Clone)]
pub struct MarkovMap {
    tree: MetricTree,
    image: Vec<usize>,
}

/// Transition structure of a Markov map. Arc `i` is edge `i` of the
/// normalized tree, oriented from `edge.from` to `edge.to`.
#[derive(Debug, Clone)]
pub struct TransitionData {
    pub matrix: SquareMatrix,
    /// successor arc indices, ascending
    pub adjacency: Vec<Vec<usize>>,
    /// geodesic image of each arc in traversal order; `forward` means the
    /// hop runs from the target arc's `from` endpoint to its `to` endpoint
    pub rows: Vec<Vec<(usize, bool)>>,
    /// per-arc expansion factor: length of the image over length of the arc
    pub slopes: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsFailure {
    BadTuple(String),
    /// condition (a): f(s_i) != s_{i+1}
    ChainImage { index: usize, expected: String, got: String },
    /// condition (b): [s_0, s_n] is not a basic arc
    NotBasicArc,
    /// condition (b): s_n is not an endpoint of the tree
    NotEndpoint,
    /// condition (c): arcs with no path to the arc [s_0, s_n]
    Unreachable(Vec<String>),
}

/// Outcome of the (P,S)-linearity check.
#[derive(Debug, Clone)]
pub struct PsReport {
    pub ok: bool,
    pub failures: Vec<PsFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    Rome,
    Power,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DynamicalProperties {
    pub transitive: bool,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum PosKey {
    Vertex(String),
    Interior(String, Rational),
}

fn position_key(p: &TreePoint) -> PosKey {
    match p {
        TreePoint::Vertex(v) => PosKey::Vertex(v.clone()),
        TreePoint::Interior { edge, offset } => PosKey::Interior(edge.clone(), offset.clone()),
    }
}

impl MarkovMap {
    /// Builds a map from a marked point set and a mark-image assignment.
    ///
    /// The tree is subdivided so that the marks become vertices, unmarked
    /// degree-2 vertices are absorbed into their arcs, and the vertices of
    /// the result are renamed to the mark ids. Every vertex of order != 2
    /// must be marked, and no basic arc may have equal endpoint images.
    pub fn from_point_images(
        tree: &MetricTree,
        marks: &[(String, TreePoint)],
        image: &BTreeMap<String, String>,
    ) -> Result<MarkovMap, MarkovError> {
        let mut seen_ids = BTreeSet::new();
        let mut seen_pos = BTreeSet::new();
        for (id, at) in marks {
            if !seen_ids.insert(id.clone()) {
                return Err(MarkovError::DuplicateMark(id.clone()));
            }
            if !seen_pos.insert(position_key(at)) {
                return Err(MarkovError::DuplicateMark(id.clone()));
            }
        }
        // subdivide at interior marks
        let points: Vec<TreePoint> = marks.iter().map(|(_, at)| at.clone()).collect();
        let sub = tree.subdivide_at(&points)?;
        // mark id <-> vertex name in the subdivided tree
        let mut vertex_mark: BTreeMap<String, String> = BTreeMap::new();
        for ((id, _), vname) in marks.iter().zip(&sub.point_vertices) {
            vertex_mark.insert(vname.clone(), id.clone());
        }
        // all endpoints and branch points must carry marks
        for v in 0..sub.tree.vertex_count() {
            let name = sub.tree.vertex_name(v);
            if sub.tree.degree(v) != 2 && !vertex_mark.contains_key(name) {
                return Err(MarkovError::MarksMissVertex(name.to_string()));
            }
        }
        // absorb unmarked degree-2 vertices, then rename vertices to marks
        let mut vertices: Vec<String> = sub.tree.vertex_names().to_vec();
        let mut edges: Vec<(String, String, Rational)> = sub
            .tree
            .edges()
            .iter()
            .map(|e| {
                (
                    sub.tree.vertex_name(e.from).to_string(),
                    sub.tree.vertex_name(e.to).to_string(),
                    e.len.clone(),
                )
            })
            .collect();
        loop {
            let Some(pos) = vertices.iter().position(|v| {
                !vertex_mark.contains_key(v)
                    && edges.iter().filter(|(a, b, _)| a == v || b == v).count() == 2
            }) else {
                break;
            };
            let v = vertices.remove(pos);
            let mut incident = Vec::new();
            edges.retain(|e| {
                if e.0 == v || e.1 == v {
                    incident.push(e.clone());
                    false
                } else {
                    true
                }
            });
            let other = |e: &(String, String, Rational)| {
                if e.0 == v { e.1.clone() } else { e.0.clone() }
            };
            let (a, b) = (other(&incident[0]), other(&incident[1]));
            edges.push((a, b, &incident[0].2 + &incident[1].2));
        }
        if let Some(v) = vertices.iter().find(|v| !vertex_mark.contains_key(*v)) {
            return Err(MarkovError::MarksMissVertex(v.clone()));
        }
        // canonical arc order: sorted unordered endpoint pairs of mark ids
        let mut named: Vec<(String, String, Rational)> = edges
            .into_iter()
            .map(|(a, b, len)| {
                let (ma, mb) = (vertex_mark[&a].clone(), vertex_mark[&b].clone());
                if ma <= mb { (ma, mb, len) } else { (mb, ma, len) }
            })
            .collect();
        named.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        let mut mark_ids: Vec<String> = marks.iter().map(|(id, _)| id.clone()).collect();
        mark_ids.sort();
        let tree = MetricTree::build(
            mark_ids,
            named
                .into_iter()
                .enumerate()
                .map(|(i, (a, b, len))| (format!("a{i}"), a, b, len))
                .collect(),
        )?;
        // image: total on marks, into marks
        let mut image_vec = vec![usize::MAX; tree.vertex_count()];
        for (id, _) in marks {
            let target = image.get(id).ok_or_else(|| MarkovError::MissingImage(id.clone()))?;
            let t = tree
                .vertex_index(target)
                .ok_or_else(|| MarkovError::ImageNotInP(target.clone()))?;
            image_vec[tree.vertex_index(id).unwrap()] = t;
        }
        let map = MarkovMap { tree, image: image_vec };
        for e in map.tree.edges() {
            if map.image[e.from] == map.image[e.to] {
                return Err(MarkovError::DegenerateArcImage(
                    map.tree.vertex_name(e.from).to_string(),
                    map.tree.vertex_name(e.to).to_string(),
                ));
            }
        }
        Ok(map)
    }

    /// Shorthand when the marks are exactly the tree's vertices.
    pub fn from_vertex_images(
        tree: &MetricTree,
        image: &BTreeMap<String, String>,
    ) -> Result<MarkovMap, MarkovError> {
        let marks: Vec<(String, TreePoint)> = tree
            .vertex_names()
            .iter()
            .map(|v| (v.clone(), TreePoint::vertex(v)))
            .collect();
        Self::from_point_images(tree, &marks, image)
    }

    /// A Markov map of an interval: vertex `x{i}` at `breaks[i]`, mapped
    /// to `x{images[i]}`.
    pub fn interval_map(breaks: &[Rational], images: &[usize]) -> Result<MarkovMap, MarkovError> {
        assert!(breaks.len() >= 2 && breaks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(breaks.len(), images.len());
        let vertices: Vec<String> = (0..breaks.len()).map(|i| format!("x{i}")).collect();
        let edges = (1..breaks.len())
            .map(|i| {
                (format!("e{i}"), format!("x{}", i - 1), format!("x{i}"), &breaks[i] - &breaks[i - 1])
            })
            .collect();
        let tree = MetricTree::build(vertices, edges)?;
        let image: BTreeMap<String, String> =
            images.iter().enumerate().map(|(i, &j)| (format!("x{i}"), format!("x{j}"))).collect();
        Self::from_vertex_images(&tree, &image)
    }

    pub fn tree(&self) -> &MetricTree {
        &self.tree
    }

    pub fn image_vertex(&self, v: usize) -> usize {
        self.image[v]
    }

    pub fn image_of(&self, name: &str) -> Option<&str> {
        let v = self.tree.vertex_index(name)?;
        Some(self.tree.vertex_name(self.image[v]))
    }

    pub fn image_map(&self) -> BTreeMap<String, String> {
        (0..self.tree.vertex_count())
            .map(|v| {
                (
                    self.tree.vertex_name(v).to_string(),
                    self.tree.vertex_name(self.image[v]).to_string(),
                )
            })
            .collect()
    }

    /// Arc (edge) index with the given unordered endpoints.
    pub fn arc_between(&self, a: &str, b: &str) -> Option<usize> {
        let (a, b) = (self.tree.vertex_index(a)?, self.tree.vertex_index(b)?);
        self.tree
            .edges()
            .iter()
            .position(|e| (e.from == a && e.to == b) || (e.from == b && e.to == a))
    }

    pub fn arc_count(&self) -> usize {
        self.tree.edge_count()
    }

    /// Derives the transition matrix, successor lists and exact slopes.
    pub fn transition(&self) -> TransitionData {
        let m = self.tree.edge_count();
        let mut matrix = SquareMatrix::zero(m);
        let mut adjacency = Vec::with_capacity(m);
        let mut rows = Vec::with_capacity(m);
        let mut slopes = Vec::with_capacity(m);
        for (i, e) in self.tree.edges().iter().enumerate() {
            let ip = self.tree.vertex_name(self.image[e.from]);
            let iq = self.tree.vertex_name(self.image[e.to]);
            let geo = self
                .tree
                .geodesic(&TreePoint::vertex(ip), &TreePoint::vertex(iq))
                .expect("arc images are nondegenerate");
            let mut row = Vec::with_capacity(geo.hops.len());
            for hop in &geo.hops {
                let forward = hop.start.is_zero();
                matrix.set(i, hop.edge, 1);
                row.push((hop.edge, forward));
            }
            let mut succ: Vec<usize> = row.iter().map(|&(a, _)| a).collect();
            succ.sort_unstable();
            adjacency.push(succ);
            rows.push(row);
            slopes.push(geo.length / &e.len);
        }
        TransitionData { matrix, adjacency, rows, slopes }
    }

    /// log+ of the Perron eigenvalue of the transition matrix.
    ///
    /// With `Both`, the power-iteration value and the rome-method root
    /// must agree within `tol`; the rome root is the returned value.
    pub fn entropy(&self, method: EntropyMethod, tol: f64) -> Result<f64, MarkovError> {
        let td = self.transition();
        // every nontrivial component a simple unit cycle forces spectral
        // radius <= 1, so the entropy is exactly zero
        if spectral::matrix_profile(&td.matrix).structurally_zero_entropy {
            return Ok(0.0);
        }
        let lambda = match method {
            EntropyMethod::Power => spectral::perron(&td.matrix, tol.min(1e-12))?,
            EntropyMethod::Rome => {
                let rome = spectral::auto_rome(&td.matrix);
                spectral::rome_root(&td.matrix, &rome)?.0
            }
            EntropyMethod::Both => {
                let power = spectral::perron(&td.matrix, tol.min(1e-12))?;
                let rome = spectral::auto_rome(&td.matrix);
                let (lambda, _) = spectral::rome_root(&td.matrix, &rome)?;
                if (lambda - power).abs() > tol {
                    return Err(MarkovError::MethodsDisagree(lambda, power));
                }
                lambda
            }
        };
        Ok(lambda.ln().max(0.0))
    }

    /// Transitivity and exactness, read off the transition matrix.
    pub fn dynamical_properties(&self) -> DynamicalProperties {
        let td = self.transition();
        let profile = spectral::matrix_profile(&td.matrix);
        // an invertible one-arc map is a homeomorphism, so the degenerate
        // 1x1 permutation case is excluded from exactness as well
        let transitive = profile.irreducible && !profile.permutation;
        let exact = profile.primitive && !profile.permutation;
        DynamicalProperties { transitive, exact }
    }

    /// Checks (P,S)-linearity for the chain S = (s_0, ..., s_n).
    pub fn check_ps_linear(&self, s: &[String]) -> PsReport {
        let mut failures = Vec::new();
        if s.len() < 2 {
            failures.push(PsFailure::BadTuple("S needs at least two entries".into()));
            return PsReport { ok: false, failures };
        }
        let mut distinct = BTreeSet::new();
        for name in s {
            if self.tree.vertex_index(name).is_none() {
                failures.push(PsFailure::BadTuple(format!("unknown vertex {name}")));
                return PsReport { ok: false, failures };
            }
            if !distinct.insert(name) {
                failures.push(PsFailure::BadTuple(format!("repeated vertex {name}")));
                return PsReport { ok: false, failures };
            }
        }
        let n = s.len() - 1;
        // (a) the chain advances one step under f
        for i in 0..n {
            let got = self.image_of(&s[i]).unwrap();
            if got != s[i + 1] {
                failures.push(PsFailure::ChainImage {
                    index: i,
                    expected: s[i + 1].clone(),
                    got: got.to_string(),
                });
            }
        }
        // (b) [s_0, s_n] is a basic arc ending at an endpoint of the tree
        let arc_s = self.arc_between(&s[0], &s[n]);
        if arc_s.is_none() {
            failures.push(PsFailure::NotBasicArc);
        }
        let sn = self.tree.vertex_index(&s[n]).unwrap();
        if self.tree.degree(sn) != 1 {
            failures.push(PsFailure::NotEndpoint);
        }
        // (c) every other arc reaches A_S in the transition graph
        if let Some(target) = arc_s {
            let td = self.transition();
            let m = td.matrix.dim();
            let mut reaches = vec![false; m];
            reaches[target] = true;
            let mut queue = VecDeque::from([target]);
            while let Some(v) = queue.pop_front() {
                for u in 0..m {
                    if !reaches[u] && td.matrix.get(u, v) > 0 {
                        reaches[u] = true;
                        queue.push_back(u);
                    }
                }
            }
            let stuck: Vec<String> = (0..m)
                .filter(|&a| !reaches[a])
                .map(|a| self.tree.edge(a).id.clone())
                .collect();
            if !stuck.is_empty() {
                failures.push(PsFailure::Unreachable(stuck));
            }
        }
        PsReport { ok: failures.is_empty(), failures }
    }

    /// Re-metrizes a transitive map to constant slope: the new basic-arc
    /// lengths are the entries of a strictly positive right Perron
    /// eigenvector, normalized to total length 1.
    pub fn rescale_constant_slope(&self, tol: f64) -> Result<(MarkovMap, f64), MarkovError> {
        let td = self.transition();
        let profile = spectral::matrix_profile(&td.matrix);
        if !profile.irreducible || profile.permutation {
            return Err(MarkovError::NotTransitive);
        }
        let (lambda, alpha) = spectral::perron_vector(&td.matrix, (tol * 0.5).min(1e-12))?;
        let vertices: Vec<String> = self.tree.vertex_names().to_vec();
        let edges = self
            .tree
            .edges()
            .iter()
            .zip(&alpha)
            .map(|(e, &len)| {
                (
                    e.id.clone(),
                    self.tree.vertex_name(e.from).to_string(),
                    self.tree.vertex_name(e.to).to_string(),
                    Rational::from_float(len).expect("eigenvector entries are finite"),
                )
            })
            .collect();
        let tree = MetricTree::build(vertices, edges)?;
        Ok((MarkovMap { tree, image: self.image.clone() }, lambda))
    }

    /// Adds the forward orbits of the given points to the invariant set,
    /// returning a map on the larger mark set with the same pointwise
    /// action. Every orbit must close up within `orbit_cap` steps.
    pub fn refine_invariant_set(
        &self,
        extra: &[TreePoint],
        orbit_cap: usize,
    ) -> Result<MarkovMap, MarkovError> {
        let td = self.transition();
        // gather orbit points as canonical positions
        let mut orbit_points: Vec<TreePoint> = Vec::new();
        let mut seen: BTreeSet<PosKey> = BTreeSet::new();
        for p in extra {
            let mut current = crate::dynamics::ArcPoint::locate(self, p)?;
            let mut steps = 0usize;
            loop {
                let tp = current.to_tree_point(self);
                if !seen.insert(position_key(&tp)) {
                    break; // forward orbit of tp was already collected
                }
                orbit_points.push(tp.clone());
                if matches!(tp, TreePoint::Vertex(_)) {
                    break; // vertices already live in P, orbit stays there
                }
                current = crate::dynamics::eval_point(self, &td, &current);
                steps += 1;
                if steps > orbit_cap {
                    return Err(MarkovError::OrbitNotFinite(format!("{p:?}")));
                }
            }
        }
        // marks: existing vertices keep their ids, interior points get fresh ids
        let mut marks: Vec<(String, TreePoint)> = self
            .tree
            .vertex_names()
            .iter()
            .map(|v| (v.clone(), TreePoint::vertex(v)))
            .collect();
        let mut interior_ids: BTreeMap<PosKey, String> = BTreeMap::new();
        let mut counter = 0usize;
        for tp in &orbit_points {
            if let TreePoint::Interior { .. } = tp {
                let mut id = format!("q{counter}");
                while self.tree.vertex_index(&id).is_some() {
                    counter += 1;
                    id = format!("q{counter}");
                }
                counter += 1;
                interior_ids.insert(position_key(tp), id.clone());
                marks.push((id, tp.clone()));
            }
        }
        let mark_of = |tp: &TreePoint| -> String {
            match tp {
                TreePoint::Vertex(v) => v.clone(),
                TreePoint::Interior { .. } => interior_ids[&position_key(tp)].clone(),
            }
        };
        let mut image: BTreeMap<String, String> = self.image_map();
        for tp in &orbit_points {
            if let TreePoint::Interior { .. } = tp {
                let here = crate::dynamics::ArcPoint::locate(self, tp)?;
                let next = crate::dynamics::eval_point(self, &td, &here).to_tree_point(self);
                image.insert(mark_of(tp), mark_of(&next));
            }
        }
        Self::from_point_images(&self.tree, &marks, &image)
    }
}
