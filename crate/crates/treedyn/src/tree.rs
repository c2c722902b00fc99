//! Finite metric trees: combinatorial trees with positive rational edge
//! lengths, plus the constructions (stars, combs, Ye extensions) and the
//! geodesic / subdivision queries everything else is built on.
//!
//! Degree-2 vertices are first-class citizens and are never smoothed away
//! by tree operations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::traits::Zero;
use thiserror::Error;

use crate::rational::{int, ratio, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("unknown vertex: {0}")]
    UnknownVertex(String),
    #[error("unknown edge: {0}")]
    UnknownEdge(String),
    #[error("nonpositive length on edge {0}")]
    NonpositiveLength(String),
    #[error("self-loop on edge {0}")]
    SelfLoop(String),
    #[error("parallel edge {0}")]
    ParallelEdge(String),
    #[error("cycle detected")]
    CycleDetected,
    #[error("disconnected")]
    Disconnected,
    #[error("point not on tree: {0}")]
    PointOffTree(String),
    #[error("coincident points")]
    CoincidentPoints,
    #[error("star needs n >= 2, got {0}")]
    StarTooSmall(usize),
    #[error("comb needs n >= 2, got {0}")]
    CombTooSmall(usize),
    #[error("invalid signature")]
    InvalidSignature,
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub len: Rational,
}

/// A finite combinatorial tree with named vertices and positive rational
/// edge lengths. Connected and acyclic by construction.
#[derive(Debug, Clone)]
pub struct MetricTree {
    vertices: Vec<String>,
    vertex_ids: BTreeMap<String, usize>,
    edges: Vec<Edge>,
    edge_ids: BTreeMap<String, usize>,
    /// adjacency[v] = (edge index, neighbour vertex), sorted by edge index
    adjacency: Vec<Vec<(usize, usize)>>,
}

/// A point of the tree: a vertex, or an interior point of an edge at a
/// strict offset from the edge's `from` endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum TreePoint {
    Vertex(String),
    Interior { edge: String, offset: Rational },
}

impl TreePoint {
    pub fn vertex(id: &str) -> Self {
        TreePoint::Vertex(id.to_string())
    }
    pub fn interior(edge: &str, offset: Rational) -> Self {
        TreePoint::Interior { edge: edge.to_string(), offset }
    }
}

/// Endpoint/branch-point classification of a tree.
#[derive(Debug, Clone)]
pub struct PointClass {
    pub endpoints: BTreeSet<String>,
    pub branch_points: BTreeSet<String>,
    pub orders: BTreeMap<String, usize>,
}

/// One traversed piece of a geodesic: offsets are measured from the
/// edge's `from` endpoint, and `start != end` (orientation is implied).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hop {
    pub edge: usize,
    pub start: Rational,
    pub end: Rational,
}

impl Hop {
    pub fn len(&self) -> Rational {
        if self.start <= self.end {
            &self.end - &self.start
        } else {
            &self.start - &self.end
        }
    }
}

/// The unique arc between two points, as an ordered list of hops.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub hops: Vec<Hop>,
    pub length: Rational,
}

/// Relabeling produced by `subdivide_at`: the vertex id now carrying each
/// input point, in input order.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub tree: MetricTree,
    pub point_vertices: Vec<String>,
}

impl MetricTree {
    /// Builds and validates a tree from raw vertex/edge data.
    pub fn build(
        vertices: Vec<String>,
        edges: Vec<(String, String, String, Rational)>,
    ) -> Result<Self, TreeError> {
        let mut vertex_ids = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_ids.insert(v.clone(), i).is_some() {
                return Err(TreeError::DuplicateId(v.clone()));
            }
        }
        let mut edge_ids = BTreeMap::new();
        let mut built = Vec::with_capacity(edges.len());
        let mut seen_pairs = BTreeSet::new();
        for (i, (id, from, to, len)) in edges.into_iter().enumerate() {
            if edge_ids.insert(id.clone(), i).is_some() {
                return Err(TreeError::DuplicateId(id));
            }
            let &f = vertex_ids.get(&from).ok_or(TreeError::UnknownVertex(from))?;
            let &t = vertex_ids.get(&to).ok_or(TreeError::UnknownVertex(to))?;
            if f == t {
                return Err(TreeError::SelfLoop(id));
            }
            if !seen_pairs.insert((f.min(t), f.max(t))) {
                return Err(TreeError::ParallelEdge(id));
            }
            if len <= Rational::zero() {
                return Err(TreeError::NonpositiveLength(id));
            }
            built.push(Edge { id, from: f, to: t, len });
        }
        let n = vertices.len();
        if built.len() + 1 != n {
            // with unique endpoints pairs, too many edges means a cycle
            return if built.len() >= n {
                Err(TreeError::CycleDetected)
            } else {
                Err(TreeError::Disconnected)
            };
        }
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in built.iter().enumerate() {
            adjacency[e.from].push((i, e.to));
            adjacency[e.to].push((i, e.from));
        }
        let tree = MetricTree { vertices, vertex_ids, edges: built, edge_ids, adjacency };
        // edge count = n-1, so connected <=> acyclic here
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(_, w) in &tree.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        if count != n {
            return Err(TreeError::Disconnected);
        }
        Ok(tree)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }
    pub fn vertex_names(&self) -> &[String] {
        &self.vertices
    }
    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertex_ids.get(name).copied()
    }
    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.get(id).copied()
    }
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn total_length(&self) -> Rational {
        self.edges.iter().map(|e| e.len.clone()).fold(Rational::zero(), |a, b| a + b)
    }

    pub fn point_class(&self) -> PointClass {
        let mut endpoints = BTreeSet::new();
        let mut branch_points = BTreeSet::new();
        let mut orders = BTreeMap::new();
        for (v, name) in self.vertices.iter().enumerate() {
            let d = self.degree(v);
            orders.insert(name.clone(), d);
            if d == 1 {
                endpoints.insert(name.clone());
            } else if d >= 3 {
                branch_points.insert(name.clone());
            }
        }
        PointClass { endpoints, branch_points, orders }
    }

    pub fn endpoint_count(&self) -> usize {
        (0..self.vertex_count()).filter(|&v| self.degree(v) == 1).count()
    }

    fn check_point(&self, p: &TreePoint) -> Result<(), TreeError> {
        match p {
            TreePoint::Vertex(v) => {
                self.vertex_index(v).ok_or(TreeError::PointOffTree(v.clone()))?;
            }
            TreePoint::Interior { edge, offset } => {
                let e = self.edge_index(edge).ok_or(TreeError::PointOffTree(edge.clone()))?;
                if *offset <= Rational::zero() || *offset >= self.edges[e].len {
                    return Err(TreeError::PointOffTree(format!("{edge}@{offset}")));
                }
            }
        }
        Ok(())
    }

    /// BFS parent forest rooted at `root`: parent[v] = (edge, previous vertex).
    fn bfs_parents(&self, root: usize) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(e, w) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((e, v));
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Vertex path between two vertices as full-edge hops.
    fn vertex_path(&self, a: usize, b: usize) -> Vec<Hop> {
        if a == b {
            return Vec::new();
        }
        let parent = self.bfs_parents(a);
        let mut hops = Vec::new();
        let mut v = b;
        while v != a {
            let (e, prev) = parent[v].expect("tree is connected");
            let edge = &self.edges[e];
            let (start, end) = if edge.from == prev {
                (Rational::zero(), edge.len.clone())
            } else {
                (edge.len.clone(), Rational::zero())
            };
            hops.push(Hop { edge: e, start, end });
            v = prev;
        }
        hops.reverse();
        hops
    }

    /// Which endpoint of edge `e` lies on the path from `e` to vertex `target`
    /// when the edge itself is removed.
    fn exit_vertex(&self, e: usize, target: usize) -> usize {
        let edge = &self.edges[e];
        if target == edge.from || target == edge.to {
            return target;
        }
        // walk from target; crossing e is impossible once removed, so exactly
        // one of {from, to} is reachable
        let mut seen = vec![false; self.vertex_count()];
        seen[target] = true;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &(f, w) in &self.adjacency[v] {
                if f == e || seen[w] {
                    continue;
                }
                if w == edge.from || w == edge.to {
                    return w;
                }
                seen[w] = true;
                queue.push_back(w);
            }
        }
        unreachable!("edge endpoints reachable in a connected tree")
    }

    /// The unique arc from `a` to `b` with its traversed segments in order.
    pub fn geodesic(&self, a: &TreePoint, b: &TreePoint) -> Result<Geodesic, TreeError> {
        self.check_point(a)?;
        self.check_point(b)?;
        if a == b {
            return Err(TreeError::CoincidentPoints);
        }
        // same-edge interior shortcut
        if let (TreePoint::Interior { edge: ea, offset: oa }, TreePoint::Interior { edge: eb, offset: ob }) = (a, b)
        {
            if ea == eb {
                if oa == ob {
                    return Err(TreeError::CoincidentPoints);
                }
                let e = self.edge_index(ea).unwrap();
                let hop = Hop { edge: e, start: oa.clone(), end: ob.clone() };
                let length = hop.len();
                return Ok(Geodesic { hops: vec![hop], length });
            }
        }
        // reduce each interior endpoint to (partial hop, anchor vertex)
        let (pre, va) = match a {
            TreePoint::Vertex(v) => (None, self.vertex_index(v).unwrap()),
            TreePoint::Interior { edge, offset } => {
                let e = self.edge_index(edge).unwrap();
                let toward = match b {
                    TreePoint::Vertex(v) => self.vertex_index(v).unwrap(),
                    TreePoint::Interior { edge: eb, .. } => {
                        let eb = self.edge_index(eb).unwrap();
                        // either endpoint of eb sits on b's side of edge e
                        self.exit_vertex(e, self.edges[eb].from)
                    }
                };
                let exit = self.exit_vertex(e, toward);
                let end = if exit == self.edges[e].from {
                    Rational::zero()
                } else {
                    self.edges[e].len.clone()
                };
                (Some(Hop { edge: e, start: offset.clone(), end }), exit)
            }
        };
        let (post, vb) = match b {
            TreePoint::Vertex(v) => (None, self.vertex_index(v).unwrap()),
            TreePoint::Interior { edge, offset } => {
                let e = self.edge_index(edge).unwrap();
                let enter = self.exit_vertex(e, va);
                let start = if enter == self.edges[e].from {
                    Rational::zero()
                } else {
                    self.edges[e].len.clone()
                };
                (Some(Hop { edge: e, start, end: offset.clone() }), enter)
            }
        };
        let mut hops = Vec::new();
        if let Some(h) = pre {
            hops.push(h);
        }
        hops.extend(self.vertex_path(va, vb));
        if let Some(h) = post {
            hops.push(h);
        }
        let length = hops.iter().map(|h| h.len()).fold(Rational::zero(), |x, y| x + y);
        Ok(Geodesic { hops, length })
    }

    /// Turns every given interior point into a degree-2 vertex, splitting
    /// edges additively. Points at existing vertices are left alone.
    ///
    /// New vertices are named `"{edge}@{offset}"` and split edges
    /// `"{edge}:{i}"`.
    pub fn subdivide_at(&self, points: &[TreePoint]) -> Result<Subdivision, TreeError> {
        for p in points {
            self.check_point(p)?;
        }
        // offsets per edge, deduplicated
        let mut cuts: BTreeMap<usize, BTreeSet<Rational>> = BTreeMap::new();
        for p in points {
            if let TreePoint::Interior { edge, offset } = p {
                let e = self.edge_index(edge).unwrap();
                cuts.entry(e).or_default().insert(offset.clone());
            }
        }
        let mut vertices = self.vertices.clone();
        let mut point_name: BTreeMap<(usize, Rational), String> = BTreeMap::new();
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            match cuts.get(&i) {
                None => edges.push((
                    e.id.clone(),
                    self.vertices[e.from].clone(),
                    self.vertices[e.to].clone(),
                    e.len.clone(),
                )),
                Some(offsets) => {
                    let mut prev_name = self.vertices[e.from].clone();
                    let mut prev_off = Rational::zero();
                    for (k, off) in offsets.iter().enumerate() {
                        let vname = format!("{}@{}", e.id, off);
                        if self.vertex_ids.contains_key(&vname) {
                            return Err(TreeError::DuplicateId(vname));
                        }
                        vertices.push(vname.clone());
                        point_name.insert((i, off.clone()), vname.clone());
                        edges.push((
                            format!("{}:{}", e.id, k),
                            prev_name.clone(),
                            vname.clone(),
                            off - &prev_off,
                        ));
                        prev_name = vname;
                        prev_off = off.clone();
                    }
                    edges.push((
                        format!("{}:{}", e.id, offsets.len()),
                        prev_name,
                        self.vertices[e.to].clone(),
                        &e.len - &prev_off,
                    ));
                }
            }
        }
        let tree = MetricTree::build(vertices, edges)?;
        let point_vertices = points
            .iter()
            .map(|p| match p {
                TreePoint::Vertex(v) => v.clone(),
                TreePoint::Interior { edge, offset } => {
                    let e = self.edge_index(edge).unwrap();
                    point_name[&(e, offset.clone())].clone()
                }
            })
            .collect();
        Ok(Subdivision { tree, point_vertices })
    }
}

/// An `n`-star with hub `b` and leaves `s1..sn`, one edge per leg.
/// For n = 2 this is an arc that keeps its degree-2 hub.
pub fn make_star(n: usize, leg_length: Rational) -> Result<MetricTree, TreeError> {
    if n < 2 {
        return Err(TreeError::StarTooSmall(n));
    }
    let mut vertices = vec!["b".to_string()];
    let mut edges = Vec::new();
    for i in 1..=n {
        vertices.push(format!("s{i}"));
        edges.push((format!("l{i}"), "b".to_string(), format!("s{i}"), leg_length.clone()));
    }
    MetricTree::build(vertices, edges)
}

/// An `n`-comb: a spine with `n` marked positions at unit spacing and a
/// unit tooth at each position. Exactly the n-2 interior positions are
/// branch points; the tooth tips are the n endpoints.
pub fn make_comb(n: usize) -> Result<MetricTree, TreeError> {
    if n < 2 {
        return Err(TreeError::CombTooSmall(n));
    }
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for i in 1..=n {
        vertices.push(format!("b{i}"));
        vertices.push(format!("c{i}"));
        edges.push((format!("t{i}"), format!("b{i}"), format!("c{i}"), int(1)));
        if i > 1 {
            edges.push((format!("sp{}", i - 1), format!("b{}", i - 1), format!("b{i}"), int(1)));
        }
    }
    MetricTree::build(vertices, edges)
}

/// A tree in the Ye class with the given star signature and `i` extra
/// arc attachments; its endpoint count is `i + n_1 * ... * n_r`.
///
/// The base level is an `n_1`-star; each further level glues `n_l` copies
/// of the previous level onto the endpoints of an `n_l`-star, attaching at
/// the midpoint of a terminal edge of each copy. Arc attachments likewise
/// go to the midpoint of a terminal edge.
pub fn make_ye_tree(signature: &[usize], arcs: usize) -> Result<MetricTree, TreeError> {
    if signature.is_empty() || signature.iter().any(|&n| n < 2) {
        return Err(TreeError::InvalidSignature);
    }
    let mut tree = make_star(signature[0], int(1))?;
    for (level, &n) in signature.iter().enumerate().skip(1) {
        let mut vertices = vec![format!("h{level}")];
        let mut edges = Vec::new();
        let mut template = tree.clone();
        let attach = attach_point_vertex(&mut template)?;
        for copy in 1..=n {
            let prefix = |id: &str| format!("{level}.{copy}.{id}");
            for v in template.vertex_names() {
                vertices.push(prefix(v));
            }
            for e in template.edges() {
                edges.push((
                    prefix(&e.id),
                    prefix(template.vertex_name(e.from)),
                    prefix(template.vertex_name(e.to)),
                    e.len.clone(),
                ));
            }
            edges.push((
                format!("h{level}.leg{copy}"),
                format!("h{level}"),
                prefix(&attach),
                int(1),
            ));
        }
        tree = MetricTree::build(vertices, edges)?;
    }
    for a in 1..=arcs {
        let attach = attach_point_vertex(&mut tree)?;
        let mut vertices: Vec<String> = tree.vertex_names().to_vec();
        let mut edges: Vec<(String, String, String, Rational)> = tree
            .edges()
            .iter()
            .map(|e| {
                (
                    e.id.clone(),
                    tree.vertex_name(e.from).to_string(),
                    tree.vertex_name(e.to).to_string(),
                    e.len.clone(),
                )
            })
            .collect();
        vertices.push(format!("y{a}"));
        edges.push((format!("free{a}"), attach, format!("y{a}"), int(1)));
        tree = MetricTree::build(vertices, edges)?;
    }
    Ok(tree)
}

/// Subdivides `tree` in place at the midpoint of the terminal edge incident
/// to its smallest-id endpoint; returns the id of the new degree-2 vertex.
fn attach_point_vertex(tree: &mut MetricTree) -> Result<String, TreeError> {
    let class = tree.point_class();
    let endpoint = class.endpoints.iter().next().expect("tree has endpoints").clone();
    let v = tree.vertex_index(&endpoint).unwrap();
    let (e, _) = tree.neighbors(v)[0];
    let edge = tree.edge(e);
    let mid = &edge.len * ratio(1, 2);
    let point = TreePoint::interior(&edge.id.clone(), mid);
    let sub = tree.subdivide_at(&[point])?;
    let name = sub.point_vertices[0].clone();
    *tree = sub.tree;
    Ok(name)
}
