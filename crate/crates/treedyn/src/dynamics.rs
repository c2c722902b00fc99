//! Pointwise realization of Markov maps in exact rational arithmetic:
//! orbit iteration, periodic points along transition cycles, and
//! exactness witnesses by iterating finite unions of segments.
//!
//! Everything here runs on the original rational metric, which keeps
//! segment images rational and the iteration exactly representable.

use num::traits::{One, Signed, Zero};
use thiserror::Error;

use crate::markov::{MarkovError, MarkovMap, TransitionData};
use crate::rational::{to_f64, Rational};
use crate::tree::TreePoint;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("no cycle through arc {0} within period cap")]
    NoCycleThroughArc(usize),
    #[error("neutral cycle slope 1 along arcs {0:?}")]
    NeutralCycle(Vec<usize>),
    #[error("empty seed")]
    EmptySeed,
}

/// A point in arc-length coordinates: arc index and normalized position
/// `t` in [0,1] measured from the arc's `from` endpoint. Points at marked
/// vertices are canonicalized to the lowest arc index containing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcPoint {
    pub arc: usize,
    pub t: Rational,
}

impl ArcPoint {
    /// Canonical arc point at a marked vertex.
    pub fn at_vertex(map: &MarkovMap, v: usize) -> ArcPoint {
        let (e, _) = map.tree().neighbors(v)[0];
        let t = if map.tree().edge(e).from == v { Rational::zero() } else { Rational::one() };
        ArcPoint { arc: e, t }
    }

    /// Locates a tree point of the normalized tree.
    pub fn locate(map: &MarkovMap, p: &TreePoint) -> Result<ArcPoint, MarkovError> {
        match p {
            TreePoint::Vertex(name) => {
                let v = map
                    .tree()
                    .vertex_index(name)
                    .ok_or_else(|| crate::tree::TreeError::UnknownVertex(name.clone()))?;
                Ok(ArcPoint::at_vertex(map, v))
            }
            TreePoint::Interior { edge, offset } => {
                let e = map
                    .tree()
                    .edge_index(edge)
                    .ok_or_else(|| crate::tree::TreeError::UnknownEdge(edge.clone()))?;
                let len = &map.tree().edge(e).len;
                if offset <= &Rational::zero() || offset >= len {
                    return Err(
                        crate::tree::TreeError::PointOffTree(format!("{edge}@{offset}")).into()
                    );
                }
                Ok(ArcPoint { arc: e, t: offset / len })
            }
        }
    }

    pub fn is_vertex(&self) -> bool {
        self.t.is_zero() || self.t.is_one()
    }

    /// The vertex index under the point, when it sits on one.
    pub fn vertex(&self, map: &MarkovMap) -> Option<usize> {
        let e = map.tree().edge(self.arc);
        if self.t.is_zero() {
            Some(e.from)
        } else if self.t.is_one() {
            Some(e.to)
        } else {
            None
        }
    }

    pub fn to_tree_point(&self, map: &MarkovMap) -> TreePoint {
        match self.vertex(map) {
            Some(v) => TreePoint::vertex(map.tree().vertex_name(v)),
            None => {
                let e = map.tree().edge(self.arc);
                TreePoint::Interior { edge: e.id.clone(), offset: &self.t * &e.len }
            }
        }
    }
}

/// Applies the length-proportional realization of the map to one point:
/// the image lies at distance slope * dist(p_A, x) from image(p_A) along
/// the geodesic toward image(q_A). Exact rational arithmetic throughout.
pub fn eval_point(map: &MarkovMap, td: &TransitionData, x: &ArcPoint) -> ArcPoint {
    if let Some(v) = x.vertex(map) {
        return ArcPoint::at_vertex(map, map.image_vertex(v));
    }
    let arc_len = &map.tree().edge(x.arc).len;
    let mut remaining = &td.slopes[x.arc] * &x.t * arc_len;
    for &(edge, forward) in &td.rows[x.arc] {
        let hop_len = map.tree().edge(edge).len.clone();
        if remaining < hop_len {
            if remaining.is_zero() {
                let e = map.tree().edge(edge);
                let v = if forward { e.from } else { e.to };
                return ArcPoint::at_vertex(map, v);
            }
            let offset = if forward { remaining } else { &hop_len - &remaining };
            return ArcPoint { arc: edge, t: offset / &hop_len };
        }
        remaining -= hop_len;
    }
    // exactly consumed: landed on the image of the far endpoint
    debug_assert!(remaining.is_zero());
    let q = map.tree().edge(x.arc).to;
    ArcPoint::at_vertex(map, map.image_vertex(q))
}

/// The orbit (x, f(x), ..., f^steps(x)).
pub fn orbit(map: &MarkovMap, td: &TransitionData, x: &ArcPoint, steps: usize) -> Vec<ArcPoint> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x.clone());
    let mut current = x.clone();
    for _ in 0..steps {
        current = eval_point(map, td, &current);
        out.push(current.clone());
    }
    out
}

/// A periodic point whose orbit follows a shortest transition-graph cycle
/// through `arc`, found as the fixed point of the composed affine charts.
///
/// Requires the composed slope to exceed 1 in magnitude; slope exactly 1
/// (an isometric cycle) is reported with the cycle for inspection.
pub fn periodic_point_in_arc(
    map: &MarkovMap,
    td: &TransitionData,
    arc: usize,
    max_period: usize,
) -> Result<(ArcPoint, usize), DynamicsError> {
    let m = td.matrix.dim();
    // BFS for a shortest cycle arc -> arc
    let mut dist = vec![usize::MAX; m];
    let mut parent = vec![usize::MAX; m];
    let mut queue = std::collections::VecDeque::from([arc]);
    dist[arc] = 0;
    let mut cycle_end = None;
    'bfs: while let Some(v) = queue.pop_front() {
        for &w in &td.adjacency[v] {
            if w == arc {
                cycle_end = Some(v);
                break 'bfs;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    let Some(end) = cycle_end else {
        return Err(DynamicsError::NoCycleThroughArc(arc));
    };
    let mut cycle = vec![arc];
    if end != arc {
        let mut path = vec![end];
        let mut v = end;
        while parent[v] != usize::MAX {
            v = parent[v];
            path.push(v);
        }
        path.pop(); // drop the copy of `arc` itself
        path.reverse();
        cycle.extend(path);
    }
    if cycle.len() > max_period {
        return Err(DynamicsError::NoCycleThroughArc(arc));
    }
    // compose the affine charts along the cycle
    let mut a = Rational::one();
    let mut b = Rational::zero();
    for i in 0..cycle.len() {
        let from = cycle[i];
        let to = cycle[(i + 1) % cycle.len()];
        let (slope_dir, offset) = chart(map, td, from, to);
        a = &slope_dir * &a;
        b = &slope_dir * &b + &offset;
    }
    if a.abs() <= Rational::one() {
        return Err(DynamicsError::NeutralCycle(cycle));
    }
    let t = &b / (Rational::one() - &a);
    debug_assert!(t >= Rational::zero() && t <= Rational::one());
    // canonicalize boundary fixed points to their vertex representation
    let edge = map.tree().edge(arc);
    let point = if t.is_zero() {
        ArcPoint::at_vertex(map, edge.from)
    } else if t.is_one() {
        ArcPoint::at_vertex(map, edge.to)
    } else {
        ArcPoint { arc, t }
    };
    // confirm by exact orbit iteration
    let back = orbit(map, td, &point, cycle.len());
    assert_eq!(
        back.last().unwrap(),
        &point,
        "affine fixed point must return exactly after one cycle"
    );
    Ok((point, cycle.len()))
}

/// Affine chart from the part of `from` that maps onto `to`:
/// image parameter s = slope_dir * t + offset.
fn chart(map: &MarkovMap, td: &TransitionData, from: usize, to: usize) -> (Rational, Rational) {
    let mut pre = Rational::zero();
    for &(edge, forward) in &td.rows[from] {
        let hop_len = map.tree().edge(edge).len.clone();
        if edge == to {
            // position along the image at parameter t is slope*len_from*t;
            // inside this hop the local coordinate is that minus `pre`
            let rate = &td.slopes[from] * &map.tree().edge(from).len / &hop_len;
            return if forward {
                (rate.clone(), -pre / &hop_len)
            } else {
                (-rate.clone(), Rational::one() + pre / &hop_len)
            };
        }
        pre += hop_len;
    }
    panic!("chart requested for a non-successor arc");
}

/// Finite unions of closed rational subintervals of each arc's [0,1],
/// with a fast path for fully covered arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArcCover {
    Full,
    Parts(Vec<(Rational, Rational)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSet {
    pub covers: Vec<ArcCover>,
}

impl SegmentSet {
    pub fn empty(arcs: usize) -> Self {
        SegmentSet { covers: vec![ArcCover::Parts(Vec::new()); arcs] }
    }

    /// A single segment [a, b] on one arc.
    pub fn segment(arcs: usize, arc: usize, a: Rational, b: Rational) -> Self {
        assert!(Rational::zero() <= a && a < b && b <= Rational::one());
        let mut s = Self::empty(arcs);
        s.covers[arc] = ArcCover::Parts(vec![(a, b)]);
        s.normalize();
        s
    }

    pub fn is_empty(&self) -> bool {
        self.covers.iter().all(|c| matches!(c, ArcCover::Parts(p) if p.is_empty()))
    }

    pub fn all_full(&self) -> bool {
        self.covers.iter().all(|c| matches!(c, ArcCover::Full))
    }

    pub fn full_count(&self) -> usize {
        self.covers.iter().filter(|c| matches!(c, ArcCover::Full)).count()
    }

    /// Metric measure of the covered set.
    pub fn measure(&self, map: &MarkovMap) -> f64 {
        self.covers
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let len = to_f64(&map.tree().edge(i).len);
                match c {
                    ArcCover::Full => len,
                    ArcCover::Parts(parts) => {
                        len * parts.iter().map(|(a, b)| to_f64(&(b - a))).sum::<f64>()
                    }
                }
            })
            .sum()
    }

    fn add(&mut self, arc: usize, a: Rational, b: Rational) {
        if let ArcCover::Parts(parts) = &mut self.covers[arc] {
            parts.push((a, b));
        }
    }

    /// Sorts, merges touching intervals, and promotes [0,1] to Full.
    pub fn normalize(&mut self) {
        for cover in &mut self.covers {
            let ArcCover::Parts(parts) = cover else { continue };
            if parts.is_empty() {
                continue;
            }
            parts.sort();
            let mut merged: Vec<(Rational, Rational)> = Vec::with_capacity(parts.len());
            for (a, b) in parts.drain(..) {
                match merged.last_mut() {
                    Some((_, end)) if a <= *end => {
                        if b > *end {
                            *end = b;
                        }
                    }
                    _ => merged.push((a, b)),
                }
            }
            if merged.len() == 1 && merged[0].0.is_zero() && merged[0].1.is_one() {
                *cover = ArcCover::Full;
            } else {
                *cover = ArcCover::Parts(merged);
            }
        }
    }
}

/// One exact image step of a segment set: full arcs cover their whole
/// transition row, partial segments are pushed through the geodesic hops.
pub fn step_segments(map: &MarkovMap, td: &TransitionData, set: &SegmentSet) -> SegmentSet {
    let mut out = SegmentSet::empty(set.covers.len());
    for (i, cover) in set.covers.iter().enumerate() {
        match cover {
            ArcCover::Full => {
                for &(edge, _) in &td.rows[i] {
                    out.covers[edge] = ArcCover::Full;
                }
            }
            ArcCover::Parts(parts) => {
                if parts.is_empty() {
                    continue;
                }
                let scale = &td.slopes[i] * &map.tree().edge(i).len;
                for (a, b) in parts {
                    let da = a * &scale;
                    let db = b * &scale;
                    let mut cursor = Rational::zero();
                    for &(edge, forward) in &td.rows[i] {
                        let hop_len = map.tree().edge(edge).len.clone();
                        let hop_end = &cursor + &hop_len;
                        let lo = if da > cursor { da.clone() } else { cursor.clone() };
                        let hi = if db < hop_end { db.clone() } else { hop_end.clone() };
                        if lo < hi {
                            let (s, e) = ((&lo - &cursor) / &hop_len, (&hi - &cursor) / &hop_len);
                            if forward {
                                out.add(edge, s, e);
                            } else {
                                out.add(edge, Rational::one() - e, Rational::one() - s);
                            }
                        }
                        cursor = hop_end;
                        if cursor >= db {
                            break;
                        }
                    }
                }
            }
        }
    }
    out.normalize();
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessOutcome {
    CoveredIn(usize),
    NotCovered { cap: usize },
}

#[derive(Debug, Clone)]
pub struct WitnessStep {
    pub step: usize,
    pub arcs_full: usize,
    pub total_measure: f64,
}

/// Iterates a seed segment set until every arc is fully covered, or the
/// cap is reached. Returns the outcome and the per-step coverage trace.
pub fn exactness_witness(
    map: &MarkovMap,
    td: &TransitionData,
    seed: &SegmentSet,
    cap: usize,
) -> Result<(WitnessOutcome, Vec<WitnessStep>), DynamicsError> {
    if seed.is_empty() {
        return Err(DynamicsError::EmptySeed);
    }
    let mut current = seed.clone();
    current.normalize();
    let mut trace = Vec::new();
    for step in 0..=cap {
        trace.push(WitnessStep {
            step,
            arcs_full: current.full_count(),
            total_measure: current.measure(map),
        });
        if current.all_full() {
            return Ok((WitnessOutcome::CoveredIn(step), trace));
        }
        if step == cap {
            break;
        }
        current = step_segments(map, td, &current);
    }
    Ok((WitnessOutcome::NotCovered { cap }, trace))
}

/// Default iteration cap for exactness witnesses.
pub fn default_witness_cap(arc_count: usize) -> usize {
    50 * arc_count
}
