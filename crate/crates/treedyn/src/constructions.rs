//! The explicit map families: zero-entropy chain maps on stars and combs,
//! the exactly-Devaney-chaotic extension g_N over a (P,S)-linear base, and
//! the analytic lower-bound root for the extension's entropy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::traits::One;
use thiserror::Error;

use crate::markov::{MarkovError, MarkovMap};
use crate::rational::{int, ratio, Rational};
use crate::tree::{MetricTree, TreeError};

#[derive(Debug, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Markov(#[from] MarkovError),
    #[error("star needs n >= 2, got {0}")]
    StarTooSmall(usize),
    #[error("comb needs r >= 1, got {0}")]
    CombTooSmall(usize),
    #[error("base is not (P,S)-linear: {0:?}")]
    BaseNotPsLinear(Vec<crate::markov::PsFailure>),
    #[error("S needs at least 3 entries (n >= 2), got {0}")]
    ChainTooShort(usize),
    #[error("N too small: need N > 6, got {0}")]
    NTooSmall(usize),
    #[error("start vertex {0} not in tree")]
    BadStart(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarVariant {
    /// Hub fixed: the reading under which the two-cycle rome analysis and
    /// the zero-entropy conclusion hold.
    FixedHub,
    /// Hub sent to the first marked midpoint, as the construction is
    /// sometimes printed; this creates a self-loop on the first inner arc
    /// and positive entropy.
    Literal,
}

/// The n-star chain map on P = {b; s_1'..s_n'; s_1..s_n} with s_i' at leg
/// midpoints. Returns the map and the chain S = (s_n', s_1, ..., s_n).
pub fn star_map(n: usize, variant: StarVariant) -> Result<(MarkovMap, Vec<String>), ConstructionError> {
    if n < 2 {
        return Err(ConstructionError::StarTooSmall(n));
    }
    let mut vertices = vec!["b".to_string()];
    let mut edges = Vec::new();
    for i in 1..=n {
        vertices.push(format!("sp{i}"));
        vertices.push(format!("s{i}"));
        edges.push((format!("i{i}"), "b".to_string(), format!("sp{i}"), ratio(1, 2)));
        edges.push((format!("o{i}"), format!("sp{i}"), format!("s{i}"), ratio(1, 2)));
    }
    let tree = MetricTree::build(vertices, edges)?;
    let mut image = BTreeMap::new();
    let hub_target = match variant {
        StarVariant::FixedHub => "b".to_string(),
        StarVariant::Literal => "sp1".to_string(),
    };
    image.insert("b".to_string(), hub_target);
    for i in 1..n {
        image.insert(format!("sp{i}"), format!("sp{}", i + 1));
        image.insert(format!("s{i}"), format!("s{}", i + 1));
    }
    image.insert(format!("sp{n}"), "s1".to_string());
    image.insert(format!("s{n}"), "sp1".to_string());
    let map = MarkovMap::from_vertex_images(&tree, &image)?;
    let mut chain = vec![format!("sp{n}")];
    chain.extend((1..=n).map(|i| format!("s{i}")));
    Ok((map, chain))
}

/// A word over {0,1}; the leftmost letter is least significant under the
/// group's increment (carries run left to right).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn zeros(k: usize) -> Self {
        Word(vec![0; k])
    }

    pub fn ones(k: usize) -> Self {
        Word(vec![1; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&self, bit: u8) -> Self {
        let mut w = self.0.clone();
        w.push(bit);
        Word(w)
    }

    pub fn prefix(&self) -> Self {
        Word(self.0[..self.0.len() - 1].to_vec())
    }

    pub fn last(&self) -> u8 {
        *self.0.last().expect("nonempty word")
    }

    /// +1 with carry from the left; the empty word is the trivial group.
    pub fn succ(&self) -> Self {
        let mut w = self.0.clone();
        for bit in w.iter_mut() {
            if *bit == 0 {
                *bit = 1;
                return Word(w);
            }
            *bit = 0;
        }
        Word(w) // wrapped around
    }

    pub fn label(&self) -> String {
        self.0.iter().map(|b| char::from(b'0' + b)).collect()
    }

    /// All words of the given length, in numeric (successor) order.
    pub fn all(len: usize) -> Vec<Word> {
        let mut out = Vec::with_capacity(1 << len);
        let mut w = Word::zeros(len);
        for _ in 0..(1usize << len) {
            out.push(w.clone());
            w = w.succ();
        }
        out
    }
}

/// Exact comb geometry: dyadic spine coordinates for the marked points and
/// the paper-style label and level of every basic arc.
#[derive(Debug, Clone)]
pub struct CombSpec {
    pub r: usize,
    /// vertex id -> spine coordinate (teeth tips share their base's)
    pub coordinates: BTreeMap<String, Rational>,
    /// arc label -> level (length of the indexing word)
    pub levels: BTreeMap<String, usize>,
    /// arc label -> unordered endpoint vertex ids
    pub arc_endpoints: BTreeMap<String, (String, String)>,
}

fn a_id(w: &Word) -> String {
    format!("a{}", w.label())
}
fn b_id(w: &Word) -> String {
    format!("b{}", w.label())
}
fn c_id(w: &Word) -> String {
    format!("c{}", w.label())
}

/// Coordinate of a_alpha: sum of alpha_i / 2^(i+1) plus 1 / 2^(k+1).
fn a_coordinate(w: &Word) -> Rational {
    let mut x = Rational::new(1.into(), num::BigInt::one() << (w.len() + 1));
    for (i, &bit) in w.0.iter().enumerate() {
        if bit == 1 {
            x += Rational::new(1.into(), num::BigInt::one() << (i + 1));
        }
    }
    x
}

pub fn comb_spec(r: usize) -> CombSpec {
    let shift = Rational::new(1.into(), num::BigInt::one() << (r + 2));
    let mut coordinates = BTreeMap::new();
    for k in 0..r {
        for alpha in Word::all(k) {
            coordinates.insert(a_id(&alpha), a_coordinate(&alpha));
        }
    }
    for k in 1..=r {
        for beta in Word::all(k) {
            let base = a_coordinate(&beta.prefix());
            let x = if beta.last() == 1 { base + &shift } else { base - &shift };
            coordinates.insert(b_id(&beta), x);
        }
    }
    for gamma in Word::all(r) {
        let x = coordinates[&b_id(&gamma)].clone();
        coordinates.insert(c_id(&gamma), x);
    }
    let mut levels = BTreeMap::new();
    let mut arc_endpoints = BTreeMap::new();
    for k in 0..r {
        for alpha in Word::all(k) {
            let (zero, one) = (alpha.push(0), alpha.push(1));
            levels.insert(format!("A{}", zero.label()), k + 1);
            arc_endpoints.insert(format!("A{}", zero.label()), (b_id(&zero), a_id(&alpha)));
            levels.insert(format!("A{}", one.label()), k + 1);
            arc_endpoints.insert(format!("A{}", one.label()), (a_id(&alpha), b_id(&one)));
        }
    }
    for k in 0..r.saturating_sub(1) {
        for alpha in Word::all(k) {
            let tail = r - k - 1;
            let (zero, one) = (alpha.push(0), alpha.push(1));
            let mut inner0 = zero.clone();
            for _ in 0..tail {
                inner0 = inner0.push(1);
            }
            let mut inner1 = one.clone();
            for _ in 0..tail {
                inner1 = inner1.push(0);
            }
            levels.insert(format!("B{}", zero.label()), k + 1);
            arc_endpoints.insert(format!("B{}", zero.label()), (b_id(&inner0), b_id(&zero)));
            levels.insert(format!("B{}", one.label()), k + 1);
            arc_endpoints.insert(format!("B{}", one.label()), (b_id(&one), b_id(&inner1)));
        }
    }
    for gamma in Word::all(r) {
        levels.insert(format!("C{}", gamma.label()), r);
        arc_endpoints.insert(format!("C{}", gamma.label()), (b_id(&gamma), c_id(&gamma)));
    }
    CombSpec { r, coordinates, levels, arc_endpoints }
}

/// The zero-entropy chain map on the 2^r-comb, with the chain
/// S = (b_{1^r}, c_{0^r}, c_{0^r + 1}, ..., c_{1^r}).
pub fn comb_map(r: usize) -> Result<(MarkovMap, Vec<String>, CombSpec), ConstructionError> {
    if r < 1 {
        return Err(ConstructionError::CombTooSmall(r));
    }
    let spec = comb_spec(r);
    // spine points sorted by coordinate, consecutive pairs joined
    let mut spine: Vec<(&String, &Rational)> = spec
        .coordinates
        .iter()
        .filter(|(id, _)| !id.starts_with('c'))
        .collect();
    spine.sort_by(|x, y| x.1.cmp(y.1));
    let mut vertices: Vec<String> = spec.coordinates.keys().cloned().collect();
    vertices.sort();
    let mut edges = Vec::new();
    for (k, pair) in spine.windows(2).enumerate() {
        edges.push((format!("sp{k}"), pair[0].0.clone(), pair[1].0.clone(), pair[1].1 - pair[0].1));
    }
    for gamma in Word::all(r) {
        edges.push((format!("tooth{}", gamma.label()), b_id(&gamma), c_id(&gamma), int(1)));
    }
    let tree = MetricTree::build(vertices, edges)?;
    // the map rules: chains under word increment, with the handoffs at
    // all-ones words threading the levels together
    let mut image: BTreeMap<String, String> = BTreeMap::new();
    for k in 0..r {
        for alpha in Word::all(k) {
            image.insert(a_id(&alpha), a_id(&alpha.succ()));
        }
    }
    for k in 1..=r {
        for beta in Word::all(k) {
            let target = if beta == Word::ones(r) {
                c_id(&Word::zeros(r))
            } else if beta == Word::ones(k) {
                b_id(&Word::zeros(k + 1))
            } else {
                b_id(&beta.succ())
            };
            image.insert(b_id(&beta), target);
        }
    }
    for gamma in Word::all(r) {
        let target =
            if gamma == Word::ones(r) { b_id(&Word::zeros(r)) } else { c_id(&gamma.succ()) };
        image.insert(c_id(&gamma), target);
    }
    let map = MarkovMap::from_vertex_images(&tree, &image)?;
    let mut chain = vec![b_id(&Word::ones(r))];
    let mut gamma = Word::zeros(r);
    for _ in 0..(1usize << r) {
        chain.push(c_id(&gamma));
        gamma = gamma.succ();
    }
    Ok((map, chain, spec))
}

/// A closed walk from `start` traversing every basic arc at least once
/// (depth-first double cover): arcs[l] is traversed between vertices[l]
/// and vertices[l+1].
#[derive(Debug, Clone)]
pub struct SweepWalk {
    pub arcs: Vec<usize>,
    pub vertices: Vec<String>,
}

pub fn sweep_walk(map: &MarkovMap, start: &str) -> Result<SweepWalk, ConstructionError> {
    let tree = map.tree();
    let root = tree
        .vertex_index(start)
        .ok_or_else(|| ConstructionError::BadStart(start.to_string()))?;
    let mut arcs = Vec::with_capacity(2 * tree.edge_count());
    let mut vertices = vec![start.to_string()];
    // iterative depth-first double cover, children in arc-index order
    let mut stack = vec![(root, usize::MAX, 0usize)]; // (vertex, parent edge, next child)
    while let Some(&(v, parent, child)) = stack.last() {
        let next = tree.neighbors(v).get(child).copied();
        stack.last_mut().unwrap().2 += 1;
        match next {
            Some((e, w)) if e != parent => {
                arcs.push(e);
                vertices.push(tree.vertex_name(w).to_string());
                stack.push((w, e, 0));
            }
            Some(_) => {}
            None => {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    arcs.push(parent);
                    vertices.push(tree.vertex_name(u).to_string());
                }
            }
        }
    }
    debug_assert_eq!(arcs.len(), 2 * tree.edge_count());
    Ok(SweepWalk { arcs, vertices })
}

/// Role of one basic arc of the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArcRole {
    /// basic arc of the base map (1-based index)
    Base(usize),
    /// A_i^j on the attached leg i
    Leg { i: usize, j: usize },
    /// A_n^{N-1,l}, one of the m subdivided pieces
    Sub { l: usize },
}

/// The extension g_N of a (P,S)-linear base map, with labeled arcs and
/// the defect set D.
#[derive(Debug, Clone)]
pub struct ExtensionResult {
    pub map: MarkovMap,
    /// arc index -> role, for every arc
    pub labels: BTreeMap<usize, ArcRole>,
    pub n: usize,
    pub big_n: usize,
    pub m: usize,
    pub p: usize,
    pub defect: BTreeSet<usize>,
    pub s_base: Vec<String>,
}

impl ExtensionResult {
    pub fn role_label(&self, arc: usize) -> String {
        match self.labels[&arc] {
            ArcRole::Base(i) => format!("B[{i}]"),
            ArcRole::Leg { i, j } => format!("A[{i}][{j}]"),
            ArcRole::Sub { l } => format!("A[{}][{},{}]", self.n, self.big_n - 1, l),
        }
    }

    pub fn arc_of_role(&self, role: ArcRole) -> Option<usize> {
        self.labels.iter().find(|(_, &r)| r == role).map(|(&a, _)| a)
    }
}

impl fmt::Display for ArcRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArcRole::Base(i) => write!(f, "B[{i}]"),
            ArcRole::Leg { i, j } => write!(f, "A[{i}][{j}]"),
            ArcRole::Sub { l } => write!(f, "A[n][N-1,{l}]"),
        }
    }
}

fn fresh_name(tree: &MetricTree, base: String) -> String {
    let mut name = base;
    while tree.vertex_index(&name).is_some() {
        name.push('_');
    }
    name
}

/// Builds the exact extension over a (P,S)-linear base: n arcs are hung
/// off s_1..s_n, each cut into N pieces, the pieces chained cyclically
/// with a stagger near the free ends, and the last piece of leg n cut
/// again into m pieces that sweep through the whole base.
pub fn extend_exact(
    base: &MarkovMap,
    s: &[String],
    big_n: usize,
) -> Result<ExtensionResult, ConstructionError> {
    if s.len() < 3 {
        return Err(ConstructionError::ChainTooShort(s.len()));
    }
    let report = base.check_ps_linear(s);
    if !report.ok {
        return Err(ConstructionError::BaseNotPsLinear(report.failures));
    }
    if big_n <= 6 {
        return Err(ConstructionError::NTooSmall(big_n));
    }
    let n = s.len() - 1;
    let p = base.arc_count();
    let tree = base.tree();
    let walk = sweep_walk(base, &s[1])?;
    let m = walk.arcs.len();

    // vertex names for the attached legs
    let leg_name: Vec<Vec<String>> = (1..=n)
        .map(|i| {
            (0..=big_n)
                .map(|j| {
                    if j == 0 {
                        s[i].clone()
                    } else {
                        fresh_name(tree, format!("t{i}_{j}"))
                    }
                })
                .collect()
        })
        .collect();
    let sub_name: Vec<String> =
        (1..m).map(|l| fresh_name(tree, format!("u{l}"))).collect();

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
    for i in 1..=n {
        for j in 1..=big_n {
            vertices.push(leg_name[i - 1][j].clone());
        }
    }
    vertices.extend(sub_name.iter().cloned());
    let piece = ratio(1, m as i64);
    for i in 1..=n {
        for j in 1..=big_n {
            if i == n && j == big_n - 1 {
                // this arc is subdivided into the m sweep pieces
                let mut prev = leg_name[i - 1][j - 1].clone();
                for (l, u) in sub_name.iter().enumerate() {
                    edges.push((format!("n{i}_{j}_{}", l + 1), prev, u.clone(), piece.clone()));
                    prev = u.clone();
                }
                edges.push((format!("n{i}_{j}_{m}"), prev, leg_name[i - 1][j].clone(), piece.clone()));
            } else {
                edges.push((
                    format!("n{i}_{j}"),
                    leg_name[i - 1][j - 1].clone(),
                    leg_name[i - 1][j].clone(),
                    int(1),
                ));
            }
        }
    }
    let extended = MetricTree::build(vertices, edges)?;

    // vertex images: the base map off (s_0, s_n], the leg shifts, the
    // stagger cases on leg n, and the sweep on the subdivided piece
    let mut image: BTreeMap<String, String> = base.image_map();
    image.insert(s[n].clone(), leg_name[0][1].clone());
    for i in 1..n {
        for j in 1..=big_n {
            image.insert(leg_name[i - 1][j].clone(), leg_name[i][j].clone());
        }
    }
    for j in 1..=big_n {
        let target = if j <= big_n - 6 {
            leg_name[0][j + 1].clone()
        } else if j == big_n - 5 || j == big_n - 3 {
            leg_name[0][big_n - 1].clone()
        } else if j == big_n - 4 {
            leg_name[0][big_n].clone()
        } else if j == big_n - 2 || j == big_n - 1 {
            s[1].clone()
        } else {
            leg_name[0][1].clone() // j == big_n
        };
        image.insert(leg_name[n - 1][j].clone(), target);
    }
    for (l, u) in sub_name.iter().enumerate() {
        image.insert(u.clone(), walk.vertices[l + 1].clone());
    }
    let map = MarkovMap::from_vertex_images(&extended, &image)?;

    // label every arc by its role
    let mut labels = BTreeMap::new();
    for i in 0..p {
        let e = tree.edge(i);
        let arc = map
            .arc_between(tree.vertex_name(e.from), tree.vertex_name(e.to))
            .expect("base arc survives the extension");
        labels.insert(arc, ArcRole::Base(i + 1));
    }
    for i in 1..=n {
        for j in 1..=big_n {
            if i == n && j == big_n - 1 {
                continue;
            }
            let arc = map
                .arc_between(&leg_name[i - 1][j - 1], &leg_name[i - 1][j])
                .expect("leg arc exists");
            labels.insert(arc, ArcRole::Leg { i, j });
        }
    }
    for l in 1..=m {
        let from = if l == 1 { &leg_name[n - 1][big_n - 2] } else { &sub_name[l - 2] };
        let to = if l == m { &leg_name[n - 1][big_n - 1] } else { &sub_name[l - 1] };
        let arc = map.arc_between(from, to).expect("sweep piece exists");
        labels.insert(arc, ArcRole::Sub { l });
    }
    debug_assert_eq!(labels.len(), map.arc_count());

    let defect: BTreeSet<usize> = labels
        .iter()
        .filter(|(_, role)| match role {
            ArcRole::Leg { i: _, j } if *j == big_n => true,
            ArcRole::Leg { i, j } => *i == n && (*j == big_n - 4 || *j == big_n - 3),
            ArcRole::Sub { .. } => true,
            ArcRole::Base(_) => false,
        })
        .map(|(&arc, _)| arc)
        .collect();

    Ok(ExtensionResult { map, labels, n, big_n, m, p, defect, s_base: s.to_vec() })
}

/// Largest positive root of sum_{k=1}^{N-4} x^(-nk) = 1: the entropy
/// lower bound for the extension; increasing in N with limit 2^(1/n).
pub fn lower_bound_root(n: usize, big_n: usize) -> f64 {
    assert!(n >= 2 && big_n > 6);
    let terms = big_n - 4;
    let tail = |x: f64| -> f64 {
        (1..=terms).map(|k| x.powi(-((n * k) as i32))).sum::<f64>() - 1.0
    };
    // strictly decreasing on (1, infinity); bracketed by 1 and 2^(1/n)
    let mut lo = 1.0_f64;
    let mut hi = 2f64.powf(1.0 / n as f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::EntropyMethod;
    use crate::poly::IntPoly;
    use crate::spectral::{matrix_profile, rome_root, verify_rome};

    fn arcs_of(map: &MarkovMap, pairs: &[(&str, &str)]) -> Vec<usize> {
        pairs.iter().map(|(a, b)| map.arc_between(a, b).unwrap()).collect()
    }

    #[test]
    fn star4_fixed_hub_matches_the_two_cycle_structure() {
        let (map, s) = star_map(4, StarVariant::FixedHub).unwrap();
        assert_eq!(map.arc_count(), 8);
        let td = map.transition();
        let inner = arcs_of(&map, &[("b", "sp1"), ("b", "sp2"), ("b", "sp3"), ("b", "sp4")]);
        let outer = arcs_of(&map, &[("sp1", "s1"), ("sp2", "s2"), ("sp3", "s3"), ("sp4", "s4")]);
        // oracle: endpoint-image geodesics computed by hand
        for i in 0..3 {
            assert_eq!(td.adjacency[inner[i]], vec![inner[i + 1]]);
            assert_eq!(td.adjacency[outer[i]], vec![outer[i + 1]]);
        }
        let mut last_inner = vec![inner[0], outer[0]];
        last_inner.sort_unstable();
        assert_eq!(td.adjacency[inner[3]], last_inner);
        assert_eq!(td.adjacency[outer[3]], vec![outer[0]]);
        // rome {I_4, O_4}: all simple loops have length 4, no O->I path
        let data = verify_rome(&td.matrix, &[inner[3], outer[3]]).unwrap();
        for (&(from, to), paths) in &data.simple_paths {
            assert!(paths.iter().all(|&(len, _)| len == 4));
            assert!(!(from == outer[3] && to == inner[3]));
        }
        assert!(data.simple_paths.get(&(outer[3], inner[3])).is_none());
        // exact characteristic polynomial (x^4 - 1)^2
        let (lambda, chi) = rome_root(&td.matrix, &[inner[3], outer[3]]).unwrap();
        let quartic = IntPoly::from_i64(&[-1, 0, 0, 0, 1]);
        assert_eq!(chi, quartic.mul(&quartic));
        assert!((lambda - 1.0).abs() < 1e-12);
        assert_eq!(map.entropy(EntropyMethod::Both, 1e-10).unwrap(), 0.0);
        assert!(map.check_ps_linear(&s).ok);
        // not transitive: no path from the outer cycle back to the inner
        let props = map.dynamical_properties();
        assert!(!props.transitive && !props.exact);
    }

    #[test]
    fn star2_fixed_hub_has_two_disjoint_two_cycles() {
        let (map, s) = star_map(2, StarVariant::FixedHub).unwrap();
        assert_eq!(map.arc_count(), 4);
        let td = map.transition();
        let profile = matrix_profile(&td.matrix);
        let cycle_lengths: Vec<usize> = profile
            .sccs
            .iter()
            .filter(|c| c.len() > 1 || td.adjacency[c[0]].contains(&c[0]))
            .map(|c| c.len())
            .collect();
        assert_eq!(cycle_lengths.len(), 2);
        assert!(cycle_lengths.iter().all(|&l| l == 2));
        assert!(profile.structurally_zero_entropy);
        assert!(map.check_ps_linear(&s).ok);
    }

    #[test]
    fn star_literal_variant_gains_entropy() {
        let (map, _) = star_map(3, StarVariant::Literal).unwrap();
        let td = map.transition();
        // self-loop on [b, sp1]
        let i1 = map.arc_between("b", "sp1").unwrap();
        assert!(td.adjacency[i1].contains(&i1));
        // the printed rome {I_3, O_3} fails for this reading
        let i3 = map.arc_between("b", "sp3").unwrap();
        let o3 = map.arc_between("sp3", "s3").unwrap();
        assert!(verify_rome(&td.matrix, &[i3, o3]).is_err());
        let h = map.entropy(EntropyMethod::Both, 1e-10).unwrap();
        let golden = (0.5 * (1.0 + 5f64.sqrt())).ln();
        assert!((h - golden).abs() < 1e-10);
    }

    #[test]
    fn star_charpoly_family() {
        for n in 2..=8 {
            let (map, _) = star_map(n, StarVariant::FixedHub).unwrap();
            let td = map.transition();
            let inner_last = map.arc_between("b", &format!("sp{n}")).unwrap();
            let outer_last = map.arc_between(&format!("sp{n}"), &format!("s{n}")).unwrap();
            let (lambda, chi) = rome_root(&td.matrix, &[inner_last, outer_last]).unwrap();
            let mut base = vec![-1i64];
            base.extend(std::iter::repeat_n(0, n - 1));
            base.push(1);
            let xn_minus_1 = IntPoly::from_i64(&base);
            assert_eq!(chi, xn_minus_1.mul(&xn_minus_1), "n = {n}");
            assert!((lambda - 1.0).abs() < 1e-12);
            assert!(matrix_profile(&td.matrix).structurally_zero_entropy);
        }
    }

    #[test]
    fn comb_spec_coordinates_and_ordering() {
        let spec = comb_spec(2);
        assert_eq!(spec.coordinates["a"], ratio(1, 2));
        assert_eq!(spec.coordinates["a0"], ratio(1, 4));
        assert_eq!(spec.coordinates["a1"], ratio(3, 4));
        assert_eq!(spec.coordinates["b0"], ratio(7, 16));
        assert_eq!(spec.coordinates["b1"], ratio(9, 16));
        assert_eq!(spec.coordinates["b00"], ratio(3, 16));
        assert_eq!(spec.coordinates["b11"], ratio(13, 16));
        // ordering facts: b_{alpha 0} < a_alpha < b_{alpha 1}
        for k in 0..2 {
            for alpha in Word::all(k) {
                let a = &spec.coordinates[&a_id(&alpha)];
                assert!(&spec.coordinates[&b_id(&alpha.push(0))] < a);
                assert!(a < &spec.coordinates[&b_id(&alpha.push(1))]);
            }
        }
        // lexicographic order of equal-length words matches coordinates
        for k in 1..=2usize {
            let mut words = Word::all(k);
            words.sort_by_key(|w| w.0.clone());
            for pair in words.windows(2) {
                assert!(spec.coordinates[&b_id(&pair[0])] < spec.coordinates[&b_id(&pair[1])]);
            }
        }
        // nesting: b_{alpha0 beta} < b_{alpha0} and b_{alpha1} < b_{alpha1 beta}
        let spec3 = comb_spec(3);
        assert!(spec3.coordinates["b001"] < spec3.coordinates["b00"]);
        assert!(spec3.coordinates["b01"] < spec3.coordinates["b011"]);
    }

    #[test]
    fn comb_r1_structure() {
        let (map, s, _) = comb_map(1).unwrap();
        assert_eq!(map.arc_count(), 4);
        let td = map.transition();
        let a0 = map.arc_between("b0", "a").unwrap();
        let a1 = map.arc_between("a", "b1").unwrap();
        let c0 = map.arc_between("b0", "c0").unwrap();
        let c1 = map.arc_between("b1", "c1").unwrap();
        assert_eq!(td.adjacency[a0], vec![a1]);
        let mut mixed = vec![a0, c0];
        mixed.sort_unstable();
        assert_eq!(td.adjacency[a1], mixed);
        assert_eq!(td.adjacency[c0], vec![c1]);
        assert_eq!(td.adjacency[c1], vec![c0]);
        assert_eq!(map.entropy(EntropyMethod::Both, 1e-10).unwrap(), 0.0);
        assert!(map.check_ps_linear(&s).ok);
    }

    #[test]
    fn comb_r2_rows_match_the_hand_computed_table() {
        let (map, s, spec) = comb_map(2).unwrap();
        assert_eq!(map.arc_count(), 12);
        let td = map.transition();
        let arc = |label: &str| {
            let (u, v) = &spec.arc_endpoints[label];
            map.arc_between(u, v).unwrap()
        };
        let row = |label: &str| td.adjacency[arc(label)].clone();
        let sorted = |labels: &[&str]| {
            let mut v: Vec<usize> = labels.iter().map(|l| arc(l)).collect();
            v.sort_unstable();
            v
        };
        // level-1 loop and its exits
        assert_eq!(row("A0"), sorted(&["A1"]));
        assert_eq!(row("A1"), sorted(&["A0", "B0", "A00", "A01"]));
        // level-2 loop
        assert_eq!(row("A00"), sorted(&["A10"]));
        assert_eq!(row("A10"), sorted(&["A01"]));
        assert_eq!(row("A01"), sorted(&["A11"]));
        assert_eq!(row("A11"), sorted(&["A00", "C00"]));
        // B arcs
        assert_eq!(row("B0"), sorted(&["B1", "A10", "A11"]));
        assert_eq!(row("B1"), sorted(&["A00", "A01"]));
        // teeth cycle
        assert_eq!(row("C00"), sorted(&["C10"]));
        assert_eq!(row("C10"), sorted(&["C01"]));
        assert_eq!(row("C01"), sorted(&["C11"]));
        assert_eq!(row("C11"), sorted(&["C00"]));
        assert_eq!(map.entropy(EntropyMethod::Both, 1e-10).unwrap(), 0.0);
        assert!(map.check_ps_linear(&s).ok);
        // loops of lengths 2, 4, 4
        let profile = matrix_profile(&td.matrix);
        let mut lens: Vec<usize> = profile
            .sccs
            .iter()
            .filter(|c| c.len() > 1 || td.adjacency[c[0]].contains(&c[0]))
            .map(|c| c.len())
            .collect();
        lens.sort_unstable();
        assert_eq!(lens, vec![2, 4, 4]);
    }

    #[test]
    fn comb_r3_loop_count() {
        let (map, s, _) = comb_map(3).unwrap();
        let td = map.transition();
        let profile = matrix_profile(&td.matrix);
        assert!(profile.structurally_zero_entropy);
        let lens: Vec<usize> = profile
            .sccs
            .iter()
            .filter(|c| c.len() > 1 || td.adjacency[c[0]].contains(&c[0]))
            .map(|c| c.len())
            .collect();
        assert_eq!(lens.len(), 4); // r + 1 loops
        assert!(map.check_ps_linear(&s).ok);
    }

    #[test]
    fn sweep_walks() {
        // single edge: there and back
        let flip = crate::markov::MarkovMap::interval_map(&[int(0), int(1)], &[1, 0]).unwrap();
        let wf = sweep_walk(&flip, "x0").unwrap();
        assert_eq!(wf.arcs, vec![0, 0]);
        // plain 3-star from the hub: each leg down and back
        let star = crate::tree::make_star(3, int(1)).unwrap();
        let image: BTreeMap<String, String> =
            star.vertex_names().iter().map(|v| (v.clone(), v.clone())).collect();
        let id3 = crate::markov::MarkovMap::from_vertex_images(&star, &image).unwrap();
        let w3 = sweep_walk(&id3, "b").unwrap();
        assert_eq!(w3.arcs.len(), 6);
        for e in 0..3 {
            assert_eq!(w3.arcs.iter().filter(|&&a| a == e).count(), 2);
        }
        let (map, _) = star_map(2, StarVariant::FixedHub).unwrap();
        let walk = sweep_walk(&map, "s1").unwrap();
        assert_eq!(walk.arcs.len(), 8);
        assert_eq!(walk.vertices.first(), walk.vertices.last());
        // 4-star P-set from s1: m = 16 over 8 arcs, all covered
        let (map4, _) = star_map(4, StarVariant::FixedHub).unwrap();
        let walk4 = sweep_walk(&map4, "s1").unwrap();
        assert_eq!(walk4.arcs.len(), 16);
        let covered: BTreeSet<usize> = walk4.arcs.iter().copied().collect();
        assert_eq!(covered.len(), 8);
        // consecutive arcs share the traversal vertex
        for l in 0..walk4.arcs.len() {
            let e = map4.tree().edge(walk4.arcs[l]);
            let u = map4.tree().vertex_index(&walk4.vertices[l]).unwrap();
            let v = map4.tree().vertex_index(&walk4.vertices[l + 1]).unwrap();
            assert!((e.from == u && e.to == v) || (e.from == v && e.to == u));
        }
    }

    /// Expected adjacency of the extension, written directly from the
    /// transition-graph case list.
    fn expected_extension_rows(ext: &ExtensionResult, base: &MarkovMap) -> Vec<Vec<usize>> {
        let (n, big_n, m) = (ext.n, ext.big_n, ext.m);
        let base_td = base.transition();
        let walk = sweep_walk(base, &ext.s_base[1]).unwrap();
        let arc_of = |role: ArcRole| ext.arc_of_role(role).unwrap();
        let p_arc = {
            
            base.arc_between(&ext.s_base[0], &ext.s_base[n]).unwrap()
        };
        let mut rows = vec![Vec::new(); ext.map.arc_count()];
        for bi in 0..ext.p {
            let from = arc_of(ArcRole::Base(bi + 1));
            if bi == p_arc {
                rows[from] = vec![arc_of(ArcRole::Leg { i: 1, j: 1 })];
            } else {
                rows[from] =
                    base_td.adjacency[bi].iter().map(|&j| arc_of(ArcRole::Base(j + 1))).collect();
            }
        }
        for i in 1..n {
            for j in 1..=big_n {
                if (i, j) == (n - 1, big_n - 1) {
                    rows[arc_of(ArcRole::Leg { i, j })] =
                        (1..=m).map(|l| arc_of(ArcRole::Sub { l })).collect();
                } else {
                    rows[arc_of(ArcRole::Leg { i, j })] = vec![arc_of(ArcRole::Leg { i: i + 1, j })];
                }
            }
        }
        for j in 1..=big_n {
            if j == big_n - 1 {
                continue;
            }
            let from = arc_of(ArcRole::Leg { i: n, j });
            rows[from] = if j <= big_n - 6 {
                vec![arc_of(ArcRole::Leg { i: 1, j: j + 1 })]
            } else if j == big_n - 5 {
                (1..=4).map(|k| arc_of(ArcRole::Leg { i: 1, j: big_n - k })).collect()
            } else if j == big_n - 4 || j == big_n - 3 {
                vec![arc_of(ArcRole::Leg { i: 1, j: big_n })]
            } else if j == big_n - 2 {
                (1..big_n).map(|k| arc_of(ArcRole::Leg { i: 1, j: k })).collect()
            } else {
                vec![arc_of(ArcRole::Leg { i: 1, j: 1 })]
            };
        }
        for l in 1..=m {
            rows[arc_of(ArcRole::Sub { l })] =
                vec![arc_of(ArcRole::Base(walk.arcs[l - 1] + 1))];
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        rows
    }

    #[test]
    fn extension_star2_n10_matches_the_case_list() {
        let (base, s) = star_map(2, StarVariant::FixedHub).unwrap();
        let ext = extend_exact(&base, &s, 10).unwrap();
        // arc count p + nN - 1 + m = 4 + 20 - 1 + 8
        assert_eq!(ext.map.arc_count(), 31);
        assert_eq!((ext.p, ext.n, ext.m), (4, 2, 8));
        let td = ext.map.transition();
        assert!(matrix_profile(&td.matrix).primitive);
        let props = ext.map.dynamical_properties();
        assert!(props.transitive && props.exact);
        // row-for-row comparison with the printed case list
        let expected = expected_extension_rows(&ext, &base);
        for arc in 0..ext.map.arc_count() {
            assert_eq!(
                td.adjacency[arc],
                expected[arc],
                "row mismatch at {}",
                ext.role_label(arc)
            );
        }
        // row A_n^{N-2} fans out to A_1^1..A_1^{N-1}
        let fan = ext.arc_of_role(ArcRole::Leg { i: 2, j: 8 }).unwrap();
        assert_eq!(td.adjacency[fan].len(), 9);
        // defect set size n + 2 + m
        assert_eq!(ext.defect.len(), 2 + 2 + 8);
        // g agrees with f away from (s_0, s_n]
        for v in base.tree().vertex_names() {
            if v == &s[2] {
                assert_eq!(ext.map.image_of(v).unwrap(), "t1_1");
            } else {
                assert_eq!(ext.map.image_of(v).unwrap(), base.image_of(v).unwrap());
            }
        }
    }

    #[test]
    fn extension_star4_and_comb_bases() {
        let (base, s) = star_map(4, StarVariant::FixedHub).unwrap();
        let ext = extend_exact(&base, &s, 12).unwrap();
        assert_eq!(ext.map.arc_count(), 8 + 4 * 12 - 1 + 16);
        let td = ext.map.transition();
        assert!(matrix_profile(&td.matrix).primitive);
        let expected = expected_extension_rows(&ext, &base);
        for arc in 0..ext.map.arc_count() {
            assert_eq!(td.adjacency[arc], expected[arc]);
        }
        let (cbase, cs, _) = comb_map(1).unwrap();
        let cext = extend_exact(&cbase, &cs, 8).unwrap();
        assert_eq!(cext.map.arc_count(), 4 + 2 * 8 - 1 + 8);
        assert!(matrix_profile(&cext.map.transition().matrix).primitive);
        // guards
        assert!(matches!(
            extend_exact(&base, &s, 6),
            Err(ConstructionError::NTooSmall(6))
        ));
        let bad = vec!["b".to_string(), "sp1".to_string()];
        assert!(matches!(
            extend_exact(&base, &bad, 10),
            Err(ConstructionError::ChainTooShort(2))
        ));
    }

    #[test]
    fn lower_bound_root_behaviour() {
        let r200 = lower_bound_root(2, 200);
        assert!((r200 - 2f64.sqrt()).abs() < 1e-3);
        // strictly increasing in N while the gap is representable, never
        // above the limit 2^(1/n); at large N the doubling steps collapse
        // below f64 resolution, so only monotone non-decrease is checked
        for big_n in [8, 10, 12, 16, 24] {
            assert!(lower_bound_root(2, big_n) < lower_bound_root(2, big_n + 2));
        }
        let mut prev = 0.0;
        for big_n in [10, 20, 40, 80, 160] {
            let r = lower_bound_root(2, big_n);
            assert!(r >= prev);
            assert!(r <= 2f64.sqrt());
            prev = r;
        }
        // explicit small case: root of x^-n + ... + x^-4n = 1
        for n in [2, 3, 5] {
            let r = lower_bound_root(n, 8);
            let val: f64 = (1..=4).map(|k| r.powi(-((n * k) as i32))).sum();
            assert!((val - 1.0).abs() < 1e-9);
            assert!(r < 2f64.powf(1.0 / n as f64));
        }
    }

    #[test]
    fn star_map_midpoint_translation() {
        // midpoint of I_1 translates to the midpoint of I_2 (slope 1)
        let (map, _) = star_map(3, StarVariant::FixedHub).unwrap();
        let td = map.transition();
        let i1 = map.arc_between("b", "sp1").unwrap();
        let i2 = map.arc_between("b", "sp2").unwrap();
        let x = crate::dynamics::ArcPoint { arc: i1, t: ratio(1, 2) };
        let y = crate::dynamics::eval_point(&map, &td, &x);
        assert_eq!(y.arc, i2);
        assert_eq!(y.t, ratio(1, 2));
    }

    #[test]
    fn star2_leaf_orbit_walks_the_marked_cycle() {
        // s1 -> s2 -> sp1 -> sp2 -> s1: the mark chain closes after four
        // steps (s_n lands on the midpoint s_1', not back on s_1)
        let (map, _) = star_map(2, StarVariant::FixedHub).unwrap();
        let names: Vec<&str> = ["s1", "s2", "sp1", "sp2", "s1"].to_vec();
        let mut current = "s1".to_string();
        for expected in names {
            assert_eq!(current, expected);
            current = map.image_of(&current).unwrap().to_string();
        }
    }

    #[test]
    fn star_isometric_cycle_is_neutral() {
        let (map, _) = star_map(3, StarVariant::FixedHub).unwrap();
        let td = map.transition();
        // the outer cycle O_1 -> O_2 -> O_3 -> O_1 is an isometry: every
        // slope along it is 1, so no expanding periodic point exists there
        let o1 = map.arc_between("sp1", "s1").unwrap();
        match crate::dynamics::periodic_point_in_arc(&map, &td, o1, 10) {
            Err(crate::dynamics::DynamicsError::NeutralCycle(cycle)) => {
                assert_eq!(cycle.len(), 3);
                for &arc in &cycle {
                    assert_eq!(td.slopes[arc], int(1));
                }
            }
            other => panic!("unexpected {other:?}"),
        }
        // the hub-side cycle is expanding (I_n has slope 2) and its fixed
        // point is the hub itself
        let i1 = map.arc_between("b", "sp1").unwrap();
        let (point, period) = crate::dynamics::periodic_point_in_arc(&map, &td, i1, 10).unwrap();
        assert_eq!(period, 3);
        assert_eq!(point.vertex(&map), map.tree().vertex_index("b"));
    }

    #[test]
    fn star_outer_refinement_keeps_zero_entropy() {
        // a point on the isometric outer cycle has a finite orbit; adding
        // it to P must leave the entropy at zero
        let (map, _) = star_map(3, StarVariant::FixedHub).unwrap();
        let o1 = map.arc_between("sp1", "s1").unwrap();
        let edge_id = map.tree().edge(o1).id.clone();
        let point = crate::tree::TreePoint::interior(&edge_id, ratio(1, 6));
        let refined = map.refine_invariant_set(&[point], 100).unwrap();
        assert!(refined.arc_count() > map.arc_count());
        assert_eq!(refined.entropy(crate::markov::EntropyMethod::Both, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn extension_periodic_point_in_the_first_leg_arc() {
        let (base, s) = star_map(2, StarVariant::FixedHub).unwrap();
        let ext = extend_exact(&base, &s, 10).unwrap();
        let td = ext.map.transition();
        let a11 = ext.arc_of_role(ArcRole::Leg { i: 1, j: 1 }).unwrap();
        let (point, period) = crate::dynamics::periodic_point_in_arc(&ext.map, &td, a11, 64)
            .expect("expanding cycle through A[1][1]");
        let orbit = crate::dynamics::orbit(&ext.map, &td, &point, period);
        assert_eq!(orbit.first(), orbit.last());
        assert!(orbit[..period].iter().filter(|p| p.arc == a11).count() >= 1);
    }
}
