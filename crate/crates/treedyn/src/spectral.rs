//! Nonnegative-matrix and digraph spectral analysis: strongly connected
//! components, irreducibility/primitivity/permutation tests, Perron
//! eigenvalues with certified Collatz-Wielandt enclosures, the rome
//! method for exact characteristic polynomials, and maximum cycle means.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::{One, Signed, Zero};
use thiserror::Error;

use crate::poly::{cauchy_root_bound, largest_root_in, IntPoly};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("not a rome: cycle {0:?} avoids the given set")]
    NotARome(Vec<usize>),
    #[error("empty rome")]
    EmptyRome,
    #[error("rome index {0} out of range")]
    RomeIndexOutOfRange(usize),
    #[error("no convergence within cap")]
    NoConvergence,
    #[error("matrix is not irreducible")]
    NotIrreducible,
}

/// A square matrix with nonnegative integer entries, row-major.
/// Serializes as a JSON array of integer rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareMatrix {
    n: usize,
    entries: Vec<u64>,
}

impl serde::Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for SquareMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<u64>> = Vec::deserialize(deserializer)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("matrix rows must be square"));
        }
        Ok(SquareMatrix::from_rows(rows))
    }
}

impl SquareMatrix {
    pub fn zero(n: usize) -> Self {
        SquareMatrix { n, entries: vec![0; n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        SquareMatrix { n, entries: rows.into_iter().flatten().collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        (0..self.n).map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn max_row_sum(&self) -> u64 {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Successor lists (edges with nonzero entry), ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| self.get(i, j) > 0).collect())
            .collect()
    }

    pub fn is_zero_one(&self) -> bool {
        self.entries.iter().all(|&e| e <= 1)
    }

    /// Entrywise comparison.
    pub fn le(&self, other: &SquareMatrix) -> bool {
        self.n == other.n && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }
}

/// Structural classification of a nonnegative matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixProfile {
    pub sccs: Vec<Vec<usize>>,
    pub irreducible: bool,
    pub primitive: bool,
    pub permutation: bool,
    /// every nontrivial strongly connected component is a single simple
    /// cycle with unit weights, which forces spectral radius <= 1
    pub structurally_zero_entropy: bool,
}

fn tarjan_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0usize;
    // iterative Tarjan: frame = (vertex, next child position)
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(frame) = frames.last().copied() {
            let (v, child) = frame;
            if child == 0 {
                index[v] = next;
                low[v] = next;
                next += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if child < adj[v].len() {
                let w = adj[v][child];
                frames.last_mut().unwrap().1 += 1;
                if index[w] == usize::MAX {
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
                frames.pop();
                if let Some(&(u, _)) = frames.last() {
                    low[u] = low[u].min(low[v]);
                }
            }
        }
    }
    comps
}

/// gcd of cycle lengths within one SCC, from a breadth-first leveling.
fn scc_period(adj: &[Vec<usize>], comp: &[usize]) -> u64 {
    let mut in_comp = BTreeMap::new();
    for &v in comp {
        in_comp.insert(v, ());
    }
    let root = comp[0];
    let mut level: BTreeMap<usize, i64> = BTreeMap::new();
    level.insert(root, 0);
    let mut queue = std::collections::VecDeque::from([root]);
    let mut g: i64 = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !in_comp.contains_key(&w) {
                continue;
            }
            match level.get(&w) {
                None => {
                    level.insert(w, level[&v] + 1);
                    queue.push_back(w);
                }
                Some(&lw) => {
                    g = num::integer::gcd(g, level[&v] + 1 - lw);
                }
            }
        }
    }
    g.unsigned_abs()
}

pub fn matrix_profile(m: &SquareMatrix) -> MatrixProfile {
    let adj = m.adjacency();
    let n = m.dim();
    let sccs = tarjan_sccs(&adj);
    let irreducible = sccs.len() == 1 && (n >= 2 || (n == 1 && m.get(0, 0) > 0));
    let primitive = irreducible && scc_period(&adj, &sccs[0]) == 1;
    let permutation = (0..n).all(|i| {
        (0..n).map(|j| m.get(i, j)).sum::<u64>() == 1
            && (0..n).map(|j| m.get(j, i)).sum::<u64>() == 1
            && (0..n).all(|j| m.get(i, j) <= 1)
    }) && n > 0;
    let mut structurally_zero_entropy = true;
    for comp in &sccs {
        let internal: Vec<(usize, usize)> = comp
            .iter()
            .flat_map(|&v| adj[v].iter().filter(|w| comp.contains(w)).map(move |&w| (v, w)))
            .collect();
        if internal.is_empty() {
            continue;
        }
        // a single simple cycle: one internal successor per vertex, weight 1
        let simple_cycle = internal.len() == comp.len()
            && comp.iter().all(|&v| adj[v].iter().filter(|w| comp.contains(w)).count() == 1)
            && internal.iter().all(|&(v, w)| m.get(v, w) == 1);
        if !simple_cycle {
            structurally_zero_entropy = false;
            break;
        }
    }
    MatrixProfile { sccs, irreducible, primitive, permutation, structurally_zero_entropy }
}

const POWER_ITERATION_CAP: usize = 1_000_000;
const DENSE_REFINE_AFTER: usize = 2_000;
const DENSE_REFINE_LIMIT: usize = 1_500;

/// Perron eigenvalue (spectral radius) of a nonnegative matrix: the
/// maximum over SCC diagonal blocks, each enclosed by Collatz-Wielandt
/// bounds under shifted power iteration.
pub fn perron(m: &SquareMatrix, tol: f64) -> Result<f64, SpectralError> {
    let adj = m.adjacency();
    let sccs = tarjan_sccs(&adj);
    let mut best = 0.0_f64;
    for comp in &sccs {
        if comp.len() == 1 && m.get(comp[0], comp[0]) == 0 {
            continue;
        }
        let (lambda, _) = perron_block(m, comp, tol)?;
        best = best.max(lambda);
    }
    Ok(best)
}

/// Perron eigenvalue and a strictly positive right eigenvector of an
/// irreducible matrix, normalized to unit sum.
pub fn perron_vector(m: &SquareMatrix, tol: f64) -> Result<(f64, Vec<f64>), SpectralError> {
    let profile = matrix_profile(m);
    if !profile.irreducible {
        return Err(SpectralError::NotIrreducible);
    }
    let comp: Vec<usize> = (0..m.dim()).collect();
    let (lambda, vec) = perron_block(m, &comp, tol)?;
    let sum: f64 = vec.iter().sum();
    Ok((lambda, vec.into_iter().map(|x| x / sum).collect()))
}

/// Power iteration on `B + I` restricted to one irreducible block, with
/// Collatz-Wielandt certificates; switches to dense inverse iteration when
/// plain iteration converges too slowly.
fn perron_block(m: &SquareMatrix, comp: &[usize], tol: f64) -> Result<(f64, Vec<f64>), SpectralError> {
    let s = comp.len();
    let rows: Vec<Vec<(usize, f64)>> = comp
        .iter()
        .map(|&v| {
            comp.iter()
                .enumerate()
                .filter_map(|(j, &w)| {
                    let e = m.get(v, w);
                    (e > 0).then_some((j, e as f64))
                })
                .collect()
        })
        .collect();
    let mut x = vec![1.0_f64; s];
    let mut refined = 0usize;
    for iter in 0..POWER_ITERATION_CAP {
        let mut y = x.clone(); // the +I shift
        for (i, row) in rows.iter().enumerate() {
            for &(j, w) in row {
                y[i] += w * x[j];
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for i in 0..s {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        // bounds are for B + I
        if hi - lo <= tol {
            let lambda = 0.5 * (hi + lo) - 1.0;
            let max = y.iter().cloned().fold(0.0, f64::max);
            return Ok((lambda, y.into_iter().map(|v| v / max).collect()));
        }
        let max = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / max).collect();
        if iter > 0 && iter % DENSE_REFINE_AFTER == 0 && s <= DENSE_REFINE_LIMIT && refined < 8 {
            let estimate = 0.5 * (hi + lo) - 1.0;
            if let Some(z) = inverse_iteration_step(&rows, &x, estimate) {
                x = z;
            }
            refined += 1;
        }
    }
    Err(SpectralError::NoConvergence)
}

/// One dense shifted inverse-iteration step: solve (B - mu I) z = x and
/// return |z| normalized, or None if the solve degenerates.
fn inverse_iteration_step(rows: &[Vec<(usize, f64)>], x: &[f64], estimate: f64) -> Option<Vec<f64>> {
    let s = x.len();
    let mu = estimate + estimate.abs().max(1.0) * 1e-10;
    let mut a = vec![0.0_f64; s * s];
    for (i, row) in rows.iter().enumerate() {
        for &(j, w) in row {
            a[i * s + j] = w;
        }
        a[i * s + i] -= mu;
    }
    let mut b = x.to_vec();
    // LU with partial pivoting, in place
    let mut perm: Vec<usize> = (0..s).collect();
    for col in 0..s {
        let (piv, piv_val) = (col..s)
            .map(|r| (r, a[perm[r] * s + col].abs()))
            .fold((col, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
        if piv_val < 1e-300 {
            return None;
        }
        perm.swap(col, piv);
        let prow = perm[col];
        let pivot = a[prow * s + col];
        for r in (col + 1)..s {
            let row = perm[r];
            let f = a[row * s + col] / pivot;
            if f == 0.0 {
                continue;
            }
            a[row * s + col] = 0.0;
            for c in (col + 1)..s {
                a[row * s + c] -= f * a[prow * s + c];
            }
            b[row] -= f * b[prow];
        }
    }
    let mut z = vec![0.0_f64; s];
    for col in (0..s).rev() {
        let row = perm[col];
        let mut acc = b[row];
        for c in (col + 1)..s {
            acc -= a[row * s + c] * z[c];
        }
        z[col] = acc / a[row * s + col];
    }
    let max = z.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(max.is_finite()) || max == 0.0 {
        return None;
    }
    let z: Vec<f64> = z.into_iter().map(|v| v.abs() / max).collect();
    // keep strict positivity for the Collatz-Wielandt quotients
    z.iter().all(|&v| v > 0.0).then_some(z)
}

/// Rome certificate: the complement induces an acyclic graph, and all
/// rome-to-rome simple paths aggregated as (length, total width).
#[derive(Debug, Clone)]
pub struct RomeData {
    pub rome: Vec<usize>,
    /// per (source, target) rome pair: sorted (path length, width sum)
    pub simple_paths: BTreeMap<(usize, usize), Vec<(usize, BigInt)>>,
}

/// Checks the rome property and enumerates all simple paths between rome
/// vertices (paths whose interior avoids the rome).
pub fn verify_rome(m: &SquareMatrix, rome: &[usize]) -> Result<RomeData, SpectralError> {
    let n = m.dim();
    if rome.is_empty() {
        return Err(SpectralError::EmptyRome);
    }
    for &r in rome {
        if r >= n {
            return Err(SpectralError::RomeIndexOutOfRange(r));
        }
    }
    let mut in_rome = vec![false; n];
    for &r in rome {
        in_rome[r] = true;
    }
    let adj = m.adjacency();
    // topological order of the complement-induced subgraph
    let complement: Vec<usize> = (0..n).filter(|&v| !in_rome[v]).collect();
    let mut indeg: BTreeMap<usize, usize> = complement.iter().map(|&v| (v, 0)).collect();
    for &v in &complement {
        for &w in &adj[v] {
            if !in_rome[w] {
                *indeg.get_mut(&w).unwrap() += 1;
            }
        }
    }
    let mut order = Vec::new();
    let mut zero: Vec<usize> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| v).collect();
    while let Some(v) = zero.pop() {
        order.push(v);
        for &w in &adj[v] {
            if !in_rome[w] {
                let d = indeg.get_mut(&w).unwrap();
                *d -= 1;
                if *d == 0 {
                    zero.push(w);
                }
            }
        }
    }
    if order.len() != complement.len() {
        // find a witness cycle among unprocessed vertices
        let leftover: Vec<usize> =
            complement.iter().copied().filter(|v| !order.contains(v)).collect();
        let cycle = find_cycle_within(&adj, &leftover);
        return Err(SpectralError::NotARome(cycle));
    }
    // aggregate simple paths by dynamic programming over the complement DAG
    let mut simple_paths: BTreeMap<(usize, usize), Vec<(usize, BigInt)>> = BTreeMap::new();
    for &r in rome {
        // walks[v]: length -> width sum of r -> ... -> v with interior off the rome
        let mut walks: BTreeMap<usize, BTreeMap<usize, BigInt>> = BTreeMap::new();
        for &w in &adj[r] {
            let width = BigInt::from(m.get(r, w));
            if in_rome[w] {
                push_path(&mut simple_paths, r, w, 1, width);
            } else {
                *walks.entry(w).or_default().entry(1).or_insert_with(BigInt::zero) += width;
            }
        }
        for &v in &order {
            let Some(table) = walks.get(&v).cloned() else { continue };
            for &w in &adj[v] {
                let e = BigInt::from(m.get(v, w));
                for (len, width) in &table {
                    let grown = width * &e;
                    if in_rome[w] {
                        push_path(&mut simple_paths, r, w, len + 1, grown);
                    } else {
                        *walks.entry(w).or_default().entry(len + 1).or_insert_with(BigInt::zero) +=
                            grown;
                    }
                }
            }
        }
    }
    let mut rome = rome.to_vec();
    rome.sort_unstable();
    rome.dedup();
    Ok(RomeData { rome, simple_paths })
}

fn push_path(
    paths: &mut BTreeMap<(usize, usize), Vec<(usize, BigInt)>>,
    from: usize,
    to: usize,
    len: usize,
    width: BigInt,
) {
    let entry = paths.entry((from, to)).or_default();
    match entry.binary_search_by_key(&len, |&(l, _)| l) {
        Ok(pos) => entry[pos].1 += width,
        Err(pos) => entry.insert(pos, (len, width)),
    }
}

fn find_cycle_within(adj: &[Vec<usize>], allowed: &[usize]) -> Vec<usize> {
    // restrict to a nontrivial SCC of the leftover subgraph; inside it every
    // vertex keeps an internal successor, so a walk must close a cycle
    let local: BTreeMap<usize, usize> = allowed.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sub: Vec<Vec<usize>> = allowed
        .iter()
        .map(|&v| adj[v].iter().filter_map(|w| local.get(w).copied()).collect())
        .collect();
    let comp = tarjan_sccs(&sub)
        .into_iter()
        .find(|c| c.len() > 1 || sub[c[0]].contains(&c[0]))
        .expect("non-acyclic remainder has a nontrivial component");
    let inside: std::collections::BTreeSet<usize> = comp.iter().copied().collect();
    let mut seen = BTreeMap::new();
    let mut path = vec![comp[0]];
    seen.insert(comp[0], 0usize);
    loop {
        let v = *path.last().unwrap();
        let w = *sub[v].iter().find(|w| inside.contains(w)).expect("successor in component");
        if let Some(&pos) = seen.get(&w) {
            return path[pos..].iter().map(|&i| allowed[i]).collect();
        }
        seen.insert(w, path.len());
        path.push(w);
    }
}

/// Greedy rome discovery: repeatedly delete a vertex of maximum degree
/// lying on some remaining cycle, until the remainder is acyclic.
pub fn auto_rome(m: &SquareMatrix) -> Vec<usize> {
    let n = m.dim();
    let adj = m.adjacency();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut rome = Vec::new();
    loop {
        // vertices on cycles = vertices in nontrivial SCCs of the remainder
        let local: BTreeMap<usize, usize> =
            alive.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let sub_adj: Vec<Vec<usize>> = alive
            .iter()
            .map(|&v| adj[v].iter().filter_map(|w| local.get(w).copied()).collect())
            .collect();
        let sccs = tarjan_sccs(&sub_adj);
        let mut cyclic: Vec<usize> = Vec::new();
        for comp in &sccs {
            let nontrivial =
                comp.len() > 1 || sub_adj[comp[0]].contains(&comp[0]);
            if nontrivial {
                cyclic.extend(comp.iter().map(|&i| alive[i]));
            }
        }
        if cyclic.is_empty() {
            break;
        }
        let degree = |v: usize| {
            let out = adj[v].iter().filter(|w| alive.contains(w)).count();
            let inc = alive.iter().filter(|&&u| adj[u].contains(&v)).count();
            out + inc
        };
        cyclic.sort_unstable();
        let &pick = cyclic.iter().max_by_key(|&&v| (degree(v), usize::MAX - v)).unwrap();
        rome.push(pick);
        alive.retain(|&v| v != pick);
    }
    if rome.is_empty() {
        rome.push(0);
    }
    rome.sort_unstable();
    rome
}

/// Exact characteristic polynomial via the rome method, and its largest
/// real root at or above zero.
///
/// The polynomial carries the sign of `det(M - xE)`: coefficients lowest
/// degree first, leading coefficient `(-1)^n`.
pub fn rome_root(m: &SquareMatrix, rome: &[usize]) -> Result<(f64, IntPoly), SpectralError> {
    let data = verify_rome(m, rome)?;
    let n = m.dim();
    let k = data.rome.len();
    // entries of R(x) - E as polynomials in y = 1/x
    let mat: Vec<Vec<IntPoly>> = data
        .rome
        .iter()
        .map(|&ri| {
            data.rome
                .iter()
                .map(|&rj| {
                    let mut coeffs = Vec::new();
                    if let Some(paths) = data.simple_paths.get(&(ri, rj)) {
                        for (len, width) in paths {
                            if coeffs.len() <= *len {
                                coeffs.resize(len + 1, BigInt::zero());
                            }
                            coeffs[*len] += width;
                        }
                    }
                    if coeffs.is_empty() {
                        coeffs.resize(1, BigInt::zero());
                    }
                    if ri == rj {
                        coeffs[0] -= BigInt::one();
                    }
                    IntPoly::from_coeffs(coeffs)
                })
                .collect()
        })
        .collect();
    let det = det_poly(&mat);
    let deg = det.degree().unwrap_or(0);
    assert!(deg <= n, "rome determinant must cancel above degree n");
    // chi(x) = (-1)^(n-k) x^n det(R(1/x) - E)
    let mut chi = vec![BigInt::zero(); n + 1];
    let sign = if (n - k).is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    for (j, d) in det.coeffs().iter().enumerate() {
        chi[n - j] = d * &sign;
    }
    let chi = IntPoly::from_coeffs(chi);
    // the spectral radius is the largest real root of chi
    let lambda = largest_positive_root(&chi, 1.0 + m.max_row_sum() as f64);
    Ok((lambda, chi))
}

/// Largest real root >= 0 of a characteristic polynomial; 0 when the only
/// nonnegative root is at the origin.
fn largest_positive_root(chi: &IntPoly, matrix_bound: f64) -> f64 {
    // factor out x^v so bisection can start strictly above 0
    let coeffs = chi.coeffs();
    let v = coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let reduced = IntPoly::from_coeffs(coeffs[v..].to_vec());
    let bound = (cauchy_root_bound(&reduced)).min(matrix_bound) + 1.0;
    match largest_root_in(&reduced, 0.0, bound, 1e-12) {
        Some(r) => r.max(0.0),
        None => 0.0,
    }
}

/// Determinant of a square polynomial matrix by subset dynamic
/// programming over column choices.
fn det_poly(mat: &[Vec<IntPoly>]) -> IntPoly {
    let k = mat.len();
    if k == 0 {
        return IntPoly::one();
    }
    assert!(k <= 20, "rome determinant limited to 20 rome vertices");
    let full = (1usize << k) - 1;
    let mut table: Vec<Option<IntPoly>> = vec![None; full + 1];
    table[0] = Some(IntPoly::one());
    for mask in 1..=full {
        let row = (mask as u32).count_ones() as usize - 1;
        let mut acc = IntPoly::zero();
        // Laplace expansion along the last submatrix row: sign (-1)^(row+pos)
        let mut sign_flip = row % 2 == 1;
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            let sub = table[mask ^ (1 << j)].as_ref().expect("filled in order");
            if !mat[row][j].is_zero() && !sub.is_zero() {
                let term = mat[row][j].mul(sub);
                acc = if sign_flip { acc.sub(&term) } else { acc.add(&term) };
            }
            sign_flip = !sign_flip;
        }
        table[mask] = Some(acc);
    }
    table[full].take().unwrap()
}

/// Maximum over directed cycles of (sum of vertex weights)/(cycle length),
/// exactly, by Karp's method per strongly connected component. Zero for
/// acyclic graphs.
pub fn max_cycle_mean(adj: &[Vec<usize>], weights: &[u64]) -> Ratio<i64> {
    assert_eq!(adj.len(), weights.len());
    let sccs = tarjan_sccs(adj);
    let mut best: Option<Ratio<i64>> = None;
    for comp in &sccs {
        let s = comp.len();
        if s == 1 && !adj[comp[0]].contains(&comp[0]) {
            continue;
        }
        let local: BTreeMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let sub: Vec<Vec<usize>> = comp
            .iter()
            .map(|&v| adj[v].iter().filter_map(|w| local.get(w).copied()).collect())
            .collect();
        let w: Vec<i64> = comp.iter().map(|&v| weights[v] as i64).collect();
        // D[k][v] = max weight of a k-edge walk from the source, counting
        // the weight of each vertex stepped onto
        let mut dist = vec![vec![None_i64(); s]; s + 1];
        dist[0][0] = Some(0);
        for k in 1..=s {
            for u in 0..s {
                let Some(du) = dist[k - 1][u] else { continue };
                for &v in &sub[u] {
                    let cand = du + w[v];
                    if dist[k][v].is_none_or(|d| cand > d) {
                        dist[k][v] = Some(cand);
                    }
                }
            }
        }
        for v in 0..s {
            let Some(dn) = dist[s][v] else { continue };
            let mut vmin: Option<Ratio<i64>> = None;
            for k in 0..s {
                let Some(dk) = dist[k][v] else { continue };
                let mean = Ratio::new(dn - dk, (s - k) as i64);
                if vmin.is_none_or(|m| mean < m) {
                    vmin = Some(mean);
                }
            }
            if let Some(mean) = vmin {
                if best.is_none_or(|b| mean > b) {
                    best = Some(mean);
                }
            }
        }
    }
    best.unwrap_or_else(Ratio::zero)
}

#[allow(non_snake_case)]
fn None_i64() -> Option<i64> {
    None
}

/// Combined report for one matrix: structural profile plus the Perron
/// eigenvalue, with optional rome cross-validation.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub profile: MatrixProfile,
    pub perron: f64,
    pub rome_lambda: Option<f64>,
    pub methods_agree: Option<bool>,
}

pub fn spectral_report(m: &SquareMatrix, tol: f64, with_rome: bool) -> Result<SpectralReport, SpectralError> {
    let profile = matrix_profile(m);
    let lambda = perron(m, tol)?;
    let (rome_lambda, methods_agree) = if with_rome {
        let rome = auto_rome(m);
        let (rl, _) = rome_root(m, &rome)?;
        (Some(rl), Some((rl - lambda).abs() <= tol.max(1e-10)))
    } else {
        (None, None)
    };
    Ok(SpectralReport { profile, perron: lambda, rome_lambda, methods_agree })
}
