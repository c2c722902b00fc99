//! Seeded generators for the randomized harnesses: trees, 01-matrices,
//! vertex-weighted digraphs and rational seed segments. All randomness
//! flows through a caller-provided ChaCha stream for reproducibility.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rational::{ratio, Rational};
use crate::spectral::{matrix_profile, SquareMatrix};
use crate::tree::MetricTree;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree by uniform attachment, unit lengths.
pub fn random_tree(rng: &mut ChaCha8Rng, vertices: usize) -> MetricTree {
    assert!(vertices >= 2);
    let names: Vec<String> = (0..vertices).map(|v| format!("v{v}")).collect();
    let mut edges = Vec::with_capacity(vertices - 1);
    for v in 1..vertices {
        let parent = rng.gen_range(0..v);
        edges.push((format!("e{v}"), names[parent].clone(), names[v].clone(), crate::rational::int(1)));
    }
    MetricTree::build(names, edges).expect("attachment process yields a tree")
}

/// Random tree with at least the given number of endpoints.
pub fn random_tree_with_endpoints(
    rng: &mut ChaCha8Rng,
    vertices: usize,
    min_endpoints: usize,
) -> MetricTree {
    loop {
        let tree = random_tree(rng, vertices);
        if tree.endpoint_count() >= min_endpoints {
            return tree;
        }
    }
}

/// Random 01-matrix of the given size with roughly `density` ones.
pub fn random_zero_one_matrix(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SquareMatrix {
    let mut m = SquareMatrix::zero(n);
    for i in 0..n {
        for j in 0..n {
            if rng.gen_bool(density) {
                m.set(i, j, 1);
            }
        }
    }
    m
}

/// Random primitive 01-matrix by rejection sampling.
pub fn random_primitive_matrix(rng: &mut ChaCha8Rng, max_dim: usize) -> SquareMatrix {
    loop {
        let n = rng.gen_range(2..=max_dim);
        let density = (2.5 / n as f64).min(0.8);
        let m = random_zero_one_matrix(rng, n, density);
        if matrix_profile(&m).primitive {
            return m;
        }
    }
}

/// Random digraph as successor lists, plus 0/1 vertex weights.
pub fn random_weighted_digraph(
    rng: &mut ChaCha8Rng,
    max_vertices: usize,
    edge_density: f64,
) -> (Vec<Vec<usize>>, Vec<u64>) {
    let n = rng.gen_range(1..=max_vertices);
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(edge_density) {
                adj[u].push(v);
            }
        }
    }
    let weights = (0..n).map(|_| u64::from(rng.gen_bool(0.5))).collect();
    (adj, weights)
}

/// Random rational in (0, 1) with denominator up to 64.
pub fn random_unit_rational(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.gen_range(2..=64i64);
    let num = rng.gen_range(1..den);
    ratio(num, den)
}

/// Uniform index below `bound`.
pub fn random_index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    rng.gen_range(0..bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic_per_seed() {
        let t1 = random_tree(&mut rng(7), 20);
        let t2 = random_tree(&mut rng(7), 20);
        assert_eq!(t1.edges().len(), t2.edges().len());
        for (a, b) in t1.edges().iter().zip(t2.edges()) {
            assert_eq!((a.from, a.to), (b.from, b.to));
        }
        let m1 = random_primitive_matrix(&mut rng(3), 8);
        let m2 = random_primitive_matrix(&mut rng(3), 8);
        assert_eq!(m1, m2);
        assert!(matrix_profile(&m1).primitive);
    }

    #[test]
    fn endpoint_floor_is_respected() {
        let mut r = rng(11);
        for _ in 0..20 {
            let t = random_tree_with_endpoints(&mut r, 30, 8);
            assert!(t.endpoint_count() >= 8);
        }
    }
}
