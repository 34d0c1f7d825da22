//! Seeded random dual graphs for property checks and the self-test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{DualGraph, GraphSpec, VertexSpec};

/// Knobs for [`random_graph`].
#[derive(Debug, Clone)]
pub struct GraphShape {
    pub max_vertices: usize,
    pub max_markings: usize,
    pub max_vertex_genus: i64,
    /// Extra non-tree edges (multi-edges and cycles). Zero keeps the graph treelike.
    pub max_extra_edges: usize,
    pub max_loops: usize,
}

impl Default for GraphShape {
    fn default() -> Self {
        GraphShape { max_vertices: 6, max_markings: 4, max_vertex_genus: 2, max_extra_edges: 3, max_loops: 2 }
    }
}

impl GraphShape {
    pub fn treelike(max_vertices: usize) -> Self {
        GraphShape { max_vertices, max_extra_edges: 0, ..GraphShape::default() }
    }

    pub fn general(max_vertices: usize) -> Self {
        GraphShape { max_vertices, ..GraphShape::default() }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A valid stable graph drawn deterministically from `seed`.
pub fn random_graph(seed: u64, shape: &GraphShape) -> DualGraph {
    let mut rng = rng(seed);
    random_graph_with(&mut rng, shape)
}

pub fn random_graph_with<R: Rng>(rng: &mut R, shape: &GraphShape) -> DualGraph {
    let nv = rng.gen_range(1..=shape.max_vertices.max(1));
    let n = rng.gen_range(1..=shape.max_markings.max(1));
    let ids: Vec<String> = (0..nv).map(|i| format!("v{i:02}")).collect();
    let mut genus: Vec<i64> = (0..nv).map(|_| rng.gen_range(0..=shape.max_vertex_genus)).collect();
    let mut edges: Vec<(usize, usize)> = (1..nv).map(|i| (rng.gen_range(0..i), i)).collect();
    if nv > 1 {
        for _ in 0..rng.gen_range(0..=shape.max_extra_edges) {
            let a = rng.gen_range(0..nv);
            let mut b = rng.gen_range(0..nv - 1);
            if b >= a {
                b += 1;
            }
            edges.push((a, b));
        }
    }
    for _ in 0..rng.gen_range(0..=shape.max_loops) {
        let v = rng.gen_range(0..nv);
        edges.push((v, v));
    }
    let mut legs: Vec<Vec<i64>> = vec![Vec::new(); nv];
    for leg in 1..=n as i64 {
        legs[rng.gen_range(0..nv)].push(leg);
    }
    let mut val = vec![0i64; nv];
    for &(a, b) in &edges {
        val[a] += 1;
        val[b] += 1;
    }
    for v in 0..nv {
        while 2 * genus[v] - 2 + val[v] + legs[v].len() as i64 <= 0 {
            genus[v] += 1;
        }
    }
    let spec = GraphSpec {
        n: n as i64,
        vertices: (0..nv)
            .map(|v| VertexSpec { id: ids[v].clone(), genus: genus[v], legs: legs[v].clone() })
            .collect(),
        edges: edges.iter().map(|&(a, b)| [ids[a].clone(), ids[b].clone()]).collect(),
    };
    DualGraph::from_spec(&spec).expect("generator produces stable graphs")
}

/// Random integer vector of length `len` with entries in `[-bound, bound]` and
/// the given sum. The last entry absorbs the difference, so it may exceed the bound.
pub fn random_vector_with_sum<R: Rng>(rng: &mut R, len: usize, bound: i64, sum: i64) -> Vec<i64> {
    assert!(len > 0);
    let mut out: Vec<i64> = (0..len - 1).map(|_| rng.gen_range(-bound..=bound)).collect();
    let partial: i64 = out.iter().sum();
    out.push(sum - partial);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let shape = GraphShape::default();
        assert_eq!(random_graph(7, &shape), random_graph(7, &shape));
    }

    #[test]
    fn treelike_shape_gives_treelike_graphs() {
        for seed in 0..200 {
            assert!(random_graph(seed, &GraphShape::treelike(10)).is_treelike());
        }
    }

    #[test]
    fn vector_sum_is_exact() {
        let mut r = rng(3);
        for len in 1..6 {
            assert_eq!(random_vector_with_sum(&mut r, len, 5, 7).iter().sum::<i64>(), 7);
        }
    }
}
