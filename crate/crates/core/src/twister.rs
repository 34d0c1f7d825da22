//! Twisters acting on multidegrees through the dual-graph Laplacian, and the
//! leaf-peeling reduction of treelike multidegrees to `0̲`.
//!
//! A twister `O(Σ_v γ_v X_v)` restricted to the special fiber has degree
//! `-(L γ)_w` on `X_w`, where `L` is the Laplacian of the loopless reduction.

use serde::{Deserialize, Serialize};

use crate::graph::{DualGraph, Subcurve};
use crate::stability::{base_multidegree, Basepoint, Multidegree, StabilityError, TauData};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwisterError {
    #[error("graph is not treelike")]
    NotTreelike,
    #[error("multidegree has total {0}, expected 0")]
    NonzeroTotal(i64),
    #[error(transparent)]
    Stability(#[from] StabilityError),
}

/// Coefficients `γ_v`, normalized to vanish at the root vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TwisterVector(pub Vec<i64>);

impl TwisterVector {
    /// Shifts by a constant so that `γ(root) = 0`.
    pub fn normalized(mut self, root: usize) -> Self {
        let shift = self.0[root];
        self.0.iter_mut().for_each(|x| *x -= shift);
        self
    }

    pub fn indicator(graph: &DualGraph, y: Subcurve) -> Self {
        TwisterVector((0..graph.vertex_count()).map(|v| y.contains(v) as i64).collect())
    }
}

/// `L[v][w] = -#edges(v,w)` for `v ≠ w`, `L[v][v]` = non-loop endpoints at `v`.
pub fn laplacian(graph: &DualGraph) -> Vec<Vec<i64>> {
    let nv = graph.vertex_count();
    let mut l = vec![vec![0i64; nv]; nv];
    for &(a, b) in graph.edges() {
        if a != b {
            l[a][b] -= 1;
            l[b][a] -= 1;
            l[a][a] += 1;
            l[b][b] += 1;
        }
    }
    l
}

/// Multidegree of the twister `O(Σ γ_v X_v)` on the fiber: `-L γ`.
pub fn twist_multidegree(graph: &DualGraph, gamma: &TwisterVector) -> Multidegree {
    let l = laplacian(graph);
    Multidegree(l.iter().map(|row| -row.iter().zip(&gamma.0).map(|(a, b)| a * b).sum::<i64>()).collect())
}

/// One leaf removal: the degree at `leaf` is pushed across its last edge by
/// twisting with `coefficient` times the branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelStep {
    pub leaf: String,
    pub branch: Vec<String>,
    pub coefficient: i64,
    /// Multidegree after this step, in vertex order.
    pub degrees: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub root: usize,
    pub gamma: TwisterVector,
    pub trace: Vec<PeelStep>,
}

/// Reduces `m` to `0̲` on a treelike graph, peeling the lowest-indexed leaf
/// first and rooting at the vertex of marking 1.
pub fn reduce_treelike(graph: &DualGraph, m: &Multidegree) -> Result<Reduction, TwisterError> {
    let root = Basepoint::Marking1.resolve(graph)?;
    reduce_treelike_with(graph, m, root, |leaves| leaves[0])
}

/// As [`reduce_treelike`] with an explicit root and leaf-choice rule. `pick`
/// receives the current leaves (never the root) in ascending order and
/// returns the one to peel.
pub fn reduce_treelike_with<F>(
    graph: &DualGraph,
    m: &Multidegree,
    root: usize,
    mut pick: F,
) -> Result<Reduction, TwisterError>
where
    F: FnMut(&[usize]) -> usize,
{
    if !graph.is_treelike() {
        return Err(TwisterError::NotTreelike);
    }
    let m = Multidegree::checked(graph, m.0.clone())?;
    if m.total() != 0 {
        return Err(TwisterError::NonzeroTotal(m.total()));
    }
    let nv = graph.vertex_count();
    let mut remaining = graph.full();
    let mut degrees = m.0;
    let mut gamma = vec![0i64; nv];
    let mut trace = Vec::with_capacity(nv.saturating_sub(1));

    while remaining.len() > 1 {
        let leaves: Vec<usize> = remaining
            .indices()
            .filter(|&v| v != root)
            .filter(|&v| graph.neighbours(v).iter().filter(|&&w| remaining.contains(w)).count() == 1)
            .collect();
        let leaf = pick(&leaves);
        assert!(leaves.contains(&leaf), "pick must return one of the offered leaves");
        let (edge, parent) = graph
            .edges()
            .iter()
            .enumerate()
            .find_map(|(e, &(a, b))| match (a == leaf, b == leaf) {
                (true, false) if remaining.contains(b) => Some((e, b)),
                (false, true) if remaining.contains(a) => Some((e, a)),
                _ => None,
            })
            .expect("a leaf has one remaining neighbour");
        let branch = graph.side_without_edge(edge, leaf);
        let c = degrees[leaf];
        degrees[leaf] -= c;
        degrees[parent] += c;
        for w in branch.indices() {
            gamma[w] += c;
        }
        remaining.0 &= !(1u64 << leaf);
        if c != 0 {
            trace.push(PeelStep {
                leaf: graph.id(leaf).to_string(),
                branch: graph.subcurve_ids(branch),
                coefficient: c,
                degrees: degrees.clone(),
            });
        }
    }
    debug_assert!(degrees.iter().all(|&d| d == 0));
    Ok(Reduction { root, gamma: TwisterVector(gamma).normalized(root), trace })
}

/// Twist coefficient attached to one separating edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchCoefficient {
    pub edge: [String; 2],
    /// Side of the edge away from marking 1.
    pub side: Vec<String>,
    /// Arithmetic genus of `side`.
    pub h: i64,
    /// Markings on `side`.
    pub legs: Vec<u32>,
    pub coefficient: i64,
}

/// For each non-loop edge `e` of a treelike graph, with `Z_e` the side away
/// from marking 1: `c_e = Σ_{legs in Z_e} τ_i - k · deg ω|_{Z_e}`.
pub fn branch_coefficients(graph: &DualGraph, t: &TauData) -> Result<Vec<BranchCoefficient>, TwisterError> {
    if !graph.is_treelike() {
        return Err(TwisterError::NotTreelike);
    }
    t.check_theta(graph.genus(), graph.n())?;
    let root = Basepoint::Marking1.resolve(graph)?;
    Ok(graph
        .non_loop_edges()
        .map(|e| {
            let (a, b) = graph.edges()[e];
            let far = if graph.side_without_edge(e, a).contains(root) { b } else { a };
            let z = graph.side_without_edge(e, far);
            let legs = graph.legs_in(z);
            BranchCoefficient {
                edge: [graph.id(a).to_string(), graph.id(b).to_string()],
                side: graph.subcurve_ids(z),
                h: graph.subcurve_genus(z),
                coefficient: t.legs_sum(&legs) - t.k * graph.deg_omega_unchecked(z),
                legs,
            }
        })
        .collect())
}

/// Fiber multidegree of the twisted bundle `L(τ, k)` on a treelike curve:
/// `m₀ + Σ_e c_e · twist(1_{Z_e})`. Always `0̲`.
pub fn boundary_multidegree_lk(graph: &DualGraph, t: &TauData) -> Result<Multidegree, TwisterError> {
    let coefficients = branch_coefficients(graph, t)?;
    let mut m = base_multidegree(graph, t)?;
    for bc in &coefficients {
        let z = graph.subcurve(&bc.side).expect("ids come from the graph");
        let twist = twist_multidegree(graph, &TwisterVector::indicator(graph, z));
        for (d, w) in m.0.iter_mut().zip(twist.0) {
            *d += bc.coefficient * w;
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, GraphShape};
    use crate::graph::fixtures::*;
    use crate::rational::Q;
    use crate::stability::{enumerate_stable, is_balanced, Polarization, StabilityMode};
    use crate::Execution;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    /// Solves `L γ = m` with `γ(root) = 0` by exact elimination on the reduced
    /// Laplacian; `None` if the solution is not integral.
    fn lattice_solve(graph: &DualGraph, m: &[i64], root: usize) -> Option<Vec<i64>> {
        let l = laplacian(graph);
        let idx: Vec<usize> = (0..graph.vertex_count()).filter(|&v| v != root).collect();
        let n = idx.len();
        let mut a: Vec<Vec<Q>> = idx
            .iter()
            .map(|&r| {
                let mut row: Vec<Q> = idx.iter().map(|&c| Q::int(l[r][c])).collect();
                row.push(Q::int(m[r]));
                row
            })
            .collect();
        for col in 0..n {
            let p = (col..n).find(|&r| !a[r][col].is_zero())?;
            a.swap(col, p);
            let pivot = a[col][col].clone();
            for x in a[col].iter_mut() {
                *x = &*x / &pivot;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in 0..=n {
                        let sub = &f * &a[col][c];
                        a[r][c] -= sub;
                    }
                }
            }
        }
        let mut gamma = vec![0i64; graph.vertex_count()];
        for (i, &v) in idx.iter().enumerate() {
            gamma[v] = a[i][n].to_i64()?;
        }
        Some(gamma)
    }

    fn path() -> DualGraph {
        graph(2, &[("v1", 1, &[]), ("v2", 0, &[2]), ("v3", 1, &[1])], &[("v1", "v2"), ("v2", "v3")])
    }

    #[test]
    fn laplacian_ignores_loops() {
        let g = graph(1, &[("a", 0, &[1]), ("b", 1, &[])], &[("a", "b"), ("a", "a")]);
        assert_eq!(laplacian(&g), vec![vec![1, -1], vec![-1, 1]]);
    }

    #[test]
    fn twist_examples() {
        let t = two_vertex_tree();
        assert_eq!(twist_multidegree(&t, &TwisterVector(vec![0, 1])).0, vec![1, -1]);
        assert!(twist_multidegree(&t, &TwisterVector(vec![1, 1])).is_zero());
        assert_eq!(twist_multidegree(&banana(), &TwisterVector(vec![0, 1])).0, vec![2, -2]);
    }

    #[test]
    fn reduce_path() {
        let g = path();
        let r = reduce_treelike(&g, &Multidegree(vec![2, -3, 1])).unwrap();
        assert_eq!(r.gamma.0, vec![1, -1, 0]);
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.trace[0].degrees, vec![0, -1, 1]);
        assert_eq!(r.trace[1].degrees, vec![0, 0, 0]);
        assert_eq!((r.trace[0].leaf.as_str(), r.trace[0].coefficient), ("v1", 2));
        assert_eq!(r.trace[1].branch, vec!["v1", "v2"]);
        let twisted = twist_multidegree(&g, &r.gamma);
        assert!(twisted.0.iter().zip([2, -3, 1]).all(|(a, b)| a + b == 0));
    }

    #[test]
    fn reduce_zero_is_trivial() {
        let r = reduce_treelike(&path(), &Multidegree(vec![0, 0, 0])).unwrap();
        assert_eq!(r.gamma.0, vec![0, 0, 0]);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn reduce_star() {
        let g = graph(
            1,
            &[("a", 1, &[]), ("b", 1, &[]), ("c", 0, &[1]), ("d", 1, &[])],
            &[("c", "a"), ("c", "b"), ("c", "d")],
        );
        let r = reduce_treelike(&g, &Multidegree(vec![1, 1, 0, -2])).unwrap();
        assert_eq!(r.gamma.0, vec![1, 1, 0, -2]);
        assert_eq!(lattice_solve(&g, &[1, 1, 0, -2], 2).unwrap(), r.gamma.0);
    }

    #[test]
    fn reduce_errors() {
        assert_eq!(reduce_treelike(&banana(), &Multidegree(vec![0, 0])), Err(TwisterError::NotTreelike));
        assert_eq!(reduce_treelike(&path(), &Multidegree(vec![1, 0, 0])), Err(TwisterError::NonzeroTotal(1)));
    }

    #[test]
    fn branch_coefficient_examples() {
        let t = two_vertex_tree();
        let c = branch_coefficients(&t, &TauData::new(vec![5, -3], 1)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].coefficient, -4);
        assert_eq!((c[0].h, c[0].legs.clone()), (1, vec![2]));
        assert_eq!(c[0].coefficient, (1 - 2 * c[0].h) - 3);

        let c = branch_coefficients(&t, &TauData::new(vec![1, -1], 0)).unwrap();
        assert_eq!(c[0].coefficient, -1);

        assert!(boundary_multidegree_lk(&t, &TauData::new(vec![5, -3], 1)).unwrap().is_zero());
        assert_eq!(branch_coefficients(&banana(), &TauData::new(vec![0, 0], 0)), Err(TwisterError::NotTreelike));
        assert!(matches!(
            branch_coefficients(&t, &TauData::new(vec![1, 1], 0)),
            Err(TwisterError::Stability(StabilityError::TauSum { .. }))
        ));
    }

    #[test]
    fn balanced_treelike_needs_no_twist() {
        let g = path();
        let t = TauData::new(vec![0, 0], 0);
        assert!(is_balanced(&g, &t).unwrap().pass);
        assert!(base_multidegree(&g, &t).unwrap().is_zero());
        assert!(branch_coefficients(&g, &t).unwrap().iter().all(|c| c.coefficient == 0));
    }

    fn random_setup(seed: u64, max_vertices: usize) -> (DualGraph, Multidegree) {
        let g = corpus::random_graph(seed, &GraphShape::treelike(max_vertices));
        let mut rng = corpus::rng(seed.wrapping_add(1));
        let m = Multidegree(corpus::random_vector_with_sum(&mut rng, g.vertex_count(), 6, 0));
        (g, m)
    }

    proptest! {
        #[test]
        fn reduction_matches_lattice_solve(seed in any::<u64>()) {
            let (g, m) = random_setup(seed, 12);
            let r = reduce_treelike(&g, &m).unwrap();
            let oracle = lattice_solve(&g, &m.0, r.root).expect("treelike class group is trivial");
            prop_assert_eq!(&r.gamma.0, &oracle);
            // each peel coefficient is the original degree summed over its branch
            for step in &r.trace {
                let b = g.subcurve(&step.branch).unwrap();
                prop_assert_eq!(step.coefficient, m.on(b));
            }
        }

        #[test]
        fn reduction_is_leaf_order_independent(seed in any::<u64>()) {
            let (g, m) = random_setup(seed, 12);
            let reference = reduce_treelike(&g, &m).unwrap();
            let mut rng = corpus::rng(seed ^ 0xabcdef);
            let other = reduce_treelike_with(&g, &m, reference.root, |leaves| *leaves.choose(&mut rng).unwrap()).unwrap();
            prop_assert_eq!(reference.gamma, other.gamma);
        }

        #[test]
        fn twist_is_shift_invariant(seed in any::<u64>(), shift in -5i64..5) {
            let g = corpus::random_graph(seed, &GraphShape::general(6));
            let mut rng = corpus::rng(seed);
            let gamma: Vec<i64> = (0..g.vertex_count()).map(|_| rng.gen_range(-3..=3)).collect();
            let shifted: Vec<i64> = gamma.iter().map(|x| x + shift).collect();
            let a = twist_multidegree(&g, &TwisterVector(gamma));
            prop_assert_eq!(a.total(), 0);
            prop_assert_eq!(a, twist_multidegree(&g, &TwisterVector(shifted)));
        }

        #[test]
        fn coefficients_match_closed_form_and_kill_the_multidegree(seed in any::<u64>()) {
            let g = corpus::random_graph(seed, &GraphShape::treelike(8));
            let mut rng = corpus::rng(seed ^ 7);
            let k = rng.gen_range(-2..=2);
            let tau = corpus::random_vector_with_sum(&mut rng, g.n() as usize, 5, k * (2 * g.genus() as i64 - 2));
            let t = TauData::new(tau, k);
            let coefficients = branch_coefficients(&g, &t).unwrap();
            for c in &coefficients {
                let closed = k * (1 - 2 * c.h) + c.legs.iter().map(|&i| t.tau[i as usize - 1]).sum::<i64>();
                prop_assert_eq!(c.coefficient, closed);
            }
            prop_assert!(boundary_multidegree_lk(&g, &t).unwrap().is_zero());
            // the peeling twister of m₀ is Σ c_e 1_{Z_e}
            let m0 = base_multidegree(&g, &t).unwrap();
            let r = reduce_treelike(&g, &m0).unwrap();
            let mut expected = vec![0i64; g.vertex_count()];
            for c in &coefficients {
                for v in g.subcurve(&c.side).unwrap().indices() {
                    expected[v] += c.coefficient;
                }
            }
            prop_assert_eq!(r.gamma.0, expected);
        }

        #[test]
        fn q_stable_orbit_member_is_zero(seed in any::<u64>()) {
            let g = corpus::random_graph(seed, &GraphShape::treelike(7));
            let mut rng = corpus::rng(seed ^ 11);
            let k = rng.gen_range(-2..=2);
            let tau = corpus::random_vector_with_sum(&mut rng, g.n() as usize, 5, k * (2 * g.genus() as i64 - 2));
            let m0 = base_multidegree(&g, &TauData::new(tau, k)).unwrap();
            let stable = enumerate_stable(&g, &Polarization::CanonicalZero, StabilityMode::Qstable, Basepoint::Marking1, Execution::Sequential).unwrap();
            // every q-stable multidegree lies in the orbit of m₀ (treelike class group is trivial)
            for s in &stable {
                let diff = Multidegree(m0.0.iter().zip(&s.0).map(|(a, b)| a - b).collect());
                prop_assert!(reduce_treelike(&g, &diff).is_ok());
            }
            prop_assert_eq!(stable, vec![Multidegree::zero(&g)]);
        }

        #[test]
        fn balanced_forces_zero_branch_sums(seed in any::<u64>()) {
            let g = corpus::random_graph(seed, &GraphShape::treelike(8));
            let t = TauData::new(vec![0; g.n() as usize], 0);
            let mut rng = corpus::rng(seed);
            let k = rng.gen_range(-1..=1);
            let tau = corpus::random_vector_with_sum(&mut rng, g.n() as usize, 2, k * (2 * g.genus() as i64 - 2));
            for t in [t, TauData::new(tau, k)] {
                if is_balanced(&g, &t).unwrap().pass {
                    prop_assert!(branch_coefficients(&g, &t).unwrap().iter().all(|c| c.coefficient == 0));
                }
            }
        }
    }
}
