//! Stable marked dual graphs.
//!
//! A [`DualGraph`] is the combinatorial type of a stable marked curve: one
//! vertex per irreducible component (weighted by its geometric genus), one
//! edge per node, and legs for the marked points. Loops are kept in the data
//! model because they count towards genus and valence, but they never count
//! towards `κ_Y`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest vertex count a graph may have; vertex sets are `u64` bitmasks.
pub const MAX_VERTICES: usize = 64;

/// Raw graph as read from JSON, before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: i64,
    pub vertices: Vec<VertexSpec>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: String,
    pub genus: i64,
    #[serde(default)]
    pub legs: Vec<i64>,
}

/// One violated graph invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyGraph,
    NegativeMarkingCount { n: i64 },
    TooManyVertices { count: usize, max: usize },
    DuplicateVertex { id: String },
    NegativeGenus { id: String, genus: i64 },
    UnknownEdgeEndpoint { edge: usize, id: String },
    LegOutOfRange { id: String, leg: i64 },
    LegRepeated { leg: i64 },
    LegMissing { leg: i64 },
    Disconnected { components: usize },
    /// `2g(v) - 2 + val(v) + #legs(v) <= 0`.
    UnstableVertex { id: String, value: i64 },
    /// `2g - 2 + n <= 0`.
    UnstableGraph { value: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no vertices"),
            Violation::NegativeMarkingCount { n } => write!(f, "negative marking count {n}"),
            Violation::TooManyVertices { count, max } => {
                write!(f, "{count} vertices exceeds the limit of {max}")
            }
            Violation::DuplicateVertex { id } => write!(f, "duplicate vertex id {id:?}"),
            Violation::NegativeGenus { id, genus } => {
                write!(f, "vertex {id:?} has negative genus {genus}")
            }
            Violation::UnknownEdgeEndpoint { edge, id } => {
                write!(f, "edge #{edge} references unknown vertex {id:?}")
            }
            Violation::LegOutOfRange { id, leg } => {
                write!(f, "vertex {id:?} carries leg {leg} outside 1..=n")
            }
            Violation::LegRepeated { leg } => write!(f, "leg {leg} is used more than once"),
            Violation::LegMissing { leg } => write!(f, "leg {leg} is not attached to any vertex"),
            Violation::Disconnected { components } => {
                write!(f, "graph is disconnected ({components} components)")
            }
            Violation::UnstableVertex { id, value } => {
                write!(f, "vertex {id:?} is unstable: 2g(v)-2+val(v)+#legs(v) = {value}")
            }
            Violation::UnstableGraph { value } => write!(f, "2g-2+n = {value} is not positive"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("subcurve must be a nonempty proper subset of the vertices")]
    EmptyOrFull,
    #[error("subcurve must be nonempty")]
    Empty,
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("malformed graph JSON: {0}")]
    Json(String),
}

/// A component of the curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub genus: u32,
    pub legs: BTreeSet<u32>,
}

/// A set of vertices, stored as a bitmask over the graph's sorted vertex order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subcurve(pub u64);

impl Subcurve {
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        Subcurve(indices.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    pub fn singleton(i: usize) -> Self {
        Subcurve(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

/// Validated stable marked dual graph. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    n: u32,
    vertices: Vec<Vertex>,
    /// Endpoint indices with `a <= b`, sorted.
    edges: Vec<(usize, usize)>,
    index: BTreeMap<String, usize>,
    /// `leg_vertex[i - 1]` is the vertex carrying marking `i`.
    leg_vertex: Vec<usize>,
    genus: u32,
}

/// Result of [`DualGraph::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub treelike: bool,
    pub compact_type: bool,
    pub banana_like: bool,
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        serde_json::from_str(text).map_err(|e| GraphError::Json(e.to_string()))
    }

    /// Every violated invariant; empty iff the graph is a valid stable marked dual graph.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.vertices.is_empty() {
            out.push(Violation::EmptyGraph);
        }
        if self.n < 0 {
            out.push(Violation::NegativeMarkingCount { n: self.n });
        }
        if self.vertices.len() > MAX_VERTICES {
            out.push(Violation::TooManyVertices { count: self.vertices.len(), max: MAX_VERTICES });
        }
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.id.as_str(), i).is_some() {
                out.push(Violation::DuplicateVertex { id: v.id.clone() });
            }
            if v.genus < 0 {
                out.push(Violation::NegativeGenus { id: v.id.clone(), genus: v.genus });
            }
        }

        let mut endpoints: Vec<Option<(usize, usize)>> = Vec::with_capacity(self.edges.len());
        for (e, [a, b]) in self.edges.iter().enumerate() {
            let ia = index.get(a.as_str()).copied();
            let ib = index.get(b.as_str()).copied();
            if ia.is_none() {
                out.push(Violation::UnknownEdgeEndpoint { edge: e, id: a.clone() });
            }
            if ib.is_none() && b != a {
                out.push(Violation::UnknownEdgeEndpoint { edge: e, id: b.clone() });
            }
            endpoints.push(ia.zip(ib));
        }

        let mut seen: BTreeMap<i64, usize> = BTreeMap::new();
        for v in &self.vertices {
            for &leg in &v.legs {
                if leg < 1 || leg > self.n {
                    out.push(Violation::LegOutOfRange { id: v.id.clone(), leg });
                }
                *seen.entry(leg).or_default() += 1;
            }
        }
        for (&leg, &count) in &seen {
            if count > 1 {
                out.push(Violation::LegRepeated { leg });
            }
        }
        for leg in 1..=self.n.max(0) {
            if !seen.contains_key(&leg) {
                out.push(Violation::LegMissing { leg });
            }
        }

        let nv = self.vertices.len();
        if nv > 0 {
            let mut parent: Vec<usize> = (0..nv).collect();
            fn find(p: &mut [usize], mut x: usize) -> usize {
                while p[x] != x {
                    p[x] = p[p[x]];
                    x = p[x];
                }
                x
            }
            for &(a, b) in endpoints.iter().flatten() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
            let components = (0..nv).filter(|&i| find(&mut parent, i) == i).count();
            if components > 1 {
                out.push(Violation::Disconnected { components });
            }
        }

        let mut val = vec![0i64; nv];
        for &(a, b) in endpoints.iter().flatten() {
            val[a] += 1;
            val[b] += 1;
        }
        for (i, v) in self.vertices.iter().enumerate() {
            let value = 2 * v.genus - 2 + val[i] + v.legs.len() as i64;
            if value <= 0 {
                out.push(Violation::UnstableVertex { id: v.id.clone(), value });
            }
        }

        let known_edges = endpoints.iter().flatten().count() as i64;
        let g = self.vertices.iter().map(|v| v.genus.max(0)).sum::<i64>() + known_edges - nv as i64 + 1;
        let value = 2 * g - 2 + self.n;
        if nv > 0 && value <= 0 {
            out.push(Violation::UnstableGraph { value });
        }
        out
    }
}

impl TryFrom<GraphSpec> for DualGraph {
    type Error = GraphError;

    fn try_from(spec: GraphSpec) -> Result<Self, Self::Error> {
        DualGraph::from_spec(&spec)
    }
}

impl DualGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self, GraphError> {
        let violations = spec.validate();
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        let mut vertices: Vec<Vertex> = spec
            .vertices
            .iter()
            .map(|v| Vertex {
                id: v.id.clone(),
                genus: v.genus as u32,
                legs: v.legs.iter().map(|&l| l as u32).collect(),
            })
            .collect();
        vertices.sort_by(|a, b| a.id.cmp(&b.id));
        let index: BTreeMap<String, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.id.clone(), i)).collect();
        let mut edges: Vec<(usize, usize)> = spec
            .edges
            .iter()
            .map(|[a, b]| {
                let (ia, ib) = (index[a], index[b]);
                (ia.min(ib), ia.max(ib))
            })
            .collect();
        edges.sort_unstable();
        let n = spec.n as u32;
        let mut leg_vertex = vec![0usize; n as usize];
        for (i, v) in vertices.iter().enumerate() {
            for &leg in &v.legs {
                leg_vertex[leg as usize - 1] = i;
            }
        }
        let genus = vertices.iter().map(|v| v.genus).sum::<u32>() + edges.len() as u32 + 1
            - vertices.len() as u32;
        Ok(DualGraph { n, vertices, edges, index, leg_vertex, genus })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        Self::from_spec(&GraphSpec::from_json(text)?)
    }

    /// Back to the raw JSON form, with vertices and edges in sorted order.
    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            n: self.n as i64,
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec {
                    id: v.id.clone(),
                    genus: v.genus as i64,
                    legs: v.legs.iter().map(|&l| l as i64).collect(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| [self.vertices[a].id.clone(), self.vertices[b].id.clone()])
                .collect(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Total arithmetic genus `Σ g(v) + b₁(Γ)`.
    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn id(&self, i: usize) -> &str {
        &self.vertices[i].id
    }

    pub fn index_of(&self, id: &str) -> Result<usize, GraphError> {
        self.index.get(id).copied().ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    /// Vertex carrying marking `i` (1-based).
    pub fn vertex_of_marking(&self, i: u32) -> Option<usize> {
        if i == 0 {
            return None;
        }
        self.leg_vertex.get(i as usize - 1).copied()
    }

    pub fn full(&self) -> Subcurve {
        if self.vertices.len() == 64 {
            Subcurve(u64::MAX)
        } else {
            Subcurve((1u64 << self.vertices.len()) - 1)
        }
    }

    pub fn complement(&self, y: Subcurve) -> Subcurve {
        Subcurve(self.full().0 & !y.0)
    }

    pub fn subcurve<S: AsRef<str>>(&self, ids: &[S]) -> Result<Subcurve, GraphError> {
        let mut mask = 0u64;
        for id in ids {
            mask |= 1u64 << self.index_of(id.as_ref())?;
        }
        Ok(Subcurve(mask))
    }

    pub fn subcurve_ids(&self, y: Subcurve) -> Vec<String> {
        y.indices().map(|i| self.vertices[i].id.clone()).collect()
    }

    /// Edge endpoints at `v`; a loop contributes 2.
    pub fn valence(&self, v: usize) -> u32 {
        self.edges.iter().map(|&(a, b)| (a == v) as u32 + (b == v) as u32).sum()
    }

    pub fn loops_at(&self, v: usize) -> u32 {
        self.edges.iter().filter(|&&(a, b)| a == v && b == v).count() as u32
    }

    /// `ĝ(v) = g(v) + #loops at v`.
    pub fn hat_genus(&self, v: usize) -> u32 {
        self.vertices[v].genus + self.loops_at(v)
    }

    /// Markings carried by vertices of `y`, ascending.
    pub fn legs_in(&self, y: Subcurve) -> Vec<u32> {
        let mut legs: Vec<u32> = y.indices().flat_map(|i| self.vertices[i].legs.iter().copied()).collect();
        legs.sort_unstable();
        legs
    }

    pub(crate) fn kappa_unchecked(&self, y: Subcurve) -> u32 {
        self.edges.iter().filter(|&&(a, b)| y.contains(a) != y.contains(b)).count() as u32
    }

    pub(crate) fn deg_omega_unchecked(&self, y: Subcurve) -> i64 {
        let base: i64 = y.indices().map(|i| 2 * self.vertices[i].genus as i64 - 2).sum();
        let inside = self.edges.iter().filter(|&&(a, b)| y.contains(a) && y.contains(b)).count() as i64;
        base + 2 * inside + self.kappa_unchecked(y) as i64
    }

    /// `κ_Y`: edges with exactly one endpoint in `y`.
    pub fn kappa(&self, y: Subcurve) -> Result<u32, GraphError> {
        if y.is_empty() || y == self.full() || y.0 & !self.full().0 != 0 {
            return Err(GraphError::EmptyOrFull);
        }
        Ok(self.kappa_unchecked(y))
    }

    /// Degree of the dualizing sheaf of the whole curve restricted to `y`.
    pub fn deg_omega(&self, y: Subcurve) -> Result<i64, GraphError> {
        if y.is_empty() || y.0 & !self.full().0 != 0 {
            return Err(GraphError::Empty);
        }
        Ok(self.deg_omega_unchecked(y))
    }

    pub fn is_connected(&self, y: Subcurve) -> bool {
        let Some(start) = y.indices().next() else {
            return false;
        };
        let mut seen = Subcurve::singleton(start);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(a, b) in &self.edges {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if y.contains(w) && !seen.contains(w) {
                    seen.0 |= 1 << w;
                    queue.push_back(w);
                }
            }
        }
        seen == y
    }

    /// Arithmetic genus of a connected subcurve: `Σ g(v) + b₁` of the induced subgraph.
    pub fn subcurve_genus(&self, y: Subcurve) -> i64 {
        let inside = self.edges.iter().filter(|&&(a, b)| y.contains(a) && y.contains(b)).count() as i64;
        y.indices().map(|i| self.vertices[i].genus as i64).sum::<i64>() + inside - y.len() as i64 + 1
    }

    pub fn classify(&self) -> Classification {
        let non_loop: Vec<(usize, usize)> = self.edges.iter().copied().filter(|&(a, b)| a != b).collect();
        let distinct: BTreeSet<(usize, usize)> = non_loop.iter().copied().collect();
        // connected + |E| = |V| - 1 with no repeated pairs means a tree
        let treelike = distinct.len() == non_loop.len() && non_loop.len() + 1 == self.vertices.len();
        let loops = self.edges.len() - non_loop.len();
        Classification {
            treelike,
            compact_type: treelike && loops == 0,
            banana_like: self.vertices.len() == 2 && loops == 0 && non_loop.len() >= 2,
        }
    }

    pub fn is_treelike(&self) -> bool {
        self.classify().treelike
    }

    /// Indices of non-loop edges.
    pub fn non_loop_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().enumerate().filter(|(_, &(a, b))| a != b).map(|(e, _)| e)
    }

    /// Vertices reachable from `from` once edge `edge` is deleted.
    pub fn side_without_edge(&self, edge: usize, from: usize) -> Subcurve {
        let mut seen = Subcurve::singleton(from);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            for (e, &(a, b)) in self.edges.iter().enumerate() {
                if e == edge {
                    continue;
                }
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen.contains(w) {
                    seen.0 |= 1 << w;
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Neighbours across non-loop edges, with multiplicity.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (a == v, b == v) {
                (true, false) => Some(b),
                (false, true) => Some(a),
                _ => None,
            })
            .collect()
    }
}

impl GraphSpec {
    /// Spec from `(id, genus, legs)` triples and id pairs.
    pub fn from_parts(n: i64, vertices: &[(&str, i64, &[i64])], edges: &[(&str, &str)]) -> GraphSpec {
        GraphSpec {
            n,
            vertices: vertices
                .iter()
                .map(|&(id, genus, legs)| VertexSpec { id: id.into(), genus, legs: legs.to_vec() })
                .collect(),
            edges: edges.iter().map(|&(a, b)| [a.to_string(), b.to_string()]).collect(),
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn graph(n: i64, vertices: &[(&str, i64, &[i64])], edges: &[(&str, &str)]) -> DualGraph {
        DualGraph::from_spec(&spec(n, vertices, edges)).unwrap()
    }

    pub fn spec(n: i64, vertices: &[(&str, i64, &[i64])], edges: &[(&str, &str)]) -> GraphSpec {
        GraphSpec::from_parts(n, vertices, edges)
    }

    /// v1(g=0, legs {1,2}) and v2(g=1) joined by two edges.
    pub fn banana() -> DualGraph {
        graph(2, &[("v1", 0, &[1, 2]), ("v2", 1, &[])], &[("v1", "v2"), ("v1", "v2")])
    }

    /// Two genus-1 vertices, one edge, leg 1 on v1 and leg 2 on v2.
    pub fn two_vertex_tree() -> DualGraph {
        graph(2, &[("v1", 1, &[1]), ("v2", 1, &[2])], &[("v1", "v2")])
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::corpus;
    use proptest::prelude::*;

    #[test]
    fn two_genus_one_vertices_give_genus_two() {
        let g = two_vertex_tree();
        assert_eq!(g.genus(), 2);
    }

    #[test]
    fn lone_rational_vertex_is_unstable() {
        let v = spec(0, &[("v", 0, &[])], &[]).validate();
        assert!(v.contains(&Violation::UnstableVertex { id: "v".into(), value: -2 }));
        assert!(v.iter().any(|x| matches!(x, Violation::UnstableGraph { .. })));
    }

    #[test]
    fn banana_is_valid_genus_two() {
        assert_eq!(banana().genus(), 2);
    }

    #[test]
    fn legs_must_partition_markings() {
        let v = spec(3, &[("a", 1, &[1, 1]), ("b", 1, &[4])], &[("a", "b")]).validate();
        assert!(v.contains(&Violation::LegRepeated { leg: 1 }));
        assert!(v.contains(&Violation::LegMissing { leg: 2 }));
        assert!(v.contains(&Violation::LegMissing { leg: 3 }));
        assert!(v.contains(&Violation::LegOutOfRange { id: "b".into(), leg: 4 }));
    }

    #[test]
    fn disconnected_and_unknown_endpoints() {
        let v = spec(0, &[("a", 2, &[]), ("b", 2, &[])], &[("a", "zz")]).validate();
        assert!(v.contains(&Violation::UnknownEdgeEndpoint { edge: 0, id: "zz".into() }));
        assert!(v.contains(&Violation::Disconnected { components: 2 }));
        assert!(matches!(DualGraph::from_spec(&spec(0, &[("a", 2, &[]), ("a", 2, &[])], &[])),
            Err(GraphError::Invalid(v)) if v.contains(&Violation::DuplicateVertex { id: "a".into() })));
    }

    #[test]
    fn kappa_examples() {
        let b = banana();
        assert_eq!(b.kappa(b.subcurve(&["v1"]).unwrap()).unwrap(), 2);

        let path = graph(3, &[("a", 1, &[1]), ("b", 0, &[2]), ("c", 1, &[3])], &[("a", "b"), ("b", "c")]);
        assert_eq!(path.kappa(path.subcurve(&["b"]).unwrap()).unwrap(), 2);

        let tree_loop = graph(1, &[("a", 0, &[1]), ("b", 0, &[])], &[("a", "b"), ("b", "b"), ("a", "a")]);
        assert_eq!(tree_loop.kappa(tree_loop.subcurve(&["b"]).unwrap()).unwrap(), 1);

        assert_eq!(b.kappa(Subcurve(0)), Err(GraphError::EmptyOrFull));
        assert_eq!(b.kappa(b.full()), Err(GraphError::EmptyOrFull));
    }

    #[test]
    fn deg_omega_examples() {
        let b = banana();
        assert_eq!(b.deg_omega(b.subcurve(&["v1"]).unwrap()).unwrap(), 0);
        assert_eq!(b.deg_omega(b.full()).unwrap(), 2);
        let t = two_vertex_tree();
        assert_eq!(t.deg_omega(t.subcurve(&["v1"]).unwrap()).unwrap(), 1);
        assert_eq!(t.deg_omega(Subcurve(0)), Err(GraphError::Empty));
    }

    #[test]
    fn classify_examples() {
        let tree_loop = graph(1, &[("a", 0, &[1]), ("b", 0, &[])], &[("a", "b"), ("b", "b"), ("a", "a")]);
        let c = tree_loop.classify();
        assert!(c.treelike && !c.compact_type && !c.banana_like);

        let c = banana().classify();
        assert!(!c.treelike && c.banana_like);

        let single = graph(1, &[("x", 2, &[1])], &[]);
        let c = single.classify();
        assert!(c.treelike && c.compact_type && !c.banana_like);
    }

    #[test]
    fn hat_genus_counts_loops() {
        let g = graph(1, &[("a", 1, &[1])], &[("a", "a"), ("a", "a")]);
        assert_eq!(g.hat_genus(0), 3);
        assert_eq!(g.valence(0), 4);
        assert_eq!(g.genus(), 3);
    }

    #[test]
    fn json_round_trip_sorts_vertices() {
        let text = r#"{"n":2,"vertices":[{"id":"v2","genus":1,"legs":[]},{"id":"v1","genus":0,"legs":[1,2]}],"edges":[["v2","v1"],["v1","v2"]]}"#;
        let g = DualGraph::from_json(text).unwrap();
        assert_eq!(g, banana());
        assert_eq!(g.to_spec().vertices[0].id, "v1");
        assert!(matches!(DualGraph::from_json("{"), Err(GraphError::Json(_))));
    }

    proptest! {
        #[test]
        fn kappa_symmetric_and_omega_identities(seed in any::<u64>()) {
            let g = corpus::random_graph(seed, &corpus::GraphShape::default());
            let full = g.full();
            prop_assert_eq!(g.deg_omega(full).unwrap(), 2 * g.genus() as i64 - 2);
            let total: i64 = (0..g.vertex_count()).map(|v| g.deg_omega(Subcurve::singleton(v)).unwrap()).sum();
            prop_assert_eq!(total, 2 * g.genus() as i64 - 2);
            for mask in 1..full.0 {
                let y = Subcurve(mask);
                prop_assert_eq!(g.kappa(y).unwrap(), g.kappa(g.complement(y)).unwrap());
                if g.is_connected(y) {
                    prop_assert_eq!(
                        g.deg_omega(y).unwrap(),
                        2 * g.subcurve_genus(y) - 2 + g.kappa(y).unwrap() as i64
                    );
                }
            }
        }

        #[test]
        fn random_graphs_satisfy_genus_identity(seed in any::<u64>()) {
            let g = corpus::random_graph(seed, &corpus::GraphShape::default());
            prop_assert!(g.to_spec().validate().is_empty());
            let b1 = g.edges().len() as i64 - g.vertex_count() as i64 + 1;
            let sum: i64 = g.vertices().iter().map(|v| v.genus as i64).sum();
            prop_assert_eq!(g.genus() as i64, sum + b1);
        }
    }
}
