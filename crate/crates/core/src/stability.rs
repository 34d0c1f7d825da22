//! Semistability, stability and q-stability of multidegrees, the
//! `(τ, k)`-balanced condition, and exhaustive enumeration of stable
//! multidegrees.
//!
//! Only line bundles are modeled, so a sheaf on a fiber is its multidegree and
//! `deg_Y L` is the sum of the entries over `Y`. Every comparison is exact.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution};
use crate::graph::{DualGraph, GraphError, Subcurve};
use crate::rational::Q;

/// Subset scans refuse graphs larger than this.
pub const MAX_SCAN_VERTICES: usize = 24;
/// [`enumerate_stable`] tabulates bounds for all `2^V` subsets.
pub const MAX_ENUMERATION_VERTICES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StabilityError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("multidegree has total {found}, polarization expects {expected}")]
    DegreeMismatch { expected: i64, found: i64 },
    #[error("tau sums to {found}, expected {expected}")]
    TauSum { expected: i64, found: i64 },
    #[error("tau has {found} entries, graph has {expected} markings")]
    TauLength { expected: usize, found: usize },
    #[error("multidegree must have exactly one entry per vertex ({expected}), got {found}")]
    MultidegreeShape { expected: usize, found: usize },
    #[error("no vertex carries marking 1 and no basepoint was given")]
    MissingBasepoint,
    #[error("invalid polarization: {0}")]
    Polarization(String),
    #[error("graph has {vertices} vertices; at most {max} supported here")]
    TooLarge { vertices: usize, max: usize },
}

/// Integer degree per vertex, in the graph's sorted vertex order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multidegree(pub Vec<i64>);

impl Multidegree {
    pub fn zero(graph: &DualGraph) -> Self {
        Multidegree(vec![0; graph.vertex_count()])
    }

    pub fn from_map(graph: &DualGraph, map: &BTreeMap<String, i64>) -> Result<Self, StabilityError> {
        if map.len() != graph.vertex_count() {
            return Err(StabilityError::MultidegreeShape { expected: graph.vertex_count(), found: map.len() });
        }
        let mut out = vec![0; graph.vertex_count()];
        for (id, &d) in map {
            out[graph.index_of(id)?] = d;
        }
        Ok(Multidegree(out))
    }

    pub fn checked(graph: &DualGraph, degrees: Vec<i64>) -> Result<Self, StabilityError> {
        if degrees.len() != graph.vertex_count() {
            return Err(StabilityError::MultidegreeShape { expected: graph.vertex_count(), found: degrees.len() });
        }
        Ok(Multidegree(degrees))
    }

    pub fn to_map(&self, graph: &DualGraph) -> BTreeMap<String, i64> {
        self.0.iter().enumerate().map(|(i, &d)| (graph.id(i).to_string(), d)).collect()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn on(&self, y: Subcurve) -> i64 {
        y.indices().map(|i| self.0[i]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Polarization data determining the thresholds `q_Y - κ_Y/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Polarization {
    /// `ω⁻¹ ⊕ O`: `q_Y = 0`, degree 0.
    CanonicalZero,
    /// `O`: `q_Y = deg ω|_Y / 2`, degree `g - 1`.
    TrivialGm1,
    /// `q_Y = Σ_{v ∈ Y} q_v + deg ω|_Y / 2` where `q_v = deg P|_{X_v} / r`.
    Custom { per_vertex_q: BTreeMap<String, Q>, target_degree: i64 },
}

impl Polarization {
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "canonical0" | "canonical-zero" => Some(Polarization::CanonicalZero),
            "trivial-gm1" | "trivial_gm1" => Some(Polarization::TrivialGm1),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Polarization::CanonicalZero => "canonical0",
            Polarization::TrivialGm1 => "trivial-gm1",
            Polarization::Custom { .. } => "custom",
        }
    }

    pub fn target_degree(&self, graph: &DualGraph) -> i64 {
        match self {
            Polarization::CanonicalZero => 0,
            Polarization::TrivialGm1 => graph.genus() as i64 - 1,
            Polarization::Custom { target_degree, .. } => *target_degree,
        }
    }

    /// Checks that custom data covers every vertex and that `q_X = d`.
    pub fn validate(&self, graph: &DualGraph) -> Result<(), StabilityError> {
        let Polarization::Custom { per_vertex_q, target_degree } = self else {
            return Ok(());
        };
        for id in per_vertex_q.keys() {
            graph.index_of(id)?;
        }
        if per_vertex_q.len() != graph.vertex_count() {
            return Err(StabilityError::Polarization("per-vertex data must cover every vertex".into()));
        }
        let q_total: Q = per_vertex_q.values().cloned().sum::<Q>() + Q::int(graph.genus() as i64 - 1);
        if q_total != Q::int(*target_degree) {
            return Err(StabilityError::Polarization(format!(
                "q over the whole curve is {q_total}, target degree is {target_degree}"
            )));
        }
        Ok(())
    }

    /// `q_Y` for any nonempty vertex set.
    pub fn q(&self, graph: &DualGraph, y: Subcurve) -> Q {
        let half_omega = || Q::new(graph.deg_omega_unchecked(y), 2);
        match self {
            Polarization::CanonicalZero => Q::zero(),
            Polarization::TrivialGm1 => half_omega(),
            Polarization::Custom { per_vertex_q, .. } => {
                let sum: Q = y.indices().filter_map(|i| per_vertex_q.get(graph.id(i)).cloned()).sum();
                sum + half_omega()
            }
        }
    }

    pub(crate) fn threshold_unchecked(&self, graph: &DualGraph, y: Subcurve) -> Q {
        self.q(graph, y) - Q::new(graph.kappa_unchecked(y) as i64, 2)
    }
}

/// `q_Y - κ_Y / 2` for a proper nonempty subcurve.
pub fn threshold(graph: &DualGraph, pol: &Polarization, y: Subcurve) -> Result<Q, StabilityError> {
    graph.kappa(y)?;
    pol.validate(graph)?;
    Ok(pol.threshold_unchecked(graph, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityMode {
    Semistable,
    Stable,
    Qstable,
}

impl std::str::FromStr for StabilityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "semistable" => Ok(StabilityMode::Semistable),
            "stable" => Ok(StabilityMode::Stable),
            "qstable" | "q-stable" => Ok(StabilityMode::Qstable),
            other => Err(format!("unknown stability mode {other:?}")),
        }
    }
}

/// Where strictness is required for q-stability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Basepoint {
    /// The component carrying marking 1.
    #[default]
    Marking1,
    Vertex(usize),
}

impl Basepoint {
    pub fn resolve(self, graph: &DualGraph) -> Result<usize, StabilityError> {
        match self {
            Basepoint::Marking1 => graph.vertex_of_marking(1).ok_or(StabilityError::MissingBasepoint),
            Basepoint::Vertex(v) if v < graph.vertex_count() => Ok(v),
            Basepoint::Vertex(_) => Err(StabilityError::MissingBasepoint),
        }
    }
}

/// A failed subcurve inequality `degree ≥ threshold` (or `>` when `strict`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub subcurve: Vec<String>,
    pub degree: i64,
    pub threshold: Q,
    pub strict: bool,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.strict { ">" } else { ">=" };
        write!(f, "Y={{{}}}: {} {} {} fails", self.subcurve.join(","), self.degree, op, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl Verdict {
    fn pass() -> Self {
        Verdict { pass: true, witness: None }
    }

    fn fail(witness: Witness) -> Self {
        Verdict { pass: false, witness: Some(witness) }
    }
}

/// Which subcurves a scan visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcurveScope {
    All,
    Connected,
}

/// Proper nonempty subsets in order of size, then bitmask.
pub(crate) fn proper_subsets(nv: usize) -> impl Iterator<Item = Subcurve> {
    let full: u64 = if nv == 64 { u64::MAX } else { (1u64 << nv) - 1 };
    (1..nv).flat_map(move |k| {
        let mut next = Some((1u64 << k) - 1);
        std::iter::from_fn(move || {
            let cur = next?;
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            let succ = (((r ^ cur) >> 2) / c) | r;
            next = if r != 0 && succ & !full == 0 && succ != 0 { Some(succ) } else { None };
            Some(Subcurve(cur))
        })
    })
}

fn check_scan_size(graph: &DualGraph) -> Result<(), StabilityError> {
    if graph.vertex_count() > MAX_SCAN_VERTICES {
        return Err(StabilityError::TooLarge { vertices: graph.vertex_count(), max: MAX_SCAN_VERTICES });
    }
    Ok(())
}

fn strict_on(mode: StabilityMode, base: Option<usize>, y: Subcurve) -> bool {
    match mode {
        StabilityMode::Semistable => false,
        StabilityMode::Stable => true,
        StabilityMode::Qstable => base.is_some_and(|b| y.contains(b)),
    }
}

/// Checks `m` against every proper nonempty subcurve.
pub fn check_stability(
    graph: &DualGraph,
    pol: &Polarization,
    m: &Multidegree,
    mode: StabilityMode,
    basepoint: Basepoint,
) -> Result<Verdict, StabilityError> {
    check_stability_scoped(graph, pol, m, mode, basepoint, SubcurveScope::All)
}

/// [`check_stability`] restricted to a family of subcurves. With
/// [`SubcurveScope::Connected`] only connected subcurves are visited.
pub fn check_stability_scoped(
    graph: &DualGraph,
    pol: &Polarization,
    m: &Multidegree,
    mode: StabilityMode,
    basepoint: Basepoint,
    scope: SubcurveScope,
) -> Result<Verdict, StabilityError> {
    check_scan_size(graph)?;
    pol.validate(graph)?;
    let m = Multidegree::checked(graph, m.0.clone())?;
    let expected = pol.target_degree(graph);
    if m.total() != expected {
        return Err(StabilityError::DegreeMismatch { expected, found: m.total() });
    }
    let base = match mode {
        StabilityMode::Qstable => Some(basepoint.resolve(graph)?),
        _ => None,
    };
    for y in proper_subsets(graph.vertex_count()) {
        if scope == SubcurveScope::Connected && !graph.is_connected(y) {
            continue;
        }
        let degree = m.on(y);
        let t = pol.threshold_unchecked(graph, y);
        let strict = strict_on(mode, base, y);
        let d = Q::int(degree);
        let ok = if strict { d > t } else { d >= t };
        if !ok {
            return Ok(Verdict::fail(Witness { subcurve: graph.subcurve_ids(y), degree, threshold: t, strict }));
        }
    }
    Ok(Verdict::pass())
}

/// Every (semi/q-)stable multidegree for `pol`, sorted lexicographically in
/// vertex order.
///
/// Each subcurve inequality is turned into an integer lower bound on `deg_Y`,
/// and the complement's bound into an upper bound; the search assigns degrees
/// vertex by vertex and checks every subset of the assigned prefix as soon as
/// its last vertex is fixed. The outer two vertices are split across workers.
pub fn enumerate_stable(
    graph: &DualGraph,
    pol: &Polarization,
    mode: StabilityMode,
    basepoint: Basepoint,
    execution: Execution,
) -> Result<Vec<Multidegree>, StabilityError> {
    let nv = graph.vertex_count();
    if nv > MAX_ENUMERATION_VERTICES {
        return Err(StabilityError::TooLarge { vertices: nv, max: MAX_ENUMERATION_VERTICES });
    }
    pol.validate(graph)?;
    let d = pol.target_degree(graph);
    if nv == 1 {
        return Ok(vec![Multidegree(vec![d])]);
    }
    let base = match mode {
        StabilityMode::Qstable => Some(basepoint.resolve(graph)?),
        _ => None,
    };
    let size = 1usize << nv;
    let full = size as u64 - 1;
    let mut lo = vec![i64::MIN; size];
    for y in proper_subsets(nv) {
        let t = pol.threshold_unchecked(graph, y);
        let bound = if strict_on(mode, base, y) { t.floor_i64().map(|f| f + 1) } else { t.ceil_i64() };
        lo[y.0 as usize] = bound.ok_or_else(|| StabilityError::Polarization("threshold out of range".into()))?;
    }
    let hi: Vec<i64> = (0..size)
        .map(|mask| if mask == 0 || mask as u64 == full { i64::MAX } else { d - lo[(full ^ mask as u64) as usize] })
        .collect();
    let bounds = Bounds { nv, d, lo, hi };

    let range = |v: usize| {
        let s = 1usize << v;
        bounds.lo[s]..=bounds.hi[s]
    };
    let mut seeds: Vec<Vec<i64>> = Vec::new();
    if nv == 2 {
        for a in range(0) {
            seeds.push(vec![a]);
        }
    } else {
        for a in range(0) {
            for b in range(1) {
                seeds.push(vec![a, b]);
            }
        }
    }
    let found = exec::flat_map(execution, seeds, |prefix| bounds.search_from(&prefix));
    Ok(found.into_iter().map(Multidegree).collect())
}

struct Bounds {
    nv: usize,
    d: i64,
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl Bounds {
    fn search_from(&self, prefix: &[i64]) -> Vec<Vec<i64>> {
        let mut sums = vec![0i64; 1usize << self.nv];
        let mut current = Vec::with_capacity(self.nv);
        let mut out = Vec::new();
        for &value in prefix {
            if !self.assign(&mut sums, current.len(), value) {
                return out;
            }
            current.push(value);
        }
        self.dfs(&mut sums, &mut current, &mut out);
        out
    }

    /// Fills `sums` for subsets whose top vertex is `i` and checks their bounds.
    fn assign(&self, sums: &mut [i64], i: usize, value: i64) -> bool {
        let bit = 1usize << i;
        let mut ok = true;
        for lower in 0..bit {
            let mask = lower | bit;
            let s = sums[lower] + value;
            sums[mask] = s;
            if s < self.lo[mask] || s > self.hi[mask] {
                ok = false;
            }
        }
        ok
    }

    fn dfs(&self, sums: &mut [i64], current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let i = current.len();
        if i == self.nv {
            out.push(current.clone());
            return;
        }
        let bit = 1usize << i;
        if i + 1 == self.nv {
            let value = self.d - current.iter().sum::<i64>();
            if self.assign(sums, i, value) {
                current.push(value);
                out.push(current.clone());
                current.pop();
            }
            return;
        }
        for value in self.lo[bit]..=self.hi[bit] {
            if self.assign(sums, i, value) {
                current.push(value);
                self.dfs(sums, current, out);
                current.pop();
            }
        }
    }
}

/// Twist data `(τ, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauData {
    pub tau: Vec<i64>,
    pub k: i64,
}

impl TauData {
    pub fn new(tau: Vec<i64>, k: i64) -> Self {
        TauData { tau, k }
    }

    /// Length `n` and `Σ τ_i = k(2g - 2)`.
    pub fn check_theta(&self, g: u32, n: u32) -> Result<(), StabilityError> {
        if self.tau.len() != n as usize {
            return Err(StabilityError::TauLength { expected: n as usize, found: self.tau.len() });
        }
        let expected = self.k * (2 * g as i64 - 2);
        let found = self.tau.iter().sum();
        if found != expected {
            return Err(StabilityError::TauSum { expected, found });
        }
        Ok(())
    }

    pub fn legs_sum(&self, legs: &[u32]) -> i64 {
        legs.iter().map(|&i| self.tau[i as usize - 1]).sum()
    }
}

/// `m₀(v) = Σ_{legs at v} τ_i - k · deg ω|_{X_v}`: the multidegree of
/// `O(Σ τ_i p_i) ⊗ ω^{-k}` on the fiber.
pub fn base_multidegree(graph: &DualGraph, t: &TauData) -> Result<Multidegree, StabilityError> {
    t.check_theta(graph.genus(), graph.n())?;
    Ok(Multidegree(
        (0..graph.vertex_count())
            .map(|v| {
                let y = Subcurve::singleton(v);
                t.legs_sum(&graph.legs_in(y)) - t.k * graph.deg_omega_unchecked(y)
            })
            .collect(),
    ))
}

/// Tests `Σ_{p_i ∈ Z} τ_i ≥ k deg ω|_Z - κ_Z/2` on every proper subcurve,
/// strictly when marking 1 lies on `Z`.
pub fn is_balanced(graph: &DualGraph, t: &TauData) -> Result<Verdict, StabilityError> {
    is_balanced_scoped(graph, t, SubcurveScope::All)
}

pub fn is_balanced_scoped(graph: &DualGraph, t: &TauData, scope: SubcurveScope) -> Result<Verdict, StabilityError> {
    check_scan_size(graph)?;
    t.check_theta(graph.genus(), graph.n())?;
    let base = Basepoint::Marking1.resolve(graph)?;
    for z in proper_subsets(graph.vertex_count()) {
        if scope == SubcurveScope::Connected && !graph.is_connected(z) {
            continue;
        }
        let lhs = t.legs_sum(&graph.legs_in(z));
        let kappa = graph.kappa_unchecked(z) as i64;
        // doubled to stay in integers
        let rhs2 = 2 * t.k * graph.deg_omega_unchecked(z) - kappa;
        let strict = z.contains(base);
        let ok = if strict { 2 * lhs > rhs2 } else { 2 * lhs >= rhs2 };
        if !ok {
            return Ok(Verdict::fail(Witness {
                subcurve: graph.subcurve_ids(z),
                degree: lhs,
                threshold: Q::new(rhs2, 2),
                strict,
            }));
        }
    }
    Ok(Verdict::pass())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Locus {
    Balanced,
    Treelike,
    Both,
    Indeterminacy,
}

/// Where the curve sits relative to the domain of the extended Abel-Jacobi section.
pub fn locus_membership(graph: &DualGraph, t: &TauData) -> Result<Locus, StabilityError> {
    let balanced = is_balanced(graph, t)?.pass;
    let treelike = graph.is_treelike();
    Ok(match (balanced, treelike) {
        (true, true) => Locus::Both,
        (true, false) => Locus::Balanced,
        (false, true) => Locus::Treelike,
        (false, false) => Locus::Indeterminacy,
    })
}
