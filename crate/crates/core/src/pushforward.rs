//! Degree ≤ 2 classes on the universal curve and their pushforward to the
//! moduli space, used to rederive the theta pullback formulas from `c₁`.
//!
//! Symbols are the marked sections `D_i`, the relative dualizing class `K̃`
//! and the boundary divisors `B_{h,A}` of the universal curve lying over
//! `δ_{h,A}`, one per canonical index. Also hosts the exponential truncation
//! over abstract graded atoms `C_1, …, C_g`.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::divisor::{self, push_term, BoundaryIndex, DivisorClass, DivisorError, Moduli};
use crate::graph::DualGraph;
use crate::rational::Q;
use crate::stability::{Multidegree, StabilityError, TauData};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PushforwardError {
    #[error(transparent)]
    Divisor(#[from] DivisorError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("product has degree {0}; only degree ≤ 2 is represented")]
    DegreeOverflow(usize),
    #[error("expected two vertices joined by one edge and no loops")]
    WrongShape,
    #[error("symbol {0} does not belong to this moduli space")]
    UnknownSymbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    D(u32),
    K,
    B(BoundaryIndex),
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::D(i) => write!(f, "D_{i}"),
            Sym::K => f.write_str("Ktilde"),
            Sym::B(idx) => {
                let a: Vec<String> = idx.a.iter().map(|i| i.to_string()).collect();
                write!(f, "B_{{{},{{{}}}}}", idx.h, a.join(","))
            }
        }
    }
}

fn add_pruned<K: Ord>(map: &mut BTreeMap<K, Q>, key: K, c: Q) {
    use std::collections::btree_map::Entry;
    match map.entry(key) {
        Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// Sorted product of at most two symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<Sym>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn symbols(&self) -> &[Sym] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    fn times(&self, other: &Monomial) -> Result<Monomial, PushforwardError> {
        let mut s: Vec<Sym> = self.0.iter().chain(&other.0).cloned().collect();
        if s.len() > 2 {
            return Err(PushforwardError::DegreeOverflow(s.len()));
        }
        s.sort();
        Ok(Monomial(s))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => Ok(()),
            [a] => write!(f, "{a}"),
            [a, b] if a == b => write!(f, "{a}^2"),
            [a, b] => write!(f, "{a}*{b}"),
            _ => unreachable!("monomials have degree at most 2"),
        }
    }
}

/// Which rewrite or pushforward rule an entry of [`RuleTable`] governs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    DSquared,
    DTimesB,
    BSquared,
    KTimesB,
    KSquared,
    KTimesD,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::DSquared, Rule::DTimesB, Rule::BSquared, Rule::KTimesB, Rule::KSquared, Rule::KTimesD];

    pub fn name(self) -> &'static str {
        match self {
            Rule::DSquared => "d-squared",
            Rule::DTimesB => "d-times-b",
            Rule::BSquared => "b-squared",
            Rule::KTimesB => "k-times-b",
            Rule::KSquared => "k-squared",
            Rule::KTimesD => "k-times-d",
        }
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule {s:?}; expected one of d-squared, d-times-b, b-squared, k-times-b, k-squared, k-times-d"))
    }
}

/// Coefficients of the rewrite and pushforward rules:
///
/// * `π_*(D_i²) = d_squared · ψ_i`
/// * `π_*(D_i B_{h,A}) = d_times_b · δ_{h,A}` for `i ∈ A`, else 0
/// * `π_*(B_{h,A}²) = b_squared · δ_{h,A}`
/// * `π_*(K̃ B_{h,A}) = (k_times_b.0 · h + k_times_b.1) · δ_{h,A}`
/// * `π_*(K̃²) = k_squared · κ̃₁`
/// * `K̃ D_i = k_times_d · D_i²`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleTable {
    pub d_squared: Q,
    pub d_times_b: Q,
    pub b_squared: Q,
    pub k_times_b: (Q, Q),
    pub k_squared: Q,
    pub k_times_d: Q,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable {
            d_squared: Q::int(-1),
            d_times_b: Q::one(),
            b_squared: Q::int(-1),
            k_times_b: (Q::int(2), Q::int(-1)),
            k_squared: Q::one(),
            k_times_d: Q::int(-1),
        }
    }
}

impl RuleTable {
    /// The standard table with one rule's sign flipped.
    pub fn corrupted(rule: Rule) -> Self {
        let mut t = RuleTable::default();
        match rule {
            Rule::DSquared => t.d_squared = -t.d_squared,
            Rule::DTimesB => t.d_times_b = -t.d_times_b,
            Rule::BSquared => t.b_squared = -t.b_squared,
            Rule::KTimesB => t.k_times_b.1 = -t.k_times_b.1,
            Rule::KSquared => t.k_squared = -t.k_squared,
            Rule::KTimesD => t.k_times_d = -t.k_times_d,
        }
        t
    }
}

/// Exact polynomial of degree ≤ 2 in `D_i`, `K̃`, `B_{h,A}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberClass {
    moduli: Moduli,
    terms: BTreeMap<Monomial, Q>,
}

impl FiberClass {
    pub fn zero(moduli: Moduli) -> Self {
        FiberClass { moduli, terms: BTreeMap::new() }
    }

    pub fn constant(moduli: Moduli, c: Q) -> Self {
        let mut out = FiberClass::zero(moduli);
        out.add_term(Monomial::one(), c);
        out
    }

    /// `c · sym`; boundary symbols must be canonical valid indices.
    pub fn symbol(moduli: Moduli, sym: Sym, c: Q) -> Result<Self, PushforwardError> {
        let ok = match &sym {
            Sym::D(i) => (1..=moduli.n).contains(i),
            Sym::K => true,
            Sym::B(idx) => {
                let m = idx.mask();
                idx.a.iter().all(|&i| (1..=moduli.n).contains(&i))
                    && moduli.is_valid(idx.h, m)
                    && moduli.canonical(idx.h, m) == (idx.h, m)
            }
        };
        if !ok {
            return Err(PushforwardError::UnknownSymbol(sym.to_string()));
        }
        let mut out = FiberClass::zero(moduli);
        out.add_term(Monomial(vec![sym]), c);
        Ok(out)
    }

    pub fn moduli(&self) -> Moduli {
        self.moduli
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        add_pruned(&mut self.terms, m, c);
    }

    pub fn add(&self, other: &FiberClass) -> FiberClass {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, s: &Q) -> FiberClass {
        let mut out = FiberClass::zero(self.moduli);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// Expands the product without applying any relation.
    pub fn mul_raw(&self, other: &FiberClass) -> Result<FiberClass, PushforwardError> {
        let mut out = FiberClass::zero(self.moduli);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.times(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// Product followed by [`FiberClass::normalized`].
    pub fn mul(&self, other: &FiberClass) -> Result<FiberClass, PushforwardError> {
        Ok(self.mul_raw(other)?.normalized())
    }

    pub fn normalized(&self) -> FiberClass {
        self.normalized_with(&RuleTable::default())
    }

    /// Applies `D_iD_j = 0` (`i ≠ j`), `B B' = 0` (distinct) and rewrites
    /// `K̃D_i` to `k_times_d · D_i²`.
    pub fn normalized_with(&self, rules: &RuleTable) -> FiberClass {
        let mut out = FiberClass::zero(self.moduli);
        for (m, c) in &self.terms {
            match m.0.as_slice() {
                [Sym::D(i), Sym::D(j)] if i != j => {}
                [Sym::B(a), Sym::B(b)] if a != b => {}
                [Sym::D(i), Sym::K] => out.add_term(Monomial(vec![Sym::D(*i), Sym::D(*i)]), c * &rules.k_times_d),
                _ => out.add_term(m.clone(), c.clone()),
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| json!({"monomial": m.to_string(), "c": c.to_string()}))
            .collect();
        json!({"terms": terms})
    }
}

impl fmt::Display for FiberClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (m, c) in &self.terms {
            push_term(&mut s, c, &m.to_string());
        }
        if s.is_empty() {
            s.push('0');
        }
        f.write_str(&s)
    }
}

/// Pushforward with the standard rules.
pub fn pushforward(fc: &FiberClass) -> DivisorClass {
    pushforward_with(fc, &RuleTable::default())
}

pub fn pushforward_with(fc: &FiberClass, rules: &RuleTable) -> DivisorClass {
    let fc = fc.normalized_with(rules);
    let mut out = fc.moduli.zero_class();
    for (m, c) in &fc.terms {
        match m.0.as_slice() {
            [Sym::D(i), Sym::D(j)] if i == j => out.add_psi(*i, &(c * &rules.d_squared)),
            [Sym::D(i), Sym::B(idx)] => {
                if idx.a.contains(i) {
                    out.add_canonical_delta(idx.clone(), &(c * &rules.d_times_b));
                }
            }
            [Sym::B(a), Sym::B(b)] if a == b => out.add_canonical_delta(a.clone(), &(c * &rules.b_squared)),
            [Sym::K, Sym::B(idx)] => {
                let (slope, offset) = &rules.k_times_b;
                let f = &(slope * &Q::int(idx.h as i64)) + offset;
                out.add_canonical_delta(idx.clone(), &(c * &f));
            }
            [Sym::K, Sym::K] => out.add_kappa1t(&(c * &rules.k_squared)),
            _ => {}
        }
    }
    out.prune();
    out
}

/// `c₁(L(τ,k)) = Σ τ_i D_i - k K̃ + Σ (k(1-2h) + Σ_{i∈A} τ_i) B_{h,A}`.
pub fn c1_of_lk(moduli: Moduli, t: &TauData) -> Result<FiberClass, PushforwardError> {
    divisor::check_theta_tau(moduli, &t.tau, t.k)?;
    let mut out = FiberClass::zero(moduli);
    for (i, &ti) in t.tau.iter().enumerate() {
        out.add_term(Monomial(vec![Sym::D(i as u32 + 1)]), Q::int(ti));
    }
    out.add_term(Monomial(vec![Sym::K]), Q::int(-t.k));
    for idx in moduli.canonical_indices() {
        let c = t.k * (1 - 2 * idx.h as i64) + idx.tau_sum(&t.tau);
        out.add_term(Monomial(vec![Sym::B(idx)]), Q::int(c));
    }
    Ok(out)
}

/// `-π_*(c₁(L(τ,k))²/2)`.
pub fn derive_theta(moduli: Moduli, t: &TauData) -> Result<DivisorClass, PushforwardError> {
    derive_theta_with(moduli, t, &RuleTable::default())
}

pub fn derive_theta_with(moduli: Moduli, t: &TauData, rules: &RuleTable) -> Result<DivisorClass, PushforwardError> {
    let c1 = c1_of_lk(moduli, t)?;
    let sq = c1.mul_raw(&c1)?.normalized_with(rules);
    Ok(pushforward_with(&sq.scaled(&Q::new(-1, 2)), rules))
}

/// Reading of the indicator in the degree `g-1` twist coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Indicator {
    /// `[1 ∉ A]`
    #[default]
    MarkingOutside,
    /// `[1 ∈ A]`
    MarkingInside,
}

/// `c₁ = Σ τ_i D_i + Σ (Σ_{i∈A} τ_i - h + χ) B_{h,A}` for `Σ τ_i = g - 1`.
pub fn c1_gm1(moduli: Moduli, tau: &[i64], indicator: Indicator) -> Result<FiberClass, PushforwardError> {
    divisor::check_gm1_tau(moduli, tau)?;
    let mut out = FiberClass::zero(moduli);
    for (i, &ti) in tau.iter().enumerate() {
        out.add_term(Monomial(vec![Sym::D(i as u32 + 1)]), Q::int(ti));
    }
    for idx in moduli.canonical_indices() {
        let inside = idx.a.first() == Some(&1);
        let chi = match indicator {
            Indicator::MarkingOutside => !inside,
            Indicator::MarkingInside => inside,
        } as i64;
        let c = idx.tau_sum(tau) - idx.h as i64 + chi;
        out.add_term(Monomial(vec![Sym::B(idx)]), Q::int(c));
    }
    Ok(out)
}

/// `-π_*(c₁²/2) + π_*(c₁K̃/2) - λ₁`.
pub fn derive_theta_gm1(moduli: Moduli, tau: &[i64], indicator: Indicator) -> Result<DivisorClass, PushforwardError> {
    derive_theta_gm1_with(moduli, tau, indicator, &RuleTable::default())
}

pub fn derive_theta_gm1_with(
    moduli: Moduli,
    tau: &[i64],
    indicator: Indicator,
    rules: &RuleTable,
) -> Result<DivisorClass, PushforwardError> {
    let c1 = c1_gm1(moduli, tau, indicator)?;
    let k = FiberClass::symbol(moduli, Sym::K, Q::one())?;
    let expr = c1
        .mul_raw(&c1)?
        .scaled(&Q::new(-1, 2))
        .add(&c1.mul_raw(&k)?.scaled(&Q::new(1, 2)))
        .normalized_with(rules);
    let mut out = pushforward_with(&expr, rules);
    out.add_lambda1(&Q::int(-1));
    out.prune();
    Ok(out)
}

/// Multidegree `g(v) - [marking 1 is not on v]` on a two-component compact-type fiber.
pub fn compact_type_gm1_multidegree(graph: &DualGraph) -> Result<Multidegree, PushforwardError> {
    if graph.vertex_count() != 2 || graph.edges().len() != 1 || graph.edges()[0].0 == graph.edges()[0].1 {
        return Err(PushforwardError::WrongShape);
    }
    let base = graph.vertex_of_marking(1).ok_or(StabilityError::MissingBasepoint)?;
    Ok(Multidegree(
        graph.vertices().iter().enumerate().map(|(v, vx)| vx.genus as i64 - (v != base) as i64).collect(),
    ))
}

/// Polynomial in graded atoms `C_1, …, C_r`; a key lists the exponent of each atom.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedAtomPoly {
    terms: BTreeMap<Vec<u32>, Q>,
}

fn trim(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl GradedAtomPoly {
    pub fn zero() -> Self {
        GradedAtomPoly::default()
    }

    pub fn constant(c: Q) -> Self {
        let mut p = GradedAtomPoly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    /// `c · C_s`.
    pub fn atom(s: u32, c: Q) -> Self {
        assert!(s >= 1, "atoms are indexed from 1");
        let mut e = vec![0; s as usize];
        e[s as usize - 1] = 1;
        let mut p = GradedAtomPoly::zero();
        p.add_term(e, c);
        p
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Q> {
        &self.terms
    }

    /// `Σ_s s · e_s`.
    pub fn degree_of(exponents: &[u32]) -> u32 {
        exponents.iter().enumerate().map(|(i, &e)| (i as u32 + 1) * e).sum()
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, c: Q) {
        add_pruned(&mut self.terms, trim(exponents), c);
    }

    pub fn add(&self, other: &GradedAtomPoly) -> GradedAtomPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, s: &Q) -> GradedAtomPoly {
        let mut out = GradedAtomPoly::zero();
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    /// Product with every term of degree above `max_degree` dropped.
    pub fn mul_truncated(&self, other: &GradedAtomPoly, max_degree: u32) -> GradedAtomPoly {
        let mut out = GradedAtomPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let len = ea.len().max(eb.len());
                let e: Vec<u32> = (0..len).map(|i| ea.get(i).unwrap_or(&0) + eb.get(i).unwrap_or(&0)).collect();
                if Self::degree_of(&e) <= max_degree {
                    out.add_term(e, ca * cb);
                }
            }
        }
        out
    }

    pub fn homogeneous(&self, degree: u32) -> GradedAtomPoly {
        GradedAtomPoly {
            terms: self.terms.iter().filter(|(e, _)| Self::degree_of(e) == degree).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    fn monomial_text(e: &[u32]) -> String {
        let parts: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(i, &x)| if x == 1 { format!("C{}", i + 1) } else { format!("C{}^{x}", i + 1) })
            .collect();
        parts.join("*")
    }

    /// Terms in descending exponent order: `C1^3` before `C1*C2` before `C3`.
    fn ordered(&self) -> Vec<(&Vec<u32>, &Q)> {
        let mut v: Vec<(&Vec<u32>, &Q)> = self.terms.iter().collect();
        v.sort_by(|a, b| {
            let len = a.0.len().max(b.0.len());
            let pad = |e: &Vec<u32>| (0..len).map(|i| *e.get(i).unwrap_or(&0)).collect::<Vec<_>>();
            pad(b.0).cmp(&pad(a.0))
        });
        v
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .ordered()
            .into_iter()
            .map(|(e, c)| {
                let atoms: BTreeMap<String, u32> =
                    e.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, &x)| ((i + 1).to_string(), x)).collect();
                json!({"monomial": Self::monomial_text(e), "atoms": atoms, "c": c.to_string()})
            })
            .collect();
        json!({"terms": terms})
    }
}

impl fmt::Display for GradedAtomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (e, c) in self.ordered() {
            push_term(&mut s, c, &Self::monomial_text(e));
        }
        if s.is_empty() {
            s.push('0');
        }
        f.write_str(&s)
    }
}

fn factorial(n: u32) -> Q {
    Q::int((1..=n as i64).product())
}

/// Degree-`g` part of `exp(Σ_{s≥1} (-1)^s (s-1)! C_s)`, summed over partitions of `g`.
pub fn exp_truncate(g: u32) -> GradedAtomPoly {
    fn walk(remaining: u32, largest: u32, mult: &mut Vec<u32>, out: &mut GradedAtomPoly) {
        if remaining == 0 {
            let mut c = Q::one();
            for (i, &m) in mult.iter().enumerate() {
                let s = i as u32 + 1;
                let a = &factorial(s - 1) * &Q::int(if s % 2 == 0 { 1 } else { -1 });
                for _ in 0..m {
                    c *= &a;
                }
                c = c / factorial(m);
            }
            out.add_term(mult.clone(), c);
            return;
        }
        for s in (1..=largest.min(remaining)).rev() {
            mult[s as usize - 1] += 1;
            walk(remaining - s, s, mult, out);
            mult[s as usize - 1] -= 1;
        }
    }
    let mut out = GradedAtomPoly::zero();
    let mut mult = vec![0; g as usize];
    walk(g, g, &mut mult, &mut out);
    out
}

/// `exp(Σ_s (-1)^s (s-1)! C_s)` truncated at degree `g` by repeated
/// multiplication of the series, then restricted to degree `g`.
pub fn exp_series_oracle(g: u32) -> GradedAtomPoly {
    let mut x = GradedAtomPoly::zero();
    for s in 1..=g {
        let sign = if s % 2 == 0 { 1 } else { -1 };
        x = x.add(&GradedAtomPoly::atom(s, &factorial(s - 1) * &Q::int(sign)));
    }
    let mut sum = GradedAtomPoly::constant(Q::one());
    let mut power = GradedAtomPoly::constant(Q::one());
    for j in 1..=g {
        power = power.mul_truncated(&x, g);
        sum = sum.add(&power.scaled(&(Q::one() / factorial(j))));
    }
    sum.homogeneous(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::{theta_gm1_pullback, theta_pullback_closed};
    use crate::graph::fixtures::*;
    use crate::stability::{check_stability, Basepoint, Polarization, StabilityMode};
    use proptest::prelude::*;

    fn m(g: u32, n: u32) -> Moduli {
        Moduli::new(g, n).unwrap()
    }

    fn d(mm: Moduli, i: u32) -> FiberClass {
        FiberClass::symbol(mm, Sym::D(i), Q::one()).unwrap()
    }

    fn kt(mm: Moduli) -> FiberClass {
        FiberClass::symbol(mm, Sym::K, Q::one()).unwrap()
    }

    fn b(mm: Moduli, h: u32, a: &[u32]) -> FiberClass {
        FiberClass::symbol(mm, Sym::B(BoundaryIndex::new(h, a.to_vec())), Q::one()).unwrap()
    }

    #[test]
    fn c1_examples() {
        let mm = m(2, 2);
        let c = c1_of_lk(mm, &TauData::new(vec![1, -1], 0)).unwrap();
        assert_eq!(c.to_string(), "D_1 - D_2 + B_{1,{1}}");
        let c = c1_of_lk(mm, &TauData::new(vec![2, 0], 1)).unwrap();
        assert_eq!(c.to_string(), "2 D_1 - Ktilde + 3 B_{0,{1,2}} + B_{1,{1}}");
        assert_eq!(c1_of_lk(mm, &TauData::new(vec![0, 0], 0)), Err(DivisorError::ZeroTau.into()));
        assert!(matches!(c1_of_lk(mm, &TauData::new(vec![1, 0], 0)), Err(PushforwardError::Divisor(DivisorError::TauSum { .. }))));
    }

    #[test]
    fn pushforward_rule_examples() {
        let mm = m(2, 2);
        let p = pushforward(&d(mm, 1).mul(&b(mm, 1, &[1])).unwrap());
        assert_eq!(p.to_string(), "delta_{1,{1}}");
        assert!(pushforward(&d(mm, 2).mul(&b(mm, 1, &[1])).unwrap()).is_zero());

        let kd = kt(mm).mul(&d(mm, 1)).unwrap();
        assert_eq!(kd, d(mm, 1).mul(&d(mm, 1)).unwrap().scaled(&Q::int(-1)));
        assert_eq!(pushforward(&kd).to_string(), "psi_1");

        assert_eq!(pushforward(&b(mm, 1, &[1]).mul(&b(mm, 1, &[1])).unwrap()).to_string(), "-delta_{1,{1}}");
        assert_eq!(pushforward(&kt(mm).mul(&b(mm, 0, &[1, 2])).unwrap()).to_string(), "-delta_{0,{1,2}}");
        assert_eq!(pushforward(&kt(mm).mul(&b(mm, 1, &[1])).unwrap()).to_string(), "delta_{1,{1}}");
        assert_eq!(pushforward(&kt(mm).mul(&kt(mm)).unwrap()).to_string(), "kappatilde_1");
        assert!(d(mm, 1).mul(&d(mm, 2)).unwrap().terms().is_empty());
        assert!(b(mm, 1, &[1]).mul(&b(mm, 0, &[1, 2])).unwrap().terms().is_empty());
    }

    #[test]
    fn low_degree_terms_push_to_zero() {
        let mm = m(2, 2);
        let fc = FiberClass::constant(mm, Q::int(5)).add(&d(mm, 1)).add(&kt(mm)).add(&b(mm, 1, &[1]));
        assert!(pushforward(&fc).is_zero());
    }

    #[test]
    fn symbols_are_checked() {
        let mm = m(2, 2);
        assert!(FiberClass::symbol(mm, Sym::D(3), Q::one()).is_err());
        assert!(FiberClass::symbol(mm, Sym::B(BoundaryIndex::new(1, vec![2])), Q::one()).is_err());
        assert!(FiberClass::symbol(mm, Sym::B(BoundaryIndex::new(1, vec![])), Q::one()).is_err());
    }

    #[test]
    fn degree_overflow() {
        let mm = m(2, 2);
        let sq = d(mm, 1).mul(&d(mm, 1)).unwrap();
        assert_eq!(sq.mul(&d(mm, 1)), Err(PushforwardError::DegreeOverflow(3)));
    }

    #[test]
    fn derive_theta_examples() {
        let mm = m(2, 2);
        let c = derive_theta(mm, &TauData::new(vec![1, -1], 0)).unwrap();
        assert_eq!(c.to_string(), "1/2 psi_1 + 1/2 psi_2 - 1/2 delta_{1,{1}}");
        let t = TauData::new(vec![2, 0], 1);
        assert_eq!(derive_theta(mm, &t).unwrap(), theta_pullback_closed(mm, &t.tau, t.k).unwrap());
    }

    #[test]
    fn derive_theta_gm1_examples() {
        let mm = m(2, 2);
        let c = derive_theta_gm1(mm, &[3, -2], Indicator::MarkingOutside).unwrap();
        assert_eq!(c.to_string(), "6 psi_1 + psi_2 - lambda_1 - delta_{0,{1,2}} - 3 delta_{1,{1}}");
        assert_eq!(c, derive_theta_gm1(mm, &[3, -2], Indicator::MarkingInside).unwrap());
    }

    #[test]
    fn corrupted_rules_change_the_derivation() {
        let mm = m(2, 2);
        let t = TauData::new(vec![2, 0], 1);
        let good = derive_theta(mm, &t).unwrap();
        for rule in Rule::ALL {
            let bad = derive_theta_with(mm, &t, &RuleTable::corrupted(rule)).unwrap();
            assert_ne!(bad, good, "{}", rule.name());
        }
    }

    #[test]
    fn compact_type_rule() {
        let g = graph(2, &[("v1", 1, &[1]), ("v2", 1, &[2])], &[("v1", "v2")]);
        assert_eq!(compact_type_gm1_multidegree(&g).unwrap(), Multidegree(vec![1, 0]));
        let g = graph(2, &[("v1", 0, &[1, 2]), ("v2", 2, &[])], &[("v1", "v2")]);
        let md = compact_type_gm1_multidegree(&g).unwrap();
        assert_eq!(md, Multidegree(vec![0, 1]));
        let v = check_stability(&g, &Polarization::TrivialGm1, &md, StabilityMode::Qstable, Basepoint::Marking1).unwrap();
        assert!(v.pass);
        assert_eq!(compact_type_gm1_multidegree(&banana()), Err(PushforwardError::WrongShape));
    }

    #[test]
    fn literal_indicator_reading_fails() {
        // (g(v) - [marking 1 on v]) has total g - 1 only by accident of shape and is not q-stable
        let g = graph(2, &[("v1", 1, &[1]), ("v2", 1, &[2])], &[("v1", "v2")]);
        let literal = Multidegree(vec![0, 1]);
        let v = check_stability(&g, &Polarization::TrivialGm1, &literal, StabilityMode::Qstable, Basepoint::Marking1).unwrap();
        assert!(!v.pass);
    }

    #[test]
    fn exp_truncate_small_cases() {
        assert_eq!(exp_truncate(1).to_string(), "-C1");
        assert_eq!(exp_truncate(2).to_string(), "1/2 C1^2 + C2");
        assert_eq!(exp_truncate(3).to_string(), "-1/6 C1^3 - C1*C2 - 2 C3");
        for g in 1..=8 {
            assert_eq!(exp_truncate(g), exp_series_oracle(g), "g={g}");
        }
    }

    #[test]
    fn k_rewrite_is_confluent() {
        let mm = m(2, 3);
        let x = d(mm, 1).scaled(&Q::int(2)).add(&kt(mm)).add(&d(mm, 3)).add(&b(mm, 1, &[1, 2]));
        let y = kt(mm).scaled(&Q::int(-3)).add(&d(mm, 1)).add(&b(mm, 0, &[1, 3]));
        let after = x.mul_raw(&y).unwrap().normalized();
        let before = x.normalized().mul(&y.normalized()).unwrap();
        assert_eq!(after, before);
        let termwise = x.terms().iter().fold(FiberClass::zero(mm), |acc, (mx, cx)| {
            let single = FiberClass { moduli: mm, terms: [(mx.clone(), cx.clone())].into() };
            acc.add(&single.mul_raw(&y).unwrap().normalized())
        });
        assert_eq!(termwise, after);
    }

    fn theta_input() -> impl Strategy<Value = (u32, i64, Vec<i64>)> {
        (0u32..=4, 1usize..=4, -2i64..=2).prop_flat_map(|(g, n, k)| {
            let g = if 2 * g as i64 - 2 + n as i64 <= 0 { 1 } else { g };
            (Just(g), Just(k), proptest::collection::vec(-5i64..=5, n))
        })
    }

    proptest! {
        #[test]
        fn derive_matches_closed((g, k, mut tau) in theta_input()) {
            let s: i64 = tau.iter().sum();
            tau[0] += k * (2 * g as i64 - 2) - s;
            prop_assume!(k != 0 || tau.iter().any(|&t| t != 0));
            let mm = m(g, tau.len() as u32);
            let t = TauData::new(tau, k);
            prop_assert_eq!(derive_theta(mm, &t).unwrap(), theta_pullback_closed(mm, &t.tau, k).unwrap());
            if k == 0 {
                prop_assert!(derive_theta(mm, &t).unwrap().kappa1t().is_zero());
            }
        }

        #[test]
        fn derive_gm1_matches_closed((g, _k, mut tau) in theta_input()) {
            let s: i64 = tau.iter().sum();
            tau[0] += g as i64 - 1 - s;
            let mm = m(g, tau.len() as u32);
            let closed = theta_gm1_pullback(mm, &tau).unwrap();
            prop_assert_eq!(&derive_theta_gm1(mm, &tau, Indicator::MarkingOutside).unwrap(), &closed);
            prop_assert_eq!(&derive_theta_gm1(mm, &tau, Indicator::MarkingInside).unwrap(), &closed);
            for (i, &t) in tau.iter().enumerate() {
                prop_assert_eq!(closed.psi(i as u32 + 1), Q::new(t * t, 2) + Q::new(t, 2));
            }
        }

        #[test]
        fn pushforward_is_linear(a in proptest::collection::vec(-4i64..=4, 6), b2 in proptest::collection::vec(-4i64..=4, 6), s in -3i64..=3) {
            let mm = m(2, 2);
            let basis = [d(mm, 1), d(mm, 2), kt(mm), b(mm, 1, &[1]), b(mm, 0, &[1, 2]), FiberClass::constant(mm, Q::one())];
            let combo = |cs: &[i64]| cs.iter().zip(&basis).fold(FiberClass::zero(mm), |acc, (&c, x)| acc.add(&x.scaled(&Q::int(c))));
            let x = combo(&a).mul(&combo(&a)).unwrap();
            let y = combo(&b2).mul(&combo(&a)).unwrap();
            let lhs = pushforward(&x.add(&y.scaled(&Q::int(s))));
            let rhs = pushforward(&x).checked_add(&pushforward(&y).scaled(&Q::int(s))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
