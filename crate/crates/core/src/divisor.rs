//! Divisor classes on the moduli space of stable `n`-marked genus-`g` curves.
//!
//! A class is an exact rational combination of `ψ_i`, `λ₁`, `κ̃₁`, `δ_irr`
//! and boundary divisors `δ_{h,A}`. Boundary keys are always stored on their
//! canonical representative under `δ_{h,A} = δ_{g-h,Aᶜ}`, and the conventions
//! `δ_{0,{i}} = δ_{g,[n]∖{i}} = -ψ_i` are applied on input.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::rational::Q;

/// Marking sets are bitmasks, so `n` is bounded.
pub const MAX_MARKINGS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DivisorError {
    #[error("(h={h}, A={a:?}) is not a boundary divisor index")]
    InvalidIndex { h: i64, a: Vec<i64> },
    #[error("tau sums to {found}, expected {expected}")]
    TauSum { expected: i64, found: i64 },
    #[error("tau has {found} entries, expected {expected}")]
    TauLength { expected: usize, found: usize },
    #[error("tau and k are both zero")]
    ZeroTau,
    #[error("tau has no negative entry")]
    NoNegativeEntry,
    #[error("2g-2+n must be positive (g={g}, n={n})")]
    Unstable { g: u32, n: u32 },
    #[error("at most {MAX_MARKINGS} markings are supported, got {0}")]
    TooManyMarkings(u32),
    #[error("classes live on different moduli spaces")]
    ModuliMismatch,
    #[error("malformed class JSON: {0}")]
    Json(String),
}

/// Boundary index `(h, A)` with `A` sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoundaryIndex {
    pub h: u32,
    #[serde(rename = "A")]
    pub a: Vec<u32>,
}

impl BoundaryIndex {
    pub fn new(h: u32, mut a: Vec<u32>) -> Self {
        a.sort_unstable();
        a.dedup();
        BoundaryIndex { h, a }
    }

    pub fn from_mask(h: u32, mask: u32) -> Self {
        BoundaryIndex { h, a: (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect() }
    }

    pub fn mask(&self) -> u32 {
        self.a.iter().fold(0, |m, &i| m | 1 << (i - 1))
    }

    /// Sum of `tau` over the markings in `A`.
    pub fn tau_sum(&self, tau: &[i64]) -> i64 {
        self.a.iter().map(|&i| tau[i as usize - 1]).sum()
    }
}

impl fmt::Display for BoundaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(|i| i.to_string()).collect();
        write!(f, "delta_{{{},{{{}}}}}", self.h, a.join(","))
    }
}

/// The moduli space `M̄_{g,n}` the classes live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Moduli {
    pub g: u32,
    pub n: u32,
}

impl Moduli {
    pub fn new(g: u32, n: u32) -> Result<Self, DivisorError> {
        if n > MAX_MARKINGS {
            return Err(DivisorError::TooManyMarkings(n));
        }
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(DivisorError::Unstable { g, n });
        }
        Ok(Moduli { g, n })
    }

    fn all_markings(&self) -> u32 {
        if self.n == 0 {
            0
        } else {
            (1u32 << self.n) - 1
        }
    }

    /// `2 ≤ h + |A| ≤ g + n - 2`.
    pub fn is_valid(&self, h: u32, mask: u32) -> bool {
        let size = h + mask.count_ones();
        h <= self.g && size >= 2 && size + 2 <= self.g + self.n
    }

    /// `δ_{0,{i}}` or `δ_{g,[n]∖{i}}`: returns the marking `i`.
    pub fn psi_convention(&self, h: u32, mask: u32) -> Option<u32> {
        if h == 0 && mask.count_ones() == 1 {
            return Some(mask.trailing_zeros() + 1);
        }
        let rest = self.all_markings() & !mask;
        if h == self.g && rest.count_ones() == 1 {
            return Some(rest.trailing_zeros() + 1);
        }
        None
    }

    /// Canonical representative: `2h < g`, or `2h = g` with `1 ∈ A`.
    pub fn canonical(&self, h: u32, mask: u32) -> (u32, u32) {
        let flipped = (self.g - h, self.all_markings() & !mask);
        match (2 * h).cmp(&self.g) {
            std::cmp::Ordering::Less => (h, mask),
            std::cmp::Ordering::Greater => flipped,
            std::cmp::Ordering::Equal if mask & 1 == 1 => (h, mask),
            std::cmp::Ordering::Equal => flipped,
        }
    }

    /// Every valid oriented pair `(h, A)` with `h ≤ ⌊g/2⌋`, in `(h, mask)` order.
    pub fn half_range(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..=self.g / 2).flat_map(move |h| (0..=self.all_markings()).map(move |m| (h, m))).filter(|&(h, m)| self.is_valid(h, m))
    }

    /// One valid index per boundary divisor class, sorted by `(h, lex A)`.
    pub fn canonical_indices(&self) -> Vec<BoundaryIndex> {
        let mut out: Vec<BoundaryIndex> = self
            .half_range()
            .filter(|&(h, m)| self.canonical(h, m) == (h, m))
            .map(|(h, m)| BoundaryIndex::from_mask(h, m))
            .collect();
        out.sort();
        out
    }

    pub fn zero_class(&self) -> DivisorClass {
        DivisorClass {
            moduli: *self,
            psi: BTreeMap::new(),
            lambda1: Q::zero(),
            kappa1t: Q::zero(),
            delta_irr: Q::zero(),
            delta: BTreeMap::new(),
        }
    }
}

/// One uncanonicalized summand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Psi(u32, Q),
    Lambda1(Q),
    Kappa1t(Q),
    DeltaIrr(Q),
    Delta { h: i64, a: Vec<i64>, c: Q },
}

/// Exact divisor class with canonical boundary keys and no zero coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorClass {
    moduli: Moduli,
    psi: BTreeMap<u32, Q>,
    lambda1: Q,
    kappa1t: Q,
    delta_irr: Q,
    delta: BTreeMap<BoundaryIndex, Q>,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, Q>, key: K, c: &Q) {
    let entry = map.entry(key).or_insert_with(Q::zero);
    *entry += c;
}

fn prune<K: Ord>(map: &mut BTreeMap<K, Q>) {
    map.retain(|_, c| !c.is_zero());
}

/// Folds raw summands onto canonical keys.
pub fn canonicalize(moduli: Moduli, terms: &[RawTerm]) -> Result<DivisorClass, DivisorError> {
    let mut class = moduli.zero_class();
    for t in terms {
        match t {
            RawTerm::Psi(i, c) => class.add_psi(*i, c),
            RawTerm::Lambda1(c) => class.lambda1 += c,
            RawTerm::Kappa1t(c) => class.kappa1t += c,
            RawTerm::DeltaIrr(c) => class.delta_irr += c,
            RawTerm::Delta { h, a, c } => class.add_delta_raw(*h, a, c)?,
        }
    }
    class.prune();
    Ok(class)
}

impl DivisorClass {
    pub fn moduli(&self) -> Moduli {
        self.moduli
    }

    pub fn psi(&self, i: u32) -> Q {
        self.psi.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn psi_terms(&self) -> &BTreeMap<u32, Q> {
        &self.psi
    }

    pub fn lambda1(&self) -> &Q {
        &self.lambda1
    }

    pub fn kappa1t(&self) -> &Q {
        &self.kappa1t
    }

    pub fn delta_irr(&self) -> &Q {
        &self.delta_irr
    }

    pub fn delta_terms(&self) -> &BTreeMap<BoundaryIndex, Q> {
        &self.delta
    }

    /// Coefficient of `δ_{h,A}` for any valid orientation of the index.
    pub fn delta(&self, h: u32, a: &[u32]) -> Q {
        let idx = BoundaryIndex::new(h, a.to_vec());
        let (h, m) = self.moduli.canonical(idx.h, idx.mask());
        self.delta.get(&BoundaryIndex::from_mask(h, m)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.psi.is_empty() && self.lambda1.is_zero() && self.kappa1t.is_zero() && self.delta_irr.is_zero() && self.delta.is_empty()
    }

    pub(crate) fn add_psi(&mut self, i: u32, c: &Q) {
        bump(&mut self.psi, i, c);
    }

    pub(crate) fn add_lambda1(&mut self, c: &Q) {
        self.lambda1 += c;
    }

    pub(crate) fn add_kappa1t(&mut self, c: &Q) {
        self.kappa1t += c;
    }

    /// Adds `c · δ_{h,A}` for a key already known to be canonical and valid.
    pub(crate) fn add_canonical_delta(&mut self, idx: BoundaryIndex, c: &Q) {
        debug_assert_eq!(self.moduli.canonical(idx.h, idx.mask()), (idx.h, idx.mask()));
        bump(&mut self.delta, idx, c);
    }

    /// Adds `c · δ_{h,A}` for an arbitrary index, applying the `ψ` conventions
    /// and folding onto the canonical representative.
    pub fn add_delta_raw(&mut self, h: i64, a: &[i64], c: &Q) -> Result<(), DivisorError> {
        let invalid = || DivisorError::InvalidIndex { h, a: a.to_vec() };
        let m = self.moduli;
        if h < 0 || h > m.g as i64 {
            return Err(invalid());
        }
        let mut mask = 0u32;
        for &i in a {
            if i < 1 || i > m.n as i64 || mask >> (i - 1) & 1 == 1 {
                return Err(invalid());
            }
            mask |= 1 << (i - 1);
        }
        let h = h as u32;
        if let Some(i) = m.psi_convention(h, mask) {
            self.add_psi(i, &-c);
            return Ok(());
        }
        if !m.is_valid(h, mask) {
            return Err(invalid());
        }
        let (ch, cm) = m.canonical(h, mask);
        bump(&mut self.delta, BoundaryIndex::from_mask(ch, cm), c);
        Ok(())
    }

    pub(crate) fn prune(&mut self) {
        prune(&mut self.psi);
        prune(&mut self.delta);
    }

    pub fn checked_add(&self, other: &DivisorClass) -> Result<DivisorClass, DivisorError> {
        if self.moduli != other.moduli {
            return Err(DivisorError::ModuliMismatch);
        }
        let mut out = self.clone();
        for (&i, c) in &other.psi {
            out.add_psi(i, c);
        }
        out.lambda1 += &other.lambda1;
        out.kappa1t += &other.kappa1t;
        out.delta_irr += &other.delta_irr;
        for (k, c) in &other.delta {
            bump(&mut out.delta, k.clone(), c);
        }
        out.prune();
        Ok(out)
    }

    pub fn scaled(&self, s: &Q) -> DivisorClass {
        let mut out = self.clone();
        out.psi.values_mut().for_each(|c| *c *= s);
        out.lambda1 *= s;
        out.kappa1t *= s;
        out.delta_irr *= s;
        out.delta.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    /// Back to raw summands; `canonicalize(raw_terms())` is the identity.
    pub fn raw_terms(&self) -> Vec<RawTerm> {
        let mut out: Vec<RawTerm> = self.psi.iter().map(|(&i, c)| RawTerm::Psi(i, c.clone())).collect();
        out.push(RawTerm::Lambda1(self.lambda1.clone()));
        out.push(RawTerm::Kappa1t(self.kappa1t.clone()));
        out.push(RawTerm::DeltaIrr(self.delta_irr.clone()));
        out.extend(self.delta.iter().map(|(k, c)| RawTerm::Delta {
            h: k.h as i64,
            a: k.a.iter().map(|&i| i as i64).collect(),
            c: c.clone(),
        }));
        out
    }

    pub fn to_json(&self) -> Value {
        let psi: BTreeMap<u32, String> = self.psi.iter().map(|(&i, c)| (i, c.to_string())).collect();
        let delta: Vec<Value> = self
            .delta
            .iter()
            .map(|(k, c)| json!({"h": k.h, "A": k.a, "c": c.to_string()}))
            .collect();
        json!({
            "psi": psi,
            "lambda1": self.lambda1.to_string(),
            "kappa1t": self.kappa1t.to_string(),
            "delta_irr": self.delta_irr.to_string(),
            "delta": delta,
        })
    }

    /// Parses the JSON form; boundary entries are canonicalized like raw input.
    pub fn from_json(moduli: Moduli, value: &Value) -> Result<DivisorClass, DivisorError> {
        #[derive(Deserialize)]
        struct Entry {
            h: i64,
            #[serde(rename = "A")]
            a: Vec<i64>,
            c: Q,
        }
        #[derive(Deserialize)]
        struct Wire {
            #[serde(default)]
            psi: BTreeMap<u32, Q>,
            #[serde(default)]
            lambda1: Q,
            #[serde(default)]
            kappa1t: Q,
            #[serde(default)]
            delta_irr: Q,
            #[serde(default)]
            delta: Vec<Entry>,
        }
        let wire: Wire = serde_json::from_value(value.clone()).map_err(|e| DivisorError::Json(e.to_string()))?;
        let mut terms: Vec<RawTerm> = wire.psi.into_iter().map(|(i, c)| RawTerm::Psi(i, c)).collect();
        if terms.iter().any(|t| matches!(t, RawTerm::Psi(i, _) if *i < 1 || *i > moduli.n)) {
            return Err(DivisorError::Json("psi index out of range".into()));
        }
        terms.push(RawTerm::Lambda1(wire.lambda1));
        terms.push(RawTerm::Kappa1t(wire.kappa1t));
        terms.push(RawTerm::DeltaIrr(wire.delta_irr));
        terms.extend(wire.delta.into_iter().map(|e| RawTerm::Delta { h: e.h, a: e.a, c: e.c }));
        canonicalize(moduli, &terms)
    }
}

/// Writes `c·sym` with sign handling into a running linear-combination string.
pub(crate) fn push_term(out: &mut String, c: &Q, sym: &str) {
    let negative = c.is_negative();
    let mag = c.abs();
    if out.is_empty() {
        if negative {
            out.push('-');
        }
    } else {
        out.push_str(if negative { " - " } else { " + " });
    }
    if sym.is_empty() {
        out.push_str(&mag.to_string());
    } else if mag == Q::one() {
        out.push_str(sym);
    } else {
        out.push_str(&format!("{mag} {sym}"));
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        for (i, c) in &self.psi {
            push_term(&mut s, c, &format!("psi_{i}"));
        }
        for (c, sym) in [(&self.lambda1, "lambda_1"), (&self.kappa1t, "kappatilde_1"), (&self.delta_irr, "delta_irr")] {
            if !c.is_zero() {
                push_term(&mut s, c, sym);
            }
        }
        for (k, c) in &self.delta {
            push_term(&mut s, c, &k.to_string());
        }
        if s.is_empty() {
            s.push('0');
        }
        f.write_str(&s)
    }
}

fn check_tau(moduli: Moduli, tau: &[i64], expected: i64) -> Result<(), DivisorError> {
    if tau.len() != moduli.n as usize {
        return Err(DivisorError::TauLength { expected: moduli.n as usize, found: tau.len() });
    }
    let found: i64 = tau.iter().sum();
    if found != expected {
        return Err(DivisorError::TauSum { expected, found });
    }
    Ok(())
}

/// Validates `Σ τ_i = k(2g-2)` and that `(τ, k)` is not identically zero.
pub fn check_theta_tau(moduli: Moduli, tau: &[i64], k: i64) -> Result<(), DivisorError> {
    check_tau(moduli, tau, k * (2 * moduli.g as i64 - 2))?;
    if k == 0 && tau.iter().all(|&t| t == 0) {
        return Err(DivisorError::ZeroTau);
    }
    Ok(())
}

/// Validates `Σ τ_i = g - 1`.
pub fn check_gm1_tau(moduli: Moduli, tau: &[i64]) -> Result<(), DivisorError> {
    check_tau(moduli, tau, moduli.g as i64 - 1)
}

/// Pullback of the symmetric theta divisor for `k = 0` on compact type:
/// `-(1/4) Σ (Σ_{i∈A} τ_i)² δ_{h,A}` over all ordered `(h, A)` with
/// `1 ≤ h + |A| ≤ g + n - 1`.
pub fn hain_theta_pullback(moduli: Moduli, tau: &[i64]) -> Result<DivisorClass, DivisorError> {
    check_theta_tau(moduli, tau, 0)?;
    let mut class = moduli.zero_class();
    let quarter = Q::new(-1, 4);
    for h in 0..=moduli.g {
        for mask in 0..=moduli.all_markings() {
            let size = h + mask.count_ones();
            if size < 1 || size > moduli.g + moduli.n - 1 {
                continue;
            }
            let idx = BoundaryIndex::from_mask(h, mask);
            let s = idx.tau_sum(tau);
            // (1, ∅) and (g-1, [n]) fall outside the index range but always carry s = 0
            if s == 0 {
                continue;
            }
            let a: Vec<i64> = idx.a.iter().map(|&i| i as i64).collect();
            class.add_delta_raw(h as i64, &a, &(&quarter * &Q::int(s * s)))?;
        }
    }
    class.prune();
    Ok(class)
}

/// `Σ_i (τ_i²/2 + kτ_i) ψ_i - (k²/2) κ̃₁ - (1/2) Σ_{(h,A)} (k(1-2h) + Σ_{i∈A} τ_i)² δ_{h,A}`,
/// one boundary term per divisor class.
pub fn theta_pullback_closed(moduli: Moduli, tau: &[i64], k: i64) -> Result<DivisorClass, DivisorError> {
    check_theta_tau(moduli, tau, k)?;
    let mut class = moduli.zero_class();
    for (i, &t) in tau.iter().enumerate() {
        class.add_psi(i as u32 + 1, &(Q::new(t * t, 2) + Q::int(k * t)));
    }
    class.add_kappa1t(&Q::new(-k * k, 2));
    for idx in moduli.canonical_indices() {
        let c = k * (1 - 2 * idx.h as i64) + idx.tau_sum(tau);
        class.add_canonical_delta(idx, &Q::new(-c * c, 2));
    }
    class.prune();
    Ok(class)
}

/// Degree `g-1` theta pullback:
/// `Σ τ_i(τ_i+1)/2 ψ_i - λ₁ - Σ (s-h)(s-h+1)/2 δ_{h,A}` with `s = Σ_{i∈A} τ_i`.
pub fn theta_gm1_pullback(moduli: Moduli, tau: &[i64]) -> Result<DivisorClass, DivisorError> {
    check_gm1_tau(moduli, tau)?;
    let mut class = moduli.zero_class();
    for (i, &t) in tau.iter().enumerate() {
        class.add_psi(i as u32 + 1, &Q::new(t * (t + 1), 2));
    }
    class.add_lambda1(&Q::int(-1));
    for idx in moduli.canonical_indices() {
        let e = idx.tau_sum(tau) - idx.h as i64;
        class.add_canonical_delta(idx, &Q::new(-e * (e + 1), 2));
    }
    class.prune();
    Ok(class)
}

/// One member of `E₊` and its correction coefficient `h - Σ_{i∈A} τ_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrectionTerm {
    pub h: u32,
    #[serde(rename = "A")]
    pub a: Vec<u32>,
    pub coefficient: i64,
}

/// `E₊`: valid `(h, A)` with `h ≤ ⌊g/2⌋`, `τ_i > 0` on `A` and `h ≥ Σ_{i∈A} τ_i`.
/// `include_empty` decides whether `A = ∅` (vacuously positive) is admitted.
pub fn mueller_correction(moduli: Moduli, tau: &[i64], include_empty: bool) -> Result<Vec<CorrectionTerm>, DivisorError> {
    check_gm1_tau(moduli, tau)?;
    if !tau.iter().any(|&t| t < 0) {
        return Err(DivisorError::NoNegativeEntry);
    }
    Ok(moduli
        .half_range()
        .filter(|&(_, m)| include_empty || m != 0)
        .map(|(h, m)| BoundaryIndex::from_mask(h, m))
        .filter(|idx| idx.a.iter().all(|&i| tau[i as usize - 1] > 0))
        .filter_map(|idx| {
            let s = idx.tau_sum(tau);
            (idx.h as i64 >= s).then(|| CorrectionTerm { coefficient: idx.h as i64 - s, h: idx.h, a: idx.a })
        })
        .collect())
}

/// Class of the closure of the locus where `O(Σ τ_i p_i)` is effective:
/// the degree `g-1` theta pullback minus the `E₊` correction.
pub fn mueller_class(moduli: Moduli, tau: &[i64], include_empty: bool) -> Result<DivisorClass, DivisorError> {
    let correction = mueller_correction(moduli, tau, include_empty)?;
    let mut class = theta_gm1_pullback(moduli, tau)?;
    for term in correction {
        let a: Vec<i64> = term.a.iter().map(|&i| i as i64).collect();
        class.add_delta_raw(term.h as i64, &a, &Q::int(-term.coefficient))?;
    }
    class.prune();
    Ok(class)
}
