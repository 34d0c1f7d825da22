//! Cross-formula grids, oracle suites and random-corpus checks, packaged as a
//! single report for the command line.

use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::corpus::{self, GraphShape};
use crate::divisor::{hain_theta_pullback, theta_gm1_pullback, theta_pullback_closed, Moduli};
use crate::exec::{self, Execution};
use crate::graph::{DualGraph, GraphSpec};
use crate::pushforward::{compact_type_gm1_multidegree, derive_theta_gm1_with, derive_theta_with, exp_series_oracle, exp_truncate, Indicator, RuleTable};
use crate::stability::{
    check_stability, enumerate_stable, is_balanced, Basepoint, Multidegree, Polarization, StabilityMode, TauData,
};
use crate::twister::{boundary_multidegree_lk, branch_coefficients, reduce_treelike, reduce_treelike_with, twist_multidegree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    Small,
    Full,
}

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small" => Ok(Depth::Small),
            "full" => Ok(Depth::Full),
            _ => Err(format!("unknown depth {s:?}; expected small or full")),
        }
    }
}

/// Ranges of the formula grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridBounds {
    pub max_g: u32,
    pub max_n: u32,
    pub tau_bound: i64,
    pub k_bound: i64,
}

impl Depth {
    pub fn grid(self) -> GridBounds {
        match self {
            Depth::Small => GridBounds { max_g: 3, max_n: 3, tau_bound: 3, k_bound: 2 },
            Depth::Full => GridBounds { max_g: 5, max_n: 4, tau_bound: 5, k_bound: 2 },
        }
    }

    fn corpus_size(self) -> u64 {
        match self {
            Depth::Small => 100,
            Depth::Full => 500,
        }
    }
}

/// Every stable `(g, n)` in range and every `τ ∈ [-b, b]^n` with the given sum.
pub fn tau_grid(bounds: GridBounds, sum: impl Fn(u32) -> i64) -> Vec<(Moduli, Vec<i64>)> {
    let mut out = Vec::new();
    for g in 0..=bounds.max_g {
        for n in 1..=bounds.max_n {
            let Ok(moduli) = Moduli::new(g, n) else { continue };
            let target = sum(g);
            let mut tau = vec![-bounds.tau_bound; n as usize];
            loop {
                if tau.iter().sum::<i64>() == target {
                    out.push((moduli, tau.clone()));
                }
                let Some(i) = tau.iter().position(|&t| t < bounds.tau_bound) else { break };
                tau[i] += 1;
                tau[..i].iter_mut().for_each(|t| *t = -bounds.tau_bound);
            }
        }
    }
    out
}

/// Admissible `(moduli, τ, k)` for the theta formulas.
pub fn theta_grid(bounds: GridBounds) -> Vec<(Moduli, TauData)> {
    (-bounds.k_bound..=bounds.k_bound)
        .flat_map(|k| {
            tau_grid(bounds, move |g| k * (2 * g as i64 - 2))
                .into_iter()
                .filter(move |(_, tau)| k != 0 || tau.iter().any(|&t| t != 0))
                .map(move |(m, tau)| (m, TauData::new(tau, k)))
        })
        .collect()
}

/// Admissible `(moduli, τ)` with `Σ τ_i = g - 1`.
pub fn gm1_grid(bounds: GridBounds) -> Vec<(Moduli, Vec<i64>)> {
    tau_grid(bounds, |g| g as i64 - 1)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_counterexample: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.cases > 0
    }

    /// Folds per-case outcomes, keeping the first failure in input order.
    fn collect(name: &str, outcomes: Vec<Result<(), String>>) -> Self {
        let failures: Vec<String> = outcomes.iter().filter_map(|r| r.clone().err()).collect();
        CheckReport {
            name: name.to_string(),
            cases: outcomes.len(),
            failures: failures.len(),
            first_counterexample: failures.into_iter().next(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub depth: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
}

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub depth: Depth,
    pub seed: u64,
    pub rules: RuleTable,
    pub execution: Execution,
}

impl SelftestConfig {
    pub fn new(depth: Depth, seed: u64) -> Self {
        SelftestConfig { depth, seed, rules: RuleTable::default(), execution: Execution::default() }
    }
}

pub fn check_derive_theta(grid: Vec<(Moduli, TauData)>, rules: &RuleTable, execution: Execution) -> CheckReport {
    let outcomes = exec::map(execution, grid, |(m, t)| {
        let closed = theta_pullback_closed(m, &t.tau, t.k).map_err(|e| e.to_string())?;
        let derived = derive_theta_with(m, &t, rules).map_err(|e| e.to_string())?;
        if closed == derived {
            Ok(())
        } else {
            Err(format!("g={} tau={:?} k={}: derived {derived} but closed form gives {closed}", m.g, t.tau, t.k))
        }
    });
    CheckReport::collect("derive-theta = closed theta", outcomes)
}

pub fn check_derive_gm1(grid: Vec<(Moduli, Vec<i64>)>, rules: &RuleTable, execution: Execution) -> CheckReport {
    let outcomes = exec::map(execution, grid, |(m, tau)| {
        let closed = theta_gm1_pullback(m, &tau).map_err(|e| e.to_string())?;
        for ind in [Indicator::MarkingOutside, Indicator::MarkingInside] {
            let derived = derive_theta_gm1_with(m, &tau, ind, rules).map_err(|e| e.to_string())?;
            if derived != closed {
                return Err(format!("g={} tau={tau:?} ({ind:?}): derived {derived} but closed form gives {closed}", m.g));
            }
        }
        Ok(())
    });
    CheckReport::collect("derive-theta-gm1 = closed theta-gm1", outcomes)
}

pub fn check_hain(grid: Vec<(Moduli, TauData)>, execution: Execution) -> CheckReport {
    let grid: Vec<_> = grid.into_iter().filter(|(_, t)| t.k == 0).collect();
    let outcomes = exec::map(execution, grid, |(m, t)| {
        let closed = theta_pullback_closed(m, &t.tau, 0).map_err(|e| e.to_string())?;
        let hain = hain_theta_pullback(m, &t.tau).map_err(|e| e.to_string())?;
        if closed == hain {
            Ok(())
        } else {
            Err(format!("g={} tau={:?}: hain {hain} vs closed {closed}", m.g, t.tau))
        }
    });
    CheckReport::collect("hain = closed theta (k=0)", outcomes)
}

pub fn check_exp_truncate(max_g: u32) -> CheckReport {
    let outcomes = (1..=max_g)
        .map(|g| {
            let (a, b) = (exp_truncate(g), exp_series_oracle(g));
            if a == b {
                Ok(())
            } else {
                Err(format!("g={g}: {a} vs series {b}"))
            }
        })
        .collect();
    CheckReport::collect("exp-truncate = series oracle", outcomes)
}

/// q-stable multidegrees of a treelike graph under the canonical polarization are exactly `{0̲}`.
pub fn check_treelike_uniqueness(seed: u64, count: u64, max_vertices: usize, execution: Execution) -> CheckReport {
    let seeds: Vec<u64> = (0..count).map(|i| seed.wrapping_add(i)).collect();
    let outcomes = exec::map(execution, seeds, |s| {
        let g = corpus::random_graph(s, &GraphShape::treelike(max_vertices));
        let found = enumerate_stable(&g, &Polarization::CanonicalZero, StabilityMode::Qstable, Basepoint::Marking1, Execution::Sequential)
            .map_err(|e| e.to_string())?;
        if found == vec![Multidegree::zero(&g)] {
            Ok(())
        } else {
            Err(format!("seed {s}: {} q-stable multidegrees on {}", found.len(), graph_json(&g)))
        }
    });
    CheckReport::collect("treelike q-stable set is {0}", outcomes)
}

/// `reduce_treelike` yields `twist(γ) + m = 0` independently of the leaf order.
pub fn check_twister(seed: u64, count: u64, execution: Execution) -> CheckReport {
    let seeds: Vec<u64> = (0..count).map(|i| seed.wrapping_add(i)).collect();
    let outcomes = exec::map(execution, seeds, |s| {
        let mut rng = corpus::rng(s);
        let g = corpus::random_graph_with(&mut rng, &GraphShape::treelike(10));
        let m = Multidegree(corpus::random_vector_with_sum(&mut rng, g.vertex_count(), 6, 0));
        let r = reduce_treelike(&g, &m).map_err(|e| e.to_string())?;
        let t = twist_multidegree(&g, &r.gamma);
        if t.0.iter().zip(&m.0).any(|(a, b)| a + b != 0) {
            return Err(format!("seed {s}: gamma {:?} does not cancel {m}", r.gamma.0));
        }
        let root = r.root;
        let shuffled = reduce_treelike_with(&g, &m, root, |leaves: &[usize]| leaves[rng.gen_range(0..leaves.len())])
            .map_err(|e| e.to_string())?;
        if shuffled.gamma != r.gamma {
            return Err(format!("seed {s}: leaf order changed gamma on {}", graph_json(&g)));
        }
        Ok(())
    });
    CheckReport::collect("twister reduction", outcomes)
}

/// Balanced ⇔ `m₀` q-stable, balanced ⇒ every branch coefficient vanishes,
/// and on treelike graphs the twisted multidegree is `0̲`.
pub fn check_balanced(seed: u64, count: u64, execution: Execution) -> CheckReport {
    let seeds: Vec<u64> = (0..count).map(|i| seed.wrapping_add(i)).collect();
    let outcomes = exec::map(execution, seeds, |s| {
        let mut rng = corpus::rng(s);
        let g = corpus::random_graph_with(&mut rng, &GraphShape::general(8));
        let k = rng.gen_range(-2..=2);
        let target = k * (2 * g.genus() as i64 - 2);
        let tau = corpus::random_vector_with_sum(&mut rng, g.n() as usize, 5, target);
        let t = TauData::new(tau, k);
        let balanced = is_balanced(&g, &t).map_err(|e| e.to_string())?.pass;
        let m0 = crate::stability::base_multidegree(&g, &t).map_err(|e| e.to_string())?;
        let qstable = check_stability(&g, &Polarization::CanonicalZero, &m0, StabilityMode::Qstable, Basepoint::Marking1)
            .map_err(|e| e.to_string())?
            .pass;
        if balanced != qstable {
            return Err(format!("seed {s}: balanced={balanced} but q-stable={qstable}"));
        }
        if g.is_treelike() {
            let coeffs = branch_coefficients(&g, &t).map_err(|e| e.to_string())?;
            if balanced && coeffs.iter().any(|c| c.coefficient != 0) {
                return Err(format!("seed {s}: balanced but a branch coefficient is nonzero"));
            }
            for c in &coeffs {
                let closed = t.k * (1 - 2 * c.h) + t.legs_sum(&c.legs);
                if closed != c.coefficient {
                    return Err(format!("seed {s}: branch {:?} has {} but k(1-2h)+sum gives {closed}", c.side, c.coefficient));
                }
            }
            if !boundary_multidegree_lk(&g, &t).map_err(|e| e.to_string())?.is_zero() {
                return Err(format!("seed {s}: twisted multidegree is not zero"));
            }
        }
        Ok(())
    });
    CheckReport::collect("balanced condition and branch coefficients", outcomes)
}

/// Every two-component compact-type graph with the given genus bound.
pub fn compact_type_pairs(max_g: u32, max_n: u32) -> Vec<DualGraph> {
    let mut out = Vec::new();
    for g1 in 0..=max_g as i64 {
        for g2 in 0..=(max_g as i64 - g1) {
            for n in 1..=max_n {
                for mask in 0..(1u32 << n) {
                    if mask & 1 == 0 {
                        continue;
                    }
                    let on = |bit: bool| -> Vec<i64> { (1..=n as i64).filter(|&i| (mask >> (i - 1) & 1 == 1) == bit).collect() };
                    let (l1, l2) = (on(true), on(false));
                    if 2 * g1 - 1 + l1.len() as i64 <= 0 || 2 * g2 - 1 + l2.len() as i64 <= 0 {
                        continue;
                    }
                    out.push(build(n as i64, &[("v1", g1, &l1), ("v2", g2, &l2)], &[("v1", "v2")]));
                }
            }
        }
    }
    out
}

pub fn check_compact_type(max_g: u32, execution: Execution) -> CheckReport {
    let outcomes = exec::map(execution, compact_type_pairs(max_g, 3), |g| {
        let md = compact_type_gm1_multidegree(&g).map_err(|e| e.to_string())?;
        if md.total() != g.genus() as i64 - 1 {
            return Err(format!("{md} does not sum to g-1 on {}", graph_json(&g)));
        }
        let v = check_stability(&g, &Polarization::TrivialGm1, &md, StabilityMode::Qstable, Basepoint::Marking1)
            .map_err(|e| e.to_string())?;
        if v.pass {
            Ok(())
        } else {
            Err(format!("{md} is not q-stable on {}", graph_json(&g)))
        }
    });
    CheckReport::collect("compact-type g-1 multidegree", outcomes)
}

pub fn check_banana() -> CheckReport {
    let mut outcomes = Vec::new();
    for legs_first in [true, false] {
        let vertices: [(&str, i64, &[i64]); 2] =
            if legs_first { [("v1", 0, &[1, 2]), ("v2", 1, &[])] } else { [("v1", 1, &[]), ("v2", 0, &[1, 2])] };
        let g = build(2, &vertices, &[("v1", "v2"), ("v1", "v2")]);
        let base = g.vertex_of_marking(1).expect("marking 1 is placed");
        let found = enumerate_stable(&g, &Polarization::CanonicalZero, StabilityMode::Qstable, Basepoint::Marking1, Execution::Sequential);
        outcomes.push(match found {
            Ok(list) => {
                let mut oriented: Vec<(i64, i64)> = list.iter().map(|m| (m.0[base], m.0[1 - base])).collect();
                oriented.sort();
                if oriented == vec![(0, 0), (1, -1)] {
                    Ok(())
                } else {
                    Err(format!("banana with marking 1 on {}: {oriented:?}", g.id(base)))
                }
            }
            Err(e) => Err(e.to_string()),
        });
    }
    CheckReport::collect("banana q-stable multidegrees", outcomes)
}

fn build(n: i64, vertices: &[(&str, i64, &[i64])], edges: &[(&str, &str)]) -> DualGraph {
    DualGraph::from_spec(&GraphSpec::from_parts(n, vertices, edges)).expect("stable by construction")
}

fn graph_json(g: &DualGraph) -> String {
    serde_json::to_string(&g.to_spec()).unwrap_or_default()
}

pub fn run(config: &SelftestConfig) -> SelftestReport {
    let bounds = config.depth.grid();
    let ex = config.execution;
    let count = config.depth.corpus_size();
    let exp_g = match config.depth {
        Depth::Small => 6,
        Depth::Full => 8,
    };
    let checks = vec![
        check_derive_theta(theta_grid(bounds), &config.rules, ex),
        check_derive_gm1(gm1_grid(bounds), &config.rules, ex),
        check_hain(theta_grid(bounds), ex),
        check_exp_truncate(exp_g),
        check_banana(),
        check_treelike_uniqueness(config.seed, count, 10, ex),
        check_twister(config.seed, count, ex),
        check_balanced(config.seed, count, ex),
        check_compact_type(bounds.max_g + 1, ex),
    ];
    SelftestReport {
        depth: match config.depth {
            Depth::Small => "small".into(),
            Depth::Full => "full".into(),
        },
        seed: config.seed,
        pass: checks.iter().all(CheckReport::passed),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pushforward::Rule;

    #[test]
    fn grid_respects_sums() {
        let b = GridBounds { max_g: 2, max_n: 3, tau_bound: 2, k_bound: 1 };
        for (m, t) in theta_grid(b) {
            assert_eq!(t.tau.iter().sum::<i64>(), t.k * (2 * m.g as i64 - 2));
            assert!(t.tau.iter().all(|x| x.abs() <= 2));
        }
        // g=0,n=3 with k=0: 19 vectors with zero sum, minus the zero vector
        let count = theta_grid(b).iter().filter(|(m, t)| m.g == 0 && m.n == 3 && t.k == 0).count();
        assert_eq!(count, 18);
    }

    #[test]
    fn compact_pairs_are_compact_type() {
        let pairs = compact_type_pairs(3, 2);
        assert!(!pairs.is_empty());
        assert!(pairs.iter().all(|g| g.classify().compact_type));
    }

    #[test]
    fn small_selftest_passes() {
        let report = run(&SelftestConfig::new(Depth::Small, 1));
        for c in &report.checks {
            assert!(c.passed(), "{}: {:?}", c.name, c.first_counterexample);
        }
        assert!(report.pass);
    }

    #[test]
    fn corrupted_rules_are_caught() {
        let bounds = Depth::Small.grid();
        for rule in Rule::ALL {
            let rules = RuleTable::corrupted(rule);
            let theta = check_derive_theta(theta_grid(bounds), &rules, Execution::Parallel);
            let gm1 = check_derive_gm1(gm1_grid(bounds), &rules, Execution::Parallel);
            assert!(!theta.passed() || !gm1.passed(), "{} went unnoticed", rule.name());
        }
    }
}
