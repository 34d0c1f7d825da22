//! Combinatorics of stable marked dual graphs and the divisor-class calculus
//! of the compactified universal Jacobian.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] builds and validates dual graphs and answers subcurve queries
//!   (`κ_Y`, `deg ω|_Y`, treelike / compact type / banana classification).
//! * [`stability`] decides semistability, stability and q-stability of
//!   multidegrees for a polarization, the `(τ, k)`-balanced condition, and
//!   enumerates all (q-)stable multidegrees.
//! * [`twister`] implements the chip-firing action of twisters through the
//!   graph Laplacian and the leaf-peeling reduction on treelike graphs.
//! * [`divisor`] holds exact divisor classes on the moduli space of stable
//!   marked curves together with the closed-form pullback formulas.
//! * [`pushforward`] derives those formulas mechanically from classes on the
//!   universal curve and provides the exponential-truncation engine.
//! * [`selftest`] runs the cross-formula grids and random corpora.
//!
//! All arithmetic is exact. Data-parallel loops go through [`exec`], which
//! falls back to sequential iteration when the `parallel` feature is off.

pub mod corpus;
pub mod divisor;
pub mod exec;
pub mod graph;
pub mod pushforward;
pub mod rational;
pub mod selftest;
pub mod stability;
pub mod twister;

pub use divisor::{BoundaryIndex, DivisorClass, DivisorError};
pub use exec::Execution;
pub use graph::{DualGraph, GraphError, GraphSpec, Subcurve, Violation};
pub use pushforward::{FiberClass, GradedAtomPoly, PushforwardError, RuleTable};
pub use rational::Q;
pub use stability::{Multidegree, Polarization, StabilityError, StabilityMode, TauData};
pub use twister::{TwisterError, TwisterVector};
