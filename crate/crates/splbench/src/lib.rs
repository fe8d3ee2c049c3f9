//! Benchmark toolkit for active model learning of software product lines.
//!
//! The crate bundles everything needed to build and evaluate SPL learning
//! benchmarks:
//!
//! - [`feature_model`]: FeatureIDE XML feature models, feature-constraint
//!   expressions, configuration validation and enumeration.
//! - [`mealy`]: deterministic complete Mealy machines with dot
//!   serialization, minimization and shortest-counterexample equivalence.
//! - [`ffsm`]: featured finite state machines and the product derivation
//!   operator that projects them onto per-configuration Mealy machines.
//! - [`generator`]: seeded random FFSM/FSM-family synthesis over a feature
//!   model, guaranteed to contain a product that needs more than one
//!   learning round.
//! - [`learner`]: an instrumented L* for Mealy machines with pluggable
//!   equivalence oracles and exact query/symbol/reset accounting.
//! - [`harness`]: benchmark orchestration, family-level conciseness and
//!   accuracy metrics, multi-round analysis and report emission.

pub mod feature_model;
pub mod rng;
pub mod ffsm;
pub mod generator;
pub mod harness;
pub mod learner;
pub mod mealy;

pub use feature_model::{Configuration, FeatureExpr, FeatureModel};
pub use ffsm::Ffsm;
pub use generator::GenSpec;
pub use harness::{BenchReport, RoundAnalysis};
pub use learner::{LearnMetrics, LearnerOptions};
pub use mealy::MealyMachine;
