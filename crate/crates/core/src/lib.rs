//! Multi- and single-objective architecture search over tabular benchmarks.
//!
//! The crate provides the cell-based encoding with its identity-cell
//! equivalence, benchmark tables and synthetic landscapes, a strict-domination
//! Pareto archive with hypervolume and IGD, random search, scalarized local
//! search, NSGA-II, MO-GOMEA, a GA and GOMEA, plus the experiment harness and
//! statistics used to compare them.

pub mod benchmark;
pub mod error;
pub mod evo;
pub mod experiment;
pub mod local;
pub mod pareto;
pub mod rng;
pub mod run;
pub mod space;
pub mod stats;

pub use benchmark::{
    exhaustive_pareto_front, generate_synthetic, BenchmarkRecord, BenchmarkTable, ComplexityKind,
    Evaluation, EvaluationCache, Evaluator, ObjectiveSpec, SyntheticLandscape,
};
pub use error::{Error, Result};
pub use pareto::{dominates, epsilon_threshold, hypervolume, igd, scalarize, Archive, ArchiveEntry, ObjectiveVector};
pub use space::{Genotype, SearchSpace, SpaceDescription};
pub use run::{Algorithm, Mode, Run, RunLog, RunSettings, StopReason};
