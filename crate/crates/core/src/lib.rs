//! Exact solver for the 0-1 multidimensional knapsack problem.
//!
//! The search space is split into hyperplanes `sum x = k`. Each hyperplane is
//! explored by resolution search: a family of clauses records the regions
//! already proved non-improving, and each descent either finds a better
//! solution or adds a new clause. Small residual subproblems are finished by
//! branch and bound.

pub mod assignment;
pub mod bnb;
pub mod bounds;
pub mod driver;
pub mod family;
pub mod generate;
pub mod incumbent;
pub mod model;
pub mod obstacle;
pub mod oracle;
pub mod report;
pub mod simplex;

pub use assignment::{Coordinate, Origin, PartialAssignment};
pub use bounds::{CardinalityRange, GapConvention, HyperplaneData, HyperplaneStatus, VarClass};
pub use driver::{greedy_lb, solve, Policy, ProofStatus, SolveConfig, SolveReport};
pub use family::{Certificate, ClauseFamily, Provenance};
pub use incumbent::Incumbent;
pub use model::{
    evaluate, parse_orlib, serialize_orlib, FullSolution, Instance, KnownOptimaRegistry,
};
