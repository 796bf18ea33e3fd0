//! Violator spaces: explicit tables, structure analysis, and randomized
//! basis computation over live oracles.
//!
//! Geometric instances are generic over [`instances::Scalar`]; the aliases
//! below fix the usual choices. Exact rationals are the default everywhere
//! a boundary case can change an answer.

pub mod algorithms;
pub mod explicit;
pub mod grid_uso;
pub mod instances;
pub mod io;
pub mod oracle;
pub mod set;

pub use algorithms::{
    basis1, basis2, sampling_check, solve, solve_trivial, trivial_basis, SamplingReport, SolveError,
    SolverRng,
};
pub use explicit::{
    AbstractLpTable, BasisStructure, ConcreteLpProblem, ExplicitError, ExplicitViolatorSpace,
    LpValue,
};
pub use grid_uso::{GridPartition, GridUso, UsoError};
pub use instances::{tabulate, Ball, HalfplaneLp, ImplicitRegion, InstanceError, PointSet, Scalar};
pub use oracle::{OracleError, SolveStats, ViolationOracle, ViolatorSpace};
pub use set::ConstraintSet;

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

pub type ExactPointSet = PointSet<Rational>;
pub type ExactHalfplaneLp = HalfplaneLp<Rational>;
pub type ExactBall = Ball<Rational>;

pub type PointSetF64 = PointSet<f64>;
pub type HalfplaneLpF64 = HalfplaneLp<f64>;
pub type PointSetF32 = PointSet<f32>;
pub type HalfplaneLpF32 = HalfplaneLp<f32>;
