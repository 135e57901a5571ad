//! Derivative-free optimization over mixed continuous and integer variables
//! with box and general inequality constraints.
//!
//! The solver alternates projected line searches along coordinate and dense
//! directions on the continuous block with sufficient-decrease searches along
//! primitive integer directions on the integer block. General constraints are
//! handled through an exact-style penalty.

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod directions;
pub mod error;
pub mod external;
pub mod linesearch;
pub mod model;
pub mod oracle;
pub mod problems;
pub mod solver;

pub use directions::{ContinuousDirection, DenseSequence, DirectionSet, PrimitiveDirection};
pub use error::{Error, Result};
pub use model::{project_box, Bounds, VariablePartition};
pub use oracle::{BudgetedOracle, Evaluation, ProblemInstance, Response};
pub use problems::{build_problem, list_problems, ProblemSpec, Suite};
pub use solver::{
    penalty_value, solve, solve_bound_constrained, solve_constrained, PenaltyConfig, SolveReport,
    SolverConfig, Termination,
};
