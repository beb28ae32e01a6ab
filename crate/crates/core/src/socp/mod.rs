//! Interior-point solver for cone programs over products of nonnegative
//! orthants and second-order cones.

mod cone;
mod program;
mod solver;

use thiserror::Error;

pub use cone::{ConeBlock, ConeSpec};
pub use program::ConicProgram;
pub use solver::{solve, ConicSolution, IterationRecord, SolveStatus, SolverTolerances};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SocpError {
    #[error("inconsistent problem dimensions: {0}")]
    Dimension(String),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("equality row {row} contradicts earlier rows")]
    InconsistentEqualities { row: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}
