use thiserror::Error;

use crate::model::{LecturerId, ProjectId, StudentId};
use crate::solvers::OptimalResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("invalid instance: {0}")]
    Invalid(String),

    #[error("{project} is not acceptable to {student}")]
    NotAcceptable {
        student: StudentId,
        project: ProjectId,
    },

    #[error("{project} is not offered by {lecturer}")]
    NotOffered {
        lecturer: LecturerId,
        project: ProjectId,
    },

    #[error("matching is not feasible: {0}")]
    InfeasibleMatching(String),

    #[error("matching admits {count} blocking pair(s), first: {first}")]
    BlockingPairsPresent { count: usize, first: String },

    /// Rotating a coalition left a blocking pair behind.
    #[error("coalition rotation introduced blocking pair {0}")]
    RotationBrokeStability(String),

    #[error("variable {name} has non-integral value {value}")]
    NonIntegral { name: String, value: f64 },

    #[error("no value supplied for variable {0}")]
    MissingValue(String),

    #[error("search exceeded its budget of {limit} nodes")]
    SizeGuard { limit: u64 },

    /// The exact search ran out of nodes or time. The payload holds the best
    /// stable matching found so far, flagged as a lower bound only.
    #[error("budget exceeded after {} nodes; incumbent size {}", .0.nodes_explored, .0.size)]
    BudgetExceeded(Box<OptimalResult>),

    /// An algorithm produced a matching that failed verification.
    #[error("unstable output: {0}")]
    Unstable(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
