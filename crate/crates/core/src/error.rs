use thiserror::Error;

/// Errors raised anywhere in the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// The evaluation budget is spent. Solvers turn this into normal termination.
    #[error("evaluation budget of {0} exhausted")]
    BudgetExhausted(usize),

    /// A point outside `X ∩ Z` was sent to the oracle. Always a programming error.
    #[error("infeasible evaluation request: {0}")]
    InfeasibleRequest(String),

    /// Malformed or non-finite reply from a black-box oracle.
    #[error("oracle protocol error: {0}")]
    Protocol(String),

    #[error("invalid problem definition: {0}")]
    InvalidProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("zero vector has no primitive representative")]
    ZeroVector,

    #[error("dense direction generator produced {0} consecutive degenerate draws")]
    DegenerateSequence(usize),

    #[error("no feasible coordinate direction at the starting point")]
    EmptyDirectionSet,

    /// Every feasible primitive direction at the point is already in the set.
    #[error("discrete direction set is complete at the current point")]
    SetComplete,

    /// The shell enumeration cannot proceed further (shell too large to index,
    /// or the per-call scan cap was hit without a new direction).
    #[error("discrete direction enumeration limit reached")]
    EnumerationLimit,

    #[error("expansion step did not terminate after {0} steps")]
    NonTerminatingExpansion(usize),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("constraint family {family} needs n >= {min}, got {n}")]
    DimensionTooSmall { family: u8, min: usize, n: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
