use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references undeclared vertex `{vertex}`")]
    DanglingEdge { edge: String, vertex: String },
    #[error("edges do not chain into a path: {0}")]
    InvalidPath(String),
    #[error("inconsistent tail selection: {0}")]
    InconsistentTails(String),
    #[error("invalid depth: {0}")]
    InvalidDepth(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("families are defined over different graphs")]
    GraphMismatch,
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("subspace is not reducing: {operator} moves it by {defect:.3e}")]
    NotReducing { operator: String, defect: f64 },
    #[error("graph is not a disjoint union of cycles: {0}")]
    NotCycleUnion(String),
    #[error("gauge parameter must be unimodular, |z| - 1 = {0:.3e}")]
    NotUnimodular(f64),
    #[error("columns are not orthonormal (defect {0:.3e})")]
    NotOrthonormal(f64),
    #[error("family is not a Toeplitz-Cuntz-Krieger family: {0}")]
    NotTck(String),
    #[error("defect rank at vertex `{vertex}` is ambiguous: eigenvalue {eigenvalue:.3e} is neither 0 nor 1 at tolerance")]
    AmbiguousRank { vertex: String, eigenvalue: f64 },
    #[error("vertex `{0}` is not singular for this family")]
    NotSingular(String),
    #[error("insufficient inflation: need {needed} defect directions, have {available}")]
    InsufficientInflation { needed: usize, available: usize },
    #[error("inconsistent decomposition: {0}")]
    InconsistentDecomposition(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("cost guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
