use thiserror::Error;

/// Errors raised by mesh construction, discretization and solution.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("face {vertices:?} is shared by {count} cells (at most 2 allowed)")]
    NonManifoldFace { vertices: Vec<usize>, count: usize },

    #[error("cell {cell} has zero volume")]
    DegenerateCell { cell: usize },

    #[error("face has zero measure")]
    DegenerateFace,

    #[error("no {dim}d quadrature rule of degree {degree} (supported: 0..=20)")]
    UnsupportedDegree { dim: usize, degree: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero pivot in incomplete factorization at row {row}")]
    ZeroPivot { row: usize },

    #[error("bisection closure did not terminate after {sweeps} sweeps")]
    BisectionDidNotTerminate { sweeps: usize },

    #[error("cell index {cell} out of range ({ncells} cells)")]
    CellOutOfRange { cell: usize, ncells: usize },

    #[error("exact solution is singular at {point:?}")]
    SingularPoint { point: [f64; 3] },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear solver failed: {0}")]
    SolverFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
