use thiserror::Error;

/// Errors raised by the solver and the equilibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("vertex {vertex} on the Neumann boundary has no neighbour off the Neumann boundary")]
    NoInteriorNeighbor { vertex: usize },

    #[error("non-positive deformation gradient determinant {det:e}{}", element.map(|e| format!(" in element {e}")).unwrap_or_default())]
    NonpositiveDet { element: Option<usize>, det: f64 },

    #[error("Newton iteration diverged at load {load}: residual history {history:?}")]
    NewtonDiverged { load: f64, history: Vec<f64> },

    #[error("sparse linear solve failed: {0}")]
    LinearSolveFailed(String),

    #[error("constraint system on element {element} is rank deficient with inconsistent data (residual {residual:e})")]
    RankDeficientConstraints { element: usize, residual: f64 },

    #[error("patch right-hand side is outside the range of the constraint operator (relative residual {residual:e})")]
    IncompatibleRhs { residual: f64 },

    #[error("local stress mass matrix is not positive definite")]
    SingularMass,

    #[error("patch {patch}: adjoint null space has dimension {computed}, expected {predicted}")]
    NullSpaceMismatch {
        patch: usize,
        computed: usize,
        predicted: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
