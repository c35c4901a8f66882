use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Shapes or dimensions that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),
    /// An argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// A declared property (POVM, equivalence, model constraint) does not hold.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// An internal consistency check failed; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
