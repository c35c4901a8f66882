//! Small dense quantum kernel: states, effects, POVMs and the Born rule.
//!
//! Quantum data is kept in `f64`. Exactness lives on the polytope side; the
//! quantum tables only need to be compared against it to float tolerance.

mod matrix;
mod povm;

pub use matrix::{hermitian_eigen, hermitian_eigenvalues, ComplexMatrix, HermitianEigen};
pub use povm::{bloch_plane_state, born_table, is_povm, is_projector, Effect, QuantumState};

/// Numerical tolerances shared by the quantum kernel.
pub mod tol {
    /// Maximum entrywise deviation from Hermiticity.
    pub const HERM: f64 = 1e-9;
    /// Deviation of a POVM sum from the identity, or of probabilities from 1.
    pub const SUM: f64 = 1e-9;
    pub const TRACE: f64 = 1e-9;
    /// Slack on the minimum eigenvalue in positivity checks.
    pub const PSD: f64 = 1e-9;
    /// Idempotency slack for projectors.
    pub const PROJ: f64 = 1e-9;
}
