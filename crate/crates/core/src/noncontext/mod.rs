//! Noncontextual ontological models, the data polytope they generate, and
//! membership tests for data tables.

mod data;
mod membership;
mod model;
mod symmetry;

pub use data::{nc_data_polytope, ontic_responses, response_polytope, DataPolytope, NoncontextualityInequality};
pub use membership::{
    model_lp, nc_membership, nc_membership_with, verify_certificate, FacetViolation, NCReport, TableEntry, Verdict, MEMBERSHIP_TOL,
    RATIONALIZE_DENOMINATOR,
};
pub use model::{transfer_model, trivial_projective_model, OntologicalModel};
pub use symmetry::{express_on, sparse_form, Relabeling, SymmetryGroup, MAX_LABELS};
