//! Exact rational arithmetic, dense elimination and linear programming.
//!
//! Nothing in this module touches floating point except the explicit
//! conversion helpers on [`Rational`] and [`rational_reconstruct`].

mod lp;
mod matrix;
mod rational;
mod reconstruct;

pub use lp::{lp_solve, LpBuilder, LpProblem, LpVerdict, Relation};
pub use matrix::{inverse, nullspace, rank, rank_of_rows, rref, solve, RationalMatrix};
pub(crate) use matrix::{bareiss_echelon, normalize_sign, rank_of_int_rows};
pub use rational::{dot, ints_to_rationals, primitive_integer_vector, primitive_scale, Rational};
pub use reconstruct::{limit_denominator, rational_reconstruct};
