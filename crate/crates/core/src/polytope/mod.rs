//! Exact convex polytopes in H- and V-representation.
//!
//! Lower-dimensional polytopes are handled relative to their affine hull.
//! The hull is kept as equalities in reduced row-echelon form; inequalities
//! are stored with zero coefficients on the hull's pivot coordinates and
//! scaled to coprime integer coefficients. That form is unique for each
//! facet, which is what makes duplicate removal and exact round-trip
//! comparisons possible.

mod contains;
mod convert;
mod dd;

pub use contains::{contains, ConstraintKind, Membership, Point, Violation};
pub use convert::{h_to_v, project, v_to_h};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, primitive_scale, rref, LpBuilder, Rational};

/// `coeffs·x ≤ bound` or `coeffs·x = bound`, depending on where it is stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub bound: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, bound: Rational) -> Self {
        Constraint { coeffs, bound }
    }

    pub fn from_ints(coeffs: &[i64], bound: Rational) -> Self {
        Constraint { coeffs: coeffs.iter().map(|&c| Rational::from_integer(c)).collect(), bound }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `coeffs·x − bound`.
    pub fn slack(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) - &self.bound
    }

    pub fn slack_f64(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c.to_f64() * v).sum::<f64>() - self.bound.to_f64()
    }

    pub fn is_zero_row(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub(crate) fn scaled_primitive(mut self) -> Constraint {
        if !self.is_zero_row() {
            let s = primitive_scale(&self.coeffs);
            for c in &mut self.coeffs {
                *c = &*c * &s;
            }
            self.bound = &self.bound * &s;
        }
        self
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let sep = if first { "" } else { " " };
            let gap = if first || sign.is_empty() { "" } else { " " };
            if mag == Rational::one() {
                write!(f, "{sep}{sign}{gap}x{j}")?;
            } else {
                write!(f, "{sep}{sign}{gap}{mag}·x{j}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " ≤ {}", self.bound)
    }
}

/// `{x : A·x ≤ b, E·x = d}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HPolytope {
    pub dim: usize,
    pub inequalities: Vec<Constraint>,
    pub equalities: Vec<Constraint>,
}

/// Convex hull of finitely many points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VPolytope {
    pub dim: usize,
    pub vertices: Vec<Vec<Rational>>,
}

impl VPolytope {
    /// Checks dimensions; sorts and deduplicates the points. Minimality is
    /// not enforced here; see [`VPolytope::minimal`].
    pub fn new(dim: usize, mut vertices: Vec<Vec<Rational>>) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::Structural(format!("point of dimension {} in a {dim}-dimensional V-polytope", v.len())));
        }
        vertices.sort();
        vertices.dedup();
        Ok(VPolytope { dim, vertices })
    }

    /// Hull of `points`, keeping only the actual vertices.
    pub fn minimal(dim: usize, points: Vec<Vec<Rational>>) -> Result<Self> {
        let v = VPolytope::new(dim, points)?;
        project(&v, &(0..dim).collect::<Vec<_>>())
    }
}

/// Affine hull `{x : E·x = d}` in reduced row-echelon form.
#[derive(Clone, Debug)]
pub(crate) struct Hull {
    dim: usize,
    /// RREF rows of `[E | d]`, length `dim + 1`.
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
    pub(crate) free: Vec<usize>,
}

impl Hull {
    /// `None` if the equalities are inconsistent.
    pub(crate) fn new(equalities: &[Constraint], dim: usize) -> Option<Hull> {
        let aug: Vec<Vec<Rational>> = equalities
            .iter()
            .map(|c| {
                let mut r = c.coeffs.clone();
                r.push(c.bound.clone());
                r
            })
            .collect();
        let (rows, pivots) = rref(&aug, dim + 1);
        if pivots.last() == Some(&dim) {
            return None;
        }
        let free = (0..dim).filter(|j| !pivots.contains(j)).collect();
        Some(Hull { dim, rows, pivots, free })
    }

    /// Rewrites `c` so it has zero coefficients on the pivot coordinates;
    /// equivalent to `c` on the hull.
    pub(crate) fn reduce(&self, c: &Constraint) -> Constraint {
        let mut a = c.coeffs.clone();
        let mut b = c.bound.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if a[p].is_zero() {
                continue;
            }
            let f = a[p].clone();
            for j in 0..self.dim {
                if !row[j].is_zero() {
                    a[j] -= &f * &row[j];
                }
            }
            b -= &f * &row[self.dim];
        }
        Constraint { coeffs: a, bound: b }
    }

    /// Point of the hull with the given free coordinates.
    pub(crate) fn lift(&self, free_values: &[Rational]) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.dim];
        for (&f, v) in self.free.iter().zip(free_values) {
            x[f] = v.clone();
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let mut v = row[self.dim].clone();
            for &f in &self.free {
                if !row[f].is_zero() {
                    v -= &row[f] * &x[f];
                }
            }
            x[p] = v;
        }
        x
    }

    /// Equalities in canonical form: primitive integer coefficients.
    pub(crate) fn equalities(&self) -> Vec<Constraint> {
        self.rows
            .iter()
            .map(|r| Constraint { coeffs: r[..self.dim].to_vec(), bound: r[self.dim].clone() }.scaled_primitive())
            .collect()
    }
}

impl HPolytope {
    pub fn new(dim: usize, inequalities: Vec<Constraint>, equalities: Vec<Constraint>) -> Result<Self> {
        if let Some(c) = inequalities.iter().chain(&equalities).find(|c| c.dim() != dim) {
            return Err(Error::Structural(format!(
                "constraint of dimension {} in a {dim}-dimensional H-polytope",
                c.dim()
            )));
        }
        Ok(HPolytope { dim, inequalities, equalities })
    }

    /// Canonical form relative to the declared equalities: RREF hull,
    /// inequalities reduced modulo the hull and scaled to coprime integer
    /// coefficients, vacuous rows dropped, rows sorted and deduplicated.
    ///
    /// Inconsistent equalities are kept verbatim (the polytope is empty).
    pub fn canonical(&self) -> HPolytope {
        let Some(hull) = Hull::new(&self.equalities, self.dim) else {
            return self.clone();
        };
        let mut inequalities: Vec<Constraint> = self
            .inequalities
            .iter()
            .map(|c| hull.reduce(c).scaled_primitive())
            .filter(|c| !(c.is_zero_row() && !c.bound.is_negative()))
            .collect();
        inequalities.sort();
        inequalities.dedup();
        HPolytope { dim: self.dim, inequalities, equalities: hull.equalities() }
    }

    pub(crate) fn lp(&self) -> LpBuilder {
        let mut lp = LpBuilder::new(self.dim);
        lp.all_free();
        for c in &self.inequalities {
            lp.le(c.coeffs.clone(), c.bound.clone());
        }
        for c in &self.equalities {
            lp.eq(c.coeffs.clone(), c.bound.clone());
        }
        lp
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(!crate::linalg::lp_solve(&self.lp().build()?)?.is_feasible())
    }

    /// Moves implicit equalities out of the inequality list and drops
    /// redundant inequalities, using exact LPs; returns the canonical form.
    ///
    /// This does not use vertex enumeration, so it serves as an independent
    /// check of [`h_to_v`]/[`v_to_h`].
    pub fn minimize(&self) -> Result<HPolytope> {
        if self.is_empty()? {
            return Err(Error::EmptyPolytope);
        }
        let (ineqs, eqs) = convert::split_implicit(self)?;
        let mut h = HPolytope { dim: self.dim, inequalities: ineqs, equalities: eqs }.canonical();
        let mut i = 0;
        while i < h.inequalities.len() {
            let target = h.inequalities[i].clone();
            let mut others = h.clone();
            others.inequalities.remove(i);
            let mut lp = others.lp();
            lp.maximize(target.coeffs.clone());
            let redundant = match crate::linalg::lp_solve(&lp.build()?)? {
                crate::linalg::LpVerdict::Optimal { value, .. } => value <= target.bound,
                _ => false,
            };
            if redundant {
                h = others;
            } else {
                i += 1;
            }
        }
        Ok(h)
    }
}

impl fmt::Display for HPolytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.equalities {
            writeln!(f, "{}", c.to_string().replace('≤', "="))?;
        }
        for c in &self.inequalities {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn canonical_reduces_modulo_hull() {
        // On x0 + x1 = 1, the rows 2·x0 ≤ 1 and -2·x1 ≤ -1 are the same facet.
        let h = HPolytope::new(
            2,
            vec![Constraint::from_ints(&[2, 0], r(1, 1)), Constraint::from_ints(&[0, -2], r(-1, 1))],
            vec![Constraint::from_ints(&[3, 3], r(3, 1))],
        )
        .unwrap();
        let c = h.canonical();
        assert_eq!(c.equalities, vec![Constraint::from_ints(&[1, 1], r(1, 1))]);
        assert_eq!(c.inequalities, vec![Constraint::from_ints(&[0, -1], r(-1, 2))]);
    }

    #[test]
    fn minimize_square_with_redundancy() {
        let rows = [[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]];
        let bounds = [1, 0, 1, 0, 5];
        let h = HPolytope::new(2, rows.iter().zip(bounds).map(|(a, b)| Constraint::from_ints(a, r(b, 1))).collect(), vec![])
            .unwrap();
        let m = h.minimize().unwrap();
        assert_eq!(m.inequalities.len(), 4);
        assert!(m.equalities.is_empty());
    }

    #[test]
    fn minimize_finds_implicit_equalities() {
        // x ≤ 1 and x ≥ 1 pin x.
        let h = HPolytope::new(
            2,
            vec![
                Constraint::from_ints(&[1, 0], r(1, 1)),
                Constraint::from_ints(&[-1, 0], r(-1, 1)),
                Constraint::from_ints(&[0, 1], r(1, 1)),
                Constraint::from_ints(&[0, -1], r(0, 1)),
            ],
            vec![],
        )
        .unwrap();
        let m = h.minimize().unwrap();
        assert_eq!(m.equalities, vec![Constraint::from_ints(&[1, 0], r(1, 1))]);
        assert_eq!(m.inequalities.len(), 2);
    }

    #[test]
    fn display() {
        let c = Constraint::new(vec![r(1, 1), r(0, 1), r(-2, 1), r(1, 2)], r(1, 2));
        assert_eq!(c.to_string(), "x0 - 2·x2 + 1/2·x3 ≤ 1/2");
    }
}
