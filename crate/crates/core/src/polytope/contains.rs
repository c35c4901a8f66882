use serde::{Deserialize, Serialize};

use super::{Constraint, HPolytope};
use crate::error::{Error, Result};
use crate::linalg::Rational;

#[derive(Clone, Copy, Debug)]
pub enum Point<'a> {
    Exact(&'a [Rational]),
    Float(&'a [f64]),
}

impl<'a> From<&'a [Rational]> for Point<'a> {
    fn from(x: &'a [Rational]) -> Self {
        Point::Exact(x)
    }
}

impl<'a> From<&'a Vec<Rational>> for Point<'a> {
    fn from(x: &'a Vec<Rational>) -> Self {
        Point::Exact(x)
    }
}

impl<'a> From<&'a [f64]> for Point<'a> {
    fn from(x: &'a [f64]) -> Self {
        Point::Float(x)
    }
}

impl<'a> From<&'a Vec<f64>> for Point<'a> {
    fn from(x: &'a Vec<f64>) -> Self {
        Point::Float(x)
    }
}

impl Point<'_> {
    fn len(&self) -> usize {
        match self {
            Point::Exact(x) => x.len(),
            Point::Float(x) => x.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Inequality,
    Equality,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ConstraintKind,
    /// Index into the polytope's inequality or equality list.
    pub index: usize,
    pub constraint: Constraint,
    /// `a·x − b` for inequalities, `|a·x − b|` for equalities.
    pub margin: f64,
    /// The same margin, for exact points.
    pub exact_margin: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    Inside,
    Outside(Violation),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }
}

/// Tests `point ∈ h`. Exact points are tested exactly (`tol` is ignored);
/// float points may exceed each constraint by `tol`. On failure the most
/// violated constraint is reported (the first one on ties).
pub fn contains<'a>(h: &HPolytope, point: impl Into<Point<'a>>, tol: f64) -> Result<Membership> {
    let point = point.into();
    if point.len() != h.dim {
        return Err(Error::Structural(format!("point of dimension {} tested against a {}-dimensional polytope", point.len(), h.dim)));
    }
    let mut worst: Option<Violation> = None;
    let rows = h
        .inequalities
        .iter()
        .enumerate()
        .map(|(i, c)| (ConstraintKind::Inequality, i, c))
        .chain(h.equalities.iter().enumerate().map(|(i, c)| (ConstraintKind::Equality, i, c)));
    for (kind, index, c) in rows {
        let (margin, exact_margin) = match point {
            Point::Exact(x) => {
                let s = c.slack(x);
                let m = if kind == ConstraintKind::Equality { s.abs() } else { s };
                if !m.is_positive() {
                    continue;
                }
                (m.to_f64(), Some(m))
            }
            Point::Float(x) => {
                let s = c.slack_f64(x);
                let m = if kind == ConstraintKind::Equality { s.abs() } else { s };
                if !(m > tol) {
                    continue;
                }
                (m, None)
            }
        };
        let better = match &worst {
            None => true,
            Some(w) => match (&exact_margin, &w.exact_margin) {
                (Some(a), Some(b)) => a > b,
                _ => margin > w.margin,
            },
        };
        if better {
            worst = Some(Violation { kind, index, constraint: c.clone(), margin, exact_margin });
        }
    }
    Ok(worst.map_or(Membership::Inside, Membership::Outside))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> HPolytope {
        let rows = [[1, 0], [-1, 0], [0, 1], [0, -1]];
        let bounds = [1, 0, 1, 0];
        HPolytope::new(
            2,
            rows.iter().zip(bounds).map(|(a, b)| Constraint::from_ints(a, Rational::from_integer(b))).collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn center_is_inside() {
        let c = vec![Rational::new(1, 2), Rational::new(1, 2)];
        assert!(contains(&square(), &c, 0.0).unwrap().is_inside());
        assert!(contains(&square(), &vec![0.5, 0.5], 1e-9).unwrap().is_inside());
    }

    #[test]
    fn outside_reports_facet_and_margin() {
        let p = vec![Rational::from_integer(2), Rational::zero()];
        let Membership::Outside(v) = contains(&square(), &p, 0.0).unwrap() else { panic!("expected outside") };
        assert_eq!(v.constraint, Constraint::from_ints(&[1, 0], Rational::one()));
        assert_eq!(v.exact_margin, Some(Rational::one()));
        let Membership::Outside(v) = contains(&square(), &vec![2.0, 0.0], 1e-9).unwrap() else { panic!() };
        assert_eq!(v.index, 0);
        assert_eq!(v.margin, 1.0);
    }

    #[test]
    fn float_slack_and_equalities() {
        let mut h = square();
        h.equalities.push(Constraint::from_ints(&[1, -1], Rational::zero()));
        assert!(contains(&h, &vec![0.3, 0.3 + 1e-12], 1e-9).unwrap().is_inside());
        let Membership::Outside(v) = contains(&h, &vec![0.2, 0.3], 1e-9).unwrap() else { panic!() };
        assert_eq!(v.kind, ConstraintKind::Equality);
        assert!((v.margin - 0.1).abs() < 1e-12);
        assert!(contains(&h, &vec![0.5], 0.0).is_err());
    }
}
