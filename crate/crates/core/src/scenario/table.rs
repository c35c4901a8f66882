use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Rational;

/// Scalar type of probabilities: exact rationals or floats.
pub trait Prob: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn to_f64(&self) -> f64;
    fn from_rational(r: &Rational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn is_negative(&self) -> bool;
    /// `|self − other|` as a float; exact comparisons use `== 0`.
    fn distance(&self, other: &Self) -> f64;

    fn scale(&self, w: &Rational) -> Self {
        self.mul(&Self::from_rational(w))
    }

    fn div_rational(&self, w: &Rational) -> Self {
        self.mul(&Self::from_rational(&w.recip()))
    }
}

impl Prob for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn div_rational(&self, w: &Rational) -> Self {
        self / w.to_f64()
    }
}

impl Prob for Rational {
    fn zero() -> Self {
        Rational::zero()
    }
    fn one() -> Self {
        Rational::one()
    }
    fn to_f64(&self) -> f64 {
        Rational::to_f64(self)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_negative(&self) -> bool {
        Rational::is_negative(self)
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs().to_f64()
    }
}

/// Conditional probabilities `P(y|s,t)` with a uniform outcome count.
///
/// Entries are stored state-major: index `(s·|T| + t)·|Y| + y`. A table for
/// a single measurement doubles as `P(y|s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataTable<T> {
    outcomes: usize,
    states: usize,
    measurements: usize,
    entries: Vec<T>,
}

impl<T: Prob> DataTable<T> {
    pub fn new(outcomes: usize, states: usize, measurements: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != outcomes * states * measurements {
            return Err(Error::Structural(format!(
                "table of shape (|Y|={outcomes}, |S|={states}, |T|={measurements}) needs {} entries, got {}",
                outcomes * states * measurements,
                entries.len()
            )));
        }
        Ok(DataTable { outcomes, states, measurements, entries })
    }

    pub fn from_fn(outcomes: usize, states: usize, measurements: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(outcomes * states * measurements);
        for s in 0..states {
            for t in 0..measurements {
                for y in 0..outcomes {
                    entries.push(f(y, s, t));
                }
            }
        }
        DataTable { outcomes, states, measurements, entries }
    }

    /// `(|Y|, |S|, |T|)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.outcomes, self.states, self.measurements)
    }

    pub fn index(&self, y: usize, s: usize, t: usize) -> usize {
        (s * self.measurements + t) * self.outcomes + y
    }

    pub fn get(&self, y: usize, s: usize, t: usize) -> &T {
        &self.entries[self.index(y, s, t)]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn map<U: Prob>(&self, f: impl Fn(&T) -> U) -> DataTable<U> {
        DataTable {
            outcomes: self.outcomes,
            states: self.states,
            measurements: self.measurements,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> DataTable<f64> {
        self.map(Prob::to_f64)
    }

    /// Largest violation of nonnegativity or per-(s,t) normalization.
    pub fn distribution_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.states {
            for t in 0..self.measurements {
                let mut sum = T::zero();
                for y in 0..self.outcomes {
                    let p = self.get(y, s, t);
                    if p.is_negative() {
                        worst = worst.max(-p.to_f64());
                    }
                    sum = sum.add(p);
                }
                worst = worst.max(sum.distance(&T::one()));
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &DataTable<T>) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_defect() {
        let t = DataTable::from_fn(2, 3, 2, |y, s, t| if y == 0 { 0.25 * (s + t) as f64 / 2.0 } else { 1.0 - 0.25 * (s + t) as f64 / 2.0 });
        assert_eq!(t.shape(), (2, 3, 2));
        assert_eq!(*t.get(0, 2, 1), 0.375);
        assert!(t.distribution_defect() < 1e-15);
        let bad = DataTable::new(2, 1, 1, vec![0.7, 0.7]).unwrap();
        assert!((bad.distribution_defect() - 0.4).abs() < 1e-12);
        assert!(DataTable::new(2, 1, 1, vec![0.5]).is_err());
    }
}
