//! Dense exact matrices and the elimination routines built on them.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::rational::{dot, primitive_integer_vector, Rational};
use crate::error::{Error, Result};

/// Row-major dense matrix of rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Structural(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix { rows, cols, entries: vec![Rational::zero(); rows * cols] }
    }

    /// Builds a matrix from row vectors; `cols` is needed when `rows` is empty.
    pub fn from_rows(rows: &[Vec<Rational>], cols: usize) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Structural(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            entries.extend(r.iter().cloned());
        }
        Ok(RationalMatrix { rows: rows.len(), cols, entries })
    }

    pub fn from_columns(columns: &[Vec<Rational>], rows: usize) -> Result<Self> {
        let mut m = RationalMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::Structural(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational) {
        self.entries[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        if v.len() != self.cols {
            return Err(Error::Structural(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = RationalMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }
}

/// Clears each row's denominators so the row becomes an integer vector
/// spanning the same line.
fn integer_rows(rows: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    rows.iter().map(|r| primitive_integer_vector(r)).collect()
}

/// Fraction-free (Bareiss) forward elimination to row-echelon form.
///
/// Every intermediate entry is a minor of the input, so the division by the
/// previous pivot is exact. Returns the nonzero echelon rows and their pivot
/// columns.
pub(crate) fn bareiss_echelon(mut a: Vec<Vec<BigInt>>, cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let n = a.len();
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == n {
            break;
        }
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let (top, bottom) = a.split_at_mut(r + 1);
        let pivot_row = &top[r];
        for row in bottom.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..cols {
                let v = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                debug_assert!((&v % &prev).is_zero(), "inexact Bareiss division");
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank_of_rows(rows: &[Vec<Rational>], cols: usize) -> usize {
    bareiss_echelon(integer_rows(rows), cols).1.len()
}

pub(crate) fn rank_of_int_rows(rows: Vec<Vec<BigInt>>, cols: usize) -> usize {
    bareiss_echelon(rows, cols).1.len()
}

pub fn rank(m: &RationalMatrix) -> usize {
    rank_of_rows(&m.row_vecs(), m.cols)
}

/// Flips the sign of `v` so that its first nonzero entry is positive.
pub(crate) fn normalize_sign(v: &mut [BigInt]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first < &BigInt::zero() {
            for x in v.iter_mut() {
                *x = -&*x;
            }
        }
    }
}

/// Basis of the right nullspace `{v : m·v = 0}`.
///
/// Basis vectors are primitive integer vectors (coprime entries) whose first
/// nonzero entry is positive; one vector per non-pivot column, in column
/// order.
pub fn nullspace(m: &RationalMatrix) -> Vec<Vec<Rational>> {
    let cols = m.cols;
    let (echelon, pivots) = bareiss_echelon(integer_rows(&m.row_vecs()), cols);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![Rational::zero(); cols];
        x[free] = Rational::one();
        for (k, &p) in pivots.iter().enumerate().rev() {
            let row = &echelon[k];
            let mut s = Rational::zero();
            for j in p + 1..cols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s += Rational::from_integer(row[j].clone()) * &x[j];
                }
            }
            x[p] = -s / Rational::from_integer(row[p].clone());
        }
        let mut ints = primitive_integer_vector(&x);
        normalize_sign(&mut ints);
        basis.push(ints.into_iter().map(Rational::from_integer).collect());
    }
    basis
}

/// Reduced row-echelon form; returns the nonzero rows and pivot columns.
///
/// Pivot entries are 1 and every other entry of a pivot column is 0, so the
/// result depends only on the row space of the input.
pub fn rref(rows: &[Vec<Rational>], cols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let n = a.len();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == n {
            break;
        }
        let Some(p) = (r..n).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].recip();
        for j in c..cols {
            if !a[r][j].is_zero() {
                a[r][j] = &a[r][j] * &inv;
            }
        }
        for i in 0..n {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let factor = a[i][c].clone();
            for j in c..cols {
                if !a[r][j].is_zero() {
                    let d = &factor * &a[r][j];
                    a[i][j] -= &d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Inverse of a square matrix given by rows, or `None` if singular.
pub fn inverse(rows: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = rows.len();
    let aug: Vec<Vec<Rational>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = r.clone();
            v.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            v
        })
        .collect();
    let (red, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `m·x = b` for square nonsingular `m`.
pub fn solve(rows: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut v = r.clone();
            v.push(bi.clone());
            v
        })
        .collect();
    let (red, pivots) = rref(&aug, n + 1);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(red.into_iter().map(|r| r[n].clone()).collect())
}
