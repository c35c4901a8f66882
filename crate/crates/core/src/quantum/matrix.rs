//! Dense complex matrices for small Hilbert spaces, plus a cyclic Jacobi
//! eigensolver for the Hermitian case.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::tol;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Structural(format!(
                "{dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(z) = entries.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite matrix entry {z}")));
        }
        Ok(ComplexMatrix { dim, entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Structural("matrix is not square".into()));
        }
        let entries = rows.iter().flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0))).collect();
        ComplexMatrix::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) vector.
    pub fn outer(psi: &[Complex64]) -> Self {
        let dim = psi.len();
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.entries[i * self.dim + j] = z;
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.entries[j * n + i] = self.entries[i * n + j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        let n = self.dim;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                s += self.entries[i * n + k] * other.entries[k * n + i];
            }
        }
        s
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let a = self.adjoint();
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&a.entries).map(|(x, y)| (x + y) * 0.5).collect(),
        }
    }

    pub fn commutator_norm(&self, other: &ComplexMatrix) -> f64 {
        (self * other).max_abs_diff(&(other * self))
    }

    fn check_same_dim(&self, other: &ComplexMatrix) {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs);
        let n = self.dim;
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    m.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        m
    }
}

/// Eigen-decomposition `A = V diag(values) V†` with ascending values and
/// eigenvectors stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    /// `V f(diag) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim;
        let mut m = ComplexMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors.get(i, k) * w;
                for j in 0..n {
                    m.entries[i * n + j] += vi * self.vectors.get(j, k).conj();
                }
            }
        }
        m
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry with a diagonal
/// unitary, then applies a real Jacobi rotation to the resulting symmetric
/// 2×2 block.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if defect > tol::HERM {
        return Err(Error::Domain(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    let n = m.dim;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(1.0);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a.get(p, q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let modulus = apq.norm();
                if modulus <= 1e-300 {
                    continue;
                }
                let phase = apq / modulus;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * modulus);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let vpp = Complex64::new(c, 0.0);
                let vpq = Complex64::new(s, 0.0);
                let vqp = -phase.conj() * s;
                let vqq = phase.conj() * c;
                // A ← A V on columns p, q.
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * vpp + akq * vqp);
                    a.set(k, q, akp * vpq + akq * vqq);
                    let wkp = v.get(k, p);
                    let wkq = v.get(k, q);
                    v.set(k, p, wkp * vpp + wkq * vqp);
                    v.set(k, q, wkp * vpq + wkq * vqq);
                }
                // A ← V† A on rows p, q.
                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, vpp.conj() * apj + vqp.conj() * aqj);
                    a.set(q, j, vpq.conj() * apj + vqq.conj() * aqj);
                }
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));
                a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
                a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors.set(k, new, v.get(k, old));
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}
