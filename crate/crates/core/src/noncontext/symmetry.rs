//! Relabelings of states, measurements and outcomes that preserve the
//! declared operational equivalences, and orbit-canonical inequality forms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lp_solve, rref, LpBuilder, LpVerdict, Rational};
use crate::polytope::{Constraint, Hull};
use crate::scenario::Scenario;

/// Largest label count per index for which the group is enumerated.
pub const MAX_LABELS: usize = 6;
/// Largest number of candidate permutations examined.
const MAX_CANDIDATES: usize = 2_000_000;

/// One relabeling: state `s ↦ states[s]`, measurement `t ↦ measurements[t]`,
/// outcome `y` of measurement `t` ↦ `outcomes[t][y]` (of measurement `measurements[t]`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    pub states: Vec<usize>,
    pub measurements: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
}

impl Relabeling {
    /// Image of data coordinate `(s·|T| + t)·|Y| + y`.
    fn map_index(&self, i: usize, ny: usize, nt: usize) -> usize {
        let (st, y) = (i / ny, i % ny);
        let (s, t) = (st / nt, st % nt);
        (self.states[s] * nt + self.measurements[t]) * ny + self.outcomes[t][y]
    }

    /// Coefficients `a'` with `a'(g·i) = a(i)`.
    pub fn apply(&self, coeffs: &[Rational], ny: usize, nt: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); coeffs.len()];
        for (i, c) in coeffs.iter().enumerate() {
            out[self.map_index(i, ny, nt)] = c.clone();
        }
        out
    }
}

/// The group of equivalence-preserving relabelings of a scenario.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    outcomes: usize,
    measurements: usize,
    pub elements: Vec<Relabeling>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            p.swap(j, k - 1);
        }
    }
    heap(n, &mut p, &mut out);
    out.sort();
    out
}

/// Tests whether permuted vectors stay inside the span of `basis`.
struct Span {
    rows: Vec<Vec<Rational>>,
    pivots: Vec<usize>,
    len: usize,
}

impl Span {
    fn new(vectors: &[Vec<Rational>], len: usize) -> Span {
        let (rows, pivots) = rref(vectors, len);
        Span { rows, pivots, len }
    }

    fn contains(&self, v: &[Rational]) -> bool {
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if v[p].is_zero() {
                continue;
            }
            let f = v[p].clone();
            for j in 0..self.len {
                if !row[j].is_zero() {
                    v[j] -= &f * &row[j];
                }
            }
        }
        v.iter().all(Rational::is_zero)
    }

    fn preserved_by(&self, vectors: &[Vec<Rational>], perm: impl Fn(usize) -> usize) -> bool {
        vectors.iter().all(|v| {
            let mut w = vec![Rational::zero(); self.len];
            for (i, c) in v.iter().enumerate() {
                w[perm(i)] = c.clone();
            }
            self.contains(&w)
        })
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl SymmetryGroup {
    /// Enumerates the group by brute force. A relabeling counts when it maps
    /// the span of the preparation equivalences and the span of the
    /// measurement equivalences onto themselves.
    ///
    /// Fails with [`Error::Unsupported`] when a label count exceeds
    /// [`MAX_LABELS`] or the candidate count is too large.
    pub fn of(sc: &Scenario) -> Result<SymmetryGroup> {
        let ny = sc.require_uniform_outcomes()?;
        let (ns, nt) = (sc.num_states(), sc.num_measurements());
        if ns > MAX_LABELS || nt > MAX_LABELS || ny > MAX_LABELS {
            return Err(Error::Unsupported(format!(
                "canonicalization skipped: label counts (|S|={ns}, |T|={nt}, |Y|={ny}) exceed {MAX_LABELS}"
            )));
        }
        let meas_candidates = factorial(nt).saturating_mul(factorial(ny).saturating_pow(nt as u32));
        if factorial(ns).max(meas_candidates) > MAX_CANDIDATES {
            return Err(Error::Unsupported("canonicalization skipped: too many candidate relabelings".into()));
        }
        let prep = Span::new(sc.prep_equivalences(), ns);
        let states: Vec<Vec<usize>> =
            permutations(ns).into_iter().filter(|p| prep.preserved_by(sc.prep_equivalences(), |s| p[s])).collect();

        let meas = Span::new(sc.meas_equivalences(), ny * nt);
        let y_perms = permutations(ny);
        let mut meas_parts: Vec<(Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
        for tp in permutations(nt) {
            // Odometer over one outcome permutation per measurement.
            let mut idx = vec![0usize; nt];
            loop {
                let outcomes: Vec<Vec<usize>> = idx.iter().map(|&k| y_perms[k].clone()).collect();
                let map = |i: usize| tp[i / ny] * ny + outcomes[i / ny][i % ny];
                if meas.preserved_by(sc.meas_equivalences(), map) {
                    meas_parts.push((tp.clone(), outcomes));
                }
                let mut k = 0;
                while k < nt {
                    idx[k] += 1;
                    if idx[k] < y_perms.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == nt {
                    break;
                }
            }
        }
        let mut elements = Vec::with_capacity(states.len() * meas_parts.len());
        for s in &states {
            for (t, o) in &meas_parts {
                elements.push(Relabeling { states: s.clone(), measurements: t.clone(), outcomes: o.clone() });
            }
        }
        Ok(SymmetryGroup { outcomes: ny, measurements: nt, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn apply(&self, g: &Relabeling, c: &Constraint) -> Constraint {
        Constraint::new(g.apply(&c.coeffs, self.outcomes, self.measurements), c.bound.clone())
    }

    /// Lexicographically least member (coefficients, then bound) of the
    /// orbit of `c`, each member reduced modulo the affine hull `equalities`
    /// and scaled to coprime integer coefficients.
    pub fn canonical_form(&self, c: &Constraint, equalities: &[Constraint]) -> Result<Constraint> {
        let hull = Hull::new(equalities, c.dim())
            .ok_or_else(|| Error::Validation("affine hull equalities are inconsistent".into()))?;
        self.elements
            .par_iter()
            .map(|g| hull.reduce(&self.apply(g, c)).scaled_primitive())
            .min()
            .ok_or_else(|| Error::Internal("symmetry group is empty".into()))
    }

    /// Orbit members that can be written, modulo the hull, with nonzero
    /// coefficients only on `support`; each is returned in coprime integer
    /// form. Sorted and deduplicated.
    pub fn express_on(&self, c: &Constraint, equalities: &[Constraint], support: &[usize]) -> Vec<Constraint> {
        let mut out: Vec<Constraint> =
            self.elements.iter().filter_map(|g| express_on(&self.apply(g, c), equalities, support)).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Rewrites `c` as `c + Σ μ_k e_k` (hull equalities `e_k`) so that every
/// coefficient outside `support` vanishes, if possible; coprime integer form.
pub fn express_on(c: &Constraint, equalities: &[Constraint], support: &[usize]) -> Option<Constraint> {
    let n = c.dim();
    let outside: Vec<usize> = (0..n).filter(|j| !support.contains(j)).collect();
    let k = equalities.len();
    // Solve Σ μ_k e_k[j] = −c[j] for j outside the support (least-index
    // consistent solution via RREF of the augmented system).
    let aug: Vec<Vec<Rational>> = outside
        .iter()
        .map(|&j| {
            let mut row: Vec<Rational> = equalities.iter().map(|e| e.coeffs[j].clone()).collect();
            row.push(-&c.coeffs[j]);
            row
        })
        .collect();
    let (red, pivots) = rref(&aug, k + 1);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut mu = vec![Rational::zero(); k];
    for (row, &p) in red.iter().zip(&pivots) {
        mu[p] = row[k].clone();
    }
    let mut coeffs = c.coeffs.clone();
    let mut bound = c.bound.clone();
    for (m, e) in mu.iter().zip(equalities) {
        if m.is_zero() {
            continue;
        }
        for j in 0..n {
            coeffs[j] += m * &e.coeffs[j];
        }
        bound += m * &e.bound;
    }
    debug_assert!(outside.iter().all(|&j| coeffs[j].is_zero()));
    Some(Constraint::new(coeffs, bound).scaled_primitive())
}

/// Representative of `c` modulo the hull with least ℓ₁ coefficient norm
/// (an optimal LP vertex, hence sparse), in coprime integer form.
pub fn sparse_form(c: &Constraint, equalities: &[Constraint]) -> Result<Constraint> {
    let n = c.dim();
    let k = equalities.len();
    // Variables: μ (free, k) then t (n) with t_j ≥ |c_j + Σ μ_i e_ij|.
    let mut lp = LpBuilder::new(k + n);
    for i in 0..k {
        lp.free(i);
    }
    for j in 0..n {
        for sign in [1i64, -1] {
            let s = Rational::from_integer(sign);
            let mut a = vec![Rational::zero(); k + n];
            for (i, e) in equalities.iter().enumerate() {
                a[i] = -(&s * &e.coeffs[j]);
            }
            a[k + j] = Rational::one();
            lp.ge(a, &s * &c.coeffs[j]);
        }
    }
    let mut obj = vec![Rational::zero(); k];
    obj.extend((0..n).map(|_| -Rational::one()));
    lp.maximize(obj);
    let LpVerdict::Optimal { point, .. } = lp_solve(&lp.build()?)? else {
        return Err(Error::Internal("ℓ₁ reduction LP is not bounded and feasible".into()));
    };
    let mut coeffs = c.coeffs.clone();
    let mut bound = c.bound.clone();
    for (m, e) in point[..k].iter().zip(equalities) {
        if m.is_zero() {
            continue;
        }
        for j in 0..n {
            coeffs[j] += m * &e.coeffs[j];
        }
        bound += m * &e.bound;
    }
    Ok(Constraint::new(coeffs, bound).scaled_primitive())
}
