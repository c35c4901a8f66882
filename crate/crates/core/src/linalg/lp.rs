//! Exact two-phase simplex over the rationals.
//!
//! Problems have the form
//!
//! ```text
//! maximize  c·x
//! subject to  A_i·x ≤ b_i   or   A_i·x = b_i   (per row)
//!             x_j ≥ 0 unless variable j is marked free
//! ```
//!
//! Pivoting follows Bland's rule, so the solver terminates on every input.
//! Infeasibility comes with a Farkas certificate `y` satisfying
//!
//! * `y_i ≤ 0` on `≤` rows (unrestricted on `=` rows),
//! * `(yᵀA)_j ≤ 0` for every nonnegative variable and `= 0` for free ones,
//! * `yᵀb > 0`,
//!
//! which is checked exactly before it is returned.

use serde::{Deserialize, Serialize};

use super::matrix::RationalMatrix;
use super::rational::{dot, Rational};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub a: RationalMatrix,
    pub relations: Vec<Relation>,
    pub b: Vec<Rational>,
    /// Objective to maximize; all-zero for a pure feasibility question.
    pub c: Vec<Rational>,
    /// Variables without the implicit `x ≥ 0` bound.
    pub free: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpVerdict {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible { certificate: Vec<Rational> },
    Unbounded,
}

impl LpVerdict {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpVerdict::Infeasible { .. })
    }
}

impl LpProblem {
    pub fn new(
        a: RationalMatrix,
        relations: Vec<Relation>,
        b: Vec<Rational>,
        c: Vec<Rational>,
    ) -> Result<Self> {
        let free = vec![false; a.cols()];
        let p = LpProblem { a, relations, b, c, free };
        p.validate()?;
        Ok(p)
    }

    pub fn with_free(mut self, free: Vec<bool>) -> Result<Self> {
        self.free = free;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = (self.a.rows(), self.a.cols());
        if self.relations.len() != m || self.b.len() != m {
            return Err(Error::Structural(format!(
                "{m} constraint rows but {} relations and {} right-hand sides",
                self.relations.len(),
                self.b.len()
            )));
        }
        if self.c.len() != n || self.free.len() != n {
            return Err(Error::Structural(format!(
                "{n} variables but objective of length {} and {} free flags",
                self.c.len(),
                self.free.len()
            )));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.a.cols()
    }

    /// Checks a Farkas certificate for this problem exactly.
    pub fn verify_certificate(&self, y: &[Rational]) -> bool {
        if y.len() != self.a.rows() {
            return false;
        }
        for (yi, rel) in y.iter().zip(&self.relations) {
            if *rel == Relation::Le && yi.is_positive() {
                return false;
            }
        }
        for j in 0..self.a.cols() {
            let mut s = Rational::zero();
            for (i, yi) in y.iter().enumerate() {
                if !yi.is_zero() {
                    s += yi * self.a.get(i, j);
                }
            }
            if s.is_positive() || (self.free[j] && !s.is_zero()) {
                return false;
            }
        }
        dot(y, &self.b).is_positive()
    }

    /// Checks that `x` satisfies every constraint exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.a.cols() {
            return false;
        }
        if x.iter().zip(&self.free).any(|(v, &f)| !f && v.is_negative()) {
            return false;
        }
        (0..self.a.rows()).all(|i| {
            let lhs = dot(self.a.row(i), x);
            match self.relations[i] {
                Relation::Le => lhs <= self.b[i],
                Relation::Eq => lhs == self.b[i],
            }
        })
    }
}

/// Incremental construction of an [`LpProblem`] from dense rows.
#[derive(Clone, Debug, Default)]
pub struct LpBuilder {
    n: usize,
    rows: Vec<Vec<Rational>>,
    relations: Vec<Relation>,
    b: Vec<Rational>,
    c: Vec<Rational>,
    free: Vec<bool>,
}

impl LpBuilder {
    pub fn new(num_vars: usize) -> Self {
        LpBuilder {
            n: num_vars,
            c: vec![Rational::zero(); num_vars],
            free: vec![false; num_vars],
            ..Default::default()
        }
    }

    pub fn le(&mut self, row: Vec<Rational>, rhs: Rational) -> &mut Self {
        debug_assert_eq!(row.len(), self.n);
        self.rows.push(row);
        self.relations.push(Relation::Le);
        self.b.push(rhs);
        self
    }

    pub fn ge(&mut self, row: Vec<Rational>, rhs: Rational) -> &mut Self {
        let row = row.into_iter().map(|x| -x).collect();
        self.le(row, -rhs)
    }

    pub fn eq(&mut self, row: Vec<Rational>, rhs: Rational) -> &mut Self {
        debug_assert_eq!(row.len(), self.n);
        self.rows.push(row);
        self.relations.push(Relation::Eq);
        self.b.push(rhs);
        self
    }

    pub fn maximize(&mut self, c: Vec<Rational>) -> &mut Self {
        self.c = c;
        self
    }

    pub fn free(&mut self, j: usize) -> &mut Self {
        self.free[j] = true;
        self
    }

    pub fn all_free(&mut self) -> &mut Self {
        self.free = vec![true; self.n];
        self
    }

    pub fn build(&self) -> Result<LpProblem> {
        let a = RationalMatrix::from_rows(&self.rows, self.n)?;
        LpProblem::new(a, self.relations.clone(), self.b.clone(), self.c.clone())?
            .with_free(self.free.clone())
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs of the current phase (minimization).
    obj: Vec<Rational>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row.is_empty() || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
            self.rhs[i] -= &(&factor * &pivot_rhs);
        }
        if !self.obj[c].is_zero() {
            let factor = self.obj[c].clone();
            for (x, p) in self.obj.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &(&factor * p);
                }
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs Bland's-rule simplex on the current objective row.
    /// Returns `false` if the objective is unbounded below.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.obj.len()).find(|&j| allowed[j] && self.obj[j].is_negative());
            let Some(c) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn set_costs(&mut self, costs: &[Rational]) {
        let mut obj = costs.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (x, a) in obj.iter_mut().zip(row) {
                if !a.is_zero() {
                    *x -= &(cb * a);
                }
            }
        }
        self.obj = obj;
    }
}

/// Solves `p` exactly. See the module docs for the certificate convention.
pub fn lp_solve(p: &LpProblem) -> Result<LpVerdict> {
    p.validate()?;
    let m = p.a.rows();
    let n = p.a.cols();

    // Split free variables x = x⁺ − x⁻.
    let mut split: Vec<(usize, bool)> = Vec::new();
    for j in 0..n {
        split.push((j, false));
        if p.free[j] {
            split.push((j, true));
        }
    }
    let n_struct = split.len();
    let slack_of: Vec<Option<usize>> = {
        let mut k = n_struct;
        p.relations
            .iter()
            .map(|r| match r {
                Relation::Le => {
                    k += 1;
                    Some(k - 1)
                }
                Relation::Eq => None,
            })
            .collect()
    };
    let n_slack = slack_of.iter().filter(|s| s.is_some()).count();
    let sign: Vec<bool> = p.b.iter().map(|b| b.is_negative()).collect();
    let needs_art: Vec<bool> = (0..m).map(|i| slack_of[i].is_none() || sign[i]).collect();
    let mut art_of = vec![None; m];
    let mut k = n_struct + n_slack;
    for i in 0..m {
        if needs_art[i] {
            art_of[i] = Some(k);
            k += 1;
        }
    }
    let ncols = k;
    let is_art: Vec<bool> = {
        let mut v = vec![false; ncols];
        for a in art_of.iter().flatten() {
            v[*a] = true;
        }
        v
    };

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![Rational::zero(); ncols];
        for (col, &(j, neg)) in split.iter().enumerate() {
            let a = p.a.get(i, j);
            row[col] = if neg { -a } else { a.clone() };
        }
        if let Some(s) = slack_of[i] {
            row[s] = Rational::one();
        }
        let mut b = p.b[i].clone();
        if sign[i] {
            for x in row.iter_mut() {
                *x = -&*x;
            }
            b = -b;
        }
        match art_of[i] {
            Some(a) => {
                row[a] = Rational::one();
                basis.push(a);
            }
            None => basis.push(slack_of[i].expect("slack basis")),
        }
        rows.push(row);
        rhs.push(b);
    }

    let mut t = Tableau { rows, rhs, basis, obj: Vec::new() };

    // Phase 1: minimize the sum of artificials.
    let phase1: Vec<Rational> =
        (0..ncols).map(|j| if is_art[j] { Rational::one() } else { Rational::zero() }).collect();
    t.set_costs(&phase1);
    let all = vec![true; ncols];
    t.optimize(&all);
    let infeas: Rational = (0..m).filter(|&i| is_art[t.basis[i]]).map(|i| t.rhs[i].clone()).sum();
    if infeas.is_positive() {
        // Phase-1 duals from reduced costs: artificial columns are unit
        // vectors of cost 1, initial slacks are unit vectors of cost 0.
        let certificate: Vec<Rational> = (0..m)
            .map(|i| {
                let pi = match art_of[i] {
                    Some(a) => Rational::one() - &t.obj[a],
                    None => -&t.obj[slack_of[i].expect("slack")],
                };
                if sign[i] {
                    -pi
                } else {
                    pi
                }
            })
            .collect();
        if !p.verify_certificate(&certificate) {
            return Err(Error::Internal("Farkas certificate failed verification".into()));
        }
        return Ok(LpVerdict::Infeasible { certificate });
    }

    // Drive remaining (zero-level) artificials out of the basis; rows where
    // that is impossible are redundant and dropped.
    let mut r = 0;
    while r < t.rows.len() {
        if is_art[t.basis[r]] {
            if let Some(c) = (0..ncols).find(|&j| !is_art[j] && !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            } else {
                t.rows.remove(r);
                t.rhs.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    // Phase 2: minimize −c·x over non-artificial columns.
    let mut phase2 = vec![Rational::zero(); ncols];
    for (col, &(j, neg)) in split.iter().enumerate() {
        phase2[col] = if neg { p.c[j].clone() } else { -&p.c[j] };
    }
    t.set_costs(&phase2);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if !t.optimize(&allowed) {
        return Ok(LpVerdict::Unbounded);
    }

    let mut values = vec![Rational::zero(); ncols];
    for (i, &b) in t.basis.iter().enumerate() {
        values[b] = t.rhs[i].clone();
    }
    let mut point = vec![Rational::zero(); n];
    for (col, &(j, neg)) in split.iter().enumerate() {
        if neg {
            point[j] -= &values[col];
        } else {
            point[j] += &values[col];
        }
    }
    if !p.is_feasible_point(&point) {
        return Err(Error::Internal("simplex returned an infeasible point".into()));
    }
    let value = dot(&p.c, &point);
    Ok(LpVerdict::Optimal { value, point })
}
