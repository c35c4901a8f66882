use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::dd::extreme_rays;
use super::{Constraint, HPolytope, Hull, VPolytope};
use crate::error::{Error, Result};
use crate::linalg::{lp_solve, nullspace, primitive_integer_vector, rank_of_rows, LpBuilder, LpVerdict, Rational, RationalMatrix};

fn max_of(lp: &mut LpBuilder, c: Vec<Rational>) -> Result<LpVerdict> {
    lp.maximize(c);
    lp_solve(&lp.build()?)
}

/// Splits the inequalities into those that are strict somewhere on the
/// polytope and those that hold with equality everywhere (returned as
/// extra equalities after the declared ones). Assumes a nonempty polytope.
pub(crate) fn split_implicit(h: &HPolytope) -> Result<(Vec<Constraint>, Vec<Constraint>)> {
    let n = h.dim;
    let m = h.inequalities.len();
    if m == 0 {
        return Ok((Vec::new(), h.equalities.clone()));
    }
    // One LP first: if every inequality can be strict at once, none is implicit.
    let mut lp = LpBuilder::new(n + 1);
    lp.all_free();
    for c in &h.inequalities {
        let mut row = c.coeffs.clone();
        row.push(Rational::one());
        lp.le(row, c.bound.clone());
    }
    for c in &h.equalities {
        let mut row = c.coeffs.clone();
        row.push(Rational::zero());
        lp.eq(row, c.bound.clone());
    }
    let mut t_row = vec![Rational::zero(); n + 1];
    t_row[n] = Rational::one();
    lp.le(t_row.clone(), Rational::one());
    match max_of(&mut lp, t_row)? {
        LpVerdict::Optimal { value, .. } if value.is_positive() => {
            return Ok((h.inequalities.clone(), h.equalities.clone()));
        }
        LpVerdict::Optimal { .. } => {}
        other => return Err(Error::Internal(format!("slack LP returned {other:?}"))),
    }
    let mut ineqs = Vec::new();
    let mut eqs = h.equalities.clone();
    let mut base = h.lp();
    for c in &h.inequalities {
        let neg: Vec<Rational> = c.coeffs.iter().map(|x| -x).collect();
        match max_of(&mut base, neg)? {
            LpVerdict::Optimal { value, .. } if -value.clone() == c.bound => eqs.push(c.clone()),
            LpVerdict::Optimal { .. } | LpVerdict::Unbounded => ineqs.push(c.clone()),
            LpVerdict::Infeasible { .. } => return Err(Error::EmptyPolytope),
        }
    }
    Ok((ineqs, eqs))
}

/// Fails with [`Error::Unbounded`] if the recession cone is nonzero.
fn check_bounded(h: &HPolytope) -> Result<()> {
    let n = h.dim;
    let mut lp = LpBuilder::new(n);
    lp.all_free();
    for c in &h.inequalities {
        lp.le(c.coeffs.clone(), Rational::zero());
    }
    for c in &h.equalities {
        lp.eq(c.coeffs.clone(), Rational::zero());
    }
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        lp.le(e.clone(), Rational::one());
        e[j] = -Rational::one();
        lp.le(e, Rational::one());
    }
    for j in 0..n {
        for sign in [1, -1] {
            let mut c = vec![Rational::zero(); n];
            c[j] = Rational::from_integer(sign);
            match max_of(&mut lp, c)? {
                LpVerdict::Optimal { value, .. } if value.is_zero() => {}
                _ => return Err(Error::Unbounded),
            }
        }
    }
    Ok(())
}

/// Vertices of a bounded, nonempty H-polytope, sorted lexicographically.
pub fn h_to_v(h: &HPolytope) -> Result<VPolytope> {
    let n = h.dim;
    if h.is_empty()? {
        return Err(Error::EmptyPolytope);
    }
    check_bounded(h)?;
    let (ineqs, eqs) = split_implicit(h)?;
    let hull = Hull::new(&eqs, n).ok_or(Error::EmptyPolytope)?;
    if hull.free.is_empty() {
        return VPolytope::new(n, vec![hull.lift(&[])]);
    }
    // Homogenized cone over the free coordinates: x0 ≥ 0, b'·x0 − a'·x ≥ 0.
    let k = hull.free.len() + 1;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(ineqs.len() + 1);
    let mut unit = vec![BigInt::zero(); k];
    unit[0] = BigInt::from(1);
    rows.push(unit);
    for c in &ineqs {
        let red = hull.reduce(c);
        let mut row = vec![red.bound.clone()];
        row.extend(hull.free.iter().map(|&f| -&red.coeffs[f]));
        rows.push(primitive_integer_vector(&row));
    }
    let rays = extreme_rays(&rows, k)?;
    let mut vertices = Vec::with_capacity(rays.len());
    for ray in rays {
        if !ray[0].is_positive() {
            return Err(Error::Unbounded);
        }
        let x0 = Rational::from_integer(ray[0].clone());
        let free: Vec<Rational> = ray[1..].iter().map(|v| Rational::from_integer(v.clone()) / &x0).collect();
        vertices.push(hull.lift(&free));
    }
    VPolytope::new(n, vertices)
}

/// Facets (and affine-hull equalities) of the convex hull of `v`, in
/// canonical form.
pub fn v_to_h(v: &VPolytope) -> Result<HPolytope> {
    let n = v.dim;
    if v.vertices.is_empty() {
        return Err(Error::EmptyPolytope);
    }
    // (a, b) with a·v_i = b for every point.
    let rows: Vec<Vec<Rational>> = v
        .vertices
        .iter()
        .map(|p| {
            let mut r = p.clone();
            r.push(-Rational::one());
            r
        })
        .collect();
    let eqs: Vec<Constraint> = nullspace(&RationalMatrix::from_rows(&rows, n + 1)?)
        .into_iter()
        .map(|mut w| {
            let b = w.pop().expect("n + 1 entries");
            Constraint { coeffs: w, bound: b }
        })
        .collect();
    let hull = Hull::new(&eqs, n).ok_or_else(|| Error::Internal("affine hull of points is inconsistent".into()))?;
    let f = hull.free.len();
    let mut ineqs = Vec::new();
    if f > 0 {
        // Polar cone over (β, a_F): β − a_F·w_i ≥ 0.
        let mut pts: Vec<Vec<Rational>> =
            v.vertices.iter().map(|p| hull.free.iter().map(|&j| p[j].clone()).collect()).collect();
        pts.sort();
        pts.dedup();
        let rows: Vec<Vec<BigInt>> = pts
            .iter()
            .map(|w| {
                let mut r = vec![Rational::one()];
                r.extend(w.iter().map(|x| -x));
                primitive_integer_vector(&r)
            })
            .collect();
        for ray in extreme_rays(&rows, f + 1)? {
            let mut coeffs = vec![Rational::zero(); n];
            for (&j, a) in hull.free.iter().zip(&ray[1..]) {
                coeffs[j] = Rational::from_integer(a.clone());
            }
            ineqs.push(Constraint { coeffs, bound: Rational::from_integer(ray[0].clone()) });
        }
    }
    Ok(HPolytope::new(n, ineqs, hull.equalities())?.canonical())
}

/// Hull of the points restricted to `keep`, reduced to its vertices.
pub fn project(v: &VPolytope, keep: &[usize]) -> Result<VPolytope> {
    if let Some(&j) = keep.iter().find(|&&j| j >= v.dim) {
        return Err(Error::Structural(format!("coordinate {j} out of range for dimension {}", v.dim)));
    }
    let k = keep.len();
    let pts = VPolytope::new(k, v.vertices.iter().map(|p| keep.iter().map(|&j| p[j].clone()).collect()).collect())?;
    if pts.vertices.len() <= 1 {
        return Ok(pts);
    }
    let h = v_to_h(&pts)?;
    let eq_rows: Vec<Vec<Rational>> = h.equalities.iter().map(|c| c.coeffs.clone()).collect();
    let vertices = pts
        .vertices
        .into_iter()
        .filter(|p| {
            let mut tight = eq_rows.clone();
            tight.extend(h.inequalities.iter().filter(|c| c.slack(p).is_zero()).map(|c| c.coeffs.clone()));
            rank_of_rows(&tight, k) == k
        })
        .collect();
    VPolytope::new(k, vertices)
}
