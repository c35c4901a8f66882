//! Double description for pointed cones `{y : M·y ≥ 0}` with integer `M`.

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{bareiss_echelon, inverse, primitive_integer_vector, rank_of_int_rows, Rational};

#[derive(Clone, Debug)]
struct Ray {
    v: Vec<BigInt>,
    /// Processed rows on which the ray is tight.
    zeros: FixedBitSet,
}

fn int_dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).filter(|(x, y)| !x.is_zero() && !y.is_zero()).map(|(x, y)| x * y).sum()
}

fn make_primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in &mut v {
            *x /= &g;
        }
    }
    v
}

/// Indices of the first linearly independent rows, in order, up to `k` of them.
fn independent_rows(m: &[Vec<BigInt>], k: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..m.len() {
        if chosen.len() == k {
            break;
        }
        let mut rows: Vec<Vec<BigInt>> = chosen.iter().map(|&j| m[j].clone()).collect();
        rows.push(m[i].clone());
        if bareiss_echelon(rows, k).1.len() > chosen.len() {
            chosen.push(i);
        }
    }
    chosen
}

/// Extreme rays of `{y ∈ ℝ^k : M·y ≥ 0}` as primitive integer vectors,
/// sorted lexicographically. `M` must have rank `k` (pointed cone).
pub(crate) fn extreme_rays(m: &[Vec<BigInt>], k: usize) -> Result<Vec<Vec<BigInt>>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let rows = m.len();
    let basis = independent_rows(m, k);
    if basis.len() < k {
        return Err(Error::Internal(format!("cone is not pointed (rank {} < {k})", basis.len())));
    }
    let b: Vec<Vec<Rational>> =
        basis.iter().map(|&i| m[i].iter().cloned().map(Rational::from_integer).collect()).collect();
    let inv = inverse(&b).ok_or_else(|| Error::Internal("initial basis is singular".into()))?;
    let mut rays: Vec<Ray> = (0..k)
        .map(|j| {
            let col: Vec<Rational> = (0..k).map(|i| inv[i][j].clone()).collect();
            let mut zeros = FixedBitSet::with_capacity(rows);
            for (jj, &i) in basis.iter().enumerate() {
                if jj != j {
                    zeros.insert(i);
                }
            }
            Ray { v: primitive_integer_vector(&col), zeros }
        })
        .collect();

    let mut rest: Vec<(usize, usize)> = (0..rows)
        .filter(|i| !basis.contains(i))
        .map(|i| {
            let sat = rays.iter().filter(|r| !int_dot(&m[i], &r.v).is_negative()).count();
            (i, sat)
        })
        .collect();
    // Most-satisfied rows first; ties keep input order.
    rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    for (i, _) in rest {
        let row = &m[i];
        let vals: Vec<BigInt> = rays.iter().map(|r| int_dot(row, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&r| vals[r].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&r| vals[r].is_negative()).collect();
        if neg.is_empty() {
            for (r, ray) in rays.iter_mut().enumerate() {
                if vals[r].is_zero() {
                    ray.zeros.insert(i);
                }
            }
            continue;
        }
        let pairs: Vec<(usize, usize)> = pos.iter().flat_map(|&p| neg.iter().map(move |&n| (p, n))).collect();
        let fresh: Vec<Ray> = pairs
            .par_iter()
            .filter_map(|&(p, n)| {
                let common = {
                    let mut z = rays[p].zeros.clone();
                    z.intersect_with(&rays[n].zeros);
                    z
                };
                if common.count_ones(..) + 2 < k {
                    return None;
                }
                let tight: Vec<Vec<BigInt>> = common.ones().map(|j| m[j].clone()).collect();
                if rank_of_int_rows(tight, k) + 2 != k {
                    return None;
                }
                let (sp, sn) = (&vals[p], &vals[n]);
                let v: Vec<BigInt> = rays[n].v.iter().zip(&rays[p].v).map(|(x, y)| sp * x - sn * y).collect();
                let mut zeros = common;
                zeros.insert(i);
                Some(Ray { v: make_primitive(v), zeros })
            })
            .collect();
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (r, mut ray) in rays.into_iter().enumerate() {
            if vals[r].is_zero() {
                ray.zeros.insert(i);
                next.push(ray);
            } else if vals[r].is_positive() {
                next.push(ray);
            }
        }
        next.extend(fresh);
        rays = next;
    }
    let mut out: Vec<Vec<BigInt>> = rays.into_iter().map(|r| r.v).collect();
    out.sort();
    out.dedup();
    Ok(out)
}
