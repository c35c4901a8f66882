//! Bounded-denominator rational approximation of floats.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Closest rational to `x` whose denominator is at most `max_denominator`.
///
/// Works on the exact binary value of `x` and walks its continued fraction;
/// the answer is either the last convergent within the bound or the best
/// semiconvergent after it. Ties go to the convergent.
pub fn rational_reconstruct(x: f64, max_denominator: u64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot reconstruct non-finite value {x}")));
    }
    if max_denominator == 0 {
        return Err(Error::Domain("max_denominator must be at least 1".into()));
    }
    let exact = Rational::from_f64_exact(x)?;
    Ok(limit_denominator(&exact, &BigInt::from(max_denominator)))
}

pub fn limit_denominator(x: &Rational, max_den: &BigInt) -> Rational {
    if x.denom() <= max_den {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if &q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (max_den - &q0).div_floor(&q1);
    let semi = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let conv = Rational::new(p1, q1);
    if (&conv - x).abs() <= (&semi - x).abs() {
        conv
    } else {
        semi
    }
}
