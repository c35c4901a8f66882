use super::{canonical_direction, meas_residual, prep_residual, Scenario};
use crate::error::Result;
use crate::linalg::{rational_reconstruct, Rational};
use crate::quantum::ComplexMatrix;

/// Pivot threshold of the numeric elimination.
const PIVOT_TOL: f64 = 1e-9;
/// Residual a reconstructed equivalence must meet to be kept.
const VERIFY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Discovered {
    pub prep: Vec<Vec<Rational>>,
    pub meas: Vec<Vec<Rational>>,
    /// One line per candidate that failed re-verification.
    pub diagnostics: Vec<String>,
}

/// Real coordinates of a Hermitian matrix: the diagonal, then real and
/// imaginary parts of the strict upper triangle.
pub fn hermitian_coordinates(m: &ComplexMatrix) -> Vec<f64> {
    let d = m.dim();
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(m.get(i, i).re);
    }
    for i in 0..d {
        for j in i + 1..d {
            out.push(m.get(i, j).re);
            out.push(m.get(i, j).im);
        }
    }
    out
}

/// Float nullspace basis of the matrix whose columns are `columns`, one
/// vector per non-pivot column (that entry set to 1).
fn numeric_nullspace(columns: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = columns.len();
    let rows = columns.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<f64>> = (0..rows).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == rows {
            break;
        }
        let (best, val) = (r..rows).map(|i| (i, a[i][c].abs())).fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if val <= PIVOT_TOL * scale {
            for row in a.iter_mut().skip(r) {
                row[c] = 0.0;
            }
            continue;
        }
        a.swap(r, best);
        let p = a[r][c];
        for x in a[r].iter_mut() {
            *x /= p;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                for (x, pv) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut x = vec![0.0; n];
        x[free] = 1.0;
        for (k, &p) in pivots.iter().enumerate() {
            x[p] = -a[k][free];
        }
        basis.push(x);
    }
    basis
}

fn reconstruct(v: &[f64], max_den: u64) -> Result<Vec<Rational>> {
    let q: Vec<Rational> = v.iter().map(|&x| rational_reconstruct(x, max_den)).collect::<Result<_>>()?;
    Ok(canonical_direction(&q))
}

/// Finds a canonical basis of the linear dependences among the states and
/// among all effects.
///
/// Numeric nullspace vectors are rounded to rationals with denominators at
/// most `max_denominator`; only those that re-verify are returned.
pub fn discover_equivalences(sc: &Scenario, max_denominator: u64) -> Result<Discovered> {
    let mut out = Discovered::default();
    let state_cols: Vec<Vec<f64>> = sc.states().iter().map(|s| hermitian_coordinates(s.matrix())).collect();
    for v in numeric_nullspace(&state_cols) {
        let alpha = reconstruct(&v, max_denominator)?;
        let res = prep_residual(sc, &alpha);
        if res <= VERIFY_TOL {
            out.prep.push(alpha);
        } else {
            out.diagnostics.push(format!("dropped preparation candidate (residual {res:.3e})"));
        }
    }
    let effect_cols: Vec<Vec<f64>> = sc.flat_effects().iter().map(|e| hermitian_coordinates(e.matrix())).collect();
    for v in numeric_nullspace(&effect_cols) {
        let beta = reconstruct(&v, max_denominator)?;
        let res = meas_residual(sc, &beta);
        if res <= VERIFY_TOL {
            out.meas.push(beta);
        } else {
            out.diagnostics.push(format!("dropped measurement candidate (residual {res:.3e})"));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank_of_rows;
    use crate::quantum::{bloch_plane_state, Effect, QuantumState};
    use crate::scenario::{verify_equivalences, Measurement};

    fn states(angles: &[f64]) -> Vec<(String, QuantumState)> {
        angles.iter().enumerate().map(|(i, &a)| (format!("s{i}"), bloch_plane_state(a))).collect()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    #[test]
    fn four_states_have_one_dependence() {
        let sc = Scenario::new(states(&[0.0, 180.0, 90.0, 270.0]), vec![], vec![], vec![]).unwrap();
        let d = discover_equivalences(&sc, 1000).unwrap();
        assert_eq!(d.prep, vec![ints(&[1, 1, -1, -1])]);
        assert!(d.diagnostics.is_empty());
    }

    #[test]
    fn rotated_half_projectors_have_one_dependence() {
        let effects: Vec<Effect> =
            [135.0, 315.0, 225.0, 45.0].iter().map(|&a| Effect::from(bloch_plane_state(a)).scaled(0.5)).collect();
        let sc = Scenario::new(states(&[0.0]), vec![Measurement::unlabelled("M", effects)], vec![], vec![]).unwrap();
        let d = discover_equivalences(&sc, 1000).unwrap();
        assert_eq!(d.meas, vec![ints(&[1, 1, -1, -1])]);
    }

    #[test]
    fn independent_states_have_none() {
        let angles = [0.0, 180.0, 90.0];
        // Oracle: rank of the Bloch-augmented coordinates (1, x, z).
        let rows: Vec<Vec<Rational>> = [[1, 0, 1], [1, 0, -1], [1, 1, 0]].iter().map(|r| ints(r)).collect();
        assert_eq!(rank_of_rows(&rows, 3), 3);
        let sc = Scenario::new(states(&angles), vec![], vec![], vec![]).unwrap();
        assert!(discover_equivalences(&sc, 1000).unwrap().prep.is_empty());
    }

    #[test]
    fn coordinates_of_complex_matrix() {
        let c = num_complex::Complex64::new;
        let m = ComplexMatrix::new(
            2,
            vec![c(0.5, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.5, 0.0)],
        )
        .unwrap();
        assert_eq!(hermitian_coordinates(&m), vec![0.5, 0.5, 0.1, -0.2]);
    }

    proptest::proptest! {
        #[test]
        fn discovered_equivalences_verify(angles in proptest::collection::vec(0u32..8, 1..7)) {
            // Dependences involving the 45° states have irrational coefficients
            // and must be dropped; whatever is kept has to verify.
            let angles: Vec<f64> = angles.iter().map(|&k| 45.0 * k as f64).collect();
            let labelled = states(&angles);
            let sc = Scenario::new(labelled.clone(), vec![], vec![], vec![]).unwrap();
            let d = discover_equivalences(&sc, 1000).unwrap();
            let with = Scenario::new_unverified(labelled, vec![], d.prep, vec![]).unwrap();
            proptest::prop_assert!(verify_equivalences(&with, 1e-8).is_ok());
        }
    }
}
