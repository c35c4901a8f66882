//! The bundled example scenarios.
//!
//! Four pure qubit states in the x–z plane of the Bloch sphere at 0°, 180°,
//! 90° and 270° (labelled `0`, `1`, `+`, `-`), measured either by the two
//! projective measurements rotated by 135° (`pom`) or by their uniform
//! flag-convexification, a single four-outcome POVM (`example`).

use crate::linalg::Rational;
use num_complex::Complex64;

use crate::quantum::{bloch_plane_state, ComplexMatrix, Effect, QuantumState};
use crate::scenario::{Measurement, Scenario};

pub const LABELS: [&str; 4] = ["0", "1", "+", "-"];
const ANGLES: [f64; 4] = [0.0, 180.0, 90.0, 270.0];
const ROTATION: f64 = 135.0;

/// Rounds away trigonometric noise such as `cos 90° ≈ 6e-17`.
fn snap(m: &ComplexMatrix) -> ComplexMatrix {
    let r = |x: f64| (x * 1e15).round() / 1e15;
    let entries = m.entries().iter().map(|z| Complex64::new(r(z.re), r(z.im))).collect();
    ComplexMatrix::new(m.dim(), entries).expect("same shape")
}

fn states() -> Vec<(String, QuantumState)> {
    LABELS
        .iter()
        .zip(ANGLES)
        .map(|(l, a)| (l.to_string(), QuantumState::new(snap(bloch_plane_state(a).matrix())).expect("pure state")))
        .collect()
}

fn primed(i: usize) -> Effect {
    Effect::new(snap(bloch_plane_state(ANGLES[i] + ROTATION).matrix())).expect("projector")
}

/// `(1, 1, −1, −1)/2` over the states `(0, 1, +, −)`.
pub fn prep_equivalence() -> Vec<Rational> {
    let h = Rational::new(1, 2);
    vec![h.clone(), h.clone(), -&h, -h]
}

/// Single four-outcome POVM `E_i = ½·|i′⟩⟨i′|`, with the preparation
/// equivalence and `E₀ + E₁ − E₊ − E₋ = 0`.
pub fn example_scenario() -> Scenario {
    let povm = Measurement::new("M", (0..4).map(|i| (LABELS[i].to_string(), primed(i).scaled(0.5))).collect());
    let beta = [1, 1, -1, -1].into_iter().map(Rational::from_integer).collect();
    Scenario::new(states(), vec![povm], vec![prep_equivalence()], vec![beta]).expect("example scenario is valid")
}

/// The two projective measurements `{|0′⟩, |1′⟩}` and `{|+′⟩, |−′⟩}`.
pub fn pom_scenario() -> Scenario {
    let z = Measurement::new("Z'", vec![("0".into(), primed(0)), ("1".into(), primed(1))]);
    let x = Measurement::new("X'", vec![("+".into(), primed(2)), ("-".into(), primed(3))]);
    Scenario::new(states(), vec![z, x], vec![prep_equivalence()], vec![]).expect("pom scenario is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{flag_convexify, FlagDistribution};

    #[test]
    fn flagging_pom_gives_the_example() {
        let flagged = flag_convexify(&pom_scenario(), &FlagDistribution::uniform(2).unwrap()).unwrap();
        let ex = example_scenario();
        let a: Vec<_> = flagged.flat_effects().into_iter().cloned().collect();
        let b: Vec<_> = ex.flat_effects().into_iter().cloned().collect();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.matrix().max_abs_diff(y.matrix()) < 1e-12);
        }
        assert_eq!(flagged.meas_equivalences(), ex.meas_equivalences());
    }
}
