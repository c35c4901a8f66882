//! Prepare-measure scenarios: states, measurements and the operational
//! equivalences among them.

mod discover;
mod flag;
mod table;

pub use discover::{discover_equivalences, hermitian_coordinates, Discovered};
pub use flag::{flag_convexify, translate_table, Direction, FlagDistribution};
pub use table::{DataTable, Prob};

use crate::error::{Error, Result};
use crate::linalg::{normalize_sign, primitive_integer_vector, rank_of_rows, Rational};
use crate::quantum::{born_table, is_povm, ComplexMatrix, Effect, QuantumState};

/// Tolerance for declared equivalences.
pub const EQUIV_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub outcome_labels: Vec<String>,
    pub effects: Vec<Effect>,
}

impl Measurement {
    pub fn new(label: impl Into<String>, outcomes: Vec<(String, Effect)>) -> Self {
        let (outcome_labels, effects) = outcomes.into_iter().unzip();
        Measurement { label: label.into(), outcome_labels, effects }
    }

    /// Outcomes labelled `0, 1, …`.
    pub fn unlabelled(label: impl Into<String>, effects: Vec<Effect>) -> Self {
        let outcome_labels = (0..effects.len()).map(|y| y.to_string()).collect();
        Measurement { label: label.into(), outcome_labels, effects }
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }
}

/// A prepare-measure scenario.
///
/// Measurement equivalences are indexed over the concatenation of all
/// measurements' outcome lists (measurement-major); with uniform outcome
/// counts entry `t·|Y| + y` belongs to outcome `y` of measurement `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    dim: usize,
    state_labels: Vec<String>,
    states: Vec<QuantumState>,
    measurements: Vec<Measurement>,
    prep_equivalences: Vec<Vec<Rational>>,
    meas_equivalences: Vec<Vec<Rational>>,
}

/// Residuals of declared equivalences, in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub prep_residuals: Vec<f64>,
    pub meas_residuals: Vec<f64>,
}

impl EquivalenceReport {
    pub fn max_residual(&self) -> f64 {
        self.prep_residuals.iter().chain(&self.meas_residuals).copied().fold(0.0, f64::max)
    }
}

impl Scenario {
    /// Builds a scenario and verifies every declared equivalence at [`EQUIV_TOL`].
    pub fn new(
        states: Vec<(String, QuantumState)>,
        measurements: Vec<Measurement>,
        prep_equivalences: Vec<Vec<Rational>>,
        meas_equivalences: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let sc = Self::new_unverified(states, measurements, prep_equivalences, meas_equivalences)?;
        verify_equivalences(&sc, EQUIV_TOL)?;
        Ok(sc)
    }

    /// Structural and POVM checks only; declared equivalences are not
    /// verified. Use [`verify_equivalences`] to get the residual report.
    pub fn new_unverified(
        states: Vec<(String, QuantumState)>,
        measurements: Vec<Measurement>,
        prep_equivalences: Vec<Vec<Rational>>,
        meas_equivalences: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let dim = states
            .first()
            .map(|(_, s)| s.dim())
            .or_else(|| measurements.iter().flat_map(|m| &m.effects).next().map(Effect::dim))
            .ok_or_else(|| Error::Structural("scenario has neither states nor effects".into()))?;
        let (state_labels, states): (Vec<_>, Vec<_>) = states.into_iter().unzip();
        if let Some(s) = states.iter().position(|s| s.dim() != dim) {
            return Err(Error::Structural(format!(
                "state '{}' has dimension {}, expected {dim}",
                state_labels[s],
                states[s].dim()
            )));
        }
        check_unique("state", &state_labels)?;
        check_unique("measurement", &measurements.iter().map(|m| m.label.clone()).collect::<Vec<_>>())?;
        for m in &measurements {
            if m.outcome_labels.len() != m.effects.len() {
                return Err(Error::Structural(format!("measurement '{}' has mismatched outcome labels", m.label)));
            }
            check_unique(&format!("outcome of measurement '{}'", m.label), &m.outcome_labels)?;
            if m.effects.iter().any(|e| e.dim() != dim) {
                return Err(Error::Structural(format!(
                    "measurement '{}' has effects of the wrong dimension (expected {dim})",
                    m.label
                )));
            }
            if !is_povm(&m.effects)? {
                return Err(Error::Validation(format!("measurement '{}' is not a POVM", m.label)));
            }
        }
        let n_flat: usize = measurements.iter().map(Measurement::len).sum();
        for (a, alpha) in prep_equivalences.iter().enumerate() {
            if alpha.len() != states.len() {
                return Err(Error::Structural(format!(
                    "preparation equivalence {a} has {} coefficients, expected {}",
                    alpha.len(),
                    states.len()
                )));
            }
        }
        for (b, beta) in meas_equivalences.iter().enumerate() {
            if beta.len() != n_flat {
                return Err(Error::Structural(format!(
                    "measurement equivalence {b} has {} coefficients, expected {n_flat}",
                    beta.len()
                )));
            }
        }
        Ok(Scenario { dim, state_labels, states, measurements, prep_equivalences, meas_equivalences })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[QuantumState] {
        &self.states
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn prep_equivalences(&self) -> &[Vec<Rational>] {
        &self.prep_equivalences
    }

    pub fn meas_equivalences(&self) -> &[Vec<Rational>] {
        &self.meas_equivalences
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_measurements(&self) -> usize {
        self.measurements.len()
    }

    /// Common outcome count, if all measurements agree.
    pub fn uniform_outcomes(&self) -> Option<usize> {
        let n = self.measurements.first()?.len();
        self.measurements.iter().all(|m| m.len() == n).then_some(n)
    }

    /// Like [`Scenario::uniform_outcomes`] but as an error for callers that need it.
    pub fn require_uniform_outcomes(&self) -> Result<usize> {
        self.uniform_outcomes().ok_or_else(|| {
            Error::Structural("measurements have different outcome counts; pad the scenario first".into())
        })
    }

    /// All effects, measurement-major, in the equivalence indexing.
    pub fn flat_effects(&self) -> Vec<&Effect> {
        self.measurements.iter().flat_map(|m| &m.effects).collect()
    }

    /// `"measurement:outcome"` labels in the equivalence indexing.
    pub fn flat_outcome_labels(&self) -> Vec<String> {
        self.measurements
            .iter()
            .flat_map(|m| m.outcome_labels.iter().map(move |y| format!("{}:{}", m.label, y)))
            .collect()
    }

    pub fn born_table(&self) -> Result<DataTable<f64>> {
        let meas: Vec<Vec<Effect>> = self.measurements.iter().map(|m| m.effects.clone()).collect();
        born_table(&self.states, &meas)
    }

    pub fn with_equivalences(&self, prep: Vec<Vec<Rational>>, meas: Vec<Vec<Rational>>) -> Result<Scenario> {
        let states = self.state_labels.iter().cloned().zip(self.states.iter().cloned()).collect();
        Scenario::new(states, self.measurements.clone(), prep, meas)
    }
}

fn check_unique(what: &str, labels: &[String]) -> Result<()> {
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Structural(format!("duplicate {what} label '{}'", w[0])));
    }
    Ok(())
}

/// `‖Σ_i c_i M_i‖_max`.
fn combination_residual<'a>(coeffs: &[Rational], mats: impl Iterator<Item = &'a ComplexMatrix>, dim: usize) -> f64 {
    let mut acc = ComplexMatrix::zeros(dim);
    for (c, m) in coeffs.iter().zip(mats) {
        if !c.is_zero() {
            acc = &acc + &m.scale(c.to_f64());
        }
    }
    acc.max_abs()
}

pub fn prep_residual(sc: &Scenario, alpha: &[Rational]) -> f64 {
    combination_residual(alpha, sc.states.iter().map(QuantumState::matrix), sc.dim)
}

pub fn meas_residual(sc: &Scenario, beta: &[Rational]) -> f64 {
    combination_residual(beta, sc.flat_effects().into_iter().map(Effect::matrix), sc.dim)
}

/// Checks every declared equivalence; fails on the first residual above `tol`.
pub fn verify_equivalences(sc: &Scenario, tol: f64) -> Result<EquivalenceReport> {
    let prep_residuals: Vec<f64> = sc.prep_equivalences.iter().map(|a| prep_residual(sc, a)).collect();
    let meas_residuals: Vec<f64> = sc.meas_equivalences.iter().map(|b| meas_residual(sc, b)).collect();
    if let Some((a, r)) = prep_residuals.iter().enumerate().find(|(_, r)| !(**r <= tol)) {
        return Err(Error::Validation(format!(
            "preparation equivalence {a} ({}) does not hold: residual {r:.3e} > {tol:.1e}",
            fmt_vec(&sc.prep_equivalences[a])
        )));
    }
    if let Some((b, r)) = meas_residuals.iter().enumerate().find(|(_, r)| !(**r <= tol)) {
        return Err(Error::Validation(format!(
            "measurement equivalence {b} ({}) does not hold: residual {r:.3e} > {tol:.1e}",
            fmt_vec(&sc.meas_equivalences[b])
        )));
    }
    Ok(EquivalenceReport { prep_residuals, meas_residuals })
}

fn fmt_vec(v: &[Rational]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

/// Integer entries, gcd 1, first nonzero entry positive.
pub fn canonical_direction(v: &[Rational]) -> Vec<Rational> {
    let mut ints = primitive_integer_vector(v);
    normalize_sign(&mut ints);
    ints.into_iter().map(Rational::from_integer).collect()
}

/// Keeps the vectors that are linearly independent of those before them.
pub(crate) fn independent_subset(vectors: Vec<Vec<Rational>>, len: usize) -> Vec<Vec<Rational>> {
    let mut kept: Vec<Vec<Rational>> = Vec::new();
    for v in vectors {
        kept.push(v);
        if rank_of_rows(&kept, len) < kept.len() {
            kept.pop();
        }
    }
    kept
}

/// Pads every measurement with zero effects up to the largest outcome count.
///
/// Padded outcomes are labelled `pad0, pad1, …` (suffixed further if a label
/// collides) and get zero coefficients in every measurement equivalence.
pub fn pad_outcomes(sc: &Scenario) -> Scenario {
    let max = sc.measurements.iter().map(Measurement::len).max().unwrap_or(0);
    if sc.uniform_outcomes().is_some() || sc.measurements.is_empty() {
        return sc.clone();
    }
    let mut measurements = Vec::with_capacity(sc.measurements.len());
    let mut old_to_new: Vec<usize> = Vec::new();
    for (t, m) in sc.measurements.iter().enumerate() {
        let mut m = m.clone();
        for y in 0..m.len() {
            old_to_new.push(t * max + y);
        }
        let mut k = 0;
        while m.len() < max {
            let mut label = format!("pad{k}");
            while m.outcome_labels.contains(&label) {
                label.push('_');
            }
            m.outcome_labels.push(label);
            m.effects.push(Effect::zero(sc.dim));
            k += 1;
        }
        measurements.push(m);
    }
    let meas_equivalences = sc
        .meas_equivalences
        .iter()
        .map(|beta| {
            let mut padded = vec![Rational::zero(); max * sc.measurements.len()];
            for (i, c) in beta.iter().enumerate() {
                padded[old_to_new[i]] = c.clone();
            }
            padded
        })
        .collect();
    Scenario { measurements, meas_equivalences, ..sc.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::bloch_plane_state;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    fn proj(angle: f64) -> Effect {
        bloch_plane_state(angle).into()
    }

    fn four_states() -> Vec<(String, QuantumState)> {
        [("0", 0.0), ("1", 180.0), ("+", 90.0), ("-", 270.0)]
            .iter()
            .map(|(l, a)| (l.to_string(), bloch_plane_state(*a)))
            .collect()
    }

    #[test]
    fn four_state_equivalence_verifies() {
        let half = vec![r(1, 2), r(1, 2), r(-1, 2), r(-1, 2)];
        let sc = Scenario::new(four_states(), vec![], vec![half], vec![]).unwrap();
        let rep = verify_equivalences(&sc, 1e-12).unwrap();
        assert!(rep.prep_residuals[0] <= 1e-12);
    }

    #[test]
    fn single_state_is_not_an_equivalence() {
        let sc = Scenario::new_unverified(four_states(), vec![], vec![ints(&[1, 0, 0, 0])], vec![]).unwrap();
        let err = verify_equivalences(&sc, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("preparation equivalence 0")));
        assert!(Scenario::new(four_states(), vec![], vec![ints(&[1, 0, 0, 0])], vec![]).is_err());
    }

    #[test]
    fn structural_errors() {
        let meas = Measurement::unlabelled("Z", vec![proj(0.0), proj(180.0)]);
        assert!(Scenario::new(four_states(), vec![meas.clone()], vec![ints(&[1, 1])], vec![]).is_err());
        assert!(Scenario::new(four_states(), vec![meas.clone()], vec![], vec![ints(&[1])]).is_err());
        let not_povm = Measurement::unlabelled("bad", vec![proj(0.0), proj(90.0)]);
        assert!(matches!(
            Scenario::new(four_states(), vec![not_povm], vec![], vec![]),
            Err(Error::Validation(_))
        ));
        let mut dup = four_states();
        dup[1].0 = "0".into();
        assert!(Scenario::new(dup, vec![meas], vec![], vec![]).is_err());
    }

    #[test]
    fn padding() {
        let two = Measurement::unlabelled("Z", vec![proj(0.0), proj(180.0)]);
        let third = Effect::new(ComplexMatrix::identity(2).scale(1.0 / 3.0)).unwrap();
        let three = Measurement::unlabelled("T", vec![third.clone(), third.clone(), third]);
        let beta = ints(&[1, 1, -1, -1, -1]);
        let sc = Scenario::new(four_states(), vec![two, three], vec![], vec![beta]).unwrap();
        assert_eq!(sc.uniform_outcomes(), None);
        let padded = pad_outcomes(&sc);
        assert_eq!(padded.uniform_outcomes(), Some(3));
        assert_eq!(padded.meas_equivalences()[0], ints(&[1, 1, 0, -1, -1, -1]));
        assert!(verify_equivalences(&padded, 1e-12).is_ok());
        let table = padded.born_table().unwrap();
        for s in 0..4 {
            assert_eq!(*table.get(2, s, 0), 0.0);
        }
        assert_eq!(pad_outcomes(&padded), padded);
    }

    #[test]
    fn independent_subset_drops_dependent_vectors() {
        let v = vec![ints(&[1, 1, 0]), ints(&[2, 2, 0]), ints(&[0, 0, 1]), ints(&[1, 1, 1])];
        assert_eq!(independent_subset(v, 3), vec![ints(&[1, 1, 0]), ints(&[0, 0, 1])]);
        assert_eq!(canonical_direction(&[r(-1, 2), r(1, 3)]), ints(&[3, -2]));
    }
}
