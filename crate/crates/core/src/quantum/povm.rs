use num_complex::Complex64;

use super::matrix::{hermitian_eigenvalues, ComplexMatrix};
use super::tol;
use crate::error::{Error, Result};
use crate::scenario::DataTable;

/// Density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState(ComplexMatrix);

impl QuantumState {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > tol::HERM {
            return Err(Error::Validation(format!("state is not Hermitian (defect {defect:.3e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::Validation(format!("state has trace {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&m)?[0];
        if min < -tol::PSD {
            return Err(Error::Validation(format!("state is not positive (min eigenvalue {min:.3e})")));
        }
        Ok(QuantumState(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// POVM element: Hermitian with `0 ≤ E ≤ 𝟙`.
#[derive(Clone, Debug, PartialEq)]
pub struct Effect(ComplexMatrix);

impl Effect {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if defect > tol::HERM {
            return Err(Error::Validation(format!("effect is not Hermitian (defect {defect:.3e})")));
        }
        let ev = hermitian_eigenvalues(&m)?;
        let (min, max) = (ev[0], ev[ev.len() - 1]);
        if min < -tol::PSD || max > 1.0 + tol::PSD {
            return Err(Error::Validation(format!(
                "effect spectrum [{min:.3e}, {max:.3e}] leaves [0, 1]"
            )));
        }
        Ok(Effect(m))
    }

    pub fn zero(dim: usize) -> Self {
        Effect(ComplexMatrix::zeros(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `s·E` for `s ∈ [0, 1]`; stays a valid effect.
    pub fn scaled(&self, s: f64) -> Effect {
        debug_assert!((0.0..=1.0).contains(&s));
        Effect(self.0.scale(s))
    }
}

pub fn is_projector(e: &Effect) -> bool {
    let m = e.matrix();
    (m * m).max_abs_diff(m) <= tol::PROJ
}

/// Whether the effects form a POVM: each is a valid effect (guaranteed by
/// construction) and they sum to the identity within tolerance.
pub fn is_povm(effects: &[Effect]) -> Result<bool> {
    let Some(first) = effects.first() else {
        return Ok(false);
    };
    let dim = first.dim();
    if let Some(e) = effects.iter().find(|e| e.dim() != dim) {
        return Err(Error::Structural(format!("effects of dimension {dim} and {}", e.dim())));
    }
    let mut sum = ComplexMatrix::zeros(dim);
    for e in effects {
        sum = &sum + e.matrix();
    }
    Ok(sum.max_abs_diff(&ComplexMatrix::identity(dim)) <= tol::SUM)
}

/// Born-rule table `P(y|s,t) = tr(E_{y|t} ρ_s)`.
///
/// All measurements must have the same number of outcomes (pad first).
pub fn born_table(states: &[QuantumState], measurements: &[Vec<Effect>]) -> Result<DataTable<f64>> {
    let n_out = measurements.first().map_or(0, Vec::len);
    if measurements.iter().any(|m| m.len() != n_out) {
        return Err(Error::Structural("measurements have different outcome counts; pad them first".into()));
    }
    let dim = states.first().map(QuantumState::dim).or_else(|| {
        measurements.iter().flatten().next().map(Effect::dim)
    });
    if let Some(dim) = dim {
        let bad_state = states.iter().any(|s| s.dim() != dim);
        let bad_effect = measurements.iter().flatten().any(|e| e.dim() != dim);
        if bad_state || bad_effect {
            return Err(Error::Structural("states and effects have mismatched dimensions".into()));
        }
    }
    let mut entries = Vec::with_capacity(states.len() * measurements.len() * n_out);
    for rho in states {
        for meas in measurements {
            let mut total = 0.0;
            for e in meas {
                let p: Complex64 = e.matrix().trace_product(rho.matrix());
                if p.im.abs() > 1e-10 {
                    return Err(Error::Internal(format!("Born probability has imaginary part {}", p.im)));
                }
                let p = p.re.clamp(0.0, 1.0);
                total += p;
                entries.push(p);
            }
            if n_out > 0 && (total - 1.0).abs() > tol::SUM {
                return Err(Error::Validation(format!("Born probabilities sum to {total}")));
            }
        }
    }
    DataTable::new(n_out, states.len(), measurements.len(), entries)
}

/// Pure qubit state with Bloch vector `(sin θ, 0, cos θ)`, θ given in degrees.
pub fn bloch_plane_state(angle_deg: f64) -> QuantumState {
    let theta = angle_deg.to_radians();
    let (s, c) = theta.sin_cos();
    let m = ComplexMatrix::from_real_rows(&[&[(1.0 + c) / 2.0, s / 2.0], &[s / 2.0, (1.0 - c) / 2.0]])
        .expect("2x2");
    QuantumState(m)
}

impl From<QuantumState> for Effect {
    fn from(s: QuantumState) -> Effect {
        Effect(s.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::hermitian_eigenvalues;

    fn half_identity() -> Effect {
        Effect::new(ComplexMatrix::identity(2).scale(0.5)).unwrap()
    }

    #[test]
    fn bloch_states() {
        let zero = bloch_plane_state(0.0);
        assert!(zero.matrix().max_abs_diff(&ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap()) < 1e-15);
        let one = bloch_plane_state(180.0);
        assert!(one.matrix().max_abs_diff(&ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap()) < 1e-15);
        let plus = bloch_plane_state(90.0);
        assert!(plus.matrix().entries().iter().all(|z| (z.re - 0.5).abs() < 1e-15 && z.im == 0.0));
    }

    #[test]
    fn antipodal_states_sum_to_identity() {
        for k in 0..36 {
            let a = 10.0 * k as f64 + 3.7;
            let s = bloch_plane_state(a).matrix() + bloch_plane_state(a + 180.0).matrix();
            assert!(s.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        }
    }

    #[test]
    fn povm_checks() {
        assert!(is_povm(&[half_identity(), half_identity()]).unwrap());
        let id = Effect::new(ComplexMatrix::identity(2)).unwrap();
        assert!(!is_povm(&[id.clone(), id]).unwrap());
        let three = Effect::new(ComplexMatrix::identity(3)).unwrap();
        assert!(matches!(is_povm(&[half_identity(), three]), Err(Error::Structural(_))));
    }

    #[test]
    fn invalid_effects_and_states() {
        assert!(Effect::new(ComplexMatrix::identity(2).scale(1.5)).is_err());
        assert!(QuantumState::new(ComplexMatrix::identity(2)).is_err());
        let neg = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(QuantumState::new(neg).is_err());
    }

    #[test]
    fn half_projector_spectrum() {
        let e: Effect = bloch_plane_state(135.0).into();
        let ev = hermitian_eigenvalues(&e.scaled(0.5).matrix().clone()).unwrap();
        assert!(ev[0].abs() < 1e-10 && (ev[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_born_table() {
        let rho = QuantumState::new(ComplexMatrix::identity(2).scale(0.5)).unwrap();
        let t = born_table(&[rho], &[vec![half_identity(), half_identity()]]).unwrap();
        assert_eq!(t.get(0, 0, 0), &0.5);
        assert_eq!(t.get(1, 0, 0), &0.5);
    }

    #[test]
    fn born_table_shape_errors() {
        let rho = bloch_plane_state(0.0);
        let uneven = vec![vec![half_identity(), half_identity()], vec![Effect::new(ComplexMatrix::identity(2)).unwrap()]];
        assert!(born_table(std::slice::from_ref(&rho), &uneven).is_err());
        let big = vec![vec![Effect::new(ComplexMatrix::identity(3)).unwrap()]];
        assert!(born_table(&[rho], &big).is_err());
    }
}
