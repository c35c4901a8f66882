use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{is_povm, is_projector, Effect, QuantumState};
use crate::scenario::{DataTable, Direction, FlagDistribution, Prob, Scenario};

/// Finite ontological model: `mu[s][λ] = P(λ|s)` and `xi[λ][t][y] = P(y|t,λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OntologicalModel<T> {
    pub ontic_states: Vec<String>,
    pub mu: Vec<Vec<T>>,
    pub xi: Vec<Vec<Vec<T>>>,
}

impl<T: Prob> OntologicalModel<T> {
    pub fn new(ontic_states: Vec<String>, mu: Vec<Vec<T>>, xi: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let m = OntologicalModel { ontic_states, mu, xi };
        m.check_shape()?;
        Ok(m)
    }

    pub fn num_ontic(&self) -> usize {
        self.ontic_states.len()
    }

    /// `(|Y|, |S|, |T|)` of the tables this model predicts.
    pub fn shape(&self) -> (usize, usize, usize) {
        let nt = self.xi.first().map_or(0, Vec::len);
        let ny = self.xi.first().and_then(|x| x.first()).map_or(0, Vec::len);
        (ny, self.mu.len(), nt)
    }

    fn check_shape(&self) -> Result<()> {
        let l = self.ontic_states.len();
        if self.xi.len() != l {
            return Err(Error::Structural(format!("{} response functions for {l} ontic states", self.xi.len())));
        }
        if let Some(s) = self.mu.iter().position(|row| row.len() != l) {
            return Err(Error::Structural(format!("distribution of state {s} has {} entries, expected {l}", self.mu[s].len())));
        }
        let (ny, _, nt) = self.shape();
        if self.xi.iter().any(|x| x.len() != nt || x.iter().any(|r| r.len() != ny)) {
            return Err(Error::Structural("response functions have inconsistent shapes".into()));
        }
        Ok(())
    }

    /// `P(y|s,t) = Σ_λ P(λ|s)·P(y|t,λ)`.
    pub fn predicted_table(&self) -> DataTable<T> {
        let (ny, ns, nt) = self.shape();
        DataTable::from_fn(ny, ns, nt, |y, s, t| {
            self.mu[s].iter().zip(&self.xi).fold(T::zero(), |acc, (p, x)| acc.add(&p.mul(&x[t][y])))
        })
    }

    /// Checks distributions and both noncontextuality constraints against
    /// `sc`. `tol = 0` means exact for rational models.
    pub fn validate(&self, sc: &Scenario, tol: f64) -> Result<()> {
        self.check_shape()?;
        let (ny, ns, nt) = self.shape();
        if ns != sc.num_states() || nt != sc.num_measurements() || sc.uniform_outcomes().is_some_and(|n| n != ny) {
            return Err(Error::Structural(format!(
                "model shape (|Y|={ny}, |S|={ns}, |T|={nt}) does not match the scenario"
            )));
        }
        sc.require_uniform_outcomes()?;
        let ok = |v: &T, target: &T| v.distance(target) <= tol;
        for (s, row) in self.mu.iter().enumerate() {
            let sum = row.iter().fold(T::zero(), |a, p| a.add(p));
            if row.iter().any(|p| p.is_negative() && p.to_f64() < -tol) || !ok(&sum, &T::one()) {
                return Err(Error::Validation(format!("P(λ|s) for state {s} is not a distribution")));
            }
        }
        for (l, x) in self.xi.iter().enumerate() {
            for (t, row) in x.iter().enumerate() {
                let sum = row.iter().fold(T::zero(), |a, p| a.add(p));
                if row.iter().any(|p| p.is_negative() && p.to_f64() < -tol) || !ok(&sum, &T::one()) {
                    return Err(Error::Validation(format!("response of ontic state {l} to measurement {t} is not a distribution")));
                }
            }
        }
        for (a, alpha) in sc.prep_equivalences().iter().enumerate() {
            for l in 0..self.num_ontic() {
                let v = alpha.iter().zip(&self.mu).fold(T::zero(), |acc, (c, row)| acc.add(&row[l].scale(c)));
                if !ok(&v, &T::zero()) {
                    return Err(Error::Validation(format!(
                        "preparation equivalence {a} is not respected on ontic state {l} (residual {:.3e})",
                        v.to_f64()
                    )));
                }
            }
        }
        for (b, beta) in sc.meas_equivalences().iter().enumerate() {
            for (l, x) in self.xi.iter().enumerate() {
                let v = beta.iter().enumerate().fold(T::zero(), |acc, (i, c)| acc.add(&x[i / ny][i % ny].scale(c)));
                if !ok(&v, &T::zero()) {
                    return Err(Error::Validation(format!(
                        "measurement equivalence {b} is not respected on ontic state {l} (residual {:.3e})",
                        v.to_f64()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_f64(&self) -> OntologicalModel<f64> {
        OntologicalModel {
            ontic_states: self.ontic_states.clone(),
            mu: self.mu.iter().map(|r| r.iter().map(Prob::to_f64).collect()).collect(),
            xi: self.xi.iter().map(|x| x.iter().map(|r| r.iter().map(Prob::to_f64).collect()).collect()).collect(),
        }
    }
}

/// Moves a model between a scenario and its flag-convexification: the
/// ontic states and `P(λ|s)` are unchanged, responses scale by `p(t)`.
pub fn transfer_model<T: Prob>(m: &OntologicalModel<T>, p: &FlagDistribution, direction: Direction) -> Result<OntologicalModel<T>> {
    m.check_shape()?;
    let (ny, _, nt) = m.shape();
    let w = p.weights();
    let xi = match direction {
        Direction::ToFlagged => {
            if nt != p.len() {
                return Err(Error::Structural(format!("model has {nt} measurements but the flag distribution has {}", p.len())));
            }
            m.xi.iter()
                .map(|x| vec![(0..nt * ny).map(|i| x[i / ny][i % ny].scale(&w[i / ny])).collect()])
                .collect()
        }
        Direction::ToOriginal => {
            let k = p.len();
            if nt != 1 || ny % k != 0 {
                return Err(Error::Structural(format!(
                    "flagged model must have one measurement and a multiple of {k} outcomes"
                )));
            }
            let y0 = ny / k;
            m.xi.iter()
                .map(|x| (0..k).map(|t| (0..y0).map(|y| x[0][t * y0 + y].div_rational(&w[t])).collect()).collect())
                .collect()
        }
    };
    Ok(OntologicalModel { ontic_states: m.ontic_states.clone(), mu: m.mu.clone(), xi })
}

/// Model for a single projective measurement: one ontic state per outcome,
/// deterministic responses, `P(λ|s)` given by the Born rule.
pub fn trivial_projective_model(states: &[QuantumState], projective: &[Effect]) -> Result<OntologicalModel<f64>> {
    if let Some(i) = projective.iter().position(|e| !is_projector(e)) {
        return Err(Error::Domain(format!("effect {i} is not a projector")));
    }
    if !is_povm(projective)? {
        return Err(Error::Domain("effects do not sum to the identity".into()));
    }
    let n = projective.len();
    let table = crate::quantum::born_table(states, &[projective.to_vec()])?;
    let mu = (0..states.len()).map(|s| (0..n).map(|l| *table.get(l, s, 0)).collect()).collect();
    let xi = (0..n).map(|l| vec![(0..n).map(|y| if y == l { 1.0 } else { 0.0 }).collect()]).collect();
    OntologicalModel::new((0..n).map(|l| format!("λ{l}")).collect(), mu, xi)
}
