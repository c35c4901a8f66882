use serde::{Deserialize, Serialize};

use super::{canonical_direction, independent_subset, DataTable, Measurement, Prob, Scenario};
use crate::error::{Error, Result};
use crate::linalg::Rational;

/// Full-support distribution over measurement settings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct FlagDistribution {
    weights: Vec<Rational>,
}

impl FlagDistribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("flag distribution is empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_positive()) {
            return Err(Error::Domain(format!("flag distribution needs full support, got weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if total != Rational::one() {
            return Err(Error::Domain(format!("flag weights sum to {total}, expected 1")));
        }
        Ok(FlagDistribution { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("flag distribution is empty".into()));
        }
        Ok(FlagDistribution { weights: vec![Rational::new(1, n as i64); n] })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.weights.len() != n {
            return Err(Error::Domain(format!(
                "flag distribution has {} weights but there are {n} measurements",
                self.weights.len()
            )));
        }
        Ok(())
    }
}

impl TryFrom<Vec<Rational>> for FlagDistribution {
    type Error = Error;
    fn try_from(w: Vec<Rational>) -> Result<Self> {
        FlagDistribution::new(w)
    }
}

impl From<FlagDistribution> for Vec<Rational> {
    fn from(p: FlagDistribution) -> Self {
        p.weights
    }
}

/// Merges all measurements into one, choosing setting `t` with probability
/// `p(t)`; outcome `(y, t)` has effect `p(t)·E_{y|t}`.
///
/// Outcomes keep the equivalence indexing (measurement-major), so each
/// declared `β` carries over with column `(y, t)` rescaled by `1/p(t)`. The
/// normalization equivalences `Σ_y Ẽ_{y,0}/p(0) = Σ_y Ẽ_{y,t}/p(t)` are added
/// when not already implied.
pub fn flag_convexify(sc: &Scenario, p: &FlagDistribution) -> Result<Scenario> {
    p.check_len(sc.num_measurements())?;
    let mut outcomes = Vec::new();
    let mut column_weight = Vec::new();
    for (m, w) in sc.measurements().iter().zip(p.weights()) {
        let wf = w.to_f64();
        for (label, e) in m.outcome_labels.iter().zip(&m.effects) {
            outcomes.push((format!("({},{})", label, m.label), e.scaled(wf)));
            column_weight.push(w.clone());
        }
    }
    let label = format!("flag({})", sc.measurements().iter().map(|m| m.label.as_str()).collect::<Vec<_>>().join(","));
    let merged = Measurement::new(label, outcomes);
    let n = column_weight.len();

    let mut meas_eq: Vec<Vec<Rational>> = sc
        .meas_equivalences()
        .iter()
        .map(|beta| canonical_direction(&beta.iter().zip(&column_weight).map(|(b, w)| b / w).collect::<Vec<_>>()))
        .collect();
    let blocks: Vec<usize> = sc.measurements().iter().map(Measurement::len).collect();
    let offset = |t: usize| blocks[..t].iter().sum::<usize>();
    for t in 1..blocks.len() {
        let mut v = vec![Rational::zero(); n];
        for i in 0..blocks[0] {
            v[i] = p.weights()[0].recip();
        }
        for i in offset(t)..offset(t) + blocks[t] {
            v[i] = -p.weights()[t].recip();
        }
        meas_eq.push(canonical_direction(&v));
    }
    let meas_eq = independent_subset(meas_eq, n);

    let states = sc.state_labels().iter().cloned().zip(sc.states().iter().cloned()).collect();
    Scenario::new(states, vec![merged], sc.prep_equivalences().to_vec(), meas_eq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToFlagged,
    ToOriginal,
}

/// Converts between `P(y|s,t)` (shape `(|Y|, |S|, |T|)`) and the flagged
/// table `P(y,t|s) = p(t)·P(y|s,t)` (shape `(|Y|·|T|, |S|, 1)`, outcome
/// index `t·|Y| + y`).
///
/// `to_original` needs the original outcome count, recovered as
/// `outcomes / |p|`.
pub fn translate_table<T: Prob>(table: &DataTable<T>, p: &FlagDistribution, direction: Direction) -> Result<DataTable<T>> {
    let (ny, ns, nt) = table.shape();
    match direction {
        Direction::ToFlagged => {
            if nt != p.len() {
                return Err(Error::Structural(format!("table has {nt} measurements but the flag distribution has {}", p.len())));
            }
            let w = p.weights();
            Ok(DataTable::from_fn(ny * nt, ns, 1, |yt, s, _| {
                let (t, y) = (yt / ny, yt % ny);
                table.get(y, s, t).scale(&w[t])
            }))
        }
        Direction::ToOriginal => {
            if nt != 1 || ny % p.len() != 0 {
                return Err(Error::Structural(format!(
                    "flagged table must have one measurement and a multiple of {} outcomes, got shape ({ny}, {ns}, {nt})",
                    p.len()
                )));
            }
            let k = p.len();
            let y_orig = ny / k;
            let w = p.weights();
            Ok(DataTable::from_fn(y_orig, ns, k, |y, s, t| table.get(t * y_orig + y, s, 0).div_rational(&w[t])))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{bloch_plane_state, is_povm, ComplexMatrix, Effect, QuantumState};
    use crate::scenario::verify_equivalences;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn proj(angle: f64) -> Effect {
        bloch_plane_state(angle).into()
    }

    fn states() -> Vec<(String, QuantumState)> {
        [("0", 0.0), ("1", 180.0), ("+", 90.0), ("-", 270.0)]
            .iter()
            .map(|(l, a)| (l.to_string(), bloch_plane_state(*a)))
            .collect()
    }

    fn primed_pair() -> Scenario {
        let m0 = Measurement::new("Z'", vec![("0'".into(), proj(135.0)), ("1'".into(), proj(315.0))]);
        let m1 = Measurement::new("X'", vec![("+'".into(), proj(225.0)), ("-'".into(), proj(45.0))]);
        Scenario::new(states(), vec![m0, m1], vec![vec![r(1, 2), r(1, 2), r(-1, 2), r(-1, 2)]], vec![]).unwrap()
    }

    #[test]
    fn uniform_flagging_gives_half_projectors() {
        let sc = primed_pair();
        let flagged = flag_convexify(&sc, &FlagDistribution::uniform(2).unwrap()).unwrap();
        assert_eq!(flagged.num_measurements(), 1);
        let m = &flagged.measurements()[0];
        assert_eq!(m.outcome_labels, vec!["(0',Z')", "(1',Z')", "(+',X')", "(-',X')"]);
        for (e, a) in m.effects.iter().zip([135.0, 315.0, 225.0, 45.0]) {
            assert!(e.matrix().max_abs_diff(&proj(a).matrix().scale(0.5)) < 1e-15);
        }
        assert!(is_povm(&m.effects).unwrap());
        // The normalization equivalence E0 + E1 = E+ + E- is implied by flagging.
        let want: Vec<Rational> = [1, 1, -1, -1].iter().map(|&x| Rational::from_integer(x)).collect();
        assert_eq!(flagged.meas_equivalences(), &[want]);
        assert_eq!(flagged.prep_equivalences(), sc.prep_equivalences());
    }

    #[test]
    fn carried_equivalence_survives_nonuniform_weights() {
        let id3 = Effect::new(ComplexMatrix::identity(2).scale(1.0 / 3.0)).unwrap();
        let id_half = Effect::new(ComplexMatrix::identity(2).scale(0.5)).unwrap();
        let m0 = Measurement::unlabelled("A", vec![id3.clone(), id3.clone(), id3]);
        let m1 = Measurement::unlabelled("B", vec![id_half.clone(), id_half, Effect::zero(2)]);
        // (2/3)·𝟙 from A's first outcome equals (4/3)·(𝟙/2) from B's first.
        let beta = vec![r(2, 1), r(0, 1), r(0, 1), r(-4, 3), r(0, 1), r(0, 1)];
        let sc = Scenario::new(states(), vec![m0, m1], vec![], vec![beta]).unwrap();
        let p = FlagDistribution::new(vec![r(1, 5), r(4, 5)]).unwrap();
        let flagged = flag_convexify(&sc, &p).unwrap();
        let rep = verify_equivalences(&flagged, 1e-10).unwrap();
        assert_eq!(rep.meas_residuals.len(), 2);
        assert!(rep.max_residual() <= 1e-10);
    }

    #[test]
    fn single_measurement_is_rewrapped() {
        let m = Measurement::unlabelled("Z", vec![proj(0.0), proj(180.0)]);
        let sc = Scenario::new(states(), vec![m.clone()], vec![], vec![]).unwrap();
        let flagged = flag_convexify(&sc, &FlagDistribution::uniform(1).unwrap()).unwrap();
        assert_eq!(flagged.measurements()[0].effects, m.effects);
        assert_eq!(flagged.measurements()[0].outcome_labels, vec!["(0,Z)", "(1,Z)"]);
    }

    #[test]
    fn bad_distributions() {
        assert!(FlagDistribution::new(vec![r(1, 2), r(1, 3)]).is_err());
        assert!(FlagDistribution::new(vec![r(1, 1), r(0, 1)]).is_err());
        let sc = primed_pair();
        assert!(matches!(flag_convexify(&sc, &FlagDistribution::uniform(3).unwrap()), Err(Error::Domain(_))));
    }

    #[test]
    fn translation_examples() {
        let p = FlagDistribution::uniform(2).unwrap();
        let t = DataTable::new(2, 1, 2, vec![0.6, 0.4, 0.5, 0.5]).unwrap();
        let f = translate_table(&t, &p, Direction::ToFlagged).unwrap();
        assert_eq!(f.shape(), (4, 1, 1));
        assert!((f.get(0, 0, 0) - 0.3).abs() < 1e-15);
        let one = FlagDistribution::uniform(1).unwrap();
        assert!(translate_table(&t, &one, Direction::ToFlagged).is_err());
        let single = DataTable::new(2, 1, 1, vec![r(3, 5), r(2, 5)]).unwrap();
        assert_eq!(translate_table(&single, &one, Direction::ToFlagged).unwrap(), single);
        assert!(translate_table(&t, &p, Direction::ToOriginal).is_err());
    }

    #[test]
    fn born_statistics_commute_with_flagging() {
        let sc = primed_pair();
        let p = FlagDistribution::new(vec![r(2, 7), r(5, 7)]).unwrap();
        let flagged = flag_convexify(&sc, &p).unwrap();
        let direct = flagged.born_table().unwrap();
        let translated = translate_table(&sc.born_table().unwrap(), &p, Direction::ToFlagged).unwrap();
        assert!(direct.max_abs_diff(&translated) <= 1e-10);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let (ny, ns, nt) = (rng.gen_range(1..4), rng.gen_range(1..4), rng.gen_range(1..4));
            let t = DataTable::from_fn(ny, ns, nt, |_, _, _| rng.gen::<f64>());
            let raw: Vec<i64> = (0..nt).map(|_| rng.gen_range(1..10)).collect();
            let total: i64 = raw.iter().sum();
            let p = FlagDistribution::new(raw.iter().map(|&w| r(w, total)).collect()).unwrap();
            let back = translate_table(&translate_table(&t, &p, Direction::ToFlagged).unwrap(), &p, Direction::ToOriginal).unwrap();
            assert!(back.max_abs_diff(&t) <= 1e-12);
            let exact = t.map(|x| Rational::from_f64_exact(*x).unwrap());
            let back = translate_table(&translate_table(&exact, &p, Direction::ToFlagged).unwrap(), &p, Direction::ToOriginal).unwrap();
            assert_eq!(back, exact);
        }
    }
}
