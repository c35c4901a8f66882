use super::data::{nc_data_polytope, ontic_responses, DataPolytope, NoncontextualityInequality};
use super::model::OntologicalModel;
use crate::error::{Error, Result};
use crate::linalg::{lp_solve, rational_reconstruct, LpBuilder, LpVerdict, Rational};
use crate::polytope::{contains, Membership, Point};
use crate::scenario::{DataTable, Prob, Scenario};

/// Default per-entry slack for float tables.
pub const MEMBERSHIP_TOL: f64 = 1e-7;
/// Denominator bound used when rationalizing float entries.
pub const RATIONALIZE_DENOMINATOR: u64 = 1_000_000;
/// Largest rationalization error accepted before falling back to the exact
/// binary value of an entry.
const ROUNDING_LIMIT: f64 = 1e-8;

/// Tables accepted by [`nc_membership`].
pub trait TableEntry: Prob {
    /// Center and half-width of the window the model must hit.
    fn window(&self, tol: &Rational) -> (Rational, Rational);
    fn point(table: &DataTable<Self>) -> Vec<Self>;
    fn as_point(v: &[Self]) -> Point<'_>;
    /// Whether `pred` reproduces `self` (exactly, or within `tol`).
    fn reproduced_by(&self, pred: &Rational, tol: f64) -> bool;
    const EXACT: bool;
}

impl TableEntry for Rational {
    fn window(&self, _tol: &Rational) -> (Rational, Rational) {
        (self.clone(), Rational::zero())
    }
    fn point(table: &DataTable<Self>) -> Vec<Self> {
        table.entries().to_vec()
    }
    fn as_point(v: &[Self]) -> Point<'_> {
        Point::Exact(v)
    }
    fn reproduced_by(&self, pred: &Rational, _tol: f64) -> bool {
        self == pred
    }
    const EXACT: bool = true;
}

impl TableEntry for f64 {
    fn window(&self, tol: &Rational) -> (Rational, Rational) {
        let rounded = rational_reconstruct(*self, RATIONALIZE_DENOMINATOR).expect("finite table entry");
        if (rounded.to_f64() - self).abs() <= ROUNDING_LIMIT {
            let slack = tol - &Rational::new(1, 100_000_000);
            (rounded, if slack.is_negative() { Rational::zero() } else { slack })
        } else {
            (Rational::from_f64_exact(*self).expect("finite table entry"), tol.clone())
        }
    }
    fn point(table: &DataTable<Self>) -> Vec<Self> {
        table.entries().to_vec()
    }
    fn as_point(v: &[Self]) -> Point<'_> {
        Point::Float(v)
    }
    fn reproduced_by(&self, pred: &Rational, tol: f64) -> bool {
        (pred.to_f64() - self).abs() <= tol * (1.0 + 1e-9)
    }
    const EXACT: bool = false;
}

#[derive(Clone, Debug, PartialEq)]
pub struct FacetViolation {
    pub inequality: NoncontextualityInequality,
    /// `coeffs·table`.
    pub value: f64,
    /// `coeffs·table − bound`.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Noncontextual { model: OntologicalModel<Rational> },
    Contextual {
        /// Farkas certificate for the model LP (rows in [`model_lp`] order),
        /// already verified exactly.
        certificate: Vec<Rational>,
        violation: Option<FacetViolation>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NCReport {
    pub verdict: Verdict,
    /// The verdict changes when the slack is scaled by 10 or 1/10.
    pub marginal: bool,
    pub diagnostics: Vec<String>,
}

impl NCReport {
    pub fn is_contextual(&self) -> bool {
        matches!(self.verdict, Verdict::Contextual { .. })
    }
}

/// LP over `P(λ|s)` (index `s·|Λ| + λ`): rows are the per-state
/// normalizations, then the preparation equivalences per `(a, λ)`, then per
/// data entry either one equality (exact) or an upper and a lower bound.
pub fn model_lp<T: TableEntry>(sc: &Scenario, ontic: &[Vec<Rational>], table: &DataTable<T>, tol: &Rational) -> Result<crate::linalg::LpProblem> {
    let (ny, ns, nt) = table.shape();
    let l = ontic.len();
    let n = ns * l;
    let mut lp = LpBuilder::new(n);
    for s in 0..ns {
        let mut a = vec![Rational::zero(); n];
        for x in &mut a[s * l..(s + 1) * l] {
            *x = Rational::one();
        }
        lp.eq(a, Rational::one());
    }
    for alpha in sc.prep_equivalences() {
        for lam in 0..l {
            let mut a = vec![Rational::zero(); n];
            for (s, c) in alpha.iter().enumerate() {
                a[s * l + lam] = c.clone();
            }
            lp.eq(a, Rational::zero());
        }
    }
    for s in 0..ns {
        for t in 0..nt {
            for y in 0..ny {
                let mut a = vec![Rational::zero(); n];
                for lam in 0..l {
                    a[s * l + lam] = ontic[lam][t * ny + y].clone();
                }
                let (center, slack) = table.get(y, s, t).window(tol);
                if slack.is_zero() {
                    lp.eq(a, center);
                } else {
                    lp.le(a.clone(), &center + &slack);
                    lp.ge(a, &center - &slack);
                }
            }
        }
    }
    lp.build()
}

fn slack(tol: f64) -> Result<Rational> {
    rational_reconstruct(tol, 1_000_000_000_000)
}

fn decide<T: TableEntry>(sc: &Scenario, ontic: &[Vec<Rational>], table: &DataTable<T>, tol: f64) -> Result<LpVerdict> {
    lp_solve(&model_lp(sc, ontic, table, &slack(tol)?)?)
}

/// Independently re-checks a contextuality certificate against the model LP
/// built for `table` at slack `tol`.
pub fn verify_certificate<T: TableEntry>(sc: &Scenario, table: &DataTable<T>, tol: f64, certificate: &[Rational]) -> Result<bool> {
    let lp = model_lp(sc, &ontic_responses(sc)?, table, &slack(tol)?)?;
    Ok(lp.verify_certificate(certificate))
}

/// Decides whether `table` has a noncontextual model in `sc`.
///
/// Exact tables are decided exactly (`tol` ignored). Float tables are
/// rationalized and each entry may be missed by at most `tol`.
pub fn nc_membership<T: TableEntry>(sc: &Scenario, table: &DataTable<T>, tol: f64) -> Result<NCReport> {
    nc_membership_with(sc, table, tol, None)
}

/// [`nc_membership`] with a precomputed data polytope for reporting the
/// violated facet.
pub fn nc_membership_with<T: TableEntry>(
    sc: &Scenario,
    table: &DataTable<T>,
    tol: f64,
    data: Option<&DataPolytope>,
) -> Result<NCReport> {
    let ny = sc.require_uniform_outcomes()?;
    let expected = (ny, sc.num_states(), sc.num_measurements());
    if table.shape() != expected {
        return Err(Error::Structural(format!(
            "table shape {:?} does not match the scenario's (|Y|, |S|, |T|) = {expected:?}",
            table.shape()
        )));
    }
    if !(tol >= 0.0) || !tol.is_finite() {
        return Err(Error::Domain(format!("tolerance must be a nonnegative number, got {tol}")));
    }
    let ontic = ontic_responses(sc)?;
    let mut diagnostics = Vec::new();
    let verdict = decide(sc, &ontic, table, tol)?;
    let feasible = verdict.is_feasible();
    let mut marginal = false;
    if !T::EXACT {
        for probe in [tol / 10.0, tol * 10.0] {
            if decide(sc, &ontic, table, probe)?.is_feasible() != feasible {
                marginal = true;
                diagnostics.push(format!("marginal: verdict flips at slack {probe:e}"));
            }
        }
    }
    let verdict = match verdict {
        LpVerdict::Optimal { point, .. } => {
            let l = ontic.len();
            let mu: Vec<Vec<Rational>> = point.chunks(l).map(<[Rational]>::to_vec).collect();
            let xi = ontic.iter().map(|q| q.chunks(ny).map(<[Rational]>::to_vec).collect()).collect();
            let model = OntologicalModel::new((0..l).map(|k| format!("λ{k}")).collect(), mu, xi)?;
            model.validate(sc, 0.0)?;
            let pred = model.predicted_table();
            if pred.entries().iter().zip(table.entries()).any(|(p, x)| !x.reproduced_by(p, tol)) {
                return Err(Error::Internal("recovered model does not reproduce the table".into()));
            }
            Verdict::Noncontextual { model }
        }
        LpVerdict::Infeasible { certificate } => {
            let owned;
            let data = match data {
                Some(d) => d,
                None => {
                    owned = nc_data_polytope(sc)?;
                    &owned
                }
            };
            let x = T::point(table);
            let violation = match contains(&data.facets, T::as_point(&x), tol)? {
                Membership::Outside(v) if v.kind == crate::polytope::ConstraintKind::Inequality => {
                    let iq = data.inequalities[v.index].clone();
                    Some(FacetViolation { value: iq.value(table), margin: v.margin, inequality: iq })
                }
                Membership::Outside(v) => {
                    diagnostics.push(format!("table violates affine-hull equality {} by {:.3e}", v.index, v.margin));
                    None
                }
                Membership::Inside => {
                    diagnostics.push("no facet is violated beyond the slack; infeasibility is within rounding".into());
                    None
                }
            };
            Verdict::Contextual { certificate, violation }
        }
        LpVerdict::Unbounded => return Err(Error::Internal("feasibility LP reported unbounded".into())),
    };
    Ok(NCReport { verdict, marginal, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_scenario, pom_scenario};
    use crate::scenario::{flag_convexify, translate_table, Direction, FlagDistribution};
    use proptest::prelude::*;

    fn example_polytope() -> &'static DataPolytope {
        static DATA: std::sync::OnceLock<DataPolytope> = std::sync::OnceLock::new();
        DATA.get_or_init(|| nc_data_polytope(&example_scenario()).unwrap())
    }

    fn mixture(d: &DataPolytope, weights: &[u32]) -> DataTable<Rational> {
        let total: u32 = weights.iter().sum();
        let (ny, ns, nt) = d.shape;
        let mut x = vec![Rational::zero(); ny * ns * nt];
        for (w, v) in weights.iter().zip(&d.vertices.vertices) {
            let w = Rational::new(*w, total);
            for (a, b) in x.iter_mut().zip(v) {
                *a += &w * b;
            }
        }
        DataTable::new(ny, ns, nt, x).unwrap()
    }

    #[test]
    fn example_quantum_table_is_contextual() {
        let sc = example_scenario();
        let table = sc.born_table().unwrap();
        let rep = nc_membership(&sc, &table, MEMBERSHIP_TOL).unwrap();
        assert!(!rep.marginal);
        let Verdict::Contextual { certificate, violation } = rep.verdict else { panic!("expected contextual") };
        assert!(verify_certificate(&sc, &table, MEMBERSHIP_TOL, &certificate).unwrap());
        let forged: Vec<Rational> = certificate.iter().map(|y| -y).collect();
        assert!(!verify_certificate(&sc, &table, MEMBERSHIP_TOL, &forged).unwrap());
        let v = violation.unwrap();
        assert!((v.margin - (0.5f64.sqrt() - 0.5)).abs() < 1e-9, "{}", v.margin);
        assert!((v.value - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(!v.inequality.trivial);
    }

    #[test]
    fn uniform_table_is_noncontextual() {
        let sc = example_scenario();
        let table = DataTable::new(4, 4, 1, vec![Rational::new(1, 4); 16]).unwrap();
        let rep = nc_membership(&sc, &table, 0.0).unwrap();
        let Verdict::Noncontextual { model } = rep.verdict else { panic!("expected noncontextual") };
        assert_eq!(model.predicted_table(), table);
        model.validate(&sc, 0.0).unwrap();
    }

    #[test]
    fn pom_and_flagged_verdicts_agree() {
        let pom = pom_scenario();
        let table = pom.born_table().unwrap();
        assert!(nc_membership(&pom, &table, MEMBERSHIP_TOL).unwrap().is_contextual());
        for w in [vec![Rational::new(1, 2); 2], vec![Rational::new(1, 3), Rational::new(2, 3)]] {
            let p = FlagDistribution::new(w).unwrap();
            let flagged = flag_convexify(&pom, &p).unwrap();
            let t = translate_table(&table, &p, Direction::ToFlagged).unwrap();
            assert!(nc_membership(&flagged, &t, MEMBERSHIP_TOL).unwrap().is_contextual());
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let table = DataTable::new(2, 4, 1, vec![0.5; 8]).unwrap();
        assert!(matches!(nc_membership(&example_scenario(), &table, 1e-7), Err(Error::Structural(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn membership_agrees_with_facets(weights in prop::collection::vec(0u32..5, 32), shift in 0i64..=4) {
            let sc = example_scenario();
            let d = example_polytope();
            prop_assume!(weights.iter().take(d.vertices.vertices.len()).sum::<u32>() > 0);
            let base = mixture(d, &weights[..d.vertices.vertices.len()]);
            // Move towards the quantum table with 1/√2 replaced by 7/10,
            // which keeps every equality exact and still violates the facet.
            let q = sc.born_table().unwrap();
            let quantum: Vec<Rational> =
                q.entries().iter().map(|&x| Rational::new(((4.0 * x - 1.0) * 10.0).round() as i64 + 10, 40)).collect();
            let shift = Rational::new(shift, 4);
            let x: Vec<Rational> = base.entries().iter().zip(&quantum).map(|(b, qv)| b + &(&shift * &(qv - b))).collect();
            let table = DataTable::new(4, 4, 1, x.clone()).unwrap();
            let rep = nc_membership_with(&sc, &table, 0.0, Some(d)).unwrap();
            let inside = contains(&d.facets, Point::Exact(&x), 0.0).unwrap().is_inside();
            prop_assert_eq!(!rep.is_contextual(), inside);
            if let Verdict::Noncontextual { model } = rep.verdict {
                prop_assert_eq!(model.predicted_table(), table);
            }
        }

        #[test]
        fn sampled_models_are_noncontextual(weights in prop::collection::vec(0u32..10, 32)) {
            let sc = example_scenario();
            let d = example_polytope();
            let k = d.vertices.vertices.len();
            prop_assume!(weights.iter().take(k).sum::<u32>() > 0);
            let table = mixture(d, &weights[..k]);
            prop_assert!(!nc_membership_with(&sc, &table, 0.0, Some(d)).unwrap().is_contextual());
            let float = table.to_f64();
            prop_assert!(!nc_membership_with(&sc, &float, MEMBERSHIP_TOL, Some(d)).unwrap().is_contextual());
        }
    }
}
