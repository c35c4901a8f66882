use serde::{Deserialize, Serialize};

use super::symmetry::{sparse_form, SymmetryGroup};
use crate::error::{Error, Result};
use crate::linalg::{dot, lp_solve, LpBuilder, LpVerdict, Rational};
use crate::polytope::{h_to_v, project, v_to_h, Constraint, HPolytope, VPolytope};
use crate::scenario::{DataTable, Prob, Scenario};

/// Response functions `q_{y,t}` (concatenated outcome index) allowed by
/// nonnegativity, normalization and the measurement equivalences.
pub fn response_polytope(sc: &Scenario) -> HPolytope {
    let n: usize = sc.measurements().iter().map(|m| m.len()).sum();
    let unit = |j: usize, v: i64| {
        let mut a = vec![Rational::zero(); n];
        a[j] = Rational::from_integer(v);
        a
    };
    let inequalities = (0..n).map(|j| Constraint::new(unit(j, -1), Rational::zero())).collect();
    let mut equalities = Vec::new();
    let mut offset = 0;
    for m in sc.measurements() {
        let mut a = vec![Rational::zero(); n];
        for x in &mut a[offset..offset + m.len()] {
            *x = Rational::one();
        }
        equalities.push(Constraint::new(a, Rational::one()));
        offset += m.len();
    }
    for beta in sc.meas_equivalences() {
        equalities.push(Constraint::new(beta.clone(), Rational::zero()));
    }
    HPolytope { dim: n, inequalities, equalities }
}

/// Ontic states: the vertices of the response polytope.
pub fn ontic_responses(sc: &Scenario) -> Result<Vec<Vec<Rational>>> {
    match h_to_v(&response_polytope(sc)) {
        Ok(v) => Ok(v.vertices),
        Err(Error::EmptyPolytope) => {
            Err(Error::Validation("measurement equivalences admit no response function; the scenario is inconsistent".into()))
        }
        Err(e) => Err(e),
    }
}

/// A facet of the noncontextual data polytope, over data-table coordinates
/// `(s·|T| + t)·|Y| + y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoncontextualityInequality {
    pub shape: (usize, usize, usize),
    pub coeffs: Vec<Rational>,
    pub bound: Rational,
    /// Orbit-canonical form under equivalence-preserving relabelings;
    /// `None` when canonicalization was skipped.
    pub canonical_form: Option<Constraint>,
    /// Implied by nonnegativity, normalization and the hull equalities alone.
    pub trivial: bool,
}

impl NoncontextualityInequality {
    pub fn constraint(&self) -> Constraint {
        Constraint::new(self.coeffs.clone(), self.bound.clone())
    }

    /// `coeffs·table` as a float.
    pub fn value<T: Prob>(&self, table: &DataTable<T>) -> f64 {
        self.coeffs.iter().zip(table.entries()).map(|(c, p)| c.to_f64() * p.to_f64()).sum()
    }

    pub fn exact_value(&self, table: &DataTable<Rational>) -> Rational {
        dot(&self.coeffs, table.entries())
    }

    fn class_key(&self) -> Constraint {
        self.canonical_form.clone().unwrap_or_else(|| self.constraint())
    }
}

/// The polytope of noncontextually realizable data tables.
#[derive(Clone, Debug)]
pub struct DataPolytope {
    pub shape: (usize, usize, usize),
    /// Response function of each ontic state (concatenated outcome index).
    pub ontic_states: Vec<Vec<Rational>>,
    pub vertices: VPolytope,
    /// Canonical H-representation; `inequalities[i]` below is facet `i`.
    pub facets: HPolytope,
    pub inequalities: Vec<NoncontextualityInequality>,
    pub symmetry: Option<SymmetryGroup>,
    pub diagnostics: Vec<String>,
}

impl DataPolytope {
    /// One representative per relabeling class (the first facet of each
    /// class, in facet order). Without a symmetry group, every facet is its
    /// own class.
    pub fn classes(&self, nontrivial_only: bool) -> Vec<&NoncontextualityInequality> {
        let mut seen: Vec<Constraint> = Vec::new();
        let mut out = Vec::new();
        for iq in &self.inequalities {
            if nontrivial_only && iq.trivial {
                continue;
            }
            let key = iq.class_key();
            if !seen.contains(&key) {
                seen.push(key);
                out.push(iq);
            }
        }
        out
    }

    /// Readable representative of a facet's class: an ℓ₁-minimal form modulo
    /// the hull, lexicographically greatest under relabeling when a group is
    /// known.
    pub fn display_form(&self, iq: &NoncontextualityInequality) -> Result<Constraint> {
        let sparse = sparse_form(&iq.constraint(), &self.facets.equalities)?;
        Ok(match &self.symmetry {
            Some(g) => g.elements.iter().map(|e| g.apply(e, &sparse)).max().unwrap_or(sparse),
            None => sparse,
        })
    }

    /// Orbit-canonical form of an arbitrary inequality over data coordinates.
    pub fn canonicalize(&self, c: &Constraint) -> Option<Result<Constraint>> {
        self.symmetry.as_ref().map(|g| g.canonical_form(c, &self.facets.equalities))
    }
}

/// Maximum of `c` over tables that are merely nonnegative and normalized
/// (and satisfy `hull`); `c·x ≤ bound` is trivial if this is at most `bound`.
fn is_trivial(c: &Constraint, shape: (usize, usize, usize), hull: &[Constraint]) -> Result<bool> {
    let (ny, ns, nt) = shape;
    let n = ny * ns * nt;
    let mut lp = LpBuilder::new(n);
    for st in 0..ns * nt {
        let mut a = vec![Rational::zero(); n];
        for x in &mut a[st * ny..(st + 1) * ny] {
            *x = Rational::one();
        }
        lp.eq(a, Rational::one());
    }
    for e in hull {
        lp.eq(e.coeffs.clone(), e.bound.clone());
    }
    lp.maximize(c.coeffs.clone());
    match lp_solve(&lp.build()?)? {
        LpVerdict::Optimal { value, .. } => Ok(value <= c.bound),
        other => Err(Error::Internal(format!("triviality LP returned {other:?}"))),
    }
}

/// Noncontextual data polytope of a scenario (uniform outcome counts).
///
/// Ontic states are the response-polytope vertices; the model polytope over
/// `P(λ|s)` (distributions obeying the preparation equivalences) is
/// enumerated, lifted to data tables and projected.
pub fn nc_data_polytope(sc: &Scenario) -> Result<DataPolytope> {
    let ny = sc.require_uniform_outcomes()?;
    let (ns, nt) = (sc.num_states(), sc.num_measurements());
    let shape = (ny, ns, nt);
    let ontic = ontic_responses(sc)?;
    let l = ontic.len();

    let nmu = ns * l;
    let mut mu_poly = HPolytope { dim: nmu, inequalities: Vec::new(), equalities: Vec::new() };
    for j in 0..nmu {
        let mut a = vec![Rational::zero(); nmu];
        a[j] = -Rational::one();
        mu_poly.inequalities.push(Constraint::new(a, Rational::zero()));
    }
    for s in 0..ns {
        let mut a = vec![Rational::zero(); nmu];
        for x in &mut a[s * l..(s + 1) * l] {
            *x = Rational::one();
        }
        mu_poly.equalities.push(Constraint::new(a, Rational::one()));
    }
    for alpha in sc.prep_equivalences() {
        for lam in 0..l {
            let mut a = vec![Rational::zero(); nmu];
            for (s, c) in alpha.iter().enumerate() {
                a[s * l + lam] = c.clone();
            }
            mu_poly.equalities.push(Constraint::new(a, Rational::zero()));
        }
    }
    let mu_vertices = match h_to_v(&mu_poly) {
        Ok(v) => v.vertices,
        Err(Error::EmptyPolytope) => {
            return Err(Error::Validation("preparation equivalences admit no distribution over ontic states".into()))
        }
        Err(e) => return Err(e),
    };

    let nd = ny * ns * nt;
    let lifted: Vec<Vec<Rational>> = mu_vertices
        .iter()
        .map(|mu| {
            let mut x = mu.clone();
            x.extend((0..nd).map(|i| {
                let (st, y) = (i / ny, i % ny);
                let (s, t) = (st / nt, st % nt);
                (0..l).map(|lam| &mu[s * l + lam] * &ontic[lam][t * ny + y]).sum::<Rational>()
            }));
            x
        })
        .collect();
    let vertices = project(&VPolytope::new(nmu + nd, lifted)?, &(nmu..nmu + nd).collect::<Vec<_>>())?;
    let facets = v_to_h(&vertices)?;

    let mut diagnostics = Vec::new();
    let symmetry = match SymmetryGroup::of(sc) {
        Ok(g) => Some(g),
        Err(Error::Unsupported(msg)) => {
            diagnostics.push(msg);
            None
        }
        Err(e) => return Err(e),
    };
    let mut inequalities = Vec::with_capacity(facets.inequalities.len());
    for c in &facets.inequalities {
        let canonical_form = match &symmetry {
            Some(g) => Some(g.canonical_form(c, &facets.equalities)?),
            None => None,
        };
        inequalities.push(NoncontextualityInequality {
            shape,
            coeffs: c.coeffs.clone(),
            bound: c.bound.clone(),
            canonical_form,
            trivial: is_trivial(c, shape, &facets.equalities)?,
        });
    }
    Ok(DataPolytope { shape, ontic_states: ontic, vertices, facets, inequalities, symmetry, diagnostics })
}
