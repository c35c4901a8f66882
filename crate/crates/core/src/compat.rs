//! Measurement compatibility: commutation for projective sets, verification
//! of a claimed parent measurement, and a heuristic parent search.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{hermitian_eigen, is_projector, ComplexMatrix, Effect};

pub const COMMUTE_TOL: f64 = 1e-9;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 10_000;
/// Largest Hilbert-space dimension accepted by [`search_parent`].
pub const MAX_SEARCH_DIM: usize = 8;
/// Largest parent outcome count `∏_t |Y_t|` accepted by [`search_parent`].
pub const MAX_PARENT_OUTCOMES: usize = 4096;

/// A parent POVM `{G_z}` and post-processing `postprocessing[t][z][y] = P(y|t,z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParentMeasurement {
    pub parent: Vec<Effect>,
    pub postprocessing: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParentReport {
    /// `max_{t,y} ‖E_{y|t} − Σ_z P(y|t,z) G_z‖_max`.
    pub max_residual: f64,
    /// `‖Σ_z G_z − 𝟙‖_max`.
    pub povm_defect: f64,
    /// Largest deviation of `P(·|t,z)` from a probability distribution.
    pub postprocessing_defect: f64,
}

impl ParentReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol && self.povm_defect <= tol && self.postprocessing_defect <= tol
    }
}

fn check_dims(measurements: &[Vec<Effect>]) -> Result<usize> {
    let dim = measurements
        .iter()
        .flatten()
        .next()
        .map(Effect::dim)
        .ok_or_else(|| Error::Structural("no effects given".into()))?;
    if let Some((t, _)) = measurements.iter().enumerate().find(|(_, m)| m.is_empty() || m.iter().any(|e| e.dim() != dim)) {
        return Err(Error::Structural(format!("measurement {t} is empty or has effects of the wrong dimension")));
    }
    Ok(dim)
}

/// True iff all effects of all (projective) measurements pairwise commute.
pub fn commutation_compatible(projectives: &[Vec<Effect>]) -> Result<bool> {
    check_dims(projectives)?;
    for (t, m) in projectives.iter().enumerate() {
        if let Some(y) = m.iter().position(|e| !is_projector(e)) {
            return Err(Error::Domain(format!(
                "effect {y} of measurement {t} is not a projector; use search_parent for general POVMs"
            )));
        }
    }
    let all: Vec<&Effect> = projectives.iter().flatten().collect();
    Ok(all.iter().enumerate().all(|(i, a)| all[i + 1..].iter().all(|b| a.matrix().commutator_norm(b.matrix()) <= COMMUTE_TOL)))
}

/// Checks `E_{y|t} = Σ_z P(y|t,z) G_z` entrywise.
pub fn verify_parent(measurements: &[Vec<Effect>], claim: &ParentMeasurement) -> Result<ParentReport> {
    let dim = check_dims(measurements)?;
    let nz = claim.parent.len();
    if nz == 0 || claim.parent.iter().any(|g| g.dim() != dim) {
        return Err(Error::Structural(format!("parent must be a nonempty list of {dim}×{dim} effects")));
    }
    if claim.postprocessing.len() != measurements.len() {
        return Err(Error::Structural(format!(
            "post-processing covers {} measurements, expected {}",
            claim.postprocessing.len(),
            measurements.len()
        )));
    }
    let mut report = ParentReport { max_residual: 0.0, povm_defect: 0.0, postprocessing_defect: 0.0 };
    let mut sum = ComplexMatrix::zeros(dim);
    for g in &claim.parent {
        sum = &sum + g.matrix();
    }
    report.povm_defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    for (t, (m, post)) in measurements.iter().zip(&claim.postprocessing).enumerate() {
        if post.len() != nz || post.iter().any(|row| row.len() != m.len()) {
            return Err(Error::Structural(format!("post-processing of measurement {t} must be {nz}×{}", m.len())));
        }
        for row in post {
            let neg = row.iter().fold(0.0f64, |a, &p| a.max(-p));
            let total: f64 = row.iter().sum();
            report.postprocessing_defect = report.postprocessing_defect.max(neg).max((total - 1.0).abs());
        }
        for (y, e) in m.iter().enumerate() {
            let mut acc = ComplexMatrix::zeros(dim);
            for (z, g) in claim.parent.iter().enumerate() {
                if post[z][y] != 0.0 {
                    acc = &acc + &g.matrix().scale(post[z][y]);
                }
            }
            report.max_residual = report.max_residual.max(acc.max_abs_diff(e.matrix()));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found { parent: ParentMeasurement, report: ParentReport, iterations: usize },
    /// Not a certificate of incompatibility.
    NotFound { best_residual: f64, diagnostics: Vec<String> },
}

/// Outcome tuples `z ∈ ∏_t Y_t`, first measurement varying slowest.
fn outcome_tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out.into_iter().flat_map(|z| (0..n).map(move |y| [z.clone(), vec![y]].concat())).collect();
    }
    out
}

/// Projector onto `{x : A x = b}` for the marginal incidence matrix `A`,
/// stored as `Aᵀ (A Aᵀ)⁺`.
struct MarginalProjector {
    /// Row `(t, y)` of `A` lists the `z` with `z_t = y`.
    rows: Vec<Vec<usize>>,
    /// `Aᵀ (A Aᵀ)⁺`, `|Z| × rows`.
    lift: Vec<Vec<f64>>,
}

impl MarginalProjector {
    fn new(tuples: &[Vec<usize>], sizes: &[usize]) -> Result<Self> {
        let mut rows = Vec::new();
        for (t, &n) in sizes.iter().enumerate() {
            for y in 0..n {
                rows.push((0..tuples.len()).filter(|&z| tuples[z][t] == y).collect::<Vec<_>>());
            }
        }
        let k = rows.len();
        let mut gram = ComplexMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                let overlap = rows[i].iter().filter(|z| rows[j].contains(z)).count();
                gram.set(i, j, Complex64::new(overlap as f64, 0.0));
            }
        }
        let eig = hermitian_eigen(&gram)?;
        let cutoff = 1e-9 * eig.values.last().copied().unwrap_or(1.0);
        let pinv = eig.reconstruct_with(|v| if v > cutoff { 1.0 / v } else { 0.0 });
        let lift = (0..tuples.len())
            .map(|z| (0..k).map(|r| rows.iter().enumerate().filter(|(_, row)| row.contains(&z)).map(|(i, _)| pinv.get(i, r).re).sum()).collect())
            .collect();
        Ok(MarginalProjector { rows, lift })
    }

    /// Projects the candidate onto the marginal constraints, entrywise.
    fn project(&self, g: &mut [ComplexMatrix], targets: &[&ComplexMatrix]) {
        let dim = g[0].dim();
        for i in 0..dim {
            for j in 0..dim {
                let r: Vec<Complex64> = self
                    .rows
                    .iter()
                    .zip(targets)
                    .map(|(row, e)| row.iter().map(|&z| g[z].get(i, j)).sum::<Complex64>() - e.get(i, j))
                    .collect();
                for (z, lift) in self.lift.iter().enumerate() {
                    let d: Complex64 = lift.iter().zip(&r).map(|(l, x)| x * *l).sum();
                    let v = g[z].get(i, j) - d;
                    g[z].set(i, j, v);
                }
            }
        }
    }
}

fn clip_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(hermitian_eigen(&m.hermitian_part())?.reconstruct_with(|v| v.max(0.0)))
}

fn marginal_residual(g: &[ComplexMatrix], rows: &[Vec<usize>], targets: &[&ComplexMatrix]) -> f64 {
    let dim = g[0].dim();
    rows.iter()
        .zip(targets)
        .map(|(row, e)| {
            let mut acc = ComplexMatrix::zeros(dim);
            for &z in row {
                acc = &acc + &g[z];
            }
            acc.max_abs_diff(e)
        })
        .fold(0.0, f64::max)
}

/// Clip, measure, project until the marginal residual is at most `target`.
/// Returns the clipped candidate, its residual and the projections used.
fn alternate(
    mut g: Vec<ComplexMatrix>,
    proj: &MarginalProjector,
    targets: &[&ComplexMatrix],
    max_iters: usize,
    target: f64,
) -> Result<(Vec<ComplexMatrix>, f64, usize)> {
    let mut residual = f64::INFINITY;
    let mut used = 0;
    for _ in 0..=max_iters {
        g = g.iter().map(clip_psd).collect::<Result<_>>()?;
        residual = marginal_residual(&g, &proj.rows, targets);
        if residual <= target || used == max_iters {
            break;
        }
        used += 1;
        proj.project(&mut g, targets);
    }
    Ok((g, residual, used))
}

/// Alternating projections between the marginal constraints and the PSD
/// cone over parents with deterministic post-processing `z ↦ z_t`.
///
/// Starts from the symmetrized product of effects, then from `𝟙/|Z|`.
/// A returned parent has been re-verified with [`verify_parent`] at `tol`.
pub fn search_parent(measurements: &[Vec<Effect>], max_iters: usize, tol: f64) -> Result<SearchOutcome> {
    let dim = check_dims(measurements)?;
    if dim > MAX_SEARCH_DIM {
        return Err(Error::Unsupported(format!("parent search supports dimension ≤ {MAX_SEARCH_DIM}, got {dim}")));
    }
    let sizes: Vec<usize> = measurements.iter().map(Vec::len).collect();
    let nz = sizes.iter().try_fold(1usize, |a, &n| a.checked_mul(n).filter(|&p| p <= MAX_PARENT_OUTCOMES));
    let Some(nz) = nz else {
        return Err(Error::Unsupported(format!("parent search supports at most {MAX_PARENT_OUTCOMES} joint outcomes")));
    };
    let tuples = outcome_tuples(&sizes);
    let postprocessing: Vec<Vec<Vec<f64>>> = (0..sizes.len())
        .map(|t| tuples.iter().map(|z| (0..sizes[t]).map(|y| if z[t] == y { 1.0 } else { 0.0 }).collect()).collect())
        .collect();
    let targets: Vec<&ComplexMatrix> = measurements.iter().flatten().map(Effect::matrix).collect();
    let proj = MarginalProjector::new(&tuples, &sizes)?;

    let product: Vec<ComplexMatrix> = tuples
        .iter()
        .map(|z| {
            z.iter()
                .enumerate()
                .fold(ComplexMatrix::identity(dim), |acc, (t, &y)| &acc * measurements[t][y].matrix())
                .hermitian_part()
        })
        .collect();
    let mixed = vec![ComplexMatrix::identity(dim).scale(1.0 / nz as f64); nz];

    let mut diagnostics = Vec::new();
    let mut best = f64::INFINITY;
    let mut iterations = 0;
    for (name, start) in [("product", product), ("maximally mixed", mixed)] {
        let (g, residual, used) = alternate(start, &proj, &targets, max_iters, tol * 1e-2)?;
        iterations += used;
        best = best.min(residual);
        if residual <= tol {
            let parent = g
                .into_iter()
                .map(Effect::new)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Internal(format!("clipped parent is not an effect: {e}")))?;
            let claim = ParentMeasurement { parent, postprocessing: postprocessing.clone() };
            let report = verify_parent(measurements, &claim)?;
            if report.passes(tol) {
                return Ok(SearchOutcome::Found { parent: claim, report, iterations });
            }
            diagnostics.push(format!("{name} start: candidate failed re-verification ({report:?})"));
        } else {
            diagnostics.push(format!("{name} start: residual {residual:.3e} after {max_iters} iterations"));
        }
    }
    Ok(SearchOutcome::NotFound { best_residual: best, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{lp_solve, LpBuilder, LpVerdict, Rational};
    use crate::quantum::bloch_plane_state;
    use crate::scenario::{flag_convexify, FlagDistribution, Measurement, Scenario};

    fn basis(angle: f64) -> Vec<Effect> {
        vec![Effect::from(bloch_plane_state(angle)), Effect::from(bloch_plane_state(angle + 180.0))]
    }

    /// `(𝟙 ± η n·σ)/2` with `n` in the x–z plane at `angle`.
    fn noisy(angle: f64, eta: f64) -> Vec<Effect> {
        let id = ComplexMatrix::identity(2).scale(0.5 * (1.0 - eta));
        basis(angle).iter().map(|e| Effect::new(&id + &e.matrix().scale(eta)).unwrap()).collect()
    }

    #[test]
    fn commutation_examples() {
        assert!(commutation_compatible(&[basis(0.0), basis(0.0)]).unwrap());
        assert!(commutation_compatible(&[basis(0.0), basis(180.0)]).unwrap());
        assert!(!commutation_compatible(&[basis(0.0), basis(90.0)]).unwrap());
        assert!(commutation_compatible(&[basis(37.0)]).unwrap());
        assert!(matches!(commutation_compatible(&[noisy(0.0, 0.5)]), Err(Error::Domain(_))));
    }

    #[test]
    fn measurement_is_its_own_parent() {
        let m = noisy(30.0, 0.7);
        let claim = ParentMeasurement { parent: m.clone(), postprocessing: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]]] };
        let rep = verify_parent(&[m], &claim).unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert!(rep.passes(1e-15), "{rep:?}");
    }

    /// Parent with Bloch vectors `(±η, 0, ±η)` and marginal post-processing.
    fn diagonal_parent(eta: f64) -> ParentMeasurement {
        let parent = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|&(sz, sx): &(f64, f64)| {
                let m = ComplexMatrix::from_real_rows(&[&[1.0 + sz * eta, sx * eta], &[sx * eta, 1.0 - sz * eta]]).unwrap();
                Effect::new(m.scale(0.25)).unwrap()
            })
            .collect();
        let z_post = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]];
        let x_post = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        ParentMeasurement { parent, postprocessing: vec![z_post, x_post] }
    }

    #[test]
    fn analytic_parent_for_noisy_pair() {
        let pair = [noisy(0.0, 0.6), noisy(90.0, 0.6)];
        let rep = verify_parent(&pair, &diagonal_parent(0.6)).unwrap();
        assert!(rep.passes(1e-9), "{rep:?}");
    }

    #[test]
    fn verify_rejects_shape_mismatch() {
        let mut claim = diagonal_parent(0.6);
        claim.postprocessing.pop();
        assert!(matches!(verify_parent(&[noisy(0.0, 0.6), noisy(90.0, 0.6)], &claim), Err(Error::Structural(_))));
    }

    #[test]
    fn search_finds_noisy_parent() {
        let pair = [noisy(0.0, 0.6), noisy(90.0, 0.6)];
        let SearchOutcome::Found { parent, report, .. } = search_parent(&pair, DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap() else {
            panic!("no parent found")
        };
        assert!(report.max_residual <= DEFAULT_TOL);
        assert_eq!(verify_parent(&pair, &parent).unwrap(), report);
    }

    #[test]
    fn search_single_measurement_is_immediate() {
        let SearchOutcome::Found { iterations, .. } = search_parent(&[noisy(10.0, 0.4)], 10, DEFAULT_TOL).unwrap() else {
            panic!("no parent found")
        };
        assert_eq!(iterations, 0);
    }

    #[test]
    fn alternation_converges_from_mixed_start() {
        let pair = [noisy(0.0, 0.6), noisy(90.0, 0.6)];
        let sizes = [2, 2];
        let tuples = outcome_tuples(&sizes);
        let proj = MarginalProjector::new(&tuples, &sizes).unwrap();
        let targets: Vec<&ComplexMatrix> = pair.iter().flatten().map(Effect::matrix).collect();
        let start = vec![ComplexMatrix::identity(2).scale(0.25); 4];
        let (g, residual, used) = alternate(start, &proj, &targets, DEFAULT_MAX_ITERS, 1e-10).unwrap();
        assert!(used > 0);
        assert!(residual <= 1e-10, "{residual:e}");
        let parent = g.into_iter().map(|m| Effect::new(m).unwrap()).collect();
        let post = |t: usize| tuples.iter().map(|z| (0..2).map(|y| if z[t] == y { 1.0 } else { 0.0 }).collect()).collect();
        let rep = verify_parent(&pair, &ParentMeasurement { parent, postprocessing: vec![post(0), post(1)] }).unwrap();
        assert!(rep.passes(1e-9), "{rep:?}");
    }

    #[test]
    fn search_fails_for_sharp_pair() {
        let out = search_parent(&[basis(0.0), basis(90.0)], DEFAULT_MAX_ITERS, DEFAULT_TOL).unwrap();
        assert!(matches!(out, SearchOutcome::NotFound { .. }));
    }

    #[test]
    fn flagged_measurement_is_trivially_compatible() {
        let sc = Scenario::new(
            vec![("0".into(), bloch_plane_state(0.0))],
            vec![Measurement::unlabelled("Z", basis(0.0)), Measurement::unlabelled("X", basis(90.0))],
            vec![],
            vec![],
        )
        .unwrap();
        let flagged = flag_convexify(&sc, &FlagDistribution::uniform(2).unwrap()).unwrap();
        assert_eq!(flagged.num_measurements(), 1);
        let effects = flagged.measurements()[0].effects.clone();
        assert!(matches!(search_parent(&[effects], 0, DEFAULT_TOL).unwrap(), SearchOutcome::Found { .. }));
    }

    /// Smallest max-entry residual over all stochastic post-processings of
    /// `parent` onto `targets`, by exact LP. Matrices must be real with
    /// entries that are multiples of 1/4.
    fn min_residual(targets: &[Vec<Effect>], parent: &[Effect]) -> Rational {
        let q = |x: f64| Rational::new((x * 4.0).round() as i64, 4);
        let nz = parent.len();
        let sizes: Vec<usize> = targets.iter().map(Vec::len).collect();
        let offsets: Vec<usize> = sizes.iter().scan(0, |a, &n| {
            let o = *a;
            *a += n * nz;
            Some(o)
        }).collect();
        let n = offsets.last().unwrap() + sizes.last().unwrap() * nz + 1;
        let eps = n - 1;
        let var = |t: usize, z: usize, y: usize| offsets[t] + z * sizes[t] + y;
        let mut lp = LpBuilder::new(n);
        for t in 0..targets.len() {
            for z in 0..nz {
                let mut a = vec![Rational::zero(); n];
                for y in 0..sizes[t] {
                    a[var(t, z, y)] = Rational::one();
                }
                lp.eq(a, Rational::one());
            }
            for (y, e) in targets[t].iter().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut a = vec![Rational::zero(); n];
                        for (z, g) in parent.iter().enumerate() {
                            a[var(t, z, y)] = q(g.matrix().get(i, j).re);
                        }
                        let target = q(e.matrix().get(i, j).re);
                        let mut upper = a.clone();
                        upper[eps] = -Rational::one();
                        lp.le(upper, target.clone());
                        a[eps] = Rational::one();
                        lp.ge(a, target);
                    }
                }
            }
        }
        let mut c = vec![Rational::zero(); n];
        c[eps] = -Rational::one();
        lp.maximize(c);
        match lp_solve(&lp.build().unwrap()).unwrap() {
            LpVerdict::Optimal { value, .. } => -value,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn flagged_povm_is_not_a_parent_of_the_pair() {
        let pair = [basis(0.0), basis(90.0)];
        let flagged: Vec<Effect> = pair.iter().flatten().map(|e| e.scaled(0.5)).collect();
        let best = min_residual(&pair, &flagged);
        assert!(best.is_positive(), "{best}");
        // Marginalizing over the flag gives one such post-processing.
        let post = vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![1.0, 0.0], vec![0.0, 1.0]],
        ];
        let rep = verify_parent(&pair, &ParentMeasurement { parent: flagged, postprocessing: post }).unwrap();
        assert!(rep.max_residual >= best.to_f64() - 1e-12);
        // Sanity check of the oracle: a genuine parent has zero residual.
        assert!(min_residual(&[basis(0.0)], &basis(0.0)).is_zero());
    }
}
