use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use nocon::compat::{commutation_compatible, search_parent, verify_parent, SearchOutcome};
use nocon::linalg::{rank_of_rows, Rational};
use nocon::noncontext::{
    express_on, nc_data_polytope, nc_membership_with, sparse_form, transfer_model, verify_certificate, DataPolytope,
    TableEntry, Verdict,
};
use nocon::quantum::{is_projector, Effect};
use nocon::scenario::{
    discover_equivalences, flag_convexify, pad_outcomes, verify_equivalences, DataTable, Direction, FlagDistribution,
    Scenario,
};

use crate::doc::{parse, to_json, AnyModel, AnyTable, Entry, ModelDocument, ParentDocument, ScenarioDocument, TableDocument};
use crate::report::{coordinate_labels, float12, inequality_text, linear_form, round12, InequalityJson};
use crate::Outcome;

type CmdResult = Result<Outcome, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn load_scenario(path: &Path) -> Result<(ScenarioDocument, Scenario), String> {
    let doc: ScenarioDocument = parse(&read(path)?, &path.display().to_string())?;
    let sc = doc.to_scenario().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((doc, sc))
}

/// Pads to a uniform outcome count when needed.
fn uniform(sc: Scenario, notes: &mut Vec<String>) -> Scenario {
    if sc.uniform_outcomes().is_some() {
        return sc;
    }
    notes.push("measurements padded with zero effects to a common outcome count".into());
    pad_outcomes(&sc)
}

fn err(e: nocon::Error) -> String {
    e.to_string()
}

fn notes_text(notes: &[String]) -> String {
    notes.iter().map(|n| format!("note: {n}\n")).collect()
}

pub fn validate(path: &Path) -> CmdResult {
    let (_, sc) = load_scenario(path)?;
    let rep = verify_equivalences(&sc, nocon::scenario::EQUIV_TOL).map_err(err)?;
    let mut text = String::new();
    writeln!(text, "valid scenario: dimension {}", sc.dim()).unwrap();
    writeln!(text, "states: {}", sc.state_labels().join(", ")).unwrap();
    for m in sc.measurements() {
        writeln!(text, "measurement {}: outcomes {}", m.label, m.outcome_labels.join(", ")).unwrap();
    }
    writeln!(
        text,
        "equivalences: {} preparation, {} measurement; max residual {}",
        sc.prep_equivalences().len(),
        sc.meas_equivalences().len(),
        float12(rep.max_residual())
    )
    .unwrap();
    let json = json!({
        "command": "validate",
        "valid": true,
        "dimension": sc.dim(),
        "states": sc.state_labels(),
        "measurements": sc.measurements().iter().map(|m| json!({"label": m.label, "outcomes": m.outcome_labels})).collect::<Vec<_>>(),
        "prep_residuals": rep.prep_residuals.iter().map(|&r| round12(r)).collect::<Vec<_>>(),
        "meas_residuals": rep.meas_residuals.iter().map(|&r| round12(r)).collect::<Vec<_>>(),
    });
    Ok(Outcome { text, json, positive: false })
}

pub fn equivalences(path: &Path, max_den: u64) -> CmdResult {
    let (_, sc) = load_scenario(path)?;
    let found = discover_equivalences(&sc, max_den).map_err(err)?;
    let states: Vec<String> = sc.state_labels().iter().map(|l| format!("ρ({l})")).collect();
    let effects: Vec<String> = sc.flat_outcome_labels().iter().map(|l| format!("E({l})")).collect();
    let mut text = String::new();
    for a in &found.prep {
        writeln!(text, "preparation: {} = 0", linear_form(a, &states)).unwrap();
    }
    for b in &found.meas {
        writeln!(text, "measurement: {} = 0", linear_form(b, &effects)).unwrap();
    }
    if found.prep.is_empty() && found.meas.is_empty() {
        text.push_str("no operational equivalences\n");
    }
    for d in &found.diagnostics {
        writeln!(text, "note: {d}").unwrap();
    }
    let doc = ScenarioDocument::from_scenario(&sc.with_equivalences(found.prep.clone(), found.meas.clone()).map_err(err)?);
    let json = json!({
        "command": "equivalences",
        "max_denominator": max_den,
        "prep_equivalences": doc.prep_equivalences,
        "meas_equivalences": doc.meas_equivalences,
        "diagnostics": found.diagnostics,
    });
    Ok(Outcome { text, json, positive: false })
}

pub fn flagconv(path: &Path, weights: Option<Vec<Rational>>, output: Option<&Path>) -> CmdResult {
    let (doc, sc) = load_scenario(path)?;
    let p = match (weights, doc.flag_distribution) {
        (Some(w), _) => FlagDistribution::new(w).map_err(err)?,
        (None, Some(p)) => p,
        (None, None) => FlagDistribution::uniform(sc.num_measurements()).map_err(err)?,
    };
    let flagged = flag_convexify(&sc, &p).map_err(err)?;
    let out_doc = ScenarioDocument::from_scenario(&flagged);
    let body = to_json(&out_doc);
    let text = match output {
        Some(o) => {
            write_file(o, &body)?;
            format!(
                "wrote flagged scenario ({} outcomes, {} measurement equivalences) to {}\n",
                flagged.measurements()[0].len(),
                flagged.meas_equivalences().len(),
                o.display()
            )
        }
        None => body,
    };
    let json = json!({
        "command": "flagconv",
        "weights": p.weights(),
        "output": output.map(|o| o.display().to_string()),
        "scenario": out_doc,
    });
    Ok(Outcome { text, json, positive: false })
}

fn class_size(d: &DataPolytope, iq: &nocon::noncontext::NoncontextualityInequality) -> usize {
    match &iq.canonical_form {
        Some(k) => d.inequalities.iter().filter(|o| o.canonical_form.as_ref() == Some(k)).count(),
        None => 1,
    }
}

pub fn facets(path: &Path, nontrivial_only: bool, express: &[String]) -> CmdResult {
    let (_, sc) = load_scenario(path)?;
    let mut notes = Vec::new();
    let sc = uniform(sc, &mut notes);
    let d = nc_data_polytope(&sc).map_err(err)?;
    notes.extend(d.diagnostics.iter().cloned());
    let labels = coordinate_labels(&sc);
    let support = express
        .iter()
        .map(|l| labels.iter().position(|x| x == l).ok_or_else(|| format!("unknown coordinate {l:?}; coordinates are {}", labels.join(" "))))
        .collect::<Result<Vec<_>, _>>()?;
    let eqs = &d.facets.equalities;
    let hull_dim = d.facets.dim - rank_of_rows(&eqs.iter().map(|e| e.coeffs.clone()).collect::<Vec<_>>(), d.facets.dim);

    let mut text = notes_text(&notes);
    writeln!(
        text,
        "data polytope: {} vertices, {} facets, dimension {} in {} coordinates",
        d.vertices.vertices.len(),
        d.facets.inequalities.len(),
        hull_dim,
        d.facets.dim
    )
    .unwrap();
    let classes = d.classes(nontrivial_only);
    writeln!(text, "inequality classes{}: {}", if nontrivial_only { " (nontrivial)" } else { "" }, classes.len()).unwrap();
    let mut class_json = Vec::new();
    for (k, iq) in classes.iter().enumerate() {
        let shown = d.display_form(iq).map_err(err)?;
        let size = class_size(&d, iq);
        let kind = if iq.trivial { "trivial" } else { "nontrivial" };
        writeln!(text, "[{}] {}  ({kind}, {size} facets)", k + 1, inequality_text(&shown, &labels)).unwrap();
        let forms = if support.is_empty() {
            Vec::new()
        } else {
            match &d.symmetry {
                Some(g) => g.express_on(&iq.constraint(), eqs, &support),
                None => express_on(&iq.constraint(), eqs, &support).into_iter().collect(),
            }
        };
        for f in &forms {
            writeln!(text, "    on given coordinates: {}", inequality_text(f, &labels)).unwrap();
        }
        if !support.is_empty() && forms.is_empty() {
            writeln!(text, "    not expressible on the given coordinates").unwrap();
        }
        class_json.push(json!({
            "representative": InequalityJson::new(&shown, &labels),
            "facets": size,
            "trivial": iq.trivial,
            "canonical_form": iq.canonical_form.as_ref().map(|c| InequalityJson::new(c, &labels)),
            "express_on": forms.iter().map(|f| InequalityJson::new(f, &labels)).collect::<Vec<_>>(),
        }));
    }
    let json = json!({
        "format_version": crate::doc::FORMAT_VERSION,
        "command": "facets",
        "coordinates": labels,
        "vertices": d.vertices.vertices.len(),
        "facets": d.facets.inequalities.len(),
        "hull_equalities": eqs.iter().map(|e| json!({"coefficients": e.coeffs, "bound": e.bound})).collect::<Vec<_>>(),
        "nontrivial_only": nontrivial_only,
        "classes": class_json,
        "diagnostics": notes,
    });
    Ok(Outcome { text, json, positive: false })
}

fn membership_report<T: TableEntry>(sc: &Scenario, d: &DataPolytope, table: &DataTable<T>, tol: f64, mut notes: Vec<String>) -> CmdResult {
    let rep = nc_membership_with(sc, table, tol, Some(d)).map_err(err)?;
    notes.extend(rep.diagnostics.iter().cloned());
    let labels = coordinate_labels(sc);
    let mut text = notes_text(&notes);
    let positive = rep.is_contextual();
    let mut json = json!({
        "command": "membership",
        "exact_table": T::EXACT,
        "tolerance": tol,
        "marginal": rep.marginal,
        "diagnostics": notes,
    });
    match &rep.verdict {
        Verdict::Noncontextual { model } => {
            writeln!(text, "verdict: noncontextual").unwrap();
            writeln!(text, "model: {} ontic states, exact rational", model.num_ontic()).unwrap();
            json["verdict"] = json!("noncontextual");
            json["model"] = serde_json::to_value(ModelDocument::from_model(model, |r| Entry::Exact(r.clone()))).unwrap();
        }
        Verdict::Contextual { certificate, violation } => {
            let verified = verify_certificate(sc, table, tol, certificate).map_err(err)?;
            writeln!(text, "verdict: contextual").unwrap();
            json["verdict"] = json!("contextual");
            if let Some(v) = violation {
                let shown = sparse_form(&v.inequality.constraint(), &d.facets.equalities).map_err(err)?;
                let x: Vec<f64> = table.entries().iter().map(|p| p.to_f64()).collect();
                let value: f64 = shown.coeffs.iter().zip(&x).map(|(c, p)| c.to_f64() * p).sum();
                let margin = value - shown.bound.to_f64();
                writeln!(text, "violated inequality: {}", inequality_text(&shown, &labels)).unwrap();
                writeln!(text, "value: {} (float)", float12(value)).unwrap();
                writeln!(text, "margin: {} (float)", float12(margin)).unwrap();
                json["violation"] = json!({
                    "inequality": InequalityJson::new(&shown, &labels),
                    "value": round12(value),
                    "margin": round12(margin),
                });
            }
            writeln!(text, "certificate: {} ({} rows)", if verified { "verified" } else { "NOT verified" }, certificate.len()).unwrap();
            json["certificate"] = json!({"verified": verified, "values": certificate});
        }
    }
    if rep.marginal {
        writeln!(text, "warning: verdict changes within a factor 10 of the tolerance").unwrap();
    }
    Ok(Outcome { text, json, positive })
}

pub fn membership(path: &Path, table: Option<&Path>, tol: f64) -> CmdResult {
    let (_, sc) = load_scenario(path)?;
    let mut notes = Vec::new();
    let sc = uniform(sc, &mut notes);
    let d = nc_data_polytope(&sc).map_err(err)?;
    match table {
        None => membership_report(&sc, &d, &sc.born_table().map_err(err)?, tol, notes),
        Some(t) => {
            let doc: TableDocument = parse(&read(t)?, &t.display().to_string())?;
            match doc.to_table().map_err(|e| format!("{}: {e}", t.display()))? {
                AnyTable::Exact(x) => membership_report(&sc, &d, &x, tol, notes),
                AnyTable::Float(x) => membership_report(&sc, &d, &x, tol, notes),
            }
        }
    }
}

pub fn compat(path: &Path, search: bool, verify: Option<&Path>, max_iters: usize, tol: f64) -> CmdResult {
    let (_, sc) = load_scenario(path)?;
    let ms: Vec<Vec<Effect>> = sc.measurements().iter().map(|m| m.effects.clone()).collect();
    let mut text = String::new();
    if let Some(claim_path) = verify {
        let doc: ParentDocument = parse(&read(claim_path)?, &claim_path.display().to_string())?;
        let claim = doc.to_claim(sc.dim()).map_err(|e| format!("{}: {e}", claim_path.display()))?;
        let rep = verify_parent(&ms, &claim).map_err(err)?;
        let ok = rep.passes(tol);
        writeln!(text, "parent claim: {}", if ok { "verified" } else { "rejected" }).unwrap();
        writeln!(text, "max residual: {}", float12(rep.max_residual)).unwrap();
        writeln!(text, "povm defect: {}", float12(rep.povm_defect)).unwrap();
        writeln!(text, "post-processing defect: {}", float12(rep.postprocessing_defect)).unwrap();
        let json = json!({"command": "compat", "mode": "verify", "verified": ok, "tolerance": tol, "report": rep});
        return Ok(Outcome { text, json, positive: false });
    }
    let projective = ms.iter().flatten().all(is_projector);
    if projective && !search {
        let ok = commutation_compatible(&ms).map_err(err)?;
        let verdict = if ok { "compatible" } else { "incompatible" };
        writeln!(text, "verdict: {verdict} (projective measurements, commutation test)").unwrap();
        let json = json!({"command": "compat", "mode": "commutation", "verdict": verdict});
        return Ok(Outcome { text, json, positive: !ok });
    }
    match search_parent(&ms, max_iters, tol).map_err(err)? {
        SearchOutcome::Found { parent, report, iterations } => {
            writeln!(text, "verdict: compatible (parent found after {iterations} iterations)").unwrap();
            writeln!(text, "max residual: {}", float12(report.max_residual)).unwrap();
            let json = json!({
                "command": "compat",
                "mode": "search",
                "verdict": "compatible",
                "iterations": iterations,
                "report": report,
                "parent": ParentDocument::from_claim(&parent),
            });
            Ok(Outcome { text, json, positive: false })
        }
        SearchOutcome::NotFound { best_residual, diagnostics } => {
            writeln!(text, "verdict: inconclusive (no parent found; this does not prove incompatibility)").unwrap();
            writeln!(text, "best residual: {}", float12(best_residual)).unwrap();
            for d in &diagnostics {
                writeln!(text, "note: {d}").unwrap();
            }
            let json = json!({
                "command": "compat",
                "mode": "search",
                "verdict": "inconclusive",
                "best_residual": round12(best_residual),
                "diagnostics": diagnostics,
            });
            Ok(Outcome { text, json, positive: false })
        }
    }
}

pub fn transfer(path: &Path, direction: Direction, weights: Vec<Rational>, output: Option<&Path>) -> CmdResult {
    let doc: ModelDocument = parse(&read(path)?, &path.display().to_string())?;
    let p = FlagDistribution::new(weights).map_err(err)?;
    let model = doc.to_model().map_err(|e| format!("{}: {e}", path.display()))?;
    let out_doc = match model {
        AnyModel::Exact(m) => ModelDocument::from_model(&transfer_model(&m, &p, direction).map_err(err)?, |r| Entry::Exact(r.clone())),
        AnyModel::Float(m) => ModelDocument::from_model(&transfer_model(&m, &p, direction).map_err(err)?, |x| Entry::Float(*x)),
    };
    let body = to_json(&out_doc);
    let text = match output {
        Some(o) => {
            write_file(o, &body)?;
            format!("wrote transferred model to {}\n", o.display())
        }
        None => body,
    };
    let json = json!({
        "command": "transfer",
        "direction": direction,
        "weights": p.weights(),
        "output": output.map(|o| o.display().to_string()),
        "model": out_doc,
    });
    Ok(Outcome { text, json, positive: false })
}
