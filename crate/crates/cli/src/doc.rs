//! JSON document formats: `.ncs` scenarios, `.nct` tables, `.ncm` models and
//! `.ncp` parent claims.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use nocon::compat::ParentMeasurement;
use nocon::linalg::Rational;
use nocon::noncontext::OntologicalModel;
use nocon::quantum::{ComplexMatrix, Effect, QuantumState};
use nocon::scenario::{DataTable, FlagDistribution, Measurement, Scenario};

pub const FORMAT_VERSION: &str = "1";

/// A dense complex matrix as rows of `[re, im]` pairs.
pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelledMatrix {
    pub label: String,
    pub matrix: MatrixDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementDoc {
    pub label: String,
    pub effects: Vec<LabelledMatrix>,
}

/// Coefficients keyed by state label, or by `"measurement:outcome"`.
pub type Coefficients = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub format_version: String,
    pub dimension: usize,
    pub states: Vec<LabelledMatrix>,
    pub measurements: Vec<MeasurementDoc>,
    #[serde(default)]
    pub prep_equivalences: Vec<Coefficients>,
    #[serde(default)]
    pub meas_equivalences: Vec<Coefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag_distribution: Option<FlagDistribution>,
}

/// A probability given either exactly (`"p/q"`) or as a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Exact(Rational),
    Float(f64),
}

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Entry::Exact(r) => r.serialize(s),
            Entry::Float(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Entry;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a \"p/q\" string")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Entry, E> {
                Ok(Entry::Float(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Entry, E> {
                Ok(Entry::Float(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Entry, E> {
                Ok(Entry::Float(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Entry, E> {
                s.parse().map(Entry::Exact).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Tables and models are all exact or all float.
enum Kind {
    Exact,
    Float,
}

fn split_entries(entries: &[Entry], what: &str) -> Result<Kind, String> {
    let exact = entries.iter().filter(|e| matches!(e, Entry::Exact(_))).count();
    if exact == entries.len() {
        Ok(Kind::Exact)
    } else if exact == 0 {
        Ok(Kind::Float)
    } else {
        Err(format!("{what} mixes exact \"p/q\" strings and floats"))
    }
}

fn exact(e: &Entry) -> Rational {
    match e {
        Entry::Exact(r) => r.clone(),
        Entry::Float(_) => unreachable!("checked by split_entries"),
    }
}

fn float(e: &Entry) -> f64 {
    match e {
        Entry::Float(x) => *x,
        Entry::Exact(r) => r.to_f64(),
    }
}

/// `.nct`: `p[s][t][y] = P(y|s,t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDocument {
    pub format_version: String,
    pub p: Vec<Vec<Vec<Entry>>>,
}

pub enum AnyTable {
    Exact(DataTable<Rational>),
    Float(DataTable<f64>),
}

impl TableDocument {
    pub fn to_table(&self) -> Result<AnyTable, String> {
        let ns = self.p.len();
        let nt = self.p.first().map_or(0, Vec::len);
        let ny = self.p.first().and_then(|r| r.first()).map_or(0, Vec::len);
        if ns == 0 || nt == 0 || ny == 0 || self.p.iter().any(|r| r.len() != nt || r.iter().any(|c| c.len() != ny)) {
            return Err("p: expected a nonempty rectangular array p[state][measurement][outcome]".into());
        }
        let flat: Vec<Entry> = self.p.iter().flatten().flatten().cloned().collect();
        Ok(match split_entries(&flat, "p")? {
            Kind::Exact => AnyTable::Exact(DataTable::new(ny, ns, nt, flat.iter().map(exact).collect()).map_err(|e| e.to_string())?),
            Kind::Float => AnyTable::Float(DataTable::new(ny, ns, nt, flat.iter().map(float).collect()).map_err(|e| e.to_string())?),
        })
    }

    pub fn from_exact(t: &DataTable<Rational>) -> Self {
        Self::from_fn(t.shape(), |y, s, tt| Entry::Exact(t.get(y, s, tt).clone()))
    }

    pub fn from_float(t: &DataTable<f64>) -> Self {
        Self::from_fn(t.shape(), |y, s, tt| Entry::Float(*t.get(y, s, tt)))
    }

    fn from_fn((ny, ns, nt): (usize, usize, usize), f: impl Fn(usize, usize, usize) -> Entry) -> Self {
        let p = (0..ns).map(|s| (0..nt).map(|t| (0..ny).map(|y| f(y, s, t)).collect()).collect()).collect();
        TableDocument { format_version: FORMAT_VERSION.into(), p }
    }
}

/// `.ncm`: `mu[s][λ] = P(λ|s)`, `xi[λ][t][y] = P(y|t,λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: String,
    pub ontic_states: Vec<String>,
    pub mu: Vec<Vec<Entry>>,
    pub xi: Vec<Vec<Vec<Entry>>>,
}

pub enum AnyModel {
    Exact(OntologicalModel<Rational>),
    Float(OntologicalModel<f64>),
}

impl ModelDocument {
    pub fn to_model(&self) -> Result<AnyModel, String> {
        let all: Vec<Entry> = self.mu.iter().flatten().chain(self.xi.iter().flatten().flatten()).cloned().collect();
        Ok(match split_entries(&all, "model")? {
            Kind::Exact => AnyModel::Exact(
                OntologicalModel::new(
                    self.ontic_states.clone(),
                    self.mu.iter().map(|r| r.iter().map(exact).collect()).collect(),
                    self.xi.iter().map(|x| x.iter().map(|r| r.iter().map(exact).collect()).collect()).collect(),
                )
                .map_err(|e| e.to_string())?,
            ),
            Kind::Float => AnyModel::Float(
                OntologicalModel::new(
                    self.ontic_states.clone(),
                    self.mu.iter().map(|r| r.iter().map(float).collect()).collect(),
                    self.xi.iter().map(|x| x.iter().map(|r| r.iter().map(float).collect()).collect()).collect(),
                )
                .map_err(|e| e.to_string())?,
            ),
        })
    }

    pub fn from_model<T: Clone>(m: &OntologicalModel<T>, entry: impl Fn(&T) -> Entry) -> Self {
        ModelDocument {
            format_version: FORMAT_VERSION.into(),
            ontic_states: m.ontic_states.clone(),
            mu: m.mu.iter().map(|r| r.iter().map(&entry).collect()).collect(),
            xi: m.xi.iter().map(|x| x.iter().map(|r| r.iter().map(&entry).collect()).collect()).collect(),
        }
    }
}

/// `.ncp`: a claimed parent POVM with `postprocessing[t][z][y] = P(y|t,z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParentDocument {
    pub format_version: String,
    pub parent: Vec<LabelledMatrix>,
    pub postprocessing: Vec<Vec<Vec<f64>>>,
}

fn matrix_from_doc(m: &MatrixDoc, dim: usize, what: &str) -> Result<ComplexMatrix, String> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(format!("{what}: expected a {dim}×{dim} matrix"));
    }
    let entries = m.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
    ComplexMatrix::new(dim, entries).map_err(|e| format!("{what}: {e}"))
}

pub fn matrix_to_doc(m: &ComplexMatrix) -> MatrixDoc {
    let n = m.dim();
    (0..n).map(|i| (0..n).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect()).collect()
}

impl ParentDocument {
    pub fn to_claim(&self, dim: usize) -> Result<ParentMeasurement, String> {
        let parent = self
            .parent
            .iter()
            .enumerate()
            .map(|(z, g)| {
                let what = format!("parent[{z}] ({})", g.label);
                Effect::new(matrix_from_doc(&g.matrix, dim, &what)?).map_err(|e| format!("{what}: {e}"))
            })
            .collect::<Result<_, _>>()?;
        Ok(ParentMeasurement { parent, postprocessing: self.postprocessing.clone() })
    }

    pub fn from_claim(claim: &ParentMeasurement) -> Self {
        ParentDocument {
            format_version: FORMAT_VERSION.into(),
            parent: claim
                .parent
                .iter()
                .enumerate()
                .map(|(z, g)| LabelledMatrix { label: format!("G{z}"), matrix: matrix_to_doc(g.matrix()) })
                .collect(),
            postprocessing: claim.postprocessing.clone(),
        }
    }
}

fn check_version(v: &str) -> Result<(), String> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(format!("format_version: unsupported version {v:?}, expected {FORMAT_VERSION:?}"))
    }
}

fn coefficient_vector(map: &Coefficients, labels: &[String], field: &str) -> Result<Vec<Rational>, String> {
    let mut v = vec![Rational::zero(); labels.len()];
    for (k, c) in map {
        let i = labels.iter().position(|l| l == k).ok_or_else(|| format!("{field}: unknown label {k:?}"))?;
        v[i] = c.clone();
    }
    Ok(v)
}

fn coefficient_map(v: &[Rational], labels: &[String]) -> Coefficients {
    v.iter().zip(labels).filter(|(c, _)| !c.is_zero()).map(|(c, l)| (l.clone(), c.clone())).collect()
}

impl ScenarioDocument {
    pub fn to_scenario(&self) -> Result<Scenario, String> {
        check_version(&self.format_version)?;
        let dim = self.dimension;
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let what = format!("states[{i}] ({})", s.label);
                let m = matrix_from_doc(&s.matrix, dim, &what)?;
                Ok((s.label.clone(), QuantumState::new(m).map_err(|e| format!("{what}: {e}"))?))
            })
            .collect::<Result<Vec<_>, String>>()?;
        let measurements = self
            .measurements
            .iter()
            .enumerate()
            .map(|(t, m)| {
                let effects = m
                    .effects
                    .iter()
                    .enumerate()
                    .map(|(y, e)| {
                        let what = format!("measurements[{t}].effects[{y}] ({}:{})", m.label, e.label);
                        let mat = matrix_from_doc(&e.matrix, dim, &what)?;
                        Ok((e.label.clone(), Effect::new(mat).map_err(|err| format!("{what}: {err}"))?))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                Ok(Measurement::new(m.label.clone(), effects))
            })
            .collect::<Result<Vec<_>, String>>()?;
        let state_labels: Vec<String> = self.states.iter().map(|s| s.label.clone()).collect();
        let outcome_labels: Vec<String> =
            self.measurements.iter().flat_map(|m| m.effects.iter().map(move |e| format!("{}:{}", m.label, e.label))).collect();
        let prep = self
            .prep_equivalences
            .iter()
            .enumerate()
            .map(|(a, m)| coefficient_vector(m, &state_labels, &format!("prep_equivalences[{a}]")))
            .collect::<Result<_, _>>()?;
        let meas = self
            .meas_equivalences
            .iter()
            .enumerate()
            .map(|(b, m)| coefficient_vector(m, &outcome_labels, &format!("meas_equivalences[{b}]")))
            .collect::<Result<_, _>>()?;
        Scenario::new(states, measurements, prep, meas).map_err(|e| e.to_string())
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        let outcome_labels = sc.flat_outcome_labels();
        ScenarioDocument {
            format_version: FORMAT_VERSION.into(),
            dimension: sc.dim(),
            states: sc
                .state_labels()
                .iter()
                .zip(sc.states())
                .map(|(l, s)| LabelledMatrix { label: l.clone(), matrix: matrix_to_doc(s.matrix()) })
                .collect(),
            measurements: sc
                .measurements()
                .iter()
                .map(|m| MeasurementDoc {
                    label: m.label.clone(),
                    effects: m
                        .outcome_labels
                        .iter()
                        .zip(&m.effects)
                        .map(|(l, e)| LabelledMatrix { label: l.clone(), matrix: matrix_to_doc(e.matrix()) })
                        .collect(),
                })
                .collect(),
            prep_equivalences: sc.prep_equivalences().iter().map(|a| coefficient_map(a, sc.state_labels())).collect(),
            meas_equivalences: sc.meas_equivalences().iter().map(|b| coefficient_map(b, &outcome_labels)).collect(),
            flag_distribution: None,
        }
    }
}

/// Parses JSON with the offending field path and position in the message.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str, source: &str) -> Result<T, String> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let loc = format!("line {} column {}", inner.line(), inner.column());
        if path == "." || path.is_empty() {
            format!("{source}: {inner}")
        } else {
            format!("{source}: field `{path}`: {inner} ({loc})")
        }
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use nocon::fixtures::example_scenario;

    #[test]
    fn scenario_round_trip() {
        let doc = ScenarioDocument::from_scenario(&example_scenario());
        let text = to_json(&doc);
        let back: ScenarioDocument = parse(&text, "x").unwrap();
        assert_eq!(back, doc);
        let sc = back.to_scenario().unwrap();
        assert_eq!(ScenarioDocument::from_scenario(&sc), doc);
    }

    #[test]
    fn unknown_fields_are_rejected_with_path() {
        let text = r#"{"format_version": "1", "p": [[["1/2", "1/2"]]], "extra": 1}"#;
        let err = parse::<TableDocument>(text, "t.nct").unwrap_err();
        assert!(err.contains("extra"), "{err}");
        let text = r#"{"format_version": "1", "p": [[["1/2", "x"]]]}"#;
        let err = parse::<TableDocument>(text, "t.nct").unwrap_err();
        assert!(err.contains("p[0][0][1]"), "{err}");
    }

    #[test]
    fn tables_must_not_mix_kinds() {
        let doc: TableDocument = parse(r#"{"format_version": "1", "p": [[["1/2", 0.5]]]}"#, "t").unwrap();
        assert!(doc.to_table().is_err());
        let doc: TableDocument = parse(r#"{"format_version": "1", "p": [[[0.25, 0.75]]]}"#, "t").unwrap();
        assert!(matches!(doc.to_table().unwrap(), AnyTable::Float(_)));
    }

    #[test]
    fn unknown_equivalence_label() {
        let mut doc = ScenarioDocument::from_scenario(&example_scenario());
        doc.prep_equivalences[0].insert("nope".into(), Rational::one());
        let err = doc.to_scenario().unwrap_err();
        assert!(err.contains("prep_equivalences[0]") && err.contains("nope"), "{err}");
    }
}
