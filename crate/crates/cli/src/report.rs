//! Number and inequality formatting shared by the subcommands.

use serde::Serialize;

use nocon::linalg::Rational;
use nocon::polytope::Constraint;
use nocon::scenario::Scenario;

/// `x` with 12 significant digits.
pub fn float12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..12).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{x:.11e}")
    }
}

/// `x` rounded to 12 significant digits, for JSON reports.
pub fn round12(x: f64) -> f64 {
    float12(x).parse().unwrap_or(x)
}

/// Data-table coordinate labels `p(y|s)` (one measurement) or `p(y|s,t)`.
pub fn coordinate_labels(sc: &Scenario) -> Vec<String> {
    let ny = sc.uniform_outcomes().unwrap_or(0);
    let single = sc.num_measurements() == 1;
    let mut out = Vec::new();
    for s in sc.state_labels() {
        for m in sc.measurements() {
            for y in 0..ny {
                out.push(if single {
                    format!("p({}|{s})", m.outcome_labels[y])
                } else {
                    format!("p({}|{s},{})", m.outcome_labels[y], m.label)
                });
            }
        }
    }
    out
}

/// `Σ c_i·label_i` with unit coefficients written bare.
pub fn linear_form(coeffs: &[Rational], labels: &[String]) -> String {
    let mut s = String::new();
    for (c, l) in coeffs.iter().zip(labels) {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        if s.is_empty() {
            if c.is_negative() {
                s.push('-');
            }
        } else {
            s.push_str(&format!(" {sign} "));
        }
        if mag != Rational::one() {
            s.push_str(&format!("{mag}·"));
        }
        s.push_str(l);
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

pub fn inequality_text(c: &Constraint, labels: &[String]) -> String {
    format!("{} <= {}", linear_form(&c.coeffs, labels), c.bound)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityJson {
    /// Dense, aligned with the report's `coordinates`.
    pub coefficients: Vec<Rational>,
    pub bound: Rational,
    pub text: String,
}

impl InequalityJson {
    pub fn new(c: &Constraint, labels: &[String]) -> Self {
        InequalityJson { coefficients: c.coeffs.clone(), bound: c.bound.clone(), text: inequality_text(c, labels) }
    }
}
