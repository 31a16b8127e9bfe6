//! Functional dependencies, value constraints and referential integrity
//! constraints: native checks and first-order translations.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fo::{self, Formula, Term};
use crate::relational::{enumerate_instances, Bounds, Instance, Schema};

/// Positions `1..=k` of `P` determine positions `k+1..=arity(P)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDependency {
    #[serde(rename = "P")]
    pub symbol: String,
    pub k: usize,
}

/// Position `k` of `P` only holds values listed in the unary relation `ref`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueConstraint {
    #[serde(rename = "P")]
    pub symbol: String,
    pub k: usize,
    #[serde(rename = "ref")]
    pub reference: String,
}

/// The last `k` positions of `from` match the first `k` positions of some
/// tuple of `to`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferentialIntegrityConstraint {
    pub from: String,
    pub to: String,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Fd(FunctionalDependency),
    Value(ValueConstraint),
    Ric(ReferentialIntegrityConstraint),
    Sentence(#[serde(with = "sentence_text")] Formula),
}

mod sentence_text {
    use super::*;

    pub fn serialize<S: Serializer>(phi: &Formula, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(phi)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Formula, D::Error> {
        let text = String::deserialize(deserializer)?;
        let phi = fo::parse(&text).map_err(serde::de::Error::custom)?;
        if !phi.is_sentence() {
            return Err(serde::de::Error::custom(format!("constraint {text:?} has free variables")));
        }
        Ok(phi)
    }
}

impl FunctionalDependency {
    pub fn new(symbol: &str, k: usize) -> Self {
        FunctionalDependency { symbol: symbol.to_string(), k }
    }
}

impl ValueConstraint {
    pub fn new(symbol: &str, k: usize, reference: &str) -> Self {
        ValueConstraint { symbol: symbol.to_string(), k, reference: reference.to_string() }
    }
}

impl ReferentialIntegrityConstraint {
    pub fn new(from: &str, to: &str, k: usize) -> Self {
        ReferentialIntegrityConstraint { from: from.to_string(), to: to.to_string(), k }
    }
}

fn arity_of(schema: &Schema, symbol: &str) -> Result<usize> {
    schema.arity(symbol).ok_or_else(|| Error::Schema(format!("unknown relation symbol {symbol}")))
}

impl Constraint {
    pub fn fd(symbol: &str, k: usize) -> Self {
        Constraint::Fd(FunctionalDependency::new(symbol, k))
    }

    pub fn value(symbol: &str, k: usize, reference: &str) -> Self {
        Constraint::Value(ValueConstraint::new(symbol, k, reference))
    }

    pub fn ric(from: &str, to: &str, k: usize) -> Self {
        Constraint::Ric(ReferentialIntegrityConstraint::new(from, to, k))
    }

    /// Parses a sentence constraint.
    pub fn sentence(text: &str) -> Result<Self> {
        Constraint::from_formula(fo::parse(text)?)
    }

    pub fn from_formula(phi: Formula) -> Result<Self> {
        let free = phi.free_variables();
        if !free.is_empty() {
            return Err(Error::Parameter(format!(
                "a constraint must be a sentence; free variables: {}",
                free.join(", ")
            )));
        }
        Ok(Constraint::Sentence(phi))
    }

    /// Checks the constraint's parameters against `schema`.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        match self {
            Constraint::Fd(fd) => {
                let q = arity_of(schema, &fd.symbol)?;
                if fd.k == 0 || fd.k >= q {
                    return Err(Error::Parameter(format!(
                        "functional dependency on {}/{q} needs 1 <= k < {q}, got k = {}",
                        fd.symbol, fd.k
                    )));
                }
            }
            Constraint::Value(vc) => {
                let q = arity_of(schema, &vc.symbol)?;
                if vc.k == 0 || vc.k > q {
                    return Err(Error::Parameter(format!("value constraint position {} outside 1..={q}", vc.k)));
                }
                if arity_of(schema, &vc.reference)? != 1 {
                    return Err(Error::Parameter(format!("admissible-value relation {} must be unary", vc.reference)));
                }
            }
            Constraint::Ric(ric) => {
                let q1 = arity_of(schema, &ric.from)?;
                let q2 = arity_of(schema, &ric.to)?;
                if ric.k == 0 || ric.k > q1.min(q2) {
                    return Err(Error::Parameter(format!(
                        "referential constraint needs 1 <= k <= {}, got k = {}",
                        q1.min(q2),
                        ric.k
                    )));
                }
            }
            Constraint::Sentence(phi) => {
                phi.check_schema(schema)?;
                if !phi.is_sentence() {
                    return Err(Error::Parameter("sentence constraint has free variables".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether `instance` satisfies the constraint. The three database
    /// classes are checked directly on the relations.
    pub fn holds(&self, instance: &Instance) -> Result<bool> {
        self.validate(instance.schema())?;
        Ok(match self {
            Constraint::Fd(fd) => {
                let mut seen = BTreeMap::new();
                instance.relation(&fd.symbol)?.iter().all(|t| {
                    let (key, rest) = t.split_at(fd.k);
                    *seen.entry(key).or_insert(rest) == rest
                })
            }
            Constraint::Value(vc) => {
                let admissible = instance.relation(&vc.reference)?;
                instance.relation(&vc.symbol)?.iter().all(|t| admissible.iter().any(|v| v[0] == t[vc.k - 1]))
            }
            Constraint::Ric(ric) => {
                let targets = instance.relation(&ric.to)?;
                instance.relation(&ric.from)?.iter().all(|t| {
                    let tail = &t[t.arity() - ric.k..];
                    targets.iter().any(|u| &u[..ric.k] == tail)
                })
            }
            Constraint::Sentence(phi) => fo::is_true(instance, phi)?,
        })
    }

    /// The first-order sentence expressing the constraint, over variables
    /// `x1, x2, ...` and `y1, y2, ...`.
    pub fn to_formula(&self, schema: &Schema) -> Result<Formula> {
        self.validate(schema)?;
        let xs = |q: usize| -> Vec<String> { (1..=q).map(|i| format!("x{i}")).collect() };
        let ys = |q: usize| -> Vec<String> { (1..=q).map(|i| format!("y{i}")).collect() };
        let var = |v: &String| Term::var(v);
        let atom = |p: &str, vs: &[String]| Formula::atom(p, vs.iter().map(var).collect());
        Ok(match self {
            Constraint::Fd(fd) => {
                let q = arity_of(schema, &fd.symbol)?;
                let (x, y) = (xs(q), ys(q));
                let premise = Formula::conjunction(
                    [atom(&fd.symbol, &x), atom(&fd.symbol, &y)]
                        .into_iter()
                        .chain((0..fd.k).map(|i| Formula::eq(var(&x[i]), var(&y[i])))),
                );
                let conclusion = Formula::conjunction((fd.k..q).map(|i| Formula::eq(var(&x[i]), var(&y[i]))));
                let all: Vec<String> = x.iter().chain(y.iter()).cloned().collect();
                Formula::forall(&bind(&all), Formula::implies(premise, conclusion))
            }
            Constraint::Value(vc) => {
                let q = arity_of(schema, &vc.symbol)?;
                let x = xs(q);
                Formula::forall(
                    &bind(&x),
                    Formula::implies(atom(&vc.symbol, &x), atom(&vc.reference, &x[vc.k - 1..vc.k])),
                )
            }
            Constraint::Ric(ric) => {
                let q1 = arity_of(schema, &ric.from)?;
                let q2 = arity_of(schema, &ric.to)?;
                let (x, y) = (xs(q1), ys(q2));
                let matches = (0..ric.k).map(|j| Formula::eq(var(&x[q1 - ric.k + j]), var(&y[j])));
                let body = Formula::conjunction(std::iter::once(atom(&ric.to, &y)).chain(matches));
                Formula::forall(&bind(&x), Formula::implies(atom(&ric.from, &x), Formula::exists(&bind(&y), body)))
            }
            Constraint::Sentence(phi) => phi.clone(),
        })
    }
}

fn bind(vs: &[String]) -> Vec<&str> {
    vs.iter().map(String::as_str).collect()
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Fd(fd) => write!(f, "FD({}, k={})", fd.symbol, fd.k),
            Constraint::Value(vc) => write!(f, "Value({}, k={}, {})", vc.symbol, vc.k, vc.reference),
            Constraint::Ric(r) => write!(f, "RIC({} -> {}, k={})", r.from, r.to, r.k),
            Constraint::Sentence(phi) => write!(f, "{phi}"),
        }
    }
}

/// Every functional dependency, value constraint and referential constraint
/// the schema admits.
pub fn database_constraints(schema: &Schema) -> Vec<Constraint> {
    let rels = schema.relations();
    let mut out = Vec::new();
    for (p, q) in rels {
        for k in 1..*q {
            out.push(Constraint::fd(p, k));
        }
    }
    for (p, q) in rels {
        for (r, _) in rels.iter().filter(|(_, a)| *a == 1) {
            for k in 1..=*q {
                out.push(Constraint::value(p, k, r));
            }
        }
    }
    for (p, q1) in rels {
        for (r, q2) in rels {
            for k in 1..=*q1.min(q2) {
                out.push(Constraint::ric(p, r, k));
            }
        }
    }
    out
}

/// Outcome of comparing [`Constraint::holds`] with evaluation of
/// [`Constraint::to_formula`] over every instance within bounds.
#[derive(Clone, Debug, Serialize)]
pub struct TranslationReport {
    pub constraint: Constraint,
    pub formula: String,
    pub instances: u64,
    pub mismatch: Option<Instance>,
}

pub fn translation_check(schema: &Arc<Schema>, constraint: &Constraint, bounds: &Bounds) -> Result<TranslationReport> {
    let phi = constraint.to_formula(schema)?;
    let mut instances = 0;
    let mut mismatch = None;
    for d in enumerate_instances(schema, bounds)? {
        instances += 1;
        if constraint.holds(&d)? != fo::is_true(&d, &phi)? {
            mismatch = Some(d);
            break;
        }
    }
    Ok(TranslationReport { constraint: constraint.clone(), formula: phi.to_string(), instances, mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(decls: &[(&str, usize)]) -> Arc<Schema> {
        Schema::shared(decls.iter().copied()).unwrap()
    }

    #[test]
    fn fd_examples() {
        let s = schema(&[("P", 2)]);
        let fd = Constraint::fd("P", 1);
        assert!(!fd.holds(&Instance::from_facts(&s, "P(a,b), P(a,d)").unwrap()).unwrap());
        assert!(fd.holds(&Instance::from_facts(&s, "P(a,b)").unwrap()).unwrap());
        assert!(fd.holds(&Instance::from_facts(&s, "P(a,b), P(c,b)").unwrap()).unwrap());
    }

    #[test]
    fn ric_example() {
        let s = schema(&[("P1", 2), ("P2", 2)]);
        let ric = Constraint::ric("P1", "P2", 1);
        assert!(ric.holds(&Instance::from_facts(&s, "P1(x,a), P2(a,b)").unwrap()).unwrap());
        assert!(!ric.holds(&Instance::from_facts(&s, "P1(x,a), P2(b,a)").unwrap()).unwrap());
    }

    #[test]
    fn value_constraint() {
        let s = schema(&[("P", 2), ("Pv", 1)]);
        let vc = Constraint::value("P", 2, "Pv");
        assert!(vc.holds(&Instance::from_facts(&s, "P(a,b), Pv(b)").unwrap()).unwrap());
        assert!(!vc.holds(&Instance::from_facts(&s, "P(a,b), Pv(a)").unwrap()).unwrap());
    }

    #[test]
    fn translations_print_as_displayed() {
        let s = schema(&[("P", 2), ("Pv", 1), ("P1", 2), ("P2", 2)]);
        let fd = Constraint::fd("P", 1).to_formula(&s).unwrap();
        assert_eq!(fd, fo::parse("forall x1, x2, y1, y2. (P(x1,x2) & P(y1,y2) & x1 = y1 -> x2 = y2)").unwrap());
        let vc = Constraint::value("P", 2, "Pv").to_formula(&s).unwrap();
        assert_eq!(vc, fo::parse("forall x1, x2. (P(x1,x2) -> Pv(x2))").unwrap());
        let ric = Constraint::ric("P1", "P2", 1).to_formula(&s).unwrap();
        assert_eq!(ric, fo::parse("forall x1, x2. (P1(x1,x2) -> exists y1, y2. (P2(y1,y2) & x2 = y1))").unwrap());
    }

    #[test]
    fn parameter_validation() {
        let s = schema(&[("P", 2), ("R", 1)]);
        assert!(Constraint::fd("P", 2).holds(&Instance::empty(s.clone())).is_err());
        assert!(Constraint::fd("P", 0).holds(&Instance::empty(s.clone())).is_err());
        assert!(Constraint::fd("Z", 1).holds(&Instance::empty(s.clone())).is_err());
        assert!(Constraint::value("P", 3, "R").validate(&s).is_err());
        assert!(Constraint::value("P", 1, "P").validate(&s).is_err());
        assert!(Constraint::ric("P", "R", 2).validate(&s).is_err());
        assert!(Constraint::sentence("P(x,y)").is_err());
    }

    #[test]
    fn json_formats() {
        let cases = [
            (r#"{"fd":{"P":"P","k":1}}"#, Constraint::fd("P", 1)),
            (r#"{"value":{"P":"P","k":2,"ref":"Pv"}}"#, Constraint::value("P", 2, "Pv")),
            (r#"{"ric":{"from":"P1","to":"P2","k":1}}"#, Constraint::ric("P1", "P2", 1)),
            (r#"{"sentence":"forall x. P(x)"}"#, Constraint::sentence("forall x. P(x)").unwrap()),
        ];
        for (text, expected) in cases {
            let parsed: Constraint = serde_json::from_str(text).unwrap();
            assert_eq!(parsed, expected);
            assert_eq!(serde_json::to_string(&parsed).unwrap(), text);
        }
        assert!(serde_json::from_str::<Constraint>(r#"{"sentence":"P(x)"}"#).is_err());
    }

    #[test]
    fn wider_fd_translation_agrees() {
        let s = schema(&[("P", 3)]);
        for k in 1..3 {
            let report = translation_check(&s, &Constraint::fd("P", k), &Bounds::new(2, 1).unwrap()).unwrap();
            assert_eq!(report.instances, 256);
            assert!(report.mismatch.is_none(), "{report:?}");
        }
    }
}
