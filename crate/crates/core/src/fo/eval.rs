//! Active-domain satisfaction and query answering.
//!
//! Quantifiers range over `adom(D)`. Constants denote themselves whether or not
//! they occur in the instance. Quantified subformulas are memoised on the values
//! of their free variables, so repeated evaluation under one instance (as in
//! [`answer`]) shares work.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fo::ast::{Formula, Term};
use crate::relational::{Element, Instance, Tuple};

/// A partial map from variables to elements.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, Element>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    /// `sigma[var -> value]`; only `var` changes.
    pub fn with(&self, var: &str, value: Element) -> Assignment {
        let mut next = self.clone();
        next.0.insert(var.to_string(), value);
        next
    }

    pub fn get(&self, var: &str) -> Option<&Element> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Element)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

impl<S: AsRef<str>> FromIterator<(S, Element)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (S, Element)>>(iter: I) -> Self {
        Assignment(iter.into_iter().map(|(k, v)| (k.as_ref().to_string(), v)).collect())
    }
}

/// The answer set of a query: tuples of a fixed arity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Answers {
    arity: usize,
    tuples: BTreeSet<Tuple>,
}

impl Answers {
    pub fn new(arity: usize, tuples: BTreeSet<Tuple>) -> Result<Self> {
        if let Some(bad) = tuples.iter().find(|t| t.arity() != arity) {
            return Err(Error::Parameter(format!("answer tuple {bad:?} does not have arity {arity}")));
        }
        Ok(Answers { arity, tuples })
    }

    pub fn empty(arity: usize) -> Self {
        Answers { arity, tuples: BTreeSet::new() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.tuples.contains(t)
    }

    pub fn is_subset(&self, other: &Answers) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    /// Tuples of `self` missing from `other`.
    pub fn difference(&self, other: &Answers) -> Answers {
        Answers { arity: self.arity, tuples: self.tuples.difference(&other.tuples).cloned().collect() }
    }
}

impl fmt::Debug for Answers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.tuples).finish()
    }
}

impl Serialize for Answers {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.tuples.serialize(serializer)
    }
}

struct Evaluator<'a> {
    instance: &'a Instance,
    adom: Vec<Element>,
    free: HashMap<usize, Vec<&'a str>>,
    memo: HashMap<(usize, Vec<Element>), bool>,
}

type Env<'a> = Vec<(&'a str, Element)>;

impl<'a> Evaluator<'a> {
    fn new(instance: &'a Instance) -> Self {
        Evaluator {
            instance,
            adom: instance.active_domain().into_iter().collect(),
            free: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn lookup(env: &Env<'a>, var: &str) -> Result<Element> {
        env.iter()
            .rev()
            .find(|(name, _)| *name == var)
            .map(|(_, e)| e.clone())
            .ok_or_else(|| Error::Eval(format!("variable {var} is unbound")))
    }

    fn resolve(env: &Env<'a>, term: &Term) -> Result<Element> {
        match term {
            Term::Var(v) => Self::lookup(env, v),
            Term::Const(c) => Ok(c.clone()),
        }
    }

    fn eval(&mut self, phi: &'a Formula, env: &mut Env<'a>) -> Result<bool> {
        match phi {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Atom { symbol, terms } => {
                let tuple: Tuple = terms.iter().map(|t| Self::resolve(env, t)).collect::<Result<_>>()?;
                self.instance.schema().require_arity(symbol, tuple.arity())?;
                Ok(self.instance.contains_tuple(symbol, &tuple))
            }
            Formula::Equals(a, b) => Ok(Self::resolve(env, a)? == Self::resolve(env, b)?),
            Formula::NotEquals(a, b) => Ok(Self::resolve(env, a)? != Self::resolve(env, b)?),
            Formula::Not(inner) => Ok(!self.eval(inner, env)?),
            Formula::And(a, b) => Ok(self.eval(a, env)? && self.eval(b, env)?),
            Formula::Or(a, b) => Ok(self.eval(a, env)? || self.eval(b, env)?),
            Formula::Implies(a, b) => Ok(!self.eval(a, env)? || self.eval(b, env)?),
            Formula::Iff(a, b) => Ok(self.eval(a, env)? == self.eval(b, env)?),
            Formula::Forall(var, body) => self.quantify(phi, var, body, true, env),
            Formula::Exists(var, body) => self.quantify(phi, var, body, false, env),
        }
    }

    fn quantify(
        &mut self,
        node: &'a Formula,
        var: &'a str,
        body: &'a Formula,
        universal: bool,
        env: &mut Env<'a>,
    ) -> Result<bool> {
        let id = node as *const Formula as usize;
        let free = self
            .free
            .entry(id)
            .or_insert_with(|| {
                let mut names = Vec::new();
                for v in node.free_variables() {
                    names.push(find_var_name(node, &v));
                }
                names
            })
            .clone();
        let key_values = free.iter().map(|v| Self::lookup(env, v)).collect::<Result<Vec<_>>>()?;
        let key = (id, key_values);
        if let Some(&cached) = self.memo.get(&key) {
            return Ok(cached);
        }
        let mut result = universal;
        for k in 0..self.adom.len() {
            env.push((var, self.adom[k].clone()));
            let value = self.eval(body, env);
            env.pop();
            if value? != universal {
                result = !universal;
                break;
            }
        }
        self.memo.insert(key, result);
        Ok(result)
    }
}

/// Returns the `&str` for variable `name` borrowed from inside `phi`.
fn find_var_name<'a>(phi: &'a Formula, name: &str) -> &'a str {
    fn in_term<'a>(t: &'a Term, name: &str) -> Option<&'a str> {
        match t {
            Term::Var(v) if v == name => Some(v.as_str()),
            _ => None,
        }
    }
    fn go<'a>(phi: &'a Formula, name: &str) -> Option<&'a str> {
        match phi {
            Formula::True | Formula::False => None,
            Formula::Atom { terms, .. } => terms.iter().find_map(|t| in_term(t, name)),
            Formula::Equals(a, b) | Formula::NotEquals(a, b) => in_term(a, name).or_else(|| in_term(b, name)),
            Formula::Not(inner) | Formula::Forall(_, inner) | Formula::Exists(_, inner) => go(inner, name),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                go(a, name).or_else(|| go(b, name))
            }
        }
    }
    go(phi, name).expect("free variable occurs in the formula")
}

/// `(D, sigma) |= phi` under active-domain semantics.
pub fn satisfies(instance: &Instance, sigma: &Assignment, phi: &Formula) -> Result<bool> {
    let mut evaluator = Evaluator::new(instance);
    let mut env: Env = sigma.iter().map(|(k, v)| (k, v.clone())).collect();
    evaluator.eval(phi, &mut env)
}

/// `D |= phi` for a sentence.
pub fn is_true(instance: &Instance, phi: &Formula) -> Result<bool> {
    let free = phi.free_variables();
    if !free.is_empty() {
        return Err(Error::Eval(format!("truth in an instance needs a sentence; free variables: {}", free.join(", "))));
    }
    satisfies(instance, &Assignment::new(), phi)
}

/// `ans(D, phi)`: the tuples over `adom(D)` that satisfy `phi` when assigned to
/// `vars` in order. `vars` must list every free variable exactly once.
pub fn answer(instance: &Instance, phi: &Formula, vars: &[&str]) -> Result<Answers> {
    if vars.is_empty() {
        return Err(Error::Eval("answer needs at least one free variable; use satisfies for sentences".into()));
    }
    let listed: BTreeSet<&str> = vars.iter().copied().collect();
    let free = phi.free_variables();
    let free_set: BTreeSet<&str> = free.iter().map(String::as_str).collect();
    if listed.len() != vars.len() || listed != free_set {
        return Err(Error::Eval(format!(
            "answer variables {vars:?} must list the free variables {free:?} exactly once"
        )));
    }
    let mut evaluator = Evaluator::new(instance);
    let adom = evaluator.adom.clone();
    let mut tuples = BTreeSet::new();
    for candidate in (0..vars.len()).map(|_| adom.iter().cloned()).multi_cartesian_product() {
        let mut env: Env = vars.iter().copied().zip(candidate.iter().cloned()).collect();
        if evaluator.eval(phi, &mut env)? {
            tuples.insert(Tuple::new(candidate));
        }
    }
    Ok(Answers { arity: vars.len(), tuples })
}

/// [`answer`] with the free variables in first-occurrence order.
pub fn answer_free(instance: &Instance, phi: &Formula) -> Result<Answers> {
    let free = phi.free_variables();
    let vars: Vec<&str> = free.iter().map(String::as_str).collect();
    answer(instance, phi, &vars)
}
