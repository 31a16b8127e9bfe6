//! Syntactic fragments. Classification runs on the surface syntax, so `|`,
//! `exists` and `forall` are still distinguishable.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::fo::ast::{Formula, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FragmentTag {
    Sentence,
    /// A ground atom.
    PositiveLiteral,
    /// A negated ground atom.
    NegativeLiteral,
    /// `forall xs, ys. (P(xs) <-> P'(ys))` with distinct variable lists.
    Equivalence,
    /// Relational atoms closed under `|` and `exists`.
    PositiveExistential,
    /// Relational atoms closed under `&` and `forall`.
    PositiveUniversal,
    General,
}

impl fmt::Display for FragmentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FragmentTag::Sentence => "SENTENCE",
            FragmentTag::PositiveLiteral => "POSITIVE_LITERAL",
            FragmentTag::NegativeLiteral => "NEGATIVE_LITERAL",
            FragmentTag::Equivalence => "EQUIVALENCE",
            FragmentTag::PositiveExistential => "POSITIVE_EXISTENTIAL",
            FragmentTag::PositiveUniversal => "POSITIVE_UNIVERSAL",
            FragmentTag::General => "GENERAL",
        };
        f.write_str(name)
    }
}

fn is_ground_atom(phi: &Formula) -> bool {
    match phi {
        Formula::Atom { terms, .. } => terms.iter().all(|t| matches!(t, Term::Const(_))),
        _ => false,
    }
}

fn is_positive_existential(phi: &Formula) -> bool {
    match phi {
        Formula::Atom { .. } => true,
        Formula::Or(a, b) => is_positive_existential(a) && is_positive_existential(b),
        Formula::Exists(_, body) => is_positive_existential(body),
        _ => false,
    }
}

fn is_positive_universal(phi: &Formula) -> bool {
    match phi {
        Formula::Atom { .. } => true,
        Formula::And(a, b) => is_positive_universal(a) && is_positive_universal(b),
        Formula::Forall(_, body) => is_positive_universal(body),
        _ => false,
    }
}

fn distinct_vars(terms: &[Term]) -> Option<Vec<&str>> {
    let vars: Vec<&str> = terms
        .iter()
        .map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
        .collect::<Option<_>>()?;
    let set: BTreeSet<&str> = vars.iter().copied().collect();
    (set.len() == vars.len()).then_some(vars)
}

fn is_equivalence(phi: &Formula) -> bool {
    let mut bound = Vec::new();
    let mut body = phi;
    while let Formula::Forall(v, inner) = body {
        bound.push(v.as_str());
        body = inner;
    }
    let Formula::Iff(left, right) = body else {
        return false;
    };
    let (Formula::Atom { symbol: p, terms: xs }, Formula::Atom { symbol: q, terms: ys }) =
        (left.as_ref(), right.as_ref())
    else {
        return false;
    };
    if xs.len() != ys.len() {
        return false;
    }
    let (Some(xs), Some(ys)) = (distinct_vars(xs), distinct_vars(ys)) else {
        return false;
    };
    // the two sides share no variable unless they are the same atom
    let disjoint = xs.iter().all(|x| !ys.contains(x));
    let same_atom = p == q && xs == ys;
    let quantified: BTreeSet<&str> = bound.iter().copied().collect();
    let used: BTreeSet<&str> = xs.iter().chain(ys.iter()).copied().collect();
    (disjoint || same_atom) && used == quantified
}

/// Every fragment `phi` belongs to; always contains `General`.
pub fn classify(phi: &Formula) -> BTreeSet<FragmentTag> {
    let mut tags = BTreeSet::from([FragmentTag::General]);
    if phi.is_sentence() {
        tags.insert(FragmentTag::Sentence);
    }
    if is_ground_atom(phi) {
        tags.insert(FragmentTag::PositiveLiteral);
    }
    if let Formula::Not(inner) = phi {
        if is_ground_atom(inner) {
            tags.insert(FragmentTag::NegativeLiteral);
        }
    }
    if is_equivalence(phi) {
        tags.insert(FragmentTag::Equivalence);
    }
    if is_positive_existential(phi) {
        tags.insert(FragmentTag::PositiveExistential);
    }
    if is_positive_universal(phi) {
        tags.insert(FragmentTag::PositiveUniversal);
    }
    tags
}
