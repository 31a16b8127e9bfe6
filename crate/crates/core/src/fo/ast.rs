use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::relational::{Element, Schema};

/// A term: a variable or a constant naming itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Element),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Element::new(name))
    }
}

/// First-order formula with equality and no function symbols.
///
/// The core connectives are `Atom`, `Equals`, `Not`, `Implies` and `Forall`;
/// everything else is a surface abbreviation removed by [`Formula::desugar`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom { symbol: String, terms: Vec<Term> },
    Equals(Term, Term),
    NotEquals(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn atom(symbol: &str, terms: Vec<Term>) -> Formula {
        Formula::Atom { symbol: symbol.to_string(), terms }
    }

    /// Atom whose arguments are all variables.
    pub fn atom_vars(symbol: &str, vars: &[&str]) -> Formula {
        Formula::atom(symbol, vars.iter().map(|v| Term::var(v)).collect())
    }

    /// Ground atom over constants.
    pub fn ground(symbol: &str, consts: &[&str]) -> Formula {
        Formula::atom(symbol, consts.iter().map(|c| Term::constant(c)).collect())
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Equals(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(phi: Formula) -> Formula {
        Formula::Not(Box::new(phi))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// `forall v1. ... forall vk. body`, outermost first.
    pub fn forall(vars: &[&str], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::Forall(v.to_string(), Box::new(acc)))
    }

    pub fn exists(vars: &[&str], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, v| Formula::Exists(v.to_string(), Box::new(acc)))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    /// Free variables in order of first occurrence.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a str>, out: &mut Vec<String>) {
        let visit_term = |t: &Term, bound: &Vec<&str>, out: &mut Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(&v.as_str()) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { terms, .. } => {
                for t in terms {
                    visit_term(t, bound, out);
                }
            }
            Formula::Equals(a, b) | Formula::NotEquals(a, b) => {
                visit_term(a, bound, out);
                visit_term(b, bound, out);
            }
            Formula::Not(phi) => phi.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall(v, phi) | Formula::Exists(v, phi) => {
                bound.push(v);
                phi.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Constants mentioned anywhere in the formula.
    pub fn constants(&self) -> BTreeSet<Element> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        });
        out
    }

    fn visit_terms(&self, f: &mut impl FnMut(&Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { terms, .. } => terms.iter().for_each(&mut *f),
            Formula::Equals(a, b) | Formula::NotEquals(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(phi) | Formula::Forall(_, phi) | Formula::Exists(_, phi) => phi.visit_terms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
        }
    }

    /// Checks every atom against the schema.
    pub fn check_schema(&self, schema: &Schema) -> Result<()> {
        match self {
            Formula::Atom { symbol, terms } => schema.require_arity(symbol, terms.len()),
            Formula::True | Formula::False | Formula::Equals(..) | Formula::NotEquals(..) => Ok(()),
            Formula::Not(phi) | Formula::Forall(_, phi) | Formula::Exists(_, phi) => phi.check_schema(schema),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.check_schema(schema)?;
                b.check_schema(schema)
            }
        }
    }

    /// Relation symbols with the arity they are used at.
    pub fn symbols(&self) -> Result<Vec<(String, usize)>> {
        let mut out: Vec<(String, usize)> = Vec::new();
        self.collect_symbols(&mut out)?;
        Ok(out)
    }

    fn collect_symbols(&self, out: &mut Vec<(String, usize)>) -> Result<()> {
        match self {
            Formula::Atom { symbol, terms } => {
                match out.iter().find(|(s, _)| s == symbol) {
                    Some((_, arity)) if *arity != terms.len() => {
                        return Err(Error::Schema(format!("{symbol} is used with arities {arity} and {}", terms.len())))
                    }
                    Some(_) => {}
                    None => out.push((symbol.clone(), terms.len())),
                }
                Ok(())
            }
            Formula::True | Formula::False | Formula::Equals(..) | Formula::NotEquals(..) => Ok(()),
            Formula::Not(phi) | Formula::Forall(_, phi) | Formula::Exists(_, phi) => phi.collect_symbols(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_symbols(out)?;
                b.collect_symbols(out)
            }
        }
    }

    /// Rewrites into the core connectives `=`, atoms, `!`, `->` and `forall`.
    pub fn desugar(&self) -> Formula {
        use Formula::*;
        match self {
            True => Forall("_top".into(), Box::new(Equals(Term::var("_top"), Term::var("_top")))),
            False => Formula::not(True.desugar()),
            Atom { .. } | Equals(..) => self.clone(),
            NotEquals(a, b) => Formula::not(Equals(a.clone(), b.clone())),
            Not(phi) => Formula::not(phi.desugar()),
            Implies(a, b) => Formula::implies(a.desugar(), b.desugar()),
            And(a, b) => Formula::not(Formula::implies(a.desugar(), Formula::not(b.desugar()))),
            Or(a, b) => Formula::implies(Formula::not(a.desugar()), b.desugar()),
            Iff(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                let forward = Formula::implies(a.clone(), b.clone());
                let backward = Formula::implies(b, a);
                Formula::not(Formula::implies(forward, Formula::not(backward)))
            }
            Forall(v, phi) => Forall(v.clone(), Box::new(phi.desugar())),
            Exists(v, phi) => Formula::not(Forall(v.clone(), Box::new(Formula::not(phi.desugar())))),
        }
    }

    /// Nesting depth of connectives and quantifiers; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Equals(..) | Formula::NotEquals(..) => 0,
            Formula::Not(phi) | Formula::Forall(_, phi) | Formula::Exists(_, phi) => 1 + phi.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(..) => 5,
            Formula::Forall(..) | Formula::Exists(..) => 0,
            _ => 6,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => {
                f.write_str("'")?;
                for ch in c.name().chars() {
                    if ch == '\'' || ch == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{ch}")?;
                }
                f.write_str("'")
            }
        }
    }
}

/// Prints in the concrete syntax accepted by [`crate::fo::parse`].
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Quantifiers extend maximally to the right, so any quantifier used as an
        // operand is parenthesised.
        fn operand(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
            if parens || child.precedence() == 0 {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }
        fn binary(
            f: &mut fmt::Formatter<'_>,
            me: &Formula,
            a: &Formula,
            op: &str,
            b: &Formula,
            right_assoc: bool,
        ) -> fmt::Result {
            let p = me.precedence();
            let left_parens = a.precedence() < p || (right_assoc && a.precedence() == p);
            let right_parens = b.precedence() < p || (!right_assoc && b.precedence() == p);
            operand(f, a, left_parens)?;
            write!(f, " {op} ")?;
            operand(f, b, right_parens)
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom { symbol, terms } => {
                write!(f, "{symbol}(")?;
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            Formula::Equals(a, b) => write!(f, "{a} = {b}"),
            Formula::NotEquals(a, b) => write!(f, "{a} != {b}"),
            Formula::Not(phi) => {
                f.write_str("!")?;
                operand(f, phi, phi.precedence() < 5)
            }
            Formula::And(a, b) => binary(f, self, a, "&", b, false),
            Formula::Or(a, b) => binary(f, self, a, "|", b, false),
            Formula::Implies(a, b) => binary(f, self, a, "->", b, true),
            Formula::Iff(a, b) => binary(f, self, a, "<->", b, false),
            Formula::Forall(v, phi) => write!(f, "forall {v}. {phi}"),
            Formula::Exists(v, phi) => write!(f, "exists {v}. {phi}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_in_first_occurrence_order() {
        let phi = Formula::and(
            Formula::atom_vars("P", &["y", "x"]),
            Formula::exists(&["y"], Formula::atom_vars("Q", &["x", "y", "z"])),
        );
        assert_eq!(phi.free_variables(), vec!["y", "x", "z"]);
        let sentence = Formula::forall(&["x"], Formula::atom_vars("P", &["x"]));
        assert!(sentence.is_sentence());
    }

    #[test]
    fn desugar_keeps_free_variables() {
        let phi = Formula::iff(
            Formula::exists(&["y"], Formula::atom_vars("P", &["x", "y"])),
            Formula::or(Formula::True, Formula::NotEquals(Term::var("z"), Term::constant("a"))),
        );
        assert_eq!(phi.desugar().free_variables(), phi.free_variables());
    }

    #[test]
    fn printing_parenthesises_operand_quantifiers() {
        let phi =
            Formula::and(Formula::forall(&["x"], Formula::atom_vars("P", &["x"])), Formula::atom_vars("P", &["y"]));
        assert_eq!(phi.to_string(), "(forall x. P(x)) & P(y)");
        let psi = Formula::implies(
            Formula::implies(Formula::atom_vars("P", &["x"]), Formula::atom_vars("P", &["y"])),
            Formula::atom_vars("P", &["z"]),
        );
        assert_eq!(psi.to_string(), "(P(x) -> P(y)) -> P(z)");
    }
}
