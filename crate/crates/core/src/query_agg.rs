//! Querying an aggregate versus aggregating the answers: the two paths from
//! a profile to an answer set, and bounded suites over generated fragments.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregators::Aggregator;
use crate::error::{Error, Result};
use crate::fo::{answer_free, Answers, Formula};
use crate::relational::{tuples_over, Bounds, Element, Instance, Profile, Schema};
use crate::space::{AtomSpace, ProfileSpace};

/// The aggregator applied to answer sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerAggregator {
    UnionStar,
    IntersectionStar,
}

impl fmt::Display for AnswerAggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnswerAggregator::UnionStar => "union",
            AnswerAggregator::IntersectionStar => "intersection",
        })
    }
}

impl FromStr for AnswerAggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "union" | "union_star" => Ok(AnswerAggregator::UnionStar),
            "intersection" | "intersection_star" => Ok(AnswerAggregator::IntersectionStar),
            _ => Err(Error::Parameter(format!("unknown answer aggregator {s:?}"))),
        }
    }
}

pub fn star_aggregate(star: AnswerAggregator, answers: &[Answers]) -> Result<Answers> {
    let first = answers.first().ok_or_else(|| Error::Parameter("no answer sets to aggregate".into()))?;
    let arity = first.arity();
    if let Some(bad) = answers.iter().find(|a| a.arity() != arity) {
        return Err(Error::Parameter(format!("answer sets of arity {arity} and {} cannot be combined", bad.arity())));
    }
    let mut tuples = first.tuples().clone();
    for a in &answers[1..] {
        match star {
            AnswerAggregator::UnionStar => tuples.extend(a.tuples().iter().cloned()),
            AnswerAggregator::IntersectionStar => tuples.retain(|t| a.contains(t)),
        }
    }
    Answers::new(arity, tuples)
}

/// Both paths of the diagram: `lhs` queries the aggregate, `rhs` aggregates
/// the answers.
#[derive(Clone, Debug, Serialize)]
pub struct CommutationReport {
    pub query: String,
    pub variables: Vec<String>,
    pub rule: Aggregator,
    pub star: AnswerAggregator,
    pub profile: Profile,
    pub lhs: Answers,
    pub rhs: Answers,
    pub commutes: bool,
    pub missing_from_lhs: Answers,
    pub missing_from_rhs: Answers,
}

pub fn check_commutation(
    rule: &Aggregator,
    star: AnswerAggregator,
    phi: &Formula,
    profile: &Profile,
) -> Result<CommutationReport> {
    let variables = phi.free_variables();
    if variables.is_empty() {
        return Err(Error::Parameter("the query needs at least one free variable".into()));
    }
    let lhs = answer_free(&rule.aggregate(profile)?, phi)?;
    let answers = profile.agents().iter().map(|d| answer_free(d, phi)).collect::<Result<Vec<_>>>()?;
    let rhs = star_aggregate(star, &answers)?;
    let missing_from_lhs = rhs.difference(&lhs);
    let missing_from_rhs = lhs.difference(&rhs);
    Ok(CommutationReport {
        query: phi.to_string(),
        variables,
        rule: rule.clone(),
        star,
        profile: profile.clone(),
        commutes: missing_from_lhs.is_empty() && missing_from_rhs.is_empty(),
        lhs,
        rhs,
        missing_from_lhs,
        missing_from_rhs,
    })
}

/// Schema `{P/2, R/1}` of the running query example.
pub fn example_schema() -> Arc<Schema> {
    Schema::shared([("P", 2), ("R", 1)]).expect("valid schema")
}

/// `D1(P) = {(a,b)}`, `D2(P) = {(a,d)}`.
pub fn example_existential_profile() -> Profile {
    let s = example_schema();
    Profile::new(vec![
        Instance::from_facts(&s, "P(a,b)").expect("valid facts"),
        Instance::from_facts(&s, "P(a,d)").expect("valid facts"),
    ])
    .expect("valid profile")
}

/// `P = {(a,a),(a,b)}` in both instances, `R = {c}` and `R = {d}`.
pub fn example_universal_profile() -> Profile {
    let s = example_schema();
    Profile::new(vec![
        Instance::from_facts(&s, "P(a,a), P(a,b), R(c)").expect("valid facts"),
        Instance::from_facts(&s, "P(a,a), P(a,b), R(d)").expect("valid facts"),
    ])
    .expect("valid profile")
}

pub const QUERY_VARIABLES: [&str; 2] = ["x", "y"];

fn atoms(schema: &Schema) -> Vec<Formula> {
    let vars: Vec<Element> = QUERY_VARIABLES.iter().map(Element::new).collect();
    schema
        .relations()
        .iter()
        .flat_map(|(p, k)| {
            tuples_over(&vars, *k).into_iter().map(move |t| {
                let names: Vec<&str> = t.iter().map(Element::name).collect();
                Formula::atom_vars(p, &names)
            })
        })
        .collect()
}

fn free_set(phi: &Formula) -> BTreeSet<String> {
    phi.free_variables().into_iter().collect()
}

/// Formulas over variables `x, y` of depth at most `depth` built from atoms
/// with one binary connective and one quantifier, keeping those with a free
/// variable. `existential` selects disjunction and `exists`, otherwise
/// conjunction and `forall`. Disjunctions only join formulas with the same
/// free variables.
fn generate(schema: &Schema, depth: usize, existential: bool) -> Vec<Formula> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut levels: Vec<Vec<Formula>> = Vec::new();
    let mut keep = |phi: Formula, level: &mut Vec<Formula>| {
        if seen.insert(phi.to_string()) {
            level.push(phi);
        }
    };
    let mut base = Vec::new();
    for a in atoms(schema) {
        keep(a, &mut base);
    }
    levels.push(base);
    for d in 1..=depth {
        let mut level = Vec::new();
        for phi in &levels[d - 1] {
            for v in phi.free_variables() {
                let q = if existential {
                    Formula::exists(&[v.as_str()], phi.clone())
                } else {
                    Formula::forall(&[v.as_str()], phi.clone())
                };
                keep(q, &mut level);
            }
        }
        let below: Vec<&Formula> = levels.iter().flatten().collect();
        let start = below.len() - levels[d - 1].len();
        for j in start..below.len() {
            for i in 0..below.len() {
                if i >= start && i >= j {
                    continue;
                }
                let (a, b) = if i < j { (below[i], below[j]) } else { (below[j], below[i]) };
                if existential && free_set(a) != free_set(b) {
                    continue;
                }
                let phi =
                    if existential { Formula::or(a.clone(), b.clone()) } else { Formula::and(a.clone(), b.clone()) };
                keep(phi, &mut level);
            }
        }
        levels.push(level);
    }
    levels.into_iter().flatten().filter(|phi| !phi.is_sentence()).collect()
}

/// Positive existential queries: atoms, disjunction, `exists`.
pub fn positive_existential_formulas(schema: &Schema, depth: usize) -> Vec<Formula> {
    generate(schema, depth, true)
}

/// Positive universal queries: atoms, conjunction, `forall`.
pub fn positive_universal_formulas(schema: &Schema, depth: usize) -> Vec<Formula> {
    generate(schema, depth, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FragmentProperty {
    /// Union of instances, union of answers: equal.
    ExistentialUnion,
    /// Intersection of answers is contained in the answers on the intersection.
    UniversalIntersection,
    /// Answers on the union are contained in the union of answers.
    ExistentialGrounded,
}

#[derive(Clone, Debug, Serialize)]
pub struct FragmentReport {
    pub property: FragmentProperty,
    pub schema: Schema,
    pub bounds: Bounds,
    pub n: usize,
    pub depth: usize,
    pub formulas: usize,
    pub profiles: u64,
    pub checks: u64,
    pub violations: u64,
    /// Cases where the inclusion holds strictly.
    pub strict: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<CommutationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_strict: Option<CommutationReport>,
    /// The stored example profile, evaluated with the same property.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinned: Option<CommutationReport>,
}

impl FragmentReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Answer sets as bit masks over `carrier^arity`.
struct AnswerTable {
    index: HashMap<Element, usize>,
    d: usize,
}

impl AnswerTable {
    fn encode(&self, a: &Answers) -> u128 {
        a.tuples().iter().fold(0u128, |acc, t| {
            let pos = t.iter().rev().fold(0usize, |p, e| p * self.d + self.index[e]);
            acc | 1 << pos
        })
    }
}

struct FormulaOutcome {
    violations: u64,
    strict: u64,
    first_violation: Option<u64>,
    first_strict: Option<u64>,
}

fn run_suite(
    property: FragmentProperty,
    formulas: &[Formula],
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
    depth: usize,
) -> Result<FragmentReport> {
    let bounds = bounds.clone().with_agents(n)?;
    let ps = ProfileSpace::new(schema, &bounds, n, |_| Ok(true))?;
    let space: &AtomSpace = &ps.space;
    let d = space.carrier().len();
    if d.checked_pow(QUERY_VARIABLES.len() as u32).is_none_or(|c| c > 128) {
        return Err(Error::Parameter(format!("answer sets over {d} elements do not fit the suite encoding")));
    }
    let table = AnswerTable { index: space.carrier().iter().cloned().enumerate().map(|(i, e)| (e, i)).collect(), d };
    let combine = |masks: &[u128]| match property {
        FragmentProperty::UniversalIntersection => masks.iter().fold(u128::MAX, |a, m| a & m),
        _ => masks.iter().fold(0, |a, m| a | m),
    };
    let combined: Vec<u128> = (0..ps.count()).into_par_iter().map(|p| combine(&ps.profile_masks(p))).collect();
    let needed: Vec<u128> = ps.masks.iter().chain(&combined).copied().collect::<BTreeSet<_>>().into_iter().collect();
    bounds.check_ceiling(needed.len() as u128 * formulas.len() as u128)?;
    let instances: Vec<Instance> = needed.iter().map(|&m| space.decode(m)).collect();
    let slot: HashMap<u128, usize> = needed.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let outcomes: Vec<FormulaOutcome> = formulas
        .par_iter()
        .map(|phi| {
            let answers: Vec<u128> =
                instances.iter().map(|inst| answer_free(inst, phi).map(|a| table.encode(&a))).collect::<Result<_>>()?;
            let mut out = FormulaOutcome { violations: 0, strict: 0, first_violation: None, first_strict: None };
            for p in 0..ps.count() {
                let digits = ps.digits(p);
                let agent = digits.iter().map(|&k| answers[slot[&ps.masks[k]]]);
                let lhs = answers[slot[&combined[p as usize]]];
                let (bad, strict) = match property {
                    FragmentProperty::ExistentialUnion => (lhs != agent.fold(0, |a, m| a | m), false),
                    FragmentProperty::ExistentialGrounded => {
                        let rhs = agent.fold(0, |a, m| a | m);
                        (lhs & !rhs != 0, lhs != rhs)
                    }
                    FragmentProperty::UniversalIntersection => {
                        let rhs = agent.fold(u128::MAX, |a, m| a & m);
                        (rhs & !lhs != 0, lhs != rhs)
                    }
                };
                if bad {
                    out.violations += 1;
                    out.first_violation.get_or_insert(p);
                } else if strict {
                    out.strict += 1;
                    out.first_strict.get_or_insert(p);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let (rule, star) = match property {
        FragmentProperty::UniversalIntersection => (Aggregator::Intersection, AnswerAggregator::IntersectionStar),
        _ => (Aggregator::Union, AnswerAggregator::UnionStar),
    };
    let report_at = |pick: fn(&FormulaOutcome) -> Option<u64>| -> Result<Option<CommutationReport>> {
        outcomes
            .iter()
            .zip(formulas)
            .find_map(|(o, phi)| pick(o).map(|p| (phi, p)))
            .map(|(phi, p)| check_commutation(&rule, star, phi, &ps.profile(p)))
            .transpose()
    };
    let first_violation = report_at(|o| o.first_violation)?;
    let first_strict = report_at(|o| o.first_strict)?;
    let pinned = match property {
        FragmentProperty::UniversalIntersection => {
            Some(check_commutation(&rule, star, &crate::fo::parse("forall y. P(x, y)")?, &example_universal_profile())?)
        }
        _ => Some(check_commutation(
            &rule,
            star,
            &crate::fo::parse("exists y. P(x, y)")?,
            &example_existential_profile(),
        )?),
    };
    Ok(FragmentReport {
        property,
        schema: (**schema).clone(),
        bounds,
        n,
        depth,
        formulas: formulas.len(),
        profiles: ps.count(),
        checks: ps.count() * formulas.len() as u64,
        violations: outcomes.iter().map(|o| o.violations).sum(),
        strict: outcomes.iter().map(|o| o.strict).sum(),
        first_violation,
        first_strict,
        pinned,
    })
}

/// Union commutes with every generated positive existential query.
pub fn existential_union_experiment(
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
    depth: usize,
) -> Result<FragmentReport> {
    let formulas = positive_existential_formulas(schema, depth);
    run_suite(FragmentProperty::ExistentialUnion, &formulas, schema, bounds, n, depth)
}

/// Intersecting answers never yields more than answering on the intersection
/// for positive universal queries.
pub fn universal_intersection_unanimity_experiment(
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
    depth: usize,
) -> Result<FragmentReport> {
    let formulas = positive_universal_formulas(schema, depth);
    run_suite(FragmentProperty::UniversalIntersection, &formulas, schema, bounds, n, depth)
}

/// Answers on the union of instances come from some instance.
pub fn existential_union_groundedness_experiment(
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
    depth: usize,
) -> Result<FragmentReport> {
    let formulas = positive_existential_formulas(schema, depth);
    run_suite(FragmentProperty::ExistentialGrounded, &formulas, schema, bounds, n, depth)
}
