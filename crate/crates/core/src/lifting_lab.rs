//! Collective rationality within bounds: does an aggregator map profiles of
//! consistent instances to a consistent instance?

use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregators::{majority_quota, Aggregator, QuotaFunction};
use crate::axiom_lab::{check_axiom, Axiom};
use crate::constraints::{Constraint, FunctionalDependency, ReferentialIntegrityConstraint, ValueConstraint};
use crate::error::{Error, Result};
use crate::fo::{self, Formula};
use crate::relational::{Bounds, Element, Instance, Permutation, Profile, Schema, Tuple};
use crate::space::{first_hit, AtomSpace, Outcome, ProfileSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftStatus {
    LiftedWithinBounds,
    Paradox,
}

/// A profile of consistent instances whose aggregate is inconsistent. The
/// satisfaction flags come from evaluating the constraint's first-order
/// translation, not from the native check used during the search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftWitness {
    pub profile: Profile,
    pub aggregate: Instance,
    pub agents_satisfy: Vec<bool>,
    pub aggregate_satisfies: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiftVerdict {
    pub rule: Aggregator,
    pub constraint: Constraint,
    pub status: LiftStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<LiftWitness>,
    /// Consistent profiles examined.
    pub searched: u64,
    pub n: usize,
    pub schema: Schema,
    pub bounds: Bounds,
}

impl LiftVerdict {
    pub fn lifted(&self) -> bool {
        self.status == LiftStatus::LiftedWithinBounds
    }
}

/// Searches the profiles of `n` agents within `bounds` whose instances all
/// satisfy `c` for one whose aggregate violates `c`. The first such profile
/// in canonical order is returned.
pub fn check_lift(
    rule: &Aggregator,
    c: &Constraint,
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
) -> Result<LiftVerdict> {
    search(rule, c, schema, bounds, n, None)
}

type ProfileFilter<'f> = Option<&'f (dyn Fn(&[u128]) -> bool + Sync)>;

fn search(
    rule: &Aggregator,
    c: &Constraint,
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
    filter: ProfileFilter<'_>,
) -> Result<LiftVerdict> {
    c.validate(schema)?;
    rule.validate(schema, n)?;
    let bounds = bounds.clone().with_agents(n)?;
    let ps = ProfileSpace::new(schema, &bounds, n, |d| c.holds(d))?;
    let compiled = rule.compile(&ps.space, n)?;
    let cache = MaskCache::new(&ps.space);
    let admissible = |masks: &[u128]| filter.is_none_or(|f| f(masks));
    let (hit, scanned) = first_hit(ps.count(), |p| {
        let masks = ps.profile_masks(p);
        if !admissible(&masks) {
            return Ok(None);
        }
        let out = compiled.outcome(&masks)?;
        Ok((!cache.holds(&ps.space, &out, c)?).then_some(out))
    })?;
    let searched = match filter {
        None => scanned,
        Some(f) => (0..scanned).into_par_iter().filter(|&p| f(&ps.profile_masks(p))).count() as u64,
    };
    let witness = match hit {
        Some((p, out)) => {
            let w = certify(c, schema, ps.profile(p), ps.space.join(&out))?;
            if w.aggregate != rule.aggregate(&w.profile)? {
                return Err(Error::Eval("compiled rule disagrees with the reference aggregate".into()));
            }
            Some(w)
        }
        None => None,
    };
    Ok(LiftVerdict {
        rule: rule.clone(),
        constraint: c.clone(),
        status: if witness.is_some() { LiftStatus::Paradox } else { LiftStatus::LiftedWithinBounds },
        witness,
        searched,
        n,
        schema: (**schema).clone(),
        bounds,
    })
}

/// Memoised constraint checks for outcomes inside the carrier.
struct MaskCache(Option<Vec<AtomicU8>>);

const CACHED_ATOMS: usize = 20;

impl MaskCache {
    fn new(space: &AtomSpace) -> Self {
        MaskCache((space.len() <= CACHED_ATOMS).then(|| (0..1usize << space.len()).map(|_| AtomicU8::new(0)).collect()))
    }

    fn holds(&self, space: &AtomSpace, out: &Outcome, c: &Constraint) -> Result<bool> {
        match &self.0 {
            Some(table) if out.extra.is_empty() => {
                let slot = &table[out.mask as usize];
                match slot.load(Ordering::Relaxed) {
                    1 => Ok(false),
                    2 => Ok(true),
                    _ => {
                        let h = c.holds(&space.decode(out.mask))?;
                        slot.store(1 + h as u8, Ordering::Relaxed);
                        Ok(h)
                    }
                }
            }
            _ => c.holds(&space.join(out)),
        }
    }
}

fn certify(c: &Constraint, schema: &Schema, profile: Profile, aggregate: Instance) -> Result<LiftWitness> {
    let phi = c.to_formula(schema)?;
    let agents_satisfy = profile.agents().iter().map(|d| fo::is_true(d, &phi)).collect::<Result<Vec<_>>>()?;
    let aggregate_satisfies = fo::is_true(&aggregate, &phi)?;
    if !agents_satisfy.iter().all(|&s| s) || aggregate_satisfies {
        return Err(Error::Eval(format!("lifting witness for {c} does not re-verify")));
    }
    Ok(LiftWitness { profile, aggregate, agents_satisfy, aggregate_satisfies })
}

/// Re-checks a lifting witness from scratch; `true` means it is a paradox.
pub fn replay_lift(rule: &Aggregator, c: &Constraint, witness: &LiftWitness) -> Result<bool> {
    let schema = witness.profile.schema();
    let phi = c.to_formula(schema)?;
    let out = rule.aggregate(&witness.profile)?;
    let agents = witness.profile.agents().iter().map(|d| fo::is_true(d, &phi)).collect::<Result<Vec<_>>>()?;
    Ok(agents.iter().all(|&s| s) && !fo::is_true(&out, &phi)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotaVerdict {
    pub q: usize,
    pub verdict: LiftVerdict,
}

/// Uniform quotas against a functional dependency: lifted iff `q > n/2`.
#[derive(Clone, Debug, Serialize)]
pub struct FdThresholdReport {
    pub fd: FunctionalDependency,
    pub n: usize,
    pub threshold: usize,
    pub verdicts: Vec<QuotaVerdict>,
    pub consistent: bool,
}

pub fn quota_fd_threshold_experiment(
    fd: &FunctionalDependency,
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<FdThresholdReport> {
    let c = Constraint::Fd(fd.clone());
    c.validate(schema)?;
    let verdicts = (1..=n)
        .map(|q| Ok(QuotaVerdict { q, verdict: check_lift(&Aggregator::quota(q), &c, schema, bounds, n)? }))
        .collect::<Result<Vec<_>>>()?;
    let threshold = majority_quota(n);
    let consistent = verdicts.iter().all(|v| v.verdict.lifted() == (2 * v.q > n));
    Ok(FdThresholdReport { fd: fd.clone(), n, threshold, verdicts, consistent })
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleLift {
    pub name: String,
    pub grounded: bool,
    pub verdict: LiftVerdict,
}

/// Grounded rules against a value constraint, on profiles whose agents share
/// the admissible-value relation, plus one non-grounded rule that lifts it.
#[derive(Clone, Debug, Serialize)]
pub struct ValueConstraintReport {
    pub constraint: ValueConstraint,
    pub n: usize,
    pub rules: Vec<RuleLift>,
    pub non_grounded: RuleLift,
    pub consistent: bool,
}

/// A constant rule whose output satisfies `vc` but has tuples no agent needs
/// to hold.
pub fn constant_valid_rule(vc: &ValueConstraint, schema: &Arc<Schema>, bounds: &Bounds) -> Result<Aggregator> {
    let c = Constraint::Value(vc.clone());
    c.validate(schema)?;
    let e = bounds.carrier()[0].clone();
    let arity = schema.arity(&vc.symbol).unwrap_or(0);
    let mut instance = Instance::empty(schema.clone());
    instance.insert(&vc.symbol, Tuple::new(vec![e.clone(); arity]))?;
    instance.insert(&vc.reference, Tuple::new(vec![e]))?;
    debug_assert!(c.holds(&instance)?);
    Ok(Aggregator::Constant { instance })
}

pub fn value_constraint_experiment(
    vc: &ValueConstraint,
    rules: &[Aggregator],
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<ValueConstraintReport> {
    let c = Constraint::Value(vc.clone());
    c.validate(schema)?;
    let space = AtomSpace::new(schema, &bounds.carrier())?;
    let reference = space.symbol_mask(schema.position(&vc.reference).unwrap_or(0));
    let shared = move |masks: &[u128]| masks.iter().all(|m| m & reference == masks[0] & reference);
    let run = |rule: &Aggregator| -> Result<RuleLift> {
        let grounded = check_axiom(rule, Axiom::G, schema, &bounds.clone().with_agents(n)?)?.holds();
        let verdict = search(rule, &c, schema, bounds, n, Some(&shared))?;
        Ok(RuleLift { name: rule.name(), grounded, verdict })
    };
    let rules = rules.iter().map(run).collect::<Result<Vec<_>>>()?;
    let non_grounded = run(&constant_valid_rule(vc, schema, bounds)?)?;
    let consistent = rules.iter().all(|r| !r.grounded || r.verdict.lifted())
        && !non_grounded.grounded
        && non_grounded.verdict.lifted();
    Ok(ValueConstraintReport { constraint: vc.clone(), n, rules, non_grounded, consistent })
}

#[derive(Clone, Debug, Serialize)]
pub struct RicCell {
    pub q_from: usize,
    pub q_to: usize,
    pub verdict: LiftVerdict,
}

/// Quota pairs against a referential integrity constraint: lifted iff the
/// referenced relation has quota 1.
#[derive(Clone, Debug, Serialize)]
pub struct RicReport {
    pub constraint: ReferentialIntegrityConstraint,
    pub n: usize,
    pub cells: Vec<RicCell>,
    /// Cells whose verdict differs from "lifted iff q_to = 1".
    pub deviations: Vec<(usize, usize)>,
    pub consistent: bool,
}

pub fn ric_quota_rule(ric: &ReferentialIntegrityConstraint, q_from: usize, q_to: usize) -> Aggregator {
    Aggregator::Quota(QuotaFunction::uniform(q_from).with_symbol(&ric.from, q_from).with_symbol(&ric.to, q_to))
}

pub fn ric_experiment(
    ric: &ReferentialIntegrityConstraint,
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<RicReport> {
    let c = Constraint::Ric(ric.clone());
    c.validate(schema)?;
    if ric.from == ric.to {
        return Err(Error::Parameter("the referential experiment needs two distinct relations".into()));
    }
    let mut cells = Vec::new();
    for q_to in 1..=n {
        for q_from in 1..=n {
            let verdict = check_lift(&ric_quota_rule(ric, q_from, q_to), &c, schema, bounds, n)?;
            cells.push(RicCell { q_from, q_to, verdict });
        }
    }
    let deviations: Vec<(usize, usize)> = cells
        .iter()
        .filter(|cell| cell.verdict.lifted() != (cell.q_to == 1))
        .map(|cell| (cell.q_from, cell.q_to))
        .collect();
    Ok(RicReport { constraint: ric.clone(), n, consistent: deviations.is_empty(), cells, deviations })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub first: usize,
    pub second: usize,
    pub lifts_first: bool,
    pub lifts_second: bool,
    pub lifts_conjunction: bool,
    /// Lifting both sentences implies lifting their conjunction, so adding
    /// the conjunction to a language does not change what is lifted.
    pub conjunction_consistent: bool,
    /// Lifting the union of the two singleton languages is lifting each.
    pub union_consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub rule: Aggregator,
    pub n: usize,
    pub constraints: Vec<Constraint>,
    pub verdicts: Vec<LiftVerdict>,
    pub pairs: Vec<PairCheck>,
    pub consistent: bool,
}

pub fn conjoin(schema: &Schema, a: &Constraint, b: &Constraint) -> Result<Constraint> {
    Constraint::from_formula(Formula::and(a.to_formula(schema)?, b.to_formula(schema)?))
}

/// Whether `rule` lifts every constraint of a finite language.
pub fn lifts_all(
    rule: &Aggregator,
    language: &[Constraint],
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
) -> Result<bool> {
    for c in language {
        if !check_lift(rule, c, schema, bounds, n)?.lifted() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn closure_property_check(
    rule: &Aggregator,
    phis: &[Constraint],
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
) -> Result<ClosureReport> {
    let verdicts = phis.iter().map(|c| check_lift(rule, c, schema, bounds, n)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for i in 0..phis.len() {
        for j in i + 1..phis.len() {
            let (a, b) = (verdicts[i].lifted(), verdicts[j].lifted());
            let both = conjoin(schema, &phis[i], &phis[j])?;
            let lifts_conjunction = check_lift(rule, &both, schema, bounds, n)?.lifted();
            let union = lifts_all(rule, &[phis[i].clone(), phis[j].clone()], schema, bounds, n)?;
            pairs.push(PairCheck {
                first: i,
                second: j,
                lifts_first: a,
                lifts_second: b,
                lifts_conjunction,
                conjunction_consistent: !(a && b) || lifts_conjunction,
                union_consistent: union == (a && b),
            });
        }
    }
    let consistent = pairs.iter().all(|p| p.conjunction_consistent && p.union_consistent);
    Ok(ClosureReport { rule: rule.clone(), n, constraints: phis.to_vec(), verdicts, pairs, consistent })
}

/// Two different languages over `{P/1}` that every rule in `rules` lifts
/// equally: `{false, true}` and `{false, true, forall x P(x)}`.
#[derive(Clone, Debug, Serialize)]
pub struct NonInjectivityReport {
    pub first: Vec<Constraint>,
    pub second: Vec<Constraint>,
    pub rules: Vec<(String, bool, bool)>,
    pub consistent: bool,
}

pub fn non_injectivity_demo(rules: &[Aggregator], bounds: &Bounds, n: usize) -> Result<NonInjectivityReport> {
    let schema = Schema::shared([("P", 1)])?;
    let first = vec![Constraint::sentence("false")?, Constraint::sentence("true")?];
    let mut second = first.clone();
    second.push(Constraint::sentence("forall x. P(x)")?);
    let rules = rules
        .iter()
        .map(|r| Ok((r.name(), lifts_all(r, &first, &schema, bounds, n)?, lifts_all(r, &second, &schema, bounds, n)?)))
        .collect::<Result<Vec<_>>>()?;
    let consistent = rules.iter().all(|(_, a, b)| a == b);
    Ok(NonInjectivityReport { first, second, rules, consistent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LiteralDirection {
    Plus,
    Minus,
    Both,
}

/// Ground atoms over `con`, one per symbol and tuple.
pub fn ground_atoms(schema: &Schema, con: &[Element]) -> Vec<Formula> {
    schema
        .relations()
        .iter()
        .flat_map(|(p, arity)| {
            crate::relational::tuples_over(con, *arity).into_iter().map(move |t| {
                let names: Vec<&str> = t.iter().map(Element::name).collect();
                Formula::ground(p, &names)
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct LiteralSummary {
    pub literals: usize,
    pub lifted: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_paradox: Option<LiftVerdict>,
}

impl LiteralSummary {
    pub fn all_lifted(&self) -> bool {
        self.lifted == self.literals
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleLiterals {
    pub name: String,
    pub rule: Aggregator,
    pub unanimous: bool,
    pub grounded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive: Option<LiteralSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative: Option<LiteralSummary>,
}

/// Unanimous rules lift positive ground literals and grounded rules lift
/// negative ones. The converses are only asserted when `con` is the whole
/// carrier.
#[derive(Clone, Debug, Serialize)]
pub struct LiteralReport {
    pub direction: LiteralDirection,
    pub con: Vec<Element>,
    pub full_carrier: bool,
    pub n: usize,
    pub rules: Vec<RuleLiterals>,
    pub consistent: bool,
}

pub fn literal_lifting_experiment(
    direction: LiteralDirection,
    con: &[Element],
    rules: &[Aggregator],
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<LiteralReport> {
    let carrier = bounds.carrier();
    if let Some(e) = con.iter().find(|e| !carrier.contains(e)) {
        return Err(Error::Domain(format!("constant {e} is outside the carrier")));
    }
    let full_carrier = carrier.iter().all(|e| con.contains(e));
    let atoms = ground_atoms(schema, con);
    let summarise = |rule: &Aggregator, negate: bool| -> Result<LiteralSummary> {
        let mut summary = LiteralSummary { literals: atoms.len(), lifted: 0, first_paradox: None };
        for atom in &atoms {
            let phi = if negate { Formula::not(atom.clone()) } else { atom.clone() };
            let v = check_lift(rule, &Constraint::from_formula(phi)?, schema, bounds, n)?;
            if v.lifted() {
                summary.lifted += 1;
            } else if summary.first_paradox.is_none() {
                summary.first_paradox = Some(v);
            }
        }
        Ok(summary)
    };
    let axiom_bounds = bounds.clone().with_agents(n)?;
    let mut reports = Vec::new();
    for rule in rules {
        let unanimous = check_axiom(rule, Axiom::U, schema, &axiom_bounds)?.holds();
        let grounded = check_axiom(rule, Axiom::G, schema, &axiom_bounds)?.holds();
        let positive = (direction != LiteralDirection::Minus).then(|| summarise(rule, false)).transpose()?;
        let negative = (direction != LiteralDirection::Plus).then(|| summarise(rule, true)).transpose()?;
        reports.push(RuleLiterals { name: rule.name(), rule: rule.clone(), unanimous, grounded, positive, negative });
    }
    let agrees = |holds: bool, summary: &Option<LiteralSummary>| match summary {
        None => true,
        Some(s) if full_carrier => holds == s.all_lifted(),
        Some(s) => !holds || s.all_lifted(),
    };
    let consistent = reports.iter().all(|r| agrees(r.unanimous, &r.positive) && agrees(r.grounded, &r.negative));
    Ok(LiteralReport { direction, con: con.to_vec(), full_carrier, n, rules: reports, consistent })
}

/// `forall xs, ys. (P(xs) <-> P'(ys))` for distinct relations of equal
/// arity, with disjoint variable lists.
pub fn equivalence_sentences(schema: &Schema) -> Vec<Formula> {
    let rels = schema.relations();
    let mut out = Vec::new();
    for (i, (p, k)) in rels.iter().enumerate() {
        for (q, l) in &rels[i + 1..] {
            if k != l {
                continue;
            }
            let xs: Vec<String> = (1..=*k).map(|j| format!("x{j}")).collect();
            let ys: Vec<String> = (1..=*k).map(|j| format!("y{j}")).collect();
            let x: Vec<&str> = xs.iter().map(String::as_str).collect();
            let y: Vec<&str> = ys.iter().map(String::as_str).collect();
            let both: Vec<&str> = x.iter().chain(&y).copied().collect();
            out.push(Formula::forall(&both, Formula::iff(Formula::atom_vars(p, &x), Formula::atom_vars(q, &y))));
        }
    }
    out
}

/// Quota 1 for the first tuple of the first relation, quota `n` elsewhere.
pub fn tuple_biased_rule(schema: &Schema, bounds: &Bounds, n: usize) -> Aggregator {
    let (p, k) = schema.relations()[0].clone();
    let e = bounds.carrier()[0].clone();
    Aggregator::Quota(QuotaFunction::uniform(n).with_override(&p, Tuple::new(vec![e; k]), 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleEquivalences {
    pub name: String,
    pub rule: Aggregator,
    pub positive_neutral: bool,
    pub lifted: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_paradox: Option<LiftVerdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub n: usize,
    pub sentences: Vec<String>,
    pub rules: Vec<RuleEquivalences>,
    pub biased: RuleEquivalences,
    pub consistent: bool,
}

pub fn equivalence_language_experiment(
    rules: &[Aggregator],
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<EquivalenceReport> {
    let sentences = equivalence_sentences(schema);
    if sentences.is_empty() {
        return Err(Error::Parameter("the schema needs two relations of equal arity".into()));
    }
    if n < 2 {
        return Err(Error::Parameter("the equivalence experiment needs at least two agents".into()));
    }
    let axiom_bounds = bounds.clone().with_agents(n)?;
    let run = |rule: &Aggregator| -> Result<RuleEquivalences> {
        let positive_neutral = check_axiom(rule, Axiom::NPlus, schema, &axiom_bounds)?.holds();
        let mut lifted = 0;
        let mut first_paradox = None;
        for phi in &sentences {
            let v = check_lift(rule, &Constraint::from_formula(phi.clone())?, schema, bounds, n)?;
            if v.lifted() {
                lifted += 1;
            } else if first_paradox.is_none() {
                first_paradox = Some(v);
            }
        }
        Ok(RuleEquivalences { name: rule.name(), rule: rule.clone(), positive_neutral, lifted, first_paradox })
    };
    let rules = rules.iter().map(run).collect::<Result<Vec<_>>>()?;
    let biased = run(&tuple_biased_rule(schema, bounds, n))?;
    let consistent = rules.iter().all(|r| !r.positive_neutral || r.lifted == sentences.len())
        && !biased.positive_neutral
        && biased.first_paradox.is_some();
    Ok(EquivalenceReport {
        n,
        sentences: sentences.iter().map(ToString::to_string).collect(),
        rules,
        biased,
        consistent,
    })
}

/// A profile on which a rule returns none of the agents' instances.
#[derive(Clone, Debug, Serialize)]
pub struct OutsideProfile {
    pub profile: Profile,
    pub aggregate: Instance,
}

/// The rule `rho(D_1)` lifts a battery of constraints yet is not a
/// generalized dictatorship.
#[derive(Clone, Debug, Serialize)]
pub struct GdicReport {
    pub rule: Aggregator,
    pub permutation: Permutation,
    pub example: OutsideProfile,
    pub first_outside: Option<OutsideProfile>,
    pub battery: Vec<LiftVerdict>,
    pub consistent: bool,
}

pub fn default_battery(schema: &Schema) -> Result<Vec<Constraint>> {
    let mut battery = Vec::new();
    for (p, k) in schema.relations() {
        let xs: Vec<String> = (1..=*k).map(|j| format!("x{j}")).collect();
        let x: Vec<&str> = xs.iter().map(String::as_str).collect();
        battery.push(Constraint::from_formula(Formula::forall(
            &x,
            Formula::implies(Formula::atom_vars(p, &x), Formula::atom_vars(p, &x)),
        ))?);
        if *k >= 2 {
            battery.push(Constraint::fd(p, 1));
            battery.push(Constraint::from_formula(Constraint::fd(p, 1).to_formula(schema)?)?);
        }
    }
    Ok(battery)
}

pub fn gdic_strictness_demo(
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
    battery: &[Constraint],
) -> Result<GdicReport> {
    let carrier = bounds.carrier();
    if carrier.len() < 2 {
        return Err(Error::Parameter("a non-identity permutation needs two carrier elements".into()));
    }
    let rho = Permutation::transposition(&carrier, &carrier[0], &carrier[1])?;
    let rule = Aggregator::PermutedDictator { i: 1, permutation: rho.clone() };
    let (p, k) = schema.relations()[0].clone();
    let mut d = Instance::empty(schema.clone());
    d.insert(&p, Tuple::new(vec![carrier[0].clone(); k]))?;
    let profile = Profile::new(vec![d; n])?;
    let example = OutsideProfile { aggregate: rule.aggregate(&profile)?, profile };
    let ps = ProfileSpace::new(schema, &bounds.clone().with_agents(n)?, n, |_| Ok(true))?;
    let (hit, _) = first_hit(ps.count(), |i| {
        let v = ps.profile(i);
        let out = rule.aggregate(&v)?;
        Ok((!v.agents().contains(&out)).then_some(OutsideProfile { profile: v, aggregate: out }))
    })?;
    let first_outside = hit.map(|(_, o)| o);
    let battery = battery.iter().map(|c| check_lift(&rule, c, schema, bounds, n)).collect::<Result<Vec<_>>>()?;
    let consistent = !example.profile.agents().contains(&example.aggregate)
        && first_outside.is_some()
        && battery.iter().all(LiftVerdict::lifted);
    Ok(GdicReport { rule, permutation: rho, example, first_outside, battery, consistent })
}
