//! Aggregation procedures: functions from profiles to a single instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::axiom_lab::Axiom;
use crate::error::{Error, Result};
use crate::relational::{tuples_over, Element, Instance, Permutation, Profile, Schema, Tuple};
use crate::space::{AtomSpace, Outcome};

/// A quota for one tuple of one symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotaOverride {
    #[serde(rename = "P")]
    pub symbol: String,
    pub tuple: Tuple,
    pub q: usize,
}

/// `q_P(u)`: the number of supporters tuple `u` of `P` needs.
///
/// Lookup order is tuple override, then per-symbol default, then the global
/// default. A tuple with quota 0 is accepted without support; for defaults of
/// 0 the accepted tuples are those over the elements of the profile.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotaFunction {
    pub default: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_symbol: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<QuotaOverride>,
}

impl QuotaFunction {
    pub fn uniform(q: usize) -> Self {
        QuotaFunction { default: q, per_symbol: BTreeMap::new(), overrides: Vec::new() }
    }

    pub fn with_symbol(mut self, symbol: &str, q: usize) -> Self {
        self.per_symbol.insert(symbol.to_string(), q);
        self
    }

    pub fn with_override(mut self, symbol: &str, tuple: Tuple, q: usize) -> Self {
        self.overrides.retain(|o| !(o.symbol == symbol && o.tuple == tuple));
        self.overrides.push(QuotaOverride { symbol: symbol.to_string(), tuple, q });
        self
    }

    /// No overrides and one quota for every symbol.
    pub fn is_uniform(&self) -> bool {
        self.overrides.is_empty() && self.per_symbol.values().all(|&q| q == self.default)
    }

    pub fn symbol_default(&self, symbol: &str) -> usize {
        self.per_symbol.get(symbol).copied().unwrap_or(self.default)
    }

    pub fn quota(&self, symbol: &str, tuple: &Tuple) -> usize {
        self.overrides
            .iter()
            .find(|o| o.symbol == symbol && &o.tuple == tuple)
            .map(|o| o.q)
            .unwrap_or_else(|| self.symbol_default(symbol))
    }

    fn quotas(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.default).chain(self.per_symbol.values().copied()).chain(self.overrides.iter().map(|o| o.q))
    }

    pub fn validate(&self, schema: &Schema, n: usize) -> Result<()> {
        if let Some(q) = self.quotas().find(|&q| q > n + 1) {
            return Err(Error::Parameter(format!("quota {q} exceeds n + 1 = {}", n + 1)));
        }
        for symbol in self.per_symbol.keys() {
            if schema.arity(symbol).is_none() {
                return Err(Error::Schema(format!("quota for unknown relation symbol {symbol}")));
            }
        }
        for o in &self.overrides {
            schema.require_arity(&o.symbol, o.tuple.arity())?;
        }
        Ok(())
    }
}

/// Resolution of even-`n` ties in the distance-based rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TiePolicy {
    /// A tuple held by exactly half of the agents is left out.
    #[default]
    ExcludeTies,
}

pub type SelectorFn = Arc<dyn Fn(&Profile) -> usize + Send + Sync>;

/// Picks the agent whose instance a generalised dictatorship copies.
#[derive(Clone, Default)]
pub enum Selector {
    /// The agent minimising the summed symmetric distance to all others;
    /// ties go to the lowest index.
    #[default]
    MostRepresentative,
    /// Any total map from profiles to 1-based agent indices.
    Custom(SelectorFn),
}

impl Selector {
    pub fn select(&self, profile: &Profile) -> usize {
        match self {
            Selector::MostRepresentative => {
                let agents = profile.agents();
                (0..agents.len())
                    .min_by_key(|&i| agents.iter().map(|d| agents[i].symmetric_distance(d)).sum::<usize>())
                    .map(|i| i + 1)
                    .expect("profiles are non-empty")
            }
            Selector::Custom(f) => f(profile),
        }
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::MostRepresentative => f.write_str("MostRepresentative"),
            Selector::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PartialEq for Selector {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Selector::MostRepresentative, Selector::MostRepresentative) => true,
            (Selector::Custom(a), Selector::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl Eq for Selector {}

impl Serialize for Selector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Selector::MostRepresentative => serializer.serialize_str("most-representative"),
            Selector::Custom(_) => Err(serde::ser::Error::custom("custom selectors cannot be serialised")),
        }
    }
}

impl<'de> Deserialize<'de> for Selector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match String::deserialize(deserializer)?.as_str() {
            "most-representative" => Ok(Selector::MostRepresentative),
            other => Err(serde::de::Error::custom(format!("unknown selector {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Aggregator {
    Union,
    Intersection,
    /// Uniform quota `ceil((n+1)/2)`.
    Majority,
    Quota(QuotaFunction),
    /// Tuple-wise minimiser of the summed symmetric distance to the agents.
    Distance {
        #[serde(default)]
        ties: TiePolicy,
    },
    Dictator {
        i: usize,
    },
    /// Intersection of the coalition's instances.
    Oligarchy {
        coalition: Vec<usize>,
    },
    GeneralizedDictatorship {
        #[serde(default)]
        selector: Selector,
    },
    /// Accepts a tuple iff its support is even and non-zero.
    Parity,
    /// Ignores the profile.
    Constant {
        instance: Instance,
    },
    /// `rho(D_i)`.
    PermutedDictator {
        i: usize,
        permutation: Permutation,
    },
}

/// Metadata for a rule: its parameters and the axioms it is expected to
/// satisfy (`claims`) or violate (`fails`). Axioms in neither set carry no
/// expectation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleDescription {
    pub name: String,
    pub parameters: serde_json::Value,
    pub claims: BTreeSet<Axiom>,
    pub fails: BTreeSet<Axiom>,
    pub trivial: bool,
}

pub fn majority_quota(n: usize) -> usize {
    n / 2 + 1
}

fn check_agent(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        return Err(Error::Parameter(format!("agent index {i} outside 1..={n}")));
    }
    Ok(())
}

impl Aggregator {
    pub fn quota(q: usize) -> Self {
        Aggregator::Quota(QuotaFunction::uniform(q))
    }

    pub fn distance() -> Self {
        Aggregator::Distance { ties: TiePolicy::ExcludeTies }
    }

    pub fn dictator(i: usize) -> Self {
        Aggregator::Dictator { i }
    }

    pub fn oligarchy(coalition: &[usize]) -> Self {
        Aggregator::Oligarchy { coalition: coalition.to_vec() }
    }

    pub fn most_representative() -> Self {
        Aggregator::GeneralizedDictatorship { selector: Selector::MostRepresentative }
    }

    pub fn validate(&self, schema: &Schema, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Parameter("a profile needs at least one agent".into()));
        }
        match self {
            Aggregator::Quota(qf) => qf.validate(schema, n),
            Aggregator::Dictator { i } | Aggregator::PermutedDictator { i, .. } => check_agent(*i, n),
            Aggregator::Oligarchy { coalition } => {
                if coalition.is_empty() {
                    return Err(Error::Parameter("an oligarchy needs a non-empty coalition".into()));
                }
                coalition.iter().try_for_each(|&i| check_agent(i, n))
            }
            Aggregator::Constant { instance } => {
                if instance.schema().as_ref() != schema {
                    return Err(Error::Schema("constant instance uses a different schema".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn aggregate(&self, profile: &Profile) -> Result<Instance> {
        let n = profile.n();
        let schema = profile.schema();
        self.validate(schema, n)?;
        match self {
            Aggregator::Union => by_support(profile, |count| count >= 1),
            Aggregator::Intersection => by_support(profile, |count| count == n),
            Aggregator::Majority => quota_aggregate(&QuotaFunction::uniform(majority_quota(n)), profile),
            Aggregator::Quota(qf) => quota_aggregate(qf, profile),
            Aggregator::Distance { ties } => aggregate_distance(profile, *ties),
            Aggregator::Dictator { i } => Ok(profile.agent(*i)?.clone()),
            Aggregator::Oligarchy { coalition } => {
                let mut members = coalition.iter();
                let first = profile.agent(*members.next().expect("validated"))?.clone();
                members.try_fold(first, |acc, &i| acc.intersection(profile.agent(i)?))
            }
            Aggregator::GeneralizedDictatorship { selector } => {
                let i = selector.select(profile);
                check_agent(i, n)?;
                Ok(profile.agent(i)?.clone())
            }
            Aggregator::Parity => by_support(profile, |count| count > 0 && count % 2 == 0),
            Aggregator::Constant { instance } => Ok(instance.clone()),
            Aggregator::PermutedDictator { i, permutation } => profile.agent(*i)?.apply_permutation(permutation),
        }
    }

    /// The rule's name with its parameters.
    pub fn name(&self) -> String {
        match self {
            Aggregator::Union => "union".into(),
            Aggregator::Intersection => "intersection".into(),
            Aggregator::Majority => "majority".into(),
            Aggregator::Quota(qf) if qf.is_uniform() => format!("quota({})", qf.default),
            Aggregator::Quota(qf) => {
                let mut parts = vec![format!("default {}", qf.default)];
                parts.extend(qf.per_symbol.iter().map(|(s, q)| format!("{s}: {q}")));
                parts.extend(qf.overrides.iter().map(|o| format!("{}{:?}: {}", o.symbol, o.tuple, o.q)));
                format!("quota({})", parts.join(", "))
            }
            Aggregator::Distance { .. } => "distance".into(),
            Aggregator::Dictator { i } => format!("dictator({i})"),
            Aggregator::Oligarchy { coalition } => {
                format!("oligarchy({})", coalition.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            }
            Aggregator::GeneralizedDictatorship { selector: Selector::MostRepresentative } => {
                "most-representative".into()
            }
            Aggregator::GeneralizedDictatorship { .. } => "generalized-dictatorship".into(),
            Aggregator::Parity => "parity".into(),
            Aggregator::Constant { .. } => "constant".into(),
            Aggregator::PermutedDictator { i, .. } => format!("permuted-dictator({i})"),
        }
    }

    /// Expected axiom profile independent of the number of agents.
    pub fn describe(&self) -> RuleDescription {
        self.description(None)
    }

    /// Expected axiom profile for `n` agents.
    pub fn describe_at(&self, n: usize) -> RuleDescription {
        self.description(Some(n))
    }

    fn description(&self, n: Option<usize>) -> RuleDescription {
        use Axiom::*;
        let set = |axioms: &[Axiom]| axioms.iter().copied().collect::<BTreeSet<_>>();
        let proper_quota = set(&[U, G, A, I, M, NPlus, S, NPerm]);
        // N- holds for a uniform quota exactly when it is the odd-n majority
        let negative = |q: Option<usize>| match (n, q) {
            (Some(n), Some(q)) if n % 2 == 1 && q == majority_quota(n) => (set(&[NMinus]), set(&[])),
            (Some(_), Some(_)) => (set(&[]), set(&[NMinus])),
            _ => (set(&[]), set(&[])),
        };
        let (mut claims, mut fails, mut trivial) = match self {
            Aggregator::Union => {
                let (c, f) = negative(Some(1));
                (&proper_quota | &c, f, false)
            }
            Aggregator::Intersection => {
                let (c, f) = negative(n);
                (&proper_quota | &c, f, false)
            }
            Aggregator::Majority | Aggregator::Distance { .. } => {
                let (c, f) = negative(n.map(majority_quota));
                let mut claims = &proper_quota | &c;
                if matches!(self, Aggregator::Distance { .. }) {
                    claims.remove(&G);
                }
                (claims, f, false)
            }
            Aggregator::Quota(qf) => quota_description(qf, n, &negative),
            Aggregator::Dictator { .. } => (set(&[U, G, M, NPlus]), set(&[A, NPerm]), false),
            Aggregator::Oligarchy { coalition } => {
                let everyone = n.is_some_and(|n| (1..=n).all(|i| coalition.contains(&i)));
                if everyone {
                    return Aggregator::Intersection.description(n).renamed(self);
                }
                (set(&[U, G, M, NPlus]), set(&[A, NPerm]), false)
            }
            Aggregator::GeneralizedDictatorship { .. } => (set(&[U, G]), set(&[]), false),
            Aggregator::Parity => (set(&[G, A, I, NPlus, S, NPerm]), set(&[M]), false),
            Aggregator::Constant { .. } => (set(&[A, I, M]), set(&[]), false),
            Aggregator::PermutedDictator { .. } => (set(&[]), set(&[]), false),
        };
        if n == Some(1) {
            // with one agent every dictatorship-like rule is anonymous
            if matches!(self, Aggregator::Dictator { .. } | Aggregator::Oligarchy { .. }) {
                fails.remove(&A);
                claims.insert(A);
            }
            if matches!(self, Aggregator::Parity) {
                fails.remove(&M);
            }
        }
        if let (Aggregator::Quota(qf), Some(n)) = (self, n) {
            trivial |= qf.is_uniform() && qf.default == n + 1;
        }
        RuleDescription {
            name: self.name(),
            parameters: serde_json::to_value(self).unwrap_or(serde_json::Value::Null),
            claims,
            fails,
            trivial,
        }
    }

    /// Compiles the rule for repeated evaluation on profiles inside `space`.
    pub fn compile<'a>(&'a self, space: &'a AtomSpace, n: usize) -> Result<CompiledRule<'a>> {
        self.validate(space.schema(), n)?;
        let plan = match self {
            Aggregator::Union => Plan::threshold(space, |_, _| 1),
            Aggregator::Intersection => Plan::threshold(space, |_, _| n),
            Aggregator::Majority | Aggregator::Distance { .. } => Plan::threshold(space, |_, _| majority_quota(n)),
            Aggregator::Quota(qf) => {
                let outside_zero = qf.overrides.iter().any(|o| o.q == 0 && space.atom(&o.symbol, &o.tuple).is_none());
                if outside_zero {
                    Plan::Fallback
                } else {
                    let mut plan = Plan::threshold(space, |symbol, tuple| qf.quota(symbol, tuple));
                    if let Plan::Threshold { zero, always, .. } = &mut plan {
                        for o in qf.overrides.iter().filter(|o| o.q == 0) {
                            let a = space.atom(&o.symbol, &o.tuple).expect("checked above");
                            *zero &= !(1 << a);
                            *always |= 1 << a;
                        }
                    }
                    plan
                }
            }
            Aggregator::Dictator { i } => Plan::Dictator(i - 1),
            Aggregator::Oligarchy { coalition } => Plan::Oligarchy(coalition.iter().map(|i| i - 1).collect()),
            Aggregator::GeneralizedDictatorship { selector: Selector::MostRepresentative } => Plan::MostRepresentative,
            Aggregator::Parity => Plan::Parity,
            _ => Plan::Fallback,
        };
        Ok(CompiledRule { rule: self, plan, space, n })
    }
}

fn quota_description(
    qf: &QuotaFunction,
    n: Option<usize>,
    negative: &dyn Fn(Option<usize>) -> (BTreeSet<Axiom>, BTreeSet<Axiom>),
) -> (BTreeSet<Axiom>, BTreeSet<Axiom>, bool) {
    use Axiom::*;
    let quotas: Vec<usize> = qf.quotas().collect();
    let has_zero = quotas.contains(&0);
    let mut claims = BTreeSet::from([A]);
    let mut fails = BTreeSet::new();
    if !has_zero {
        claims.extend([I, M]);
        claims.insert(G);
    }
    if let Some(n) = n {
        if quotas.iter().all(|&q| q <= n) {
            claims.insert(U);
        } else if qf.is_uniform() {
            fails.insert(U);
        }
    }
    if qf.is_uniform() {
        claims.insert(NPerm);
        if !has_zero {
            claims.extend([NPlus, S]);
            let (c, f) = negative(n.and(Some(qf.default)));
            claims.extend(c);
            fails.extend(f);
        } else {
            fails.insert(G);
        }
    } else if qf.overrides.is_empty() {
        claims.insert(NPerm);
    }
    let trivial = qf.is_uniform() && qf.default == 0;
    (claims, fails, trivial)
}

impl RuleDescription {
    fn renamed(mut self, rule: &Aggregator) -> Self {
        self.name = rule.name();
        self.parameters = serde_json::to_value(rule).unwrap_or(serde_json::Value::Null);
        self
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn support_count(profile: &Profile, symbol: &str, tuple: &Tuple) -> usize {
    profile.agents().iter().filter(|d| d.contains(symbol, tuple)).count()
}

fn candidates(profile: &Profile, symbol: &str) -> Result<BTreeSet<Tuple>> {
    let mut all = BTreeSet::new();
    for d in profile.agents() {
        all.extend(d.relation(symbol)?.iter().cloned());
    }
    Ok(all)
}

/// Keeps, relation by relation, the tuples whose support count passes `accept`.
fn by_support(profile: &Profile, accept: impl Fn(usize) -> bool) -> Result<Instance> {
    let mut out = Instance::empty(profile.schema().clone());
    for (symbol, _) in profile.schema().relations() {
        let kept =
            candidates(profile, symbol)?.into_iter().filter(|t| accept(support_count(profile, symbol, t))).collect();
        out.set_relation(symbol, kept)?;
    }
    Ok(out)
}

fn quota_aggregate(qf: &QuotaFunction, profile: &Profile) -> Result<Instance> {
    let mut out = Instance::empty(profile.schema().clone());
    let domain: Vec<Element> = profile.domain().into_iter().collect();
    for (symbol, arity) in profile.schema().relations() {
        let mut pool = candidates(profile, symbol)?;
        pool.extend(qf.overrides.iter().filter(|o| &o.symbol == symbol).map(|o| o.tuple.clone()));
        if qf.symbol_default(symbol) == 0 {
            pool.extend(tuples_over(&domain, *arity));
        }
        let kept = pool.into_iter().filter(|t| support_count(profile, symbol, t) >= qf.quota(symbol, t)).collect();
        out.set_relation(symbol, kept)?;
    }
    Ok(out)
}

/// The distance-based rule. Summed symmetric distance decomposes over tuples,
/// so each tuple is kept iff more than half of the agents hold it; tuples no
/// agent holds would only add `n` and never occur in a minimiser.
pub fn aggregate_distance(profile: &Profile, ties: TiePolicy) -> Result<Instance> {
    let n = profile.n();
    match ties {
        TiePolicy::ExcludeTies => by_support(profile, |count| 2 * count > n),
    }
}

/// Distance minimisation restricted to instances satisfying a constraint.
pub fn aggregate_constrained_distance(
    _profile: &Profile,
    _constraint: &crate::constraints::Constraint,
) -> Result<Instance> {
    Err(Error::NotImplemented("distance minimisation over consistent instances only".into()))
}

enum Plan {
    /// Per-atom quotas. Atoms in `zero` need no support but must use elements
    /// of the profile; atoms in `always` are accepted unconditionally.
    Threshold {
        quotas: Vec<usize>,
        zero: u128,
        always: u128,
    },
    Dictator(usize),
    Oligarchy(Vec<usize>),
    MostRepresentative,
    Parity,
    Fallback,
}

impl Plan {
    fn threshold(space: &AtomSpace, quota: impl Fn(&str, &Tuple) -> usize) -> Plan {
        let quotas: Vec<usize> = (0..space.len()).map(|a| quota(space.symbol(a), space.tuple(a))).collect();
        let zero = quotas.iter().enumerate().filter(|(_, &q)| q == 0).fold(0u128, |m, (a, _)| m | 1 << a);
        Plan::Threshold { quotas, zero, always: 0 }
    }
}

/// A rule prepared for bit-level evaluation over one [`AtomSpace`].
pub struct CompiledRule<'a> {
    rule: &'a Aggregator,
    plan: Plan,
    space: &'a AtomSpace,
    n: usize,
}

impl CompiledRule<'_> {
    pub fn rule(&self) -> &Aggregator {
        self.rule
    }

    /// Whether evaluation stays at the bit level.
    pub fn is_native(&self) -> bool {
        !matches!(self.plan, Plan::Fallback)
    }

    /// The aggregate of the profile whose agents hold `masks`.
    pub fn outcome(&self, masks: &[u128]) -> Result<Outcome> {
        debug_assert_eq!(masks.len(), self.n);
        let mask = match &self.plan {
            Plan::Threshold { quotas, zero, always } => {
                let mut out = *always;
                let union = masks.iter().fold(0, |acc, m| acc | m);
                let mut rest = union;
                while rest != 0 {
                    let a = rest.trailing_zeros() as usize;
                    let count = masks.iter().filter(|m| *m >> a & 1 == 1).count();
                    if count >= quotas[a] {
                        out |= 1 << a;
                    }
                    rest &= rest - 1;
                }
                if *zero != 0 {
                    let active = self.space.active_elements(union);
                    let mut z = *zero & !union;
                    while z != 0 {
                        let a = z.trailing_zeros() as usize;
                        if self.space.atom_elements(a) & !active == 0 {
                            out |= 1 << a;
                        }
                        z &= z - 1;
                    }
                }
                out
            }
            Plan::Dictator(i) => masks[*i],
            Plan::Oligarchy(members) => members.iter().fold(u128::MAX, |acc, &i| acc & masks[i]),
            Plan::MostRepresentative => {
                let score = |i: usize| masks.iter().map(|m| (masks[i] ^ m).count_ones()).sum::<u32>();
                masks[(0..masks.len()).min_by_key(|&i| score(i)).expect("non-empty")]
            }
            Plan::Parity => {
                let union = masks.iter().fold(0, |acc, m| acc | m);
                let mut out = 0u128;
                let mut rest = union;
                while rest != 0 {
                    let a = rest.trailing_zeros() as usize;
                    if masks.iter().filter(|m| *m >> a & 1 == 1).count() % 2 == 0 {
                        out |= 1 << a;
                    }
                    rest &= rest - 1;
                }
                out
            }
            Plan::Fallback => {
                let profile = Profile::new(masks.iter().map(|&m| self.space.decode(m)).collect())?;
                return Ok(self.space.split(&self.rule.aggregate(&profile)?));
            }
        };
        Ok(Outcome::inside(mask))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{enumerate_instances, Bounds};
    use crate::space::ProfileSpace;
    use itertools::Itertools;

    fn pq() -> Arc<Schema> {
        Schema::shared([("P", 1), ("Q", 2)]).unwrap()
    }

    fn paradox_profile() -> Profile {
        let s = pq();
        Profile::new(vec![
            Instance::from_facts(&s, "P(a), Q(a,b)").unwrap(),
            Instance::from_facts(&s, "P(a), Q(a,c)").unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn majority_on_the_paradox_profile() {
        let out = Aggregator::Majority.aggregate(&paradox_profile()).unwrap();
        assert_eq!(out, Instance::from_facts(&pq(), "P(a)").unwrap());
    }

    #[test]
    fn union_of_example_one() {
        let s = Schema::shared([("P", 2), ("R", 1)]).unwrap();
        let v = Profile::new(vec![
            Instance::from_facts(&s, "P(a,b)").unwrap(),
            Instance::from_facts(&s, "P(a,d)").unwrap(),
        ])
        .unwrap();
        let out = Aggregator::Union.aggregate(&v).unwrap();
        assert_eq!(out, Instance::from_facts(&s, "P(a,b), P(a,d)").unwrap());
    }

    #[test]
    fn majority_quota_values() {
        for (n, q) in [(1, 1), (2, 2), (3, 2), (4, 3), (5, 3)] {
            assert_eq!(majority_quota(n), q);
            assert_eq!(majority_quota(n), (n + 2) / 2);
        }
    }

    fn all_profiles(schema: &Arc<Schema>, d: usize, n: usize) -> Vec<Profile> {
        let ps = ProfileSpace::new(schema, &Bounds::new(d, n).unwrap(), n, |_| Ok(true)).unwrap();
        (0..ps.count()).map(|p| ps.profile(p)).collect()
    }

    #[test]
    fn extensional_identities() {
        let s = Schema::shared([("P", 1), ("Q", 1)]).unwrap();
        for n in 1..=3 {
            for v in all_profiles(&s, 2, n) {
                let union = Aggregator::Union.aggregate(&v).unwrap();
                let inter = Aggregator::Intersection.aggregate(&v).unwrap();
                assert_eq!(Aggregator::quota(1).aggregate(&v).unwrap(), union);
                assert_eq!(Aggregator::quota(n).aggregate(&v).unwrap(), inter);
                let everyone: Vec<usize> = (1..=n).collect();
                assert_eq!(Aggregator::oligarchy(&everyone).aggregate(&v).unwrap(), inter);
                assert_eq!(Aggregator::distance().aggregate(&v).unwrap(), Aggregator::Majority.aggregate(&v).unwrap());
                assert!(Aggregator::quota(n + 1).aggregate(&v).unwrap().is_empty());
            }
        }
    }

    /// Reference distance rule: minimise the summed symmetric distance over
    /// every subset of the candidate tuples, relation by relation, keeping the
    /// smallest minimiser when several tie.
    fn argmin_distance(v: &Profile) -> Instance {
        let mut out = Instance::empty(v.schema().clone());
        for (symbol, _) in v.schema().relations() {
            let pool: Vec<Tuple> = candidates(v, symbol).unwrap().into_iter().collect();
            let cost = |chosen: &BTreeSet<Tuple>| -> usize {
                v.agents().iter().map(|d| d.relation(symbol).unwrap().symmetric_difference(chosen).count()).sum()
            };
            let best = pool
                .iter()
                .cloned()
                .powerset()
                .map(|s| s.into_iter().collect::<BTreeSet<_>>())
                .min_by_key(|s| (cost(s), s.len()))
                .unwrap();
            out.set_relation(symbol, best).unwrap();
        }
        out
    }

    #[test]
    fn distance_matches_brute_force_argmin() {
        let s = Schema::shared([("P", 1), ("Q", 1)]).unwrap();
        for n in 1..=4 {
            for v in all_profiles(&s, 2, n) {
                assert_eq!(aggregate_distance(&v, TiePolicy::ExcludeTies).unwrap(), argmin_distance(&v), "{v:?}");
            }
        }
    }

    #[test]
    fn distance_examples() {
        let s = Schema::shared([("P", 2)]).unwrap();
        let v = Profile::new(vec![
            Instance::from_facts(&s, "P(a,b)").unwrap(),
            Instance::from_facts(&s, "P(a,b), P(c,c)").unwrap(),
            Instance::from_facts(&s, "P(c,d)").unwrap(),
        ])
        .unwrap();
        assert!(aggregate_distance(&v, TiePolicy::ExcludeTies).unwrap().contains("P", &Tuple::from_names(&["a", "b"])));
        let tie = Profile::new(vec![Instance::from_facts(&s, "P(a,b)").unwrap(), Instance::empty(s.clone())]).unwrap();
        assert!(aggregate_distance(&tie, TiePolicy::ExcludeTies).unwrap().is_empty());
    }

    #[test]
    fn outputs_are_grounded() {
        let s = Schema::shared([("P", 1), ("Q", 1)]).unwrap();
        let rules = [
            Aggregator::Union,
            Aggregator::Intersection,
            Aggregator::Majority,
            Aggregator::distance(),
            Aggregator::quota(2),
            Aggregator::dictator(2),
            Aggregator::oligarchy(&[1, 3]),
            Aggregator::most_representative(),
            Aggregator::Parity,
        ];
        for v in all_profiles(&s, 2, 3) {
            let union = Aggregator::Union.aggregate(&v).unwrap();
            for rule in &rules {
                assert!(rule.aggregate(&v).unwrap().is_subinstance_of(&union), "{rule} on {v:?}");
            }
        }
    }

    #[test]
    fn zero_quota_accepts_tuples_over_the_profile_domain() {
        let s = Schema::shared([("P", 1), ("Q", 1)]).unwrap();
        let v = Profile::new(vec![Instance::from_facts(&s, "P(a), Q(b)").unwrap()]).unwrap();
        let out = Aggregator::quota(0).aggregate(&v).unwrap();
        assert_eq!(out, Instance::from_facts(&s, "P(a), P(b), Q(a), Q(b)").unwrap());
        let rule = Aggregator::Quota(QuotaFunction::uniform(1).with_override("P", Tuple::from_names(&["z"]), 0));
        assert!(rule.aggregate(&v).unwrap().contains("P", &Tuple::from_names(&["z"])));
    }

    #[test]
    fn quota_lookup_order() {
        let qf = QuotaFunction::uniform(2).with_symbol("Q", 3).with_override("Q", Tuple::from_names(&["a"]), 1);
        assert!(!qf.is_uniform());
        assert_eq!(qf.quota("P", &Tuple::from_names(&["a"])), 2);
        assert_eq!(qf.quota("Q", &Tuple::from_names(&["b"])), 3);
        assert_eq!(qf.quota("Q", &Tuple::from_names(&["a"])), 1);
        assert!(QuotaFunction::uniform(2).with_symbol("P", 2).is_uniform());
    }

    #[test]
    fn parameter_errors() {
        let v = paradox_profile();
        assert!(Aggregator::dictator(3).aggregate(&v).is_err());
        assert!(Aggregator::dictator(0).aggregate(&v).is_err());
        assert!(Aggregator::oligarchy(&[]).aggregate(&v).is_err());
        assert!(Aggregator::quota(4).aggregate(&v).is_err());
        assert!(Aggregator::quota(3).aggregate(&v).is_ok());
        let bad = Aggregator::Quota(QuotaFunction::uniform(1).with_symbol("Z", 1));
        assert!(bad.aggregate(&v).is_err());
        assert!(matches!(
            aggregate_constrained_distance(&v, &crate::constraints::Constraint::fd("Q", 1)),
            Err(Error::NotImplemented(_))
        ));
    }

    #[test]
    fn permutation_equivariance_of_anonymous_rules() {
        let s = Schema::shared([("P", 1), ("Q", 1)]).unwrap();
        let carrier = Bounds::new(2, 1).unwrap().carrier();
        let rho = Permutation::transposition(&carrier, &carrier[0], &carrier[1]).unwrap();
        let rules = [
            Aggregator::Union,
            Aggregator::Intersection,
            Aggregator::Majority,
            Aggregator::quota(2),
            Aggregator::distance(),
        ];
        for v in all_profiles(&s, 2, 3) {
            let image = v.apply_permutation(&rho).unwrap();
            for rule in &rules {
                assert_eq!(
                    rule.aggregate(&image).unwrap(),
                    rule.aggregate(&v).unwrap().apply_permutation(&rho).unwrap()
                );
            }
        }
    }

    #[test]
    fn most_representative_picks_the_median_voter() {
        let s = Schema::shared([("P", 1)]).unwrap();
        let v = Profile::new(vec![
            Instance::from_facts(&s, "P(a), P(b), P(c)").unwrap(),
            Instance::from_facts(&s, "P(a), P(b)").unwrap(),
            Instance::from_facts(&s, "P(a)").unwrap(),
        ])
        .unwrap();
        assert_eq!(Selector::MostRepresentative.select(&v), 2);
        let last: SelectorFn = Arc::new(|p: &Profile| p.n());
        let rule = Aggregator::GeneralizedDictatorship { selector: Selector::Custom(last) };
        assert_eq!(rule.aggregate(&v).unwrap(), v.agent(3).unwrap().clone());
        assert!(serde_json::to_string(&rule).is_err());
    }

    #[test]
    fn compiled_rules_agree_with_aggregate() {
        let s = pq();
        let b = Bounds::new(2, 2).unwrap().with_max_tuples(2).unwrap();
        let space = AtomSpace::new(&s, &b.carrier()).unwrap();
        let instances: Vec<Instance> = enumerate_instances(&s, &b).unwrap().step_by(5).collect();
        let e0 = Tuple::from_names(&["e0"]);
        let rules = [
            Aggregator::Union,
            Aggregator::Intersection,
            Aggregator::Majority,
            Aggregator::distance(),
            Aggregator::quota(0),
            Aggregator::quota(3),
            Aggregator::Quota(QuotaFunction::uniform(2).with_symbol("Q", 0).with_override("P", e0.clone(), 1)),
            Aggregator::Quota(QuotaFunction::uniform(1).with_override("P", Tuple::from_names(&["zz"]), 0)),
            Aggregator::dictator(2),
            Aggregator::oligarchy(&[1, 2]),
            Aggregator::most_representative(),
            Aggregator::Parity,
            Aggregator::Constant { instance: Instance::from_facts(&s, "P(zz)").unwrap() },
        ];
        for rule in &rules {
            let compiled = rule.compile(&space, 2).unwrap();
            for pair in instances.iter().cartesian_product(instances.iter()) {
                let v = Profile::new(vec![pair.0.clone(), pair.1.clone()]).unwrap();
                let masks: Vec<u128> = v.agents().iter().map(|d| space.encode(d).unwrap()).collect();
                let fast = space.join(&compiled.outcome(&masks).unwrap());
                assert_eq!(fast, rule.aggregate(&v).unwrap(), "{rule} on {v:?}");
            }
        }
    }

    #[test]
    fn json_formats() {
        let cases = [
            r#"{"rule":"union"}"#,
            r#"{"rule":"majority"}"#,
            r#"{"rule":"quota","default":2,"overrides":[{"P":"P","tuple":["a","b"],"q":1}]}"#,
            r#"{"rule":"distance","ties":"EXCLUDE_TIES"}"#,
            r#"{"rule":"dictator","i":1}"#,
            r#"{"rule":"oligarchy","coalition":[1,3]}"#,
            r#"{"rule":"generalized-dictatorship","selector":"most-representative"}"#,
            r#"{"rule":"parity"}"#,
        ];
        for text in cases {
            let rule: Aggregator = serde_json::from_str(text).unwrap();
            assert_eq!(serde_json::to_string(&rule).unwrap(), text);
        }
        let short: Aggregator = serde_json::from_str(r#"{"rule":"distance"}"#).unwrap();
        assert_eq!(short, Aggregator::distance());
    }

    #[test]
    fn described_claims() {
        use Axiom::*;
        let union = Aggregator::Union.describe();
        assert!(union.claims.is_superset(&BTreeSet::from([U, G, A, I, M, NPlus, NPerm])));
        let dictator = Aggregator::dictator(1).describe();
        assert!(dictator.fails.contains(&A) && dictator.fails.contains(&NPerm));
        assert!(!dictator.claims.contains(&A) && !dictator.claims.contains(&NPerm));
        assert!(Aggregator::quota(0).describe().trivial);
        assert!(Aggregator::quota(4).describe_at(3).trivial);
        assert!(Aggregator::Majority.describe_at(3).claims.contains(&NMinus));
        assert!(Aggregator::Majority.describe_at(4).fails.contains(&NMinus));
        assert!(Aggregator::quota(1).describe_at(3).fails.contains(&NMinus));
        assert!(!Aggregator::distance().describe().claims.contains(&G));
    }
}
