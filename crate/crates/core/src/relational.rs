//! Schemas, domain elements, instances and profiles.
//!
//! An [`Instance`] maps every relation symbol of its [`Schema`] to a finite set of
//! tuples. A [`Profile`] is the ordered list of instances submitted by agents
//! `1..=n`. Elements are opaque names; two elements are equal iff their names are.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use itertools::Itertools;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ceiling on the number of cases any bounded search may visit unless the
/// caller raises it.
pub const DEFAULT_CEILING: u64 = 200_000_000;

/// A named domain element.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(Arc<str>);

impl Element {
    pub fn new(name: impl AsRef<str>) -> Self {
        Element(Arc::from(name.as_ref()))
    }

    /// Checked constructor used for external input.
    pub fn parse(name: &str) -> Result<Self> {
        if name.chars().any(char::is_control) {
            return Err(Error::Domain(format!("element name {name:?} contains control characters")));
        }
        Ok(Element::new(name))
    }

    /// The `index`-th canonical enumeration element, `e{index}`.
    pub fn canonical(index: usize) -> Self {
        Element::new(format!("e{index}"))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Element {
    fn from(name: &str) -> Self {
        Element::new(name)
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let name = String::deserialize(deserializer)?;
        Element::parse(&name).map_err(de::Error::custom)
    }
}

/// An ordered tuple of elements.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple(Vec<Element>);

impl Tuple {
    pub fn new(elements: Vec<Element>) -> Self {
        Tuple(elements)
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Self {
        Tuple(names.iter().map(Element::new).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<Element> {
        self.0
    }
}

impl Deref for Tuple {
    type Target = [Element];

    fn deref(&self) -> &[Element] {
        &self.0
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().join(","))
    }
}

impl std::borrow::Borrow<[Element]> for Tuple {
    fn borrow(&self) -> &[Element] {
        &self.0
    }
}

impl FromIterator<Element> for Tuple {
    fn from_iter<I: IntoIterator<Item = Element>>(iter: I) -> Self {
        Tuple(iter.into_iter().collect())
    }
}

/// A finite list of relation symbols with their arities, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Schema {
    relations: Vec<(String, usize)>,
}

impl Schema {
    pub fn new<S: Into<String>>(decls: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let relations: Vec<(String, usize)> = decls.into_iter().map(|(s, a)| (s.into(), a)).collect();
        if relations.is_empty() {
            return Err(Error::Schema("a schema needs at least one relation symbol".into()));
        }
        let mut seen = BTreeSet::new();
        for (name, arity) in &relations {
            if !is_identifier(name) {
                return Err(Error::Schema(format!("invalid relation symbol {name:?}")));
            }
            if *arity == 0 {
                return Err(Error::Schema(format!("relation {name} has arity 0")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("relation {name} declared twice")));
            }
        }
        Ok(Schema { relations })
    }

    /// Convenience constructor returning a shared schema.
    pub fn shared<S: Into<String>>(decls: impl IntoIterator<Item = (S, usize)>) -> Result<Arc<Self>> {
        Schema::new(decls).map(Arc::new)
    }

    pub fn arity(&self, symbol: &str) -> Option<usize> {
        self.relations.iter().find(|(name, _)| name == symbol).map(|(_, arity)| *arity)
    }

    pub fn position(&self, symbol: &str) -> Option<usize> {
        self.relations.iter().position(|(name, _)| name == symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(|(name, _)| name.as_str())
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub(crate) fn require_arity(&self, symbol: &str, arity: usize) -> Result<()> {
        match self.arity(symbol) {
            None => Err(Error::Schema(format!("unknown relation symbol {symbol}"))),
            Some(expected) if expected != arity => {
                Err(Error::Schema(format!("relation {symbol} has arity {expected}, got a tuple of length {arity}")))
            }
            Some(_) => Ok(()),
        }
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Serialize for Schema {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.relations.len()))?;
        for (name, arity) in &self.relations {
            map.serialize_entry(name, arity)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Schema {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = serde_json::Map::deserialize(deserializer)?;
        let mut decls = Vec::with_capacity(raw.len());
        for (name, arity) in raw {
            let arity =
                arity.as_u64().ok_or_else(|| de::Error::custom(format!("arity of {name} must be an integer")))?;
            decls.push((name, arity as usize));
        }
        Schema::new(decls).map_err(de::Error::custom)
    }
}

/// A finite relational structure over a schema.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    schema: Arc<Schema>,
    relations: BTreeMap<String, BTreeSet<Tuple>>,
}

impl Instance {
    /// The instance interpreting every symbol as the empty relation.
    pub fn empty(schema: Arc<Schema>) -> Self {
        let relations = schema.symbols().map(|s| (s.to_string(), BTreeSet::new())).collect();
        Instance { schema, relations }
    }

    /// Parses a whitespace/comma separated list of ground facts such as
    /// `P(a,b), R(c)`.
    pub fn from_facts(schema: &Arc<Schema>, facts: &str) -> Result<Self> {
        let mut instance = Instance::empty(schema.clone());
        let mut rest = facts.trim();
        while !rest.is_empty() {
            let open = rest.find('(').ok_or_else(|| Error::Schema(format!("malformed fact list near {rest:?}")))?;
            let close = rest[open..]
                .find(')')
                .map(|c| c + open)
                .ok_or_else(|| Error::Schema(format!("unclosed fact near {rest:?}")))?;
            let symbol = rest[..open].trim();
            let args: Vec<Element> =
                rest[open + 1..close].split(',').map(|a| Element::parse(a.trim())).collect::<Result<_>>()?;
            instance.insert(symbol, Tuple::new(args))?;
            rest = rest[close + 1..].trim_start_matches(|c: char| c == ',' || c.is_whitespace());
        }
        Ok(instance)
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    /// Adds a tuple; returns whether it was new.
    pub fn insert(&mut self, symbol: &str, tuple: Tuple) -> Result<bool> {
        self.schema.require_arity(symbol, tuple.arity())?;
        Ok(self.relations.get_mut(symbol).expect("every schema symbol is present").insert(tuple))
    }

    pub fn remove(&mut self, symbol: &str, tuple: &Tuple) -> Result<bool> {
        self.schema.require_arity(symbol, tuple.arity())?;
        Ok(self.relations.get_mut(symbol).expect("every schema symbol is present").remove(tuple))
    }

    /// Replaces the whole relation for `symbol`.
    pub fn set_relation(&mut self, symbol: &str, tuples: BTreeSet<Tuple>) -> Result<()> {
        let arity =
            self.schema.arity(symbol).ok_or_else(|| Error::Schema(format!("unknown relation symbol {symbol}")))?;
        if let Some(bad) = tuples.iter().find(|t| t.arity() != arity) {
            return Err(Error::Schema(format!("relation {symbol} has arity {arity}, got tuple {bad:?}")));
        }
        self.relations.insert(symbol.to_string(), tuples);
        Ok(())
    }

    pub fn relation(&self, symbol: &str) -> Result<&BTreeSet<Tuple>> {
        self.relations.get(symbol).ok_or_else(|| Error::Schema(format!("unknown relation symbol {symbol}")))
    }

    /// Membership test; unknown symbols are simply absent.
    pub fn contains(&self, symbol: &str, tuple: &[Element]) -> bool {
        self.relations.get(symbol).is_some_and(|rel| rel.contains(tuple))
    }

    pub(crate) fn contains_tuple(&self, symbol: &str, tuple: &Tuple) -> bool {
        self.relations.get(symbol).is_some_and(|rel| rel.contains(tuple))
    }

    /// Relations in schema declaration order.
    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<Tuple>)> {
        self.schema.symbols().map(move |s| (s, &self.relations[s]))
    }

    /// Every element occurring in some tuple of some relation.
    pub fn active_domain(&self) -> BTreeSet<Element> {
        self.relations.values().flat_map(|rel| rel.iter().flat_map(|t| t.iter().cloned())).collect()
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.values().all(BTreeSet::is_empty)
    }

    /// Number of (symbol, tuple) facts in exactly one of the two instances.
    pub fn symmetric_distance(&self, other: &Instance) -> usize {
        self.relations.iter().map(|(s, rel)| rel.symmetric_difference(&other.relations[s]).count()).sum()
    }

    /// Relation-wise intersection.
    pub fn intersection(&self, other: &Instance) -> Result<Instance> {
        self.check_same_schema(other)?;
        let relations = self
            .relations
            .iter()
            .map(|(s, rel)| (s.clone(), rel.intersection(&other.relations[s]).cloned().collect()))
            .collect();
        Ok(Instance { schema: self.schema.clone(), relations })
    }

    /// Relation-wise union.
    pub fn union(&self, other: &Instance) -> Result<Instance> {
        self.check_same_schema(other)?;
        let relations = self
            .relations
            .iter()
            .map(|(s, rel)| (s.clone(), rel.union(&other.relations[s]).cloned().collect()))
            .collect();
        Ok(Instance { schema: self.schema.clone(), relations })
    }

    /// Whether every fact of `self` is a fact of `other`.
    pub fn is_subinstance_of(&self, other: &Instance) -> bool {
        self.relations.iter().all(|(s, rel)| other.relations.get(s).is_some_and(|o| rel.is_subset(o)))
    }

    /// Image of the instance under an element permutation.
    pub fn apply_permutation(&self, rho: &Permutation) -> Result<Instance> {
        let mut relations = BTreeMap::new();
        for (symbol, rel) in &self.relations {
            let image = rel.iter().map(|t| rho.apply_tuple(t)).collect::<Result<BTreeSet<_>>>()?;
            relations.insert(symbol.clone(), image);
        }
        Ok(Instance { schema: self.schema.clone(), relations })
    }

    /// Image under `rho` extended by the identity outside its carrier.
    pub fn rename(&self, rho: &Permutation) -> Instance {
        let relations = self
            .relations
            .iter()
            .map(|(symbol, rel)| {
                let image = rel.iter().map(|t| t.iter().map(|e| rho.image(e)).collect()).collect();
                (symbol.clone(), image)
            })
            .collect();
        Instance { schema: self.schema.clone(), relations }
    }

    fn check_same_schema(&self, other: &Instance) -> Result<()> {
        if self.schema != other.schema {
            return Err(Error::Schema("instances are over different schemas".into()));
        }
        Ok(())
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let facts = self.relations().flat_map(|(s, rel)| rel.iter().map(move |t| format!("{s}{t:?}"))).join(", ");
        write!(f, "{{{facts}}}")
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    schema: Schema,
    #[serde(default)]
    relations: serde_json::Map<String, serde_json::Value>,
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut relations = serde_json::Map::new();
        for (symbol, rel) in self.relations() {
            let value = serde_json::to_value(rel).map_err(serde::ser::Error::custom)?;
            relations.insert(symbol.to_string(), value);
        }
        RawInstance { schema: (*self.schema).clone(), relations }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawInstance::deserialize(deserializer)?;
        let mut instance = Instance::empty(Arc::new(raw.schema));
        for (symbol, value) in raw.relations {
            let tuples: Vec<Tuple> = serde_json::from_value(value).map_err(de::Error::custom)?;
            for t in tuples {
                instance.insert(&symbol, t).map_err(de::Error::custom)?;
            }
        }
        Ok(instance)
    }
}

/// The instances of agents `1..=n`, all over one schema.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Profile {
    agents: Vec<Instance>,
}

impl Profile {
    pub fn new(agents: Vec<Instance>) -> Result<Self> {
        let first = agents.first().ok_or_else(|| Error::Parameter("a profile needs at least one agent".into()))?;
        if agents.iter().any(|d| d.schema != first.schema) {
            return Err(Error::Schema("profile instances are over different schemas".into()));
        }
        Ok(Profile { agents })
    }

    /// Number of agents.
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.agents[0].schema
    }

    pub fn agents(&self) -> &[Instance] {
        &self.agents
    }

    /// The instance of agent `i` (1-based).
    pub fn agent(&self, i: usize) -> Result<&Instance> {
        i.checked_sub(1)
            .and_then(|k| self.agents.get(k))
            .ok_or_else(|| Error::Parameter(format!("agent {i} is not in 1..={}", self.n())))
    }

    /// Agents whose instance contains `tuple` in relation `symbol`.
    pub fn support(&self, symbol: &str, tuple: &Tuple) -> Result<BTreeSet<usize>> {
        self.schema().require_arity(symbol, tuple.arity())?;
        Ok(self
            .agents
            .iter()
            .enumerate()
            .filter(|(_, d)| d.contains_tuple(symbol, tuple))
            .map(|(k, _)| k + 1)
            .collect())
    }

    /// Union of the agents' active domains.
    pub fn domain(&self) -> BTreeSet<Element> {
        self.agents.iter().flat_map(Instance::active_domain).collect()
    }

    /// The profile `(D_{pi(1)}, ..., D_{pi(n)})` for a 1-based agent permutation.
    pub fn permute_agents(&self, pi: &[usize]) -> Result<Profile> {
        let n = self.n();
        let distinct: BTreeSet<_> = pi.iter().copied().collect();
        if pi.len() != n || distinct.len() != n || distinct.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::Parameter(format!("{pi:?} is not a permutation of 1..={n}")));
        }
        Ok(Profile { agents: pi.iter().map(|&i| self.agents[i - 1].clone()).collect() })
    }

    /// Agent-wise image under an element permutation.
    pub fn apply_permutation(&self, rho: &Permutation) -> Result<Profile> {
        Ok(Profile { agents: self.agents.iter().map(|d| d.apply_permutation(rho)).collect::<Result<_>>()? })
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.agents).finish()
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            agents: Vec<Instance>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Profile::new(raw.agents).map_err(de::Error::custom)
    }
}

/// A bijection on a finite set of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: BTreeMap<Element, Element>,
}

impl Permutation {
    pub fn new(pairs: impl IntoIterator<Item = (Element, Element)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (from, to) in pairs {
            if map.insert(from.clone(), to).is_some() {
                return Err(Error::Domain(format!("{from} is mapped twice")));
            }
        }
        let domain: BTreeSet<&Element> = map.keys().collect();
        let image: BTreeSet<&Element> = map.values().collect();
        if domain != image {
            return Err(Error::Domain("permutation is not a bijection on its carrier".into()));
        }
        Ok(Permutation { map })
    }

    pub fn identity(carrier: impl IntoIterator<Item = Element>) -> Self {
        Permutation { map: carrier.into_iter().map(|e| (e.clone(), e)).collect() }
    }

    /// Swaps `a` and `b` and fixes the rest of `carrier`.
    pub fn transposition(carrier: &[Element], a: &Element, b: &Element) -> Result<Self> {
        Permutation::new(carrier.iter().map(|e| {
            let image = if e == a {
                b.clone()
            } else if e == b {
                a.clone()
            } else {
                e.clone()
            };
            (e.clone(), image)
        }))
    }

    /// All permutations of `carrier`, identity first.
    pub fn all(carrier: &[Element]) -> Vec<Permutation> {
        let k = carrier.len();
        (0..k)
            .permutations(k)
            .map(|perm| Permutation {
                map: carrier.iter().cloned().zip(perm.into_iter().map(|j| carrier[j].clone())).collect(),
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    pub fn apply(&self, e: &Element) -> Result<Element> {
        self.map.get(e).cloned().ok_or_else(|| Error::Domain(format!("permutation is undefined on {e}")))
    }

    /// Like [`Permutation::apply`], but fixes elements outside the carrier.
    pub fn image(&self, e: &Element) -> Element {
        self.map.get(e).cloned().unwrap_or_else(|| e.clone())
    }

    pub fn apply_tuple(&self, t: &Tuple) -> Result<Tuple> {
        t.iter().map(|e| self.apply(e)).collect()
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Element, &Element)> {
        self.map.iter()
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.map.iter().map(|(a, b)| [a, b]))
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs: Vec<(Element, Element)> = Vec::deserialize(deserializer)?;
        Permutation::new(pairs).map_err(de::Error::custom)
    }
}

/// Limits of a bounded search space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub domain_size: usize,
    pub max_agents: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tuples_per_relation: Option<usize>,
    #[serde(default = "default_ceiling")]
    pub ceiling: u64,
    /// Carrier names; defaults to `e0, e1, ...`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Element>>,
}

fn default_ceiling() -> u64 {
    DEFAULT_CEILING
}

impl Bounds {
    pub fn new(domain_size: usize, max_agents: usize) -> Result<Self> {
        let bounds =
            Bounds { domain_size, max_agents, max_tuples_per_relation: None, ceiling: DEFAULT_CEILING, elements: None };
        bounds.validate()?;
        Ok(bounds)
    }

    pub fn with_max_tuples(mut self, cap: usize) -> Result<Self> {
        self.max_tuples_per_relation = Some(cap);
        self.validate()?;
        Ok(self)
    }

    pub fn with_ceiling(mut self, ceiling: u64) -> Self {
        self.ceiling = ceiling;
        self
    }

    /// Uses the given names as carrier; the domain size becomes their count.
    pub fn with_elements<S: AsRef<str>>(mut self, names: &[S]) -> Result<Self> {
        let elements: Vec<Element> = names.iter().map(|n| Element::parse(n.as_ref())).collect::<Result<_>>()?;
        if elements.iter().collect::<BTreeSet<_>>().len() != elements.len() {
            return Err(Error::Parameter("carrier names must be distinct".into()));
        }
        self.domain_size = elements.len();
        self.elements = Some(elements);
        self.validate()?;
        Ok(self)
    }

    pub fn with_agents(mut self, n: usize) -> Result<Self> {
        self.max_agents = n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain_size == 0 || self.max_agents == 0 {
            return Err(Error::Parameter("bounds must be at least 1".into()));
        }
        if self.max_tuples_per_relation == Some(0) {
            return Err(Error::Parameter("max tuples per relation must be at least 1".into()));
        }
        if let Some(elements) = &self.elements {
            if elements.len() != self.domain_size {
                return Err(Error::Parameter("carrier size differs from domain size".into()));
            }
        }
        Ok(())
    }

    /// The elements instances are drawn from.
    pub fn carrier(&self) -> Vec<Element> {
        match &self.elements {
            Some(elements) => elements.clone(),
            None => (0..self.domain_size).map(Element::canonical).collect(),
        }
    }

    pub(crate) fn check_ceiling(&self, cardinality: u128) -> Result<()> {
        if cardinality > u128::from(self.ceiling) {
            return Err(Error::TooLarge { cardinality, ceiling: u128::from(self.ceiling) });
        }
        Ok(())
    }
}

/// All tuples over `carrier` of the given arity, in lexicographic carrier order.
pub fn tuples_over(carrier: &[Element], arity: usize) -> Vec<Tuple> {
    (0..arity).map(|_| carrier.iter().cloned()).multi_cartesian_product().map(Tuple::new).collect()
}

/// Exhaustive, deterministic enumeration of the instances within `bounds`.
///
/// Relations are digits of a mixed-radix counter (first declared symbol varies
/// fastest); within a relation the subsets of candidate tuples follow binary
/// counter order, candidate `j` being bit `j`.
pub fn enumerate_instances(schema: &Arc<Schema>, bounds: &Bounds) -> Result<InstanceEnumerator> {
    bounds.validate()?;
    let carrier = bounds.carrier();
    let mut digits = Vec::with_capacity(schema.len());
    let mut total: u128 = 1;
    for (symbol, arity) in schema.relations() {
        let candidates = tuples_over(&carrier, *arity);
        let t = candidates.len();
        let subsets = match bounds.max_tuples_per_relation {
            Some(cap) if cap < t => {
                let count: u128 = (0..=cap).map(|k| binomial(t, k)).sum();
                bounds.check_ceiling(count)?;
                if t > 64 {
                    return Err(Error::TooLarge { cardinality: count, ceiling: u128::from(bounds.ceiling) });
                }
                let mut masks: Vec<u64> = (0..=cap)
                    .flat_map(|k| (0..t).combinations(k))
                    .map(|combo| combo.into_iter().fold(0u64, |m, j| m | (1 << j)))
                    .collect();
                masks.sort_unstable();
                Subsets::Listed(masks)
            }
            _ => {
                if t >= 64 {
                    return Err(Error::TooLarge { cardinality: u128::MAX, ceiling: u128::from(bounds.ceiling) });
                }
                Subsets::All(1u64 << t)
            }
        };
        total = total.saturating_mul(subsets.len() as u128);
        digits.push(RelationDigit { symbol: symbol.clone(), candidates, subsets });
    }
    bounds.check_ceiling(total)?;
    Ok(InstanceEnumerator { schema: schema.clone(), counter: vec![0; digits.len()], digits, remaining: total, total })
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

enum Subsets {
    All(u64),
    Listed(Vec<u64>),
}

impl Subsets {
    fn len(&self) -> u64 {
        match self {
            Subsets::All(count) => *count,
            Subsets::Listed(masks) => masks.len() as u64,
        }
    }

    fn mask(&self, k: u64) -> u64 {
        match self {
            Subsets::All(_) => k,
            Subsets::Listed(masks) => masks[k as usize],
        }
    }
}

struct RelationDigit {
    symbol: String,
    candidates: Vec<Tuple>,
    subsets: Subsets,
}

/// Iterator returned by [`enumerate_instances`].
pub struct InstanceEnumerator {
    schema: Arc<Schema>,
    digits: Vec<RelationDigit>,
    counter: Vec<u64>,
    remaining: u128,
    total: u128,
}

impl InstanceEnumerator {
    /// Total number of instances the enumeration yields.
    pub fn cardinality(&self) -> u128 {
        self.total
    }
}

impl Iterator for InstanceEnumerator {
    type Item = Instance;

    fn next(&mut self) -> Option<Instance> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let mut instance = Instance::empty(self.schema.clone());
        for (digit, &k) in self.digits.iter().zip(&self.counter) {
            let mask = digit.subsets.mask(k);
            let tuples = digit
                .candidates
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, t)| t.clone())
                .collect();
            instance.relations.insert(digit.symbol.clone(), tuples);
        }
        for (digit, k) in self.digits.iter().zip(self.counter.iter_mut()) {
            *k += 1;
            if *k < digit.subsets.len() {
                break;
            }
            *k = 0;
        }
        Some(instance)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, usize::try_from(self.remaining).ok())
    }
}
