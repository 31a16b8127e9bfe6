//! Bounded verification of aggregation axioms and the characterisation
//! results for quota rules, the majority rule and the distance-based rule.
//!
//! Every check is exhaustive over the profiles of `bounds.max_agents` agents
//! whose instances draw on the first `bounds.domain_size` carrier elements.
//! Verdicts therefore say "within bounds" and never more.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregators::{aggregate_distance, majority_quota, Aggregator, QuotaFunction, TiePolicy};
use crate::error::{Error, Result};
use crate::relational::{Bounds, Instance, Permutation, Profile, Schema, Tuple};
use crate::space::{first_hit, AtomSpace, Outcome, ProfileSpace};
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    I,
    U,
    G,
    A,
    #[serde(rename = "N_PLUS")]
    NPlus,
    #[serde(rename = "N_MINUS")]
    NMinus,
    S,
    #[serde(rename = "N_PERM")]
    NPerm,
    M,
}

impl Axiom {
    pub const ALL: [Axiom; 9] =
        [Axiom::I, Axiom::U, Axiom::G, Axiom::A, Axiom::NPlus, Axiom::NMinus, Axiom::S, Axiom::NPerm, Axiom::M];

    pub fn symbol(self) -> &'static str {
        match self {
            Axiom::I => "I",
            Axiom::U => "U",
            Axiom::G => "G",
            Axiom::A => "A",
            Axiom::NPlus => "N+",
            Axiom::NMinus => "N-",
            Axiom::S => "S",
            Axiom::NPerm => "NP",
            Axiom::M => "M",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Axiom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "I" => Axiom::I,
            "U" => Axiom::U,
            "G" => Axiom::G,
            "A" => Axiom::A,
            "N+" | "N_PLUS" | "NPLUS" => Axiom::NPlus,
            "N-" | "N_MINUS" | "NMINUS" => Axiom::NMinus,
            "S" => Axiom::S,
            "NP" | "N_PERM" | "NPERM" => Axiom::NPerm,
            "M" => Axiom::M,
            _ => return Err(Error::Parameter(format!("unknown axiom {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    HoldsWithinBounds,
    Counterexample,
}

/// A tuple of a named relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    #[serde(rename = "P")]
    pub symbol: String,
    pub tuple: Tuple,
}

/// Data refuting an axiom. Which fields are used depends on the axiom:
/// one profile for U, G, N+, N-, A and NP, two for I, S and M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub profiles: Vec<Profile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facts: Vec<Fact>,
    /// Agent `i` of the permuted profile is agent `pi[i-1]` of the original.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_permutation: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_permutation: Option<Permutation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub axiom: Axiom,
    pub rule: Aggregator,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub searched: u64,
    pub n: usize,
    pub schema: Schema,
    pub bounds: Bounds,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.status == Status::HoldsWithinBounds
    }
}

/// Checks one axiom for `rule` over every profile of `bounds.max_agents`
/// agents within `bounds`.
pub fn check_axiom(rule: &Aggregator, axiom: Axiom, schema: &Arc<Schema>, bounds: &Bounds) -> Result<Verdict> {
    Ok(check_axioms(rule, &[axiom], schema, bounds)?.remove(0))
}

/// Several axioms over one shared table of aggregates.
pub fn check_axioms(
    rule: &Aggregator,
    axioms: &[Axiom],
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<Vec<Verdict>> {
    let lab = Lab::new(rule, schema, bounds)?;
    axioms
        .iter()
        .map(|&axiom| {
            let (witness, searched) = lab.check(axiom)?;
            if let Some(w) = &witness {
                if !replay(rule, axiom, w)? {
                    return Err(Error::Eval(format!("witness for {axiom} did not replay")));
                }
            }
            Ok(Verdict {
                axiom,
                rule: rule.clone(),
                status: if witness.is_some() { Status::Counterexample } else { Status::HoldsWithinBounds },
                witness,
                searched,
                n: lab.n,
                schema: (**schema).clone(),
                bounds: bounds.clone(),
            })
        })
        .collect()
}

type Found = (Option<Witness>, u64);

struct Lab {
    ps: ProfileSpace,
    n: usize,
    full: u32,
    outputs: Vec<Outcome>,
    /// Tuples outside the carrier that some aggregate contains.
    extras: Vec<(usize, Tuple)>,
    ceiling: u128,
}

impl Lab {
    fn new(rule: &Aggregator, schema: &Arc<Schema>, bounds: &Bounds) -> Result<Self> {
        let n = bounds.max_agents;
        let ps = ProfileSpace::new(schema, bounds, n, |_| Ok(true))?;
        let compiled = rule.compile(&ps.space, n)?;
        let outputs: Vec<Outcome> =
            (0..ps.count()).into_par_iter().map(|p| compiled.outcome(&ps.profile_masks(p))).collect::<Result<_>>()?;
        let extras: Vec<(usize, Tuple)> = outputs
            .iter()
            .flat_map(|o| o.extra.iter().cloned())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        Ok(Lab { ps, n, full, outputs, extras, ceiling: u128::from(bounds.ceiling) })
    }

    fn space(&self) -> &AtomSpace {
        &self.ps.space
    }

    /// Carrier atoms followed by the extra tuples.
    fn universe(&self) -> usize {
        self.space().len() + self.extras.len()
    }

    fn symbol_of(&self, u: usize) -> usize {
        let len = self.space().len();
        if u < len {
            self.space().symbol_index(u)
        } else {
            self.extras[u - len].0
        }
    }

    fn member(&self, out: &Outcome, u: usize) -> bool {
        let len = self.space().len();
        if u < len {
            out.mask >> u & 1 == 1
        } else {
            out.extra.binary_search(&self.extras[u - len]).is_ok()
        }
    }

    fn support(&self, masks: &[u128], u: usize) -> u32 {
        if u >= self.space().len() {
            return 0;
        }
        masks.iter().enumerate().fold(0, |acc, (i, m)| acc | (((m >> u) & 1) as u32) << i)
    }

    fn fact(&self, u: usize) -> Fact {
        let len = self.space().len();
        let (s, tuple) = if u < len {
            (self.space().symbol_index(u), self.space().tuple(u).clone())
        } else {
            self.extras[u - len].clone()
        };
        Fact { symbol: self.space().schema().relations()[s].0.clone(), tuple }
    }

    fn witness(&self, profiles: &[u64], facts: &[usize]) -> Witness {
        Witness {
            profiles: profiles.iter().map(|&p| self.ps.profile(p)).collect(),
            facts: facts.iter().map(|&u| self.fact(u)).collect(),
            agent_permutation: None,
            domain_permutation: None,
        }
    }

    fn check(&self, axiom: Axiom) -> Result<Found> {
        match axiom {
            Axiom::U => self.per_profile(|p, masks, out| {
                let inter = masks.iter().fold(u128::MAX, |acc, m| acc & m);
                let missing = inter & !out.mask;
                (missing != 0).then(|| vec![missing.trailing_zeros() as usize]).map(|f| (vec![p], f))
            }),
            Axiom::G => self.per_profile(|p, masks, out| {
                let union = masks.iter().fold(0, |acc, m| acc | m);
                let stray = out.mask & !union;
                if stray != 0 {
                    Some((vec![p], vec![stray.trailing_zeros() as usize]))
                } else {
                    (0..self.extras.len())
                        .map(|e| self.space().len() + e)
                        .find(|&u| self.member(out, u))
                        .map(|u| (vec![p], vec![u]))
                }
            }),
            Axiom::NPlus => self.per_profile(|p, masks, out| {
                let mut seen: HashMap<(usize, u32), (bool, usize)> = HashMap::new();
                for u in 0..self.universe() {
                    let key = (self.symbol_of(u), self.support(masks, u));
                    let here = self.member(out, u);
                    let (before, v) = *seen.entry(key).or_insert((here, u));
                    if before != here {
                        return Some((vec![p], vec![v, u]));
                    }
                }
                None
            }),
            Axiom::NMinus => self.per_profile(|p, masks, out| {
                // first accepted and first rejected atom for each (symbol, support)
                let mut groups: HashMap<(usize, u32), [Option<usize>; 2]> = HashMap::new();
                for u in 0..self.universe() {
                    let slot = &mut groups.entry((self.symbol_of(u), self.support(masks, u))).or_default()
                        [self.member(out, u) as usize];
                    slot.get_or_insert(u);
                }
                (0..self.universe()).find_map(|u| {
                    let complement = self.full ^ self.support(masks, u);
                    let partner = groups.get(&(self.symbol_of(u), complement))?[self.member(out, u) as usize]?;
                    Some((vec![p], vec![u, partner]))
                })
            }),
            Axiom::I => self.across_profiles(false),
            Axiom::S => self.across_profiles(true),
            Axiom::A => self.anonymity(),
            Axiom::NPerm => self.permutation_neutrality(),
            Axiom::M => self.monotonicity(),
        }
    }

    fn per_profile(
        &self,
        test: impl Fn(u64, &[u128], &Outcome) -> Option<(Vec<u64>, Vec<usize>)> + Sync,
    ) -> Result<Found> {
        let (hit, searched) =
            first_hit(self.ps.count(), |p| Ok(test(p, &self.ps.profile_masks(p), &self.outputs[p as usize])))?;
        Ok((hit.map(|(_, (ps, facts))| self.witness(&ps, &facts)), searched))
    }

    /// Membership must be a function of the support across all profiles,
    /// per atom for independence and globally for systematicity.
    fn across_profiles(&self, systematic: bool) -> Result<Found> {
        let mut seen: HashMap<(usize, u32), (bool, u64, usize)> = HashMap::new();
        for p in 0..self.ps.count() {
            let masks = self.ps.profile_masks(p);
            let out = &self.outputs[p as usize];
            for u in 0..self.universe() {
                let support = self.support(&masks, u);
                let here = self.member(out, u);
                let key = (if systematic { 0 } else { u }, support);
                let (before, q, v) = *seen.entry(key).or_insert((here, p, u));
                if before != here {
                    let facts = if systematic { vec![v, u] } else { vec![u] };
                    return Ok((Some(self.witness(&[q, p], &facts)), p + 1));
                }
            }
        }
        Ok((None, self.ps.count()))
    }

    fn guard(&self, cases: u128) -> Result<()> {
        if cases > self.ceiling {
            return Err(Error::TooLarge { cardinality: cases, ceiling: self.ceiling });
        }
        Ok(())
    }

    fn anonymity(&self) -> Result<Found> {
        let perms: Vec<Vec<usize>> = (0..self.n).permutations(self.n).skip(1).collect();
        let per = perms.len() as u64;
        self.guard(u128::from(self.ps.count()) * u128::from(per))?;
        let (hit, _) = first_hit(self.ps.count(), |p| {
            let digits = self.ps.digits(p);
            Ok(perms.iter().enumerate().find_map(|(j, pi)| {
                let moved: Vec<usize> = pi.iter().map(|&i| digits[i]).collect();
                let q = self.ps.index(&moved);
                (self.outputs[q as usize] != self.outputs[p as usize]).then_some((j, pi.clone()))
            }))
        })?;
        Ok(match hit {
            Some((p, (j, pi))) => {
                let mut w = self.witness(&[p], &[]);
                w.agent_permutation = Some(pi.iter().map(|i| i + 1).collect());
                (Some(w), p * per + j as u64 + 1)
            }
            None => (None, self.ps.count() * per),
        })
    }

    fn permutation_neutrality(&self) -> Result<Found> {
        let space = self.space();
        let rhos: Vec<(Permutation, Vec<usize>)> = Permutation::all(space.carrier())
            .into_iter()
            .skip(1)
            .map(|rho| space.atom_permutation(&rho).map(|images| (rho, images)))
            .collect::<Result<_>>()?;
        let per = rhos.len() as u64;
        self.guard(u128::from(self.ps.count()) * u128::from(per))?;
        let position: HashMap<u128, usize> = self.ps.masks.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        let (hit, _) = first_hit(self.ps.count(), |p| {
            let digits = self.ps.digits(p);
            let out = &self.outputs[p as usize];
            for (j, (rho, images)) in rhos.iter().enumerate() {
                let moved = digits
                    .iter()
                    .map(|&d| {
                        position
                            .get(&AtomSpace::permute_mask(self.ps.masks[d], images))
                            .copied()
                            .ok_or_else(|| Error::Domain("instance space is not closed under permutation".into()))
                    })
                    .collect::<Result<Vec<usize>>>()?;
                let image = &self.outputs[self.ps.index(&moved) as usize];
                if *image != space.permute_outcome(out, images, rho) {
                    return Ok(Some((j, rho.clone())));
                }
            }
            Ok(None)
        })?;
        Ok(match hit {
            Some((p, (j, rho))) => {
                let mut w = self.witness(&[p], &[]);
                w.domain_permutation = Some(rho);
                (Some(w), p * per + j as u64 + 1)
            }
            None => (None, self.ps.count() * per),
        })
    }

    fn monotonicity(&self) -> Result<Found> {
        let space = self.space();
        let len = space.len();
        let k = self.ps.radix();
        // allowed[d][u]: instances that keep the u-relation of instance d or
        // extend it by u (other relations are free)
        let allowed: Vec<Vec<Vec<usize>>> = (0..k)
            .map(|d| {
                let m = self.ps.masks[d];
                (0..self.universe())
                    .map(|u| {
                        let sym = space.symbol_mask(self.symbol_of(u));
                        let part = m & sym;
                        let grown = if u < len { part | 1 << u } else { part };
                        (0..k)
                            .filter(|&e| {
                                let other = self.ps.masks[e] & sym;
                                other == part || (u < len && other & grown == grown)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let cases: Vec<u64> = (0..self.ps.count())
            .into_par_iter()
            .map(|p| {
                let digits = self.ps.digits(p);
                let out = &self.outputs[p as usize];
                (0..self.universe())
                    .filter(|&u| self.member(out, u))
                    .map(|u| digits.iter().map(|&d| allowed[d][u].len() as u64).product::<u64>())
                    .sum()
            })
            .collect();
        self.guard(cases.iter().map(|&c| u128::from(c)).sum())?;
        let (hit, _) = first_hit(self.ps.count(), |p| {
            let digits = self.ps.digits(p);
            let out = &self.outputs[p as usize];
            let mut examined = 0u64;
            for u in (0..self.universe()).filter(|&u| self.member(out, u)) {
                let lists: Vec<&Vec<usize>> = digits.iter().map(|&d| &allowed[d][u]).collect();
                let mut cursor = vec![0usize; self.n];
                loop {
                    examined += 1;
                    let moved: Vec<usize> = cursor.iter().zip(&lists).map(|(&c, l)| l[c]).collect();
                    let q = self.ps.index(&moved);
                    if !self.member(&self.outputs[q as usize], u) {
                        return Ok(Some((q, u, examined)));
                    }
                    // agent 1 is the fastest digit
                    let mut i = 0;
                    while i < self.n {
                        cursor[i] += 1;
                        if cursor[i] < lists[i].len() {
                            break;
                        }
                        cursor[i] = 0;
                        i += 1;
                    }
                    if i == self.n {
                        break;
                    }
                }
            }
            Ok(None)
        })?;
        Ok(match hit {
            Some((p, (q, u, examined))) => {
                let before: u64 = cases[..p as usize].iter().sum();
                (Some(self.witness(&[p, q], &[u])), before + examined)
            }
            None => (None, cases.iter().sum()),
        })
    }
}

fn contains(d: &Instance, f: &Fact) -> bool {
    d.contains(&f.symbol, &f.tuple)
}

fn arity_ok(profile: &Profile, facts: &[Fact]) -> Result<()> {
    facts.iter().try_for_each(|f| profile.schema().require_arity(&f.symbol, f.tuple.arity()))
}

fn need<'a, T>(items: &'a [T], k: usize, what: &str) -> Result<&'a [T]> {
    if items.len() < k {
        return Err(Error::Parameter(format!("witness needs {k} {what}")));
    }
    Ok(items)
}

/// Re-evaluates the axiom on a witness with instance-level operations only;
/// `true` means the witness violates the axiom.
pub fn replay(rule: &Aggregator, axiom: Axiom, witness: &Witness) -> Result<bool> {
    let profiles = need(&witness.profiles, 1, "a profile")?;
    let v = &profiles[0];
    arity_ok(v, &witness.facts)?;
    let out = rule.aggregate(v)?;
    let support = |v: &Profile, f: &Fact| v.support(&f.symbol, &f.tuple);
    Ok(match axiom {
        Axiom::U => {
            let f = &need(&witness.facts, 1, "a fact")?[0];
            v.agents().iter().all(|d| contains(d, f)) && !contains(&out, f)
        }
        Axiom::G => {
            let f = &need(&witness.facts, 1, "a fact")?[0];
            contains(&out, f) && !v.agents().iter().any(|d| contains(d, f))
        }
        Axiom::A => {
            let pi = witness
                .agent_permutation
                .as_ref()
                .ok_or_else(|| Error::Parameter("witness needs an agent permutation".into()))?;
            out != rule.aggregate(&v.permute_agents(pi)?)?
        }
        Axiom::NPlus | Axiom::NMinus => {
            let f = need(&witness.facts, 2, "facts")?;
            if f[0].symbol != f[1].symbol {
                return Ok(false);
            }
            let (s0, s1) = (support(v, &f[0])?, support(v, &f[1])?);
            let (m0, m1) = (contains(&out, &f[0]), contains(&out, &f[1]));
            if axiom == Axiom::NPlus {
                s0 == s1 && m0 != m1
            } else {
                let complement: std::collections::BTreeSet<usize> = (1..=v.n()).filter(|i| !s1.contains(i)).collect();
                s0 == complement && m0 == m1
            }
        }
        Axiom::I | Axiom::S | Axiom::M => {
            let w = need(&witness.profiles, 2, "profiles")?[1].clone();
            arity_ok(&w, &witness.facts)?;
            let out_w = rule.aggregate(&w)?;
            let f = need(&witness.facts, 1, "a fact")?;
            match axiom {
                Axiom::I => {
                    support(v, &f[0])? == support(&w, &f[0])? && contains(&out, &f[0]) != contains(&out_w, &f[0])
                }
                Axiom::S => {
                    let g = f.get(1).unwrap_or(&f[0]);
                    support(v, &f[0])? == support(&w, g)? && contains(&out, &f[0]) != contains(&out_w, g)
                }
                _ => {
                    let f = &f[0];
                    let grown = v.agents().iter().zip(w.agents()).all(|(d, e)| {
                        let (before, after) = (d.relation(&f.symbol), e.relation(&f.symbol));
                        match (before, after) {
                            (Ok(b), Ok(a)) => a == b || (b.is_subset(a) && a.contains(&f.tuple)),
                            _ => false,
                        }
                    });
                    v.n() == w.n() && grown && contains(&out, f) && !contains(&out_w, f)
                }
            }
        }
        Axiom::NPerm => {
            let rho = witness
                .domain_permutation
                .as_ref()
                .ok_or_else(|| Error::Parameter("witness needs a domain permutation".into()))?;
            let moved = Profile::new(v.agents().iter().map(|d| d.rename(rho)).collect())?;
            rule.aggregate(&moved)? != out.rename(rho)
        }
    })
}

/// Verdicts of one rule on a list of axioms.
#[derive(Clone, Debug, Serialize)]
pub struct RuleVerdicts {
    pub rule: Aggregator,
    pub name: String,
    pub verdicts: BTreeMap<Axiom, Status>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub witnesses: BTreeMap<Axiom, Witness>,
}

impl RuleVerdicts {
    pub fn holds(&self, axiom: Axiom) -> bool {
        self.verdicts.get(&axiom) == Some(&Status::HoldsWithinBounds)
    }

    pub fn failed(&self) -> Vec<Axiom> {
        self.verdicts.iter().filter(|(_, s)| **s == Status::Counterexample).map(|(a, _)| *a).collect()
    }
}

pub fn rule_verdicts(
    rule: &Aggregator,
    axioms: &[Axiom],
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<RuleVerdicts> {
    let verdicts = check_axioms(rule, axioms, schema, bounds)?;
    Ok(RuleVerdicts {
        rule: rule.clone(),
        name: rule.name(),
        verdicts: verdicts.iter().map(|v| (v.axiom, v.status)).collect(),
        witnesses: verdicts.into_iter().filter_map(|v| Some((v.axiom, v.witness?))).collect(),
    })
}

/// Quota rules pass A, I and M; rules outside the class each fail one of
/// them. The second half runs on a fixed library and is a sample, not a proof.
#[derive(Clone, Debug, Serialize)]
pub struct QuotaCharacterizationReport {
    pub n: usize,
    pub schema: Schema,
    pub bounds: Bounds,
    pub quota_rules: Vec<RuleVerdicts>,
    pub non_quota_rules: Vec<RuleVerdicts>,
    pub sampled: bool,
    pub consistent: bool,
}

/// The quota rules used by [`quota_characterization_experiment`]: every
/// uniform quota in `1..=n+1` and, for each default in `1..=n`, one override
/// on the first carrier tuple of the first symbol.
pub fn quota_family(schema: &Schema, bounds: &Bounds, n: usize) -> Vec<Aggregator> {
    let mut family: Vec<Aggregator> = (1..=n + 1).map(Aggregator::quota).collect();
    let (symbol, arity) = schema.relations()[0].clone();
    let first = Tuple::new(vec![bounds.carrier()[0].clone(); arity]);
    for q in 1..=n {
        let other = if q == n { 1 } else { q + 1 };
        if other != q {
            family.push(Aggregator::Quota(QuotaFunction::uniform(q).with_override(&symbol, first.clone(), other)));
        }
    }
    if schema.len() > 1 && n > 1 {
        family.push(Aggregator::Quota(QuotaFunction::uniform(1).with_symbol(&schema.relations()[1].0, n)));
    }
    family
}

/// Rules that are not quota rules for `n >= 2`.
pub fn non_quota_library(n: usize) -> Vec<Aggregator> {
    if n < 2 {
        return Vec::new();
    }
    vec![Aggregator::dictator(1), Aggregator::oligarchy(&[1, 2]), Aggregator::Parity]
}

pub fn quota_characterization_experiment(
    schema: &Arc<Schema>,
    bounds: &Bounds,
    n: usize,
) -> Result<QuotaCharacterizationReport> {
    let bounds = bounds.clone().with_agents(n)?;
    let axioms = [Axiom::A, Axiom::I, Axiom::M];
    let quota_rules = quota_family(schema, &bounds, n)
        .iter()
        .map(|r| rule_verdicts(r, &axioms, schema, &bounds))
        .collect::<Result<Vec<_>>>()?;
    let non_quota_rules =
        non_quota_library(n).iter().map(|r| rule_verdicts(r, &axioms, schema, &bounds)).collect::<Result<Vec<_>>>()?;
    let consistent =
        quota_rules.iter().all(|r| r.failed().is_empty()) && non_quota_rules.iter().all(|r| !r.failed().is_empty());
    Ok(QuotaCharacterizationReport {
        n,
        schema: (**schema).clone(),
        bounds,
        quota_rules,
        non_quota_rules,
        sampled: true,
        consistent,
    })
}

/// For odd `n` the majority rule passes A, N-, N+, I and M, and every other
/// uniform quota fails N-.
#[derive(Clone, Debug, Serialize)]
pub struct MajorityCharacterizationReport {
    pub n: usize,
    pub schema: Schema,
    pub bounds: Bounds,
    pub majority: RuleVerdicts,
    pub other_quotas: Vec<RuleVerdicts>,
    pub consistent: bool,
}

pub fn majority_characterization_experiment(
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<MajorityCharacterizationReport> {
    if n.is_multiple_of(2) {
        return Err(Error::Parameter(format!("the majority characterisation needs an odd number of agents, got {n}")));
    }
    if schema.len() < 2 {
        return Err(Error::Parameter("the majority characterisation needs at least two relation symbols".into()));
    }
    let bounds = bounds.clone().with_agents(n)?;
    let axioms = [Axiom::A, Axiom::NMinus, Axiom::NPlus, Axiom::I, Axiom::M];
    let majority = rule_verdicts(&Aggregator::Majority, &axioms, schema, &bounds)?;
    let other_quotas = (0..=n + 1)
        .filter(|&q| q != majority_quota(n))
        .map(|q| rule_verdicts(&Aggregator::quota(q), &[Axiom::NMinus], schema, &bounds))
        .collect::<Result<Vec<_>>>()?;
    let consistent = majority.failed().is_empty() && other_quotas.iter().all(|r| !r.holds(Axiom::NMinus));
    Ok(MajorityCharacterizationReport { n, schema: (**schema).clone(), bounds, majority, other_quotas, consistent })
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceMajorityReport {
    pub n: usize,
    pub schema: Schema,
    pub bounds: Bounds,
    pub profiles: u64,
    pub mismatches: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<Profile>,
}

/// Compares the distance-based rule with the majority rule on every profile.
pub fn distance_equals_majority_experiment(
    n: usize,
    schema: &Arc<Schema>,
    bounds: &Bounds,
) -> Result<DistanceMajorityReport> {
    if n.is_multiple_of(2) {
        return Err(Error::Parameter(format!("the comparison is stated for an odd number of agents, got {n}")));
    }
    let bounds = bounds.clone().with_agents(n)?;
    let ps = ProfileSpace::new(schema, &bounds, n, |_| Ok(true))?;
    let differs: Vec<bool> = (0..ps.count())
        .into_par_iter()
        .map(|p| {
            let v = ps.profile(p);
            Ok(aggregate_distance(&v, TiePolicy::ExcludeTies)? != Aggregator::Majority.aggregate(&v)?)
        })
        .collect::<Result<_>>()?;
    let first_mismatch = differs.iter().position(|&d| d).map(|p| ps.profile(p as u64));
    Ok(DistanceMajorityReport {
        n,
        schema: (**schema).clone(),
        bounds,
        profiles: ps.count(),
        mismatches: differs.iter().filter(|&&d| d).count() as u64,
        first_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unary(symbols: &[&str]) -> Arc<Schema> {
        Schema::shared(symbols.iter().map(|s| (*s, 1))).unwrap()
    }

    fn bounds(d: usize, n: usize) -> Bounds {
        Bounds::new(d, n).unwrap()
    }

    #[test]
    fn union_is_unanimous() {
        let v = check_axiom(&Aggregator::Union, Axiom::U, &unary(&["P"]), &bounds(2, 2)).unwrap();
        assert!(v.holds());
        assert_eq!(v.searched, 16);
    }

    #[test]
    fn dictator_first_anonymity_witness() {
        let s = unary(&["P"]);
        let v = check_axiom(&Aggregator::dictator(1), Axiom::A, &s, &bounds(1, 2)).unwrap();
        assert_eq!(v.status, Status::Counterexample);
        let w = v.witness.unwrap();
        let expected =
            Profile::new(vec![Instance::from_facts(&s, "P(e0)").unwrap(), Instance::empty(s.clone())]).unwrap();
        assert_eq!(w.profiles, vec![expected]);
        assert_eq!(w.agent_permutation, Some(vec![2, 1]));
    }

    #[test]
    fn quota_two_is_independent() {
        let v = check_axiom(&Aggregator::quota(2), Axiom::I, &unary(&["P"]), &bounds(2, 3)).unwrap();
        assert!(v.holds());
    }

    #[test]
    fn every_axiom_witness_replays() {
        let s = unary(&["P", "Q"]);
        let rules = [
            Aggregator::dictator(1),
            Aggregator::Parity,
            Aggregator::quota(0),
            Aggregator::quota(1),
            Aggregator::quota(4),
            Aggregator::most_representative(),
            Aggregator::Quota(QuotaFunction::uniform(2).with_symbol("Q", 3)),
            Aggregator::Constant { instance: Instance::from_facts(&s, "P(zz)").unwrap() },
        ];
        for rule in &rules {
            for v in check_axioms(rule, &Axiom::ALL, &s, &bounds(2, 3)).unwrap() {
                if let Some(w) = &v.witness {
                    assert!(replay(rule, v.axiom, w).unwrap(), "{rule} {}", v.axiom);
                    let text = serde_json::to_string(&v).unwrap();
                    let back: Verdict = serde_json::from_str(&text).unwrap();
                    assert!(replay(&back.rule, back.axiom, back.witness.as_ref().unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn nonempty_quotas_are_unanimous_and_grounded() {
        let s = unary(&["P", "Q"]);
        for q in 1..=3 {
            for a in [Axiom::U, Axiom::G] {
                assert!(check_axiom(&Aggregator::quota(q), a, &s, &bounds(2, 3)).unwrap().holds());
            }
        }
    }

    #[test]
    fn systematicity_matches_neutrality_and_independence() {
        let s = unary(&["P", "Q"]);
        let rules = [
            Aggregator::Union,
            Aggregator::Intersection,
            Aggregator::Majority,
            Aggregator::distance(),
            Aggregator::dictator(2),
            Aggregator::oligarchy(&[1, 2]),
            Aggregator::Parity,
            Aggregator::most_representative(),
        ];
        for rule in &rules {
            let r = rule_verdicts(rule, &[Axiom::S, Axiom::NPlus, Axiom::I], &s, &bounds(2, 3)).unwrap();
            assert_eq!(r.holds(Axiom::S), r.holds(Axiom::NPlus) && r.holds(Axiom::I), "{rule}");
        }
    }

    /// Neutrality compares tuples of one relation only, so per-symbol quotas
    /// keep it while breaking systematicity.
    #[test]
    fn per_symbol_quotas_separate_systematicity_from_neutrality() {
        let s = unary(&["P", "Q"]);
        let rule = Aggregator::Quota(QuotaFunction::uniform(1).with_symbol("Q", 3));
        let r = rule_verdicts(&rule, &[Axiom::S, Axiom::NPlus, Axiom::I], &s, &bounds(2, 3)).unwrap();
        assert!(r.holds(Axiom::NPlus) && r.holds(Axiom::I) && !r.holds(Axiom::S));
    }

    #[test]
    fn zero_quota_depends_on_the_profile_domain() {
        let s = unary(&["P", "Q"]);
        let r = rule_verdicts(&Aggregator::quota(0), &[Axiom::I, Axiom::M, Axiom::NPlus, Axiom::A], &s, &bounds(2, 2))
            .unwrap();
        assert!(!r.holds(Axiom::I) && !r.holds(Axiom::M) && !r.holds(Axiom::NPlus));
        assert!(r.holds(Axiom::A));
    }

    #[test]
    fn quota_characterisation() {
        let s = unary(&["P"]);
        let report = quota_characterization_experiment(&s, &bounds(2, 3), 3).unwrap();
        assert!(report.consistent, "{report:#?}");
        let failed = |name: &str| report.non_quota_rules.iter().find(|r| r.name == name).unwrap().failed();
        assert!(failed("parity").contains(&Axiom::M));
        assert!(failed("oligarchy(1,2)").contains(&Axiom::A));
    }

    #[test]
    fn majority_characterisation() {
        let s = unary(&["P", "Q"]);
        let report = majority_characterization_experiment(3, &s, &bounds(2, 3)).unwrap();
        assert!(report.consistent, "{report:#?}");
        assert!(majority_characterization_experiment(2, &s, &bounds(2, 2)).is_err());
        assert!(majority_characterization_experiment(3, &unary(&["P"]), &bounds(2, 3)).is_err());
        let union = &report.other_quotas.iter().find(|r| r.name == "quota(1)").unwrap();
        let w = &union.witnesses[&Axiom::NMinus];
        assert!(replay(&Aggregator::quota(1), Axiom::NMinus, w).unwrap());
    }

    #[test]
    fn distance_equals_majority() {
        let s = unary(&["P"]);
        let r = distance_equals_majority_experiment(3, &s, &bounds(2, 3)).unwrap();
        assert_eq!((r.profiles, r.mismatches), (64, 0));
        let r = distance_equals_majority_experiment(5, &s, &bounds(1, 5)).unwrap();
        assert_eq!((r.profiles, r.mismatches), (32, 0));
        let r = distance_equals_majority_experiment(1, &s, &bounds(2, 1)).unwrap();
        assert_eq!(r.mismatches, 0);
        assert!(distance_equals_majority_experiment(2, &s, &bounds(2, 2)).is_err());
    }

    #[test]
    fn ceiling_refusal() {
        let s = unary(&["P", "Q"]);
        let b = bounds(2, 3).with_ceiling(100);
        assert!(matches!(
            check_axiom(&Aggregator::Union, Axiom::U, &s, &b),
            Err(Error::TooLarge { cardinality: 4096, .. })
        ));
    }

    #[test]
    fn axiom_names() {
        for a in Axiom::ALL {
            assert_eq!(a.symbol().parse::<Axiom>().unwrap(), a);
        }
        assert_eq!("N_PERM".parse::<Axiom>().unwrap(), Axiom::NPerm);
        assert_eq!(serde_json::to_string(&Axiom::NPlus).unwrap(), "\"N_PLUS\"");
    }
}
