use std::fmt::Write;

use anyhow::{bail, Result};
use dbagg_core::aggregators::Aggregator;
use dbagg_core::axiom_lab::{
    distance_equals_majority_experiment, majority_characterization_experiment, quota_characterization_experiment,
};
use dbagg_core::constraints::{Constraint, FunctionalDependency, ReferentialIntegrityConstraint, ValueConstraint};
use dbagg_core::lifting_lab::{
    default_battery, equivalence_language_experiment, gdic_strictness_demo, literal_lifting_experiment,
    quota_fd_threshold_experiment, ric_experiment, value_constraint_experiment, LiteralDirection,
};
use dbagg_core::query_agg::{
    existential_union_experiment, existential_union_groundedness_experiment,
    universal_intersection_unanimity_experiment, FragmentReport,
};
use serde_json::Value;

use crate::input::{self, BoundsArgs};

pub const NAMES: [&str; 12] = [
    "quota-char",
    "majority-char",
    "distance-majority",
    "fd-threshold",
    "value",
    "ric",
    "literals",
    "equiv",
    "gdic",
    "exist-union",
    "univ-intersect",
    "exist-grounded",
];

pub struct Params<'a> {
    pub n: Option<usize>,
    pub domain: Option<usize>,
    pub elements: Option<&'a str>,
    pub max_tuples: Option<usize>,
    pub ceiling: Option<u64>,
    pub schema: Option<&'a str>,
    pub depth: usize,
}

pub struct Outcome {
    pub report: Value,
    pub pass: bool,
    pub summary: String,
}

struct Defaults {
    n: usize,
    domain: usize,
    max_tuples: Option<usize>,
    schema: &'static str,
    elements: Option<&'static str>,
}

fn defaults(name: &str) -> Defaults {
    let d = |n, domain, schema| Defaults { n, domain, max_tuples: None, schema, elements: None };
    match name {
        "quota-char" => d(3, 2, "P/1"),
        "majority-char" => d(3, 2, "P/1,Q/1"),
        "distance-majority" => d(3, 2, "P/1"),
        "fd-threshold" => d(3, 2, "P/2"),
        "value" => d(2, 2, "P/2,Pv/1"),
        "ric" => Defaults { max_tuples: Some(2), ..d(2, 2, "P1/2,P2/2") },
        "literals" => d(2, 2, "P/1,Q/1"),
        "equiv" => d(2, 2, "P/1,R/1"),
        "gdic" => Defaults { elements: Some("a,b"), ..d(2, 2, "P/1,Q/2") },
        _ => Defaults { max_tuples: Some(2), ..d(2, 2, "P/2,Q/2") },
    }
}

fn fragment(r: &FragmentReport, strictness: bool) -> (bool, String) {
    let mut s = format!(
        "{} formulas x {} profiles: {} violations, {} strict inclusions",
        r.formulas, r.profiles, r.violations, r.strict
    );
    let pinned_ok = match &r.pinned {
        Some(p) if strictness => !p.missing_from_rhs.is_empty() && p.missing_from_lhs.is_empty(),
        Some(p) => p.commutes,
        None => true,
    };
    if let Some(p) = &r.pinned {
        let _ = write!(s, "\nstored example {}: lhs {:?}, rhs {:?}", p.query, p.lhs, p.rhs);
    }
    (r.holds() && pinned_ok, s)
}

pub fn run(name: &str, p: &Params) -> Result<Outcome> {
    if !NAMES.contains(&name) {
        bail!("unknown experiment {name:?}; expected one of {}", NAMES.join(", "));
    }
    let def = defaults(name);
    let n = p.n.unwrap_or(def.n);
    let schema = input::schema(p.schema.unwrap_or(def.schema))?;
    let bounds = BoundsArgs {
        n,
        domain: p.domain.unwrap_or(def.domain),
        elements: p.elements.or(def.elements),
        max_tuples: p.max_tuples.or(def.max_tuples),
        ceiling: p.ceiling,
    }
    .build()?;
    let first = |arity: usize| -> Result<String> {
        match schema.relations().iter().find(|(_, k)| *k == arity) {
            Some((name, _)) => Ok(name.clone()),
            None => bail!("the schema needs a relation of arity {arity}"),
        }
    };
    let mut summary = String::new();
    let (report, pass) = match name {
        "quota-char" => {
            let r = quota_characterization_experiment(&schema, &bounds, n)?;
            for rv in r.quota_rules.iter().chain(&r.non_quota_rules) {
                let failed: Vec<String> = rv.failed().iter().map(ToString::to_string).collect();
                let _ = writeln!(summary, "{:<40} fails [{}]", rv.name, failed.join(" "));
            }
            summary.push_str("(non-quota side is a sample)");
            (serde_json::to_value(&r)?, r.consistent)
        }
        "majority-char" => {
            let r = majority_characterization_experiment(n, &schema, &bounds)?;
            let failed: Vec<String> = r.majority.failed().iter().map(ToString::to_string).collect();
            let _ = writeln!(summary, "majority fails [{}]", failed.join(" "));
            for rv in &r.other_quotas {
                let _ = writeln!(
                    summary,
                    "{:<12} N- {}",
                    rv.name,
                    if rv.holds(dbagg_core::axiom_lab::Axiom::NMinus) { "holds" } else { "fails" }
                );
            }
            (serde_json::to_value(&r)?, r.consistent)
        }
        "distance-majority" => {
            let r = distance_equals_majority_experiment(n, &schema, &bounds)?;
            let _ = write!(summary, "{} profiles, {} mismatches", r.profiles, r.mismatches);
            (serde_json::to_value(&r)?, r.mismatches == 0)
        }
        "fd-threshold" => {
            let fd = FunctionalDependency::new(&first(2)?, 1);
            let r = quota_fd_threshold_experiment(&fd, n, &schema, &bounds)?;
            for v in &r.verdicts {
                let _ = writeln!(summary, "q = {}: {}", v.q, if v.verdict.lifted() { "lifted" } else { "paradox" });
            }
            let _ = write!(summary, "expected flip at q = {}", r.threshold);
            (serde_json::to_value(&r)?, r.consistent)
        }
        "value" => {
            let vc = ValueConstraint::new(&first(2)?, 2, &first(1)?);
            let rules = [Aggregator::Union, Aggregator::Majority, Aggregator::Intersection, Aggregator::dictator(1)];
            let r = value_constraint_experiment(&vc, &rules, n, &schema, &bounds)?;
            for e in r.rules.iter().chain(std::iter::once(&r.non_grounded)) {
                let _ = writeln!(
                    summary,
                    "{:<16} grounded {:<5} {}",
                    e.name,
                    e.grounded,
                    if e.verdict.lifted() { "lifted" } else { "paradox" }
                );
            }
            (serde_json::to_value(&r)?, r.consistent)
        }
        "ric" => {
            let rels = schema.relations();
            if rels.len() < 2 {
                bail!("the referential experiment needs two relations");
            }
            let ric = ReferentialIntegrityConstraint::new(&rels[0].0, &rels[1].0, 1);
            let r = ric_experiment(&ric, n, &schema, &bounds)?;
            for c in &r.cells {
                let _ = writeln!(
                    summary,
                    "q_from = {}, q_to = {}: {}",
                    c.q_from,
                    c.q_to,
                    if c.verdict.lifted() { "lifted" } else { "paradox" }
                );
            }
            let _ = write!(summary, "cells departing from 'lifted iff q_to = 1': {:?}", r.deviations);
            (serde_json::to_value(&r)?, r.consistent)
        }
        "literals" => {
            let rules = [
                Aggregator::Intersection,
                Aggregator::Union,
                Aggregator::Majority,
                Aggregator::quota(0),
                Aggregator::Parity,
                Aggregator::dictator(1),
            ];
            let r = literal_lifting_experiment(LiteralDirection::Both, &bounds.carrier(), &rules, n, &schema, &bounds)?;
            for x in &r.rules {
                let count = |s: &Option<dbagg_core::lifting_lab::LiteralSummary>| {
                    s.as_ref().map_or("-".to_string(), |s| format!("{}/{}", s.lifted, s.literals))
                };
                let _ = writeln!(
                    summary,
                    "{:<16} U {:<5} G {:<5} positive {} negative {}",
                    x.name,
                    x.unanimous,
                    x.grounded,
                    count(&x.positive),
                    count(&x.negative)
                );
            }
            (serde_json::to_value(&r)?, r.consistent)
        }
        "equiv" => {
            let rules = [
                Aggregator::Majority,
                Aggregator::Union,
                Aggregator::Intersection,
                Aggregator::dictator(1),
                Aggregator::most_representative(),
            ];
            let r = equivalence_language_experiment(&rules, n, &schema, &bounds)?;
            for x in r.rules.iter().chain(std::iter::once(&r.biased)) {
                let _ = writeln!(
                    summary,
                    "{:<40} N+ {:<5} lifted {}/{}",
                    x.name,
                    x.positive_neutral,
                    x.lifted,
                    r.sentences.len()
                );
            }
            (serde_json::to_value(&r)?, r.consistent)
        }
        "gdic" => {
            let mut battery = default_battery(&schema)?;
            if schema.arity("P") == Some(1) && schema.arity("Q") == Some(2) {
                battery.push(Constraint::sentence("forall x. (P(x) -> exists y. Q(x, y))")?);
            }
            let r = gdic_strictness_demo(n, &schema, &bounds, &battery)?;
            let _ =
                writeln!(summary, "rule {} on {:?} gives {:?}", r.rule.name(), r.example.profile, r.example.aggregate);
            for v in &r.battery {
                let _ = writeln!(summary, "{}: {}", v.constraint, if v.lifted() { "lifted" } else { "paradox" });
            }
            (serde_json::to_value(&r)?, r.consistent)
        }
        "exist-union" => {
            let r = existential_union_experiment(&schema, &bounds, n, p.depth)?;
            let (ok, s) = fragment(&r, false);
            summary = s;
            (serde_json::to_value(&r)?, ok)
        }
        "univ-intersect" => {
            let r = universal_intersection_unanimity_experiment(&schema, &bounds, n, p.depth)?;
            let (ok, s) = fragment(&r, true);
            summary = s;
            (serde_json::to_value(&r)?, ok)
        }
        "exist-grounded" => {
            let r = existential_union_groundedness_experiment(&schema, &bounds, n, p.depth)?;
            let (ok, s) = fragment(&r, false);
            summary = s;
            (serde_json::to_value(&r)?, ok)
        }
        _ => unreachable!("checked against NAMES"),
    };
    Ok(Outcome { report, pass, summary: summary.trim_end().to_string() })
}
