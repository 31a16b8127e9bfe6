use std::sync::Arc;

use dbagg_core::aggregators::Aggregator;
use dbagg_core::axiom_lab::{check_axiom, replay, Axiom, Status};
use dbagg_core::constraints::{database_constraints, Constraint};
use dbagg_core::fo;
use dbagg_core::lifting_lab::{check_lift, replay_lift, LiftStatus};
use dbagg_core::relational::{Bounds, Instance, Profile, Schema};

fn schema(decls: &[(&str, usize)]) -> Arc<Schema> {
    Schema::shared(decls.iter().copied()).unwrap()
}

#[test]
fn quota_rules_by_hand() {
    let s = schema(&[("P", 1)]);
    let profile = Profile::new(vec![
        Instance::from_facts(&s, "P(a), P(b)").unwrap(),
        Instance::from_facts(&s, "P(a), P(c)").unwrap(),
        Instance::from_facts(&s, "P(a), P(b), P(d)").unwrap(),
    ])
    .unwrap();
    let cases = [
        (Aggregator::Union, "P(a), P(b), P(c), P(d)"),
        (Aggregator::Intersection, "P(a)"),
        (Aggregator::Majority, "P(a), P(b)"),
        (Aggregator::quota(3), "P(a)"),
        (Aggregator::Parity, "P(b)"),
        (Aggregator::dictator(2), "P(a), P(c)"),
        (Aggregator::oligarchy(&[1, 3]), "P(a), P(b)"),
        (Aggregator::distance(), "P(a), P(b)"),
    ];
    for (rule, facts) in cases {
        assert_eq!(rule.aggregate(&profile).unwrap(), Instance::from_facts(&s, facts).unwrap(), "{}", rule.name());
    }
}

#[test]
fn dictator_anonymity_counterexample_replays() {
    let s = schema(&[("P", 1)]);
    let b = Bounds::new(1, 2).unwrap();
    let v = check_axiom(&Aggregator::dictator(1), Axiom::A, &s, &b).unwrap();
    assert_eq!(v.status, Status::Counterexample);
    let w = v.witness.unwrap();
    assert!(replay(&Aggregator::dictator(1), Axiom::A, &w).unwrap());
    assert!(!replay(&Aggregator::Union, Axiom::A, &w).unwrap());
}

#[test]
fn union_lifts_positive_sentence() {
    let s = schema(&[("P", 1), ("Q", 2)]);
    let c = Constraint::sentence("exists x. P(x)").unwrap();
    let v = check_lift(&Aggregator::Union, &c, &s, &Bounds::new(2, 2).unwrap(), 2).unwrap();
    assert_eq!(v.status, LiftStatus::LiftedWithinBounds);
    assert!(v.witness.is_none());
}

#[test]
fn intersection_breaks_nonemptiness() {
    let s = schema(&[("P", 1)]);
    let c = Constraint::sentence("exists x. P(x)").unwrap();
    let v = check_lift(&Aggregator::Intersection, &c, &s, &Bounds::new(2, 2).unwrap(), 2).unwrap();
    assert_eq!(v.status, LiftStatus::Paradox);
    let w = v.witness.unwrap();
    assert!(w.aggregate.is_empty());
    assert!(replay_lift(&Aggregator::Intersection, &c, &w).unwrap());
}

#[test]
fn constraint_enumeration_is_complete_and_valid() {
    let s = schema(&[("P", 2), ("Pv", 1)]);
    let all = database_constraints(&s);
    assert_eq!(all.len(), 9);
    for c in &all {
        c.validate(&s).unwrap();
    }
    assert!(all.contains(&Constraint::fd("P", 1)));
    assert!(all.contains(&Constraint::value("P", 2, "Pv")));
    assert!(all.contains(&Constraint::ric("Pv", "P", 1)));
}

#[test]
fn active_domain_quantification() {
    let s = schema(&[("P", 1), ("Q", 1)]);
    let d = Instance::from_facts(&s, "P(a)").unwrap();
    assert!(fo::is_true(&d, &fo::parse("forall x. P(x)").unwrap()).unwrap());
    assert!(!fo::is_true(&d, &fo::parse("exists x. Q(x)").unwrap()).unwrap());
    let empty = Instance::empty(s);
    assert!(fo::is_true(&empty, &fo::parse("forall x. Q(x)").unwrap()).unwrap());
    assert!(!fo::is_true(&empty, &fo::parse("exists x. P(x)").unwrap()).unwrap());
}
