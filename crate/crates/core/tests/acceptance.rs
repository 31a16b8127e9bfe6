use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dbagg_core::aggregators::{majority_quota, Aggregator};
use dbagg_core::axiom_lab::{distance_equals_majority_experiment, rule_verdicts, Axiom};
use dbagg_core::constraints::{
    database_constraints, translation_check, Constraint, FunctionalDependency, ReferentialIntegrityConstraint,
};
use dbagg_core::fo::{self, Answers};
use dbagg_core::lifting_lab::{
    check_lift, default_battery, gdic_strictness_demo, quota_fd_threshold_experiment, replay_lift, ric_experiment,
    LiftStatus,
};
use dbagg_core::query_agg::{
    check_commutation, example_existential_profile, example_universal_profile, existential_union_experiment,
    existential_union_groundedness_experiment, universal_intersection_unanimity_experiment, AnswerAggregator,
};
use dbagg_core::relational::{Bounds, Instance, Profile, Schema, Tuple};
use dbagg_core::Result;

const PHI: &str = "forall x. (P(x) -> exists y. Q(x, y))";

struct Check {
    ok: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Result<Check>);

fn pass(detail: impl Into<String>) -> Check {
    Check { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Check {
    Check { ok: false, detail: detail.into() }
}

fn schema(decls: &[(&str, usize)]) -> Arc<Schema> {
    Schema::shared(decls.iter().copied()).expect("valid schema")
}

fn unary(names: &[&str]) -> Answers {
    Answers::new(1, names.iter().map(|a| Tuple::from_names(&[a])).collect::<BTreeSet<_>>()).expect("unary answers")
}

fn paradox() -> Result<Check> {
    let s = schema(&[("P", 1), ("Q", 2)]);
    let c = Constraint::sentence(PHI)?;
    let profile =
        Profile::new(vec![Instance::from_facts(&s, "P(a), Q(a,b)")?, Instance::from_facts(&s, "P(a), Q(a,c)")?])?;
    let out = Aggregator::Majority.aggregate(&profile)?;
    if out != Instance::from_facts(&s, "P(a)")? {
        return Ok(fail(format!("majority returned {out:?}")));
    }
    if c.holds(&out)? {
        return Ok(fail("aggregate satisfies the constraint"));
    }
    let start = Instant::now();
    let v = check_lift(&Aggregator::Majority, &c, &s, &Bounds::new(3, 2)?, 2)?;
    let elapsed = start.elapsed();
    let Some(w) = v.witness.as_ref().filter(|_| v.status == LiftStatus::Paradox) else {
        return Ok(fail("no paradox found within bounds"));
    };
    if !replay_lift(&Aggregator::Majority, &c, w)? {
        return Ok(fail("witness does not replay"));
    }
    if elapsed >= Duration::from_secs(5) {
        return Ok(fail(format!("search took {elapsed:?}")));
    }
    Ok(pass(format!("majority gives {{P(a)}}; witness after {} profiles in {elapsed:.2?}", v.searched)))
}

fn query_example() -> Result<Check> {
    let ex = fo::parse("exists y. P(x, y)")?;
    let un = fo::parse("forall y. P(x, y)")?;
    let e = check_commutation(
        &Aggregator::Intersection,
        AnswerAggregator::IntersectionStar,
        &ex,
        &example_existential_profile(),
    )?;
    let u = check_commutation(
        &Aggregator::Intersection,
        AnswerAggregator::IntersectionStar,
        &un,
        &example_universal_profile(),
    )?;
    let expected = [(&e.lhs, unary(&[])), (&e.rhs, unary(&["a"])), (&u.lhs, unary(&["a"])), (&u.rhs, unary(&[]))];
    if expected.iter().all(|(got, want)| *got == want) {
        Ok(pass("existential: {} vs {(a)}; universal: {(a)} vs {}"))
    } else {
        Ok(fail(format!("existential {:?} vs {:?}; universal {:?} vs {:?}", e.lhs, e.rhs, u.lhs, u.rhs)))
    }
}

fn distance_majority() -> Result<Check> {
    let s = schema(&[("P", 1)]);
    let start = Instant::now();
    let a = distance_equals_majority_experiment(3, &s, &Bounds::new(2, 3)?)?;
    let b = distance_equals_majority_experiment(5, &s, &Bounds::new(1, 5)?)?;
    let elapsed = start.elapsed();
    let detail = format!(
        "{} profiles / {} mismatches, {} profiles / {} mismatches, {elapsed:.2?}",
        a.profiles, a.mismatches, b.profiles, b.mismatches
    );
    let ok = (a.profiles, a.mismatches, b.profiles, b.mismatches) == (64, 0, 32, 0) && elapsed < Duration::from_secs(1);
    Ok(Check { ok, detail })
}

fn fd_threshold() -> Result<Check> {
    let s = schema(&[("P", 2)]);
    let fd = FunctionalDependency::new("P", 1);
    let start = Instant::now();
    let mut flips = Vec::new();
    for n in 2..=5 {
        let r = quota_fd_threshold_experiment(&fd, n, &s, &Bounds::new(2, n)?)?;
        let lifted: Vec<usize> = r.verdicts.iter().filter(|v| v.verdict.lifted()).map(|v| v.q).collect();
        let expected: Vec<usize> = (1..=n).filter(|q| *q > n / 2).collect();
        if lifted != expected {
            return Ok(fail(format!("n = {n}: lifted for q in {lifted:?}, expected {expected:?}")));
        }
        flips.push(format!("n={n}: q>={}", lifted[0]));
    }
    let elapsed = start.elapsed();
    let ok = elapsed < Duration::from_secs(60);
    Ok(Check { ok, detail: format!("{} in {elapsed:.2?}", flips.join(", ")) })
}

fn ric() -> Result<Check> {
    let s = schema(&[("P1", 2), ("P2", 2)]);
    let ric = ReferentialIntegrityConstraint::new("P1", "P2", 1);
    let mut wrong = Vec::new();
    for n in [2, 3] {
        let r = ric_experiment(&ric, n, &s, &Bounds::new(2, n)?.with_max_tuples(2)?)?;
        for c in &r.cells {
            if c.verdict.lifted() != (c.q_to == 1) {
                wrong.push(format!("n={n} q_from={} q_to={} lifted={}", c.q_from, c.q_to, c.verdict.lifted()));
            }
        }
    }
    if wrong.is_empty() {
        Ok(pass("lifted exactly when q_P2 = 1 for n = 2, 3"))
    } else {
        Ok(fail(wrong.join("; ")))
    }
}

fn suite_space() -> Result<(Arc<Schema>, Bounds)> {
    Ok((schema(&[("P", 2), ("Q", 2)]), Bounds::new(2, 2)?.with_max_tuples(2)?))
}

fn existential_union() -> Result<Check> {
    let (s, b) = suite_space()?;
    let r = existential_union_experiment(&s, &b, 2, 2)?;
    let detail = format!("{} formulas x {} profiles, {} violations", r.formulas, r.profiles, r.violations);
    Ok(Check { ok: r.formulas > 0 && r.holds(), detail })
}

fn inclusions() -> Result<Check> {
    let (s, b) = suite_space()?;
    let u = universal_intersection_unanimity_experiment(&s, &b, 2, 2)?;
    let g = existential_union_groundedness_experiment(&s, &b, 2, 2)?;
    let strict = u.pinned.as_ref().is_some_and(|p| p.missing_from_lhs.is_empty() && !p.missing_from_rhs.is_empty());
    let detail = format!(
        "universal: {} formulas, {} violations, pinned strict {strict}; grounded: {} formulas, {} violations",
        u.formulas, u.violations, g.formulas, g.violations
    );
    Ok(Check { ok: u.formulas > 0 && g.formulas > 0 && u.holds() && g.holds() && strict, detail })
}

fn axiom_matrix() -> Result<Check> {
    let n = 3;
    let s = schema(&[("P", 1), ("Q", 1)]);
    let b = Bounds::new(2, n)?;
    let mut rules = vec![Aggregator::Union, Aggregator::Intersection, Aggregator::Majority];
    rules.extend((0..=n + 1).map(Aggregator::quota));
    rules.push(Aggregator::distance());
    rules.extend((1..=n).map(Aggregator::dictator));
    rules.push(Aggregator::oligarchy(&[1, 2]));
    rules.push(Aggregator::most_representative());
    rules.push(Aggregator::Parity);
    let core = [Axiom::U, Axiom::G, Axiom::A, Axiom::I, Axiom::M, Axiom::NPlus, Axiom::NPerm];
    let mut wrong = Vec::new();
    for rule in &rules {
        let rv = rule_verdicts(rule, &Axiom::ALL, &s, &b)?;
        let holds = |a: Axiom| rv.holds(a);
        let mut expect = |cond: bool, what: &str| {
            if !cond {
                wrong.push(format!("{}: {what}", rv.name));
            }
        };
        match rule {
            Aggregator::Union | Aggregator::Intersection | Aggregator::Majority => {
                for a in core {
                    expect(holds(a), &format!("{a} fails"));
                }
            }
            Aggregator::Dictator { .. } => {
                expect(!holds(Axiom::A), "A holds");
                expect(!holds(Axiom::NPerm), "NP holds");
            }
            _ => {}
        }
        if let Aggregator::Quota(qf) = rule {
            if qf.default != majority_quota(n) {
                expect(!holds(Axiom::NMinus), "N- holds");
            }
        }
        if *rule == Aggregator::Majority {
            expect(holds(Axiom::NMinus), "N- fails");
        }
        expect(holds(Axiom::S) == (holds(Axiom::NPlus) && holds(Axiom::I)), "S differs from N+ and I");
    }
    if wrong.is_empty() {
        Ok(pass(format!("{} rules match", rules.len())))
    } else {
        Ok(fail(wrong.join("; ")))
    }
}

fn translation() -> Result<Check> {
    let mut checked = 0;
    let mut instances = 0;
    for s in [schema(&[("P", 2)]), schema(&[("P", 2), ("Pv", 1)]), schema(&[("P1", 2), ("P2", 2)])] {
        for c in database_constraints(&s) {
            for d in 1..=3 {
                let r = translation_check(&s, &c, &Bounds::new(d, 1)?)?;
                if let Some(m) = r.mismatch {
                    return Ok(fail(format!("{c} disagrees with {} on {m:?}", r.formula)));
                }
                checked += 1;
                instances += r.instances;
            }
        }
    }
    Ok(pass(format!("{checked} constraint/domain pairs, {instances} instances, 0 mismatches")))
}

fn gdic() -> Result<Check> {
    let s = schema(&[("P", 1), ("Q", 2)]);
    let b = Bounds::new(2, 2)?.with_elements(&["a", "b"])?;
    let mut battery = default_battery(&s)?;
    battery.push(Constraint::sentence(PHI)?);
    let r = gdic_strictness_demo(2, &s, &b, &battery)?;
    let outside = !r.example.profile.agents().contains(&r.example.aggregate);
    let lifted = r.battery.iter().filter(|v| v.lifted()).count();
    let detail = format!(
        "output {:?} outside the profile: {outside}; {lifted}/{} constraints lifted",
        r.example.aggregate,
        r.battery.len()
    );
    Ok(Check { ok: outside && lifted == battery.len() && r.consistent, detail })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("majority paradox and lifting search", paradox),
        ("query answers on the intersection example", query_example),
        ("distance rule equals majority", distance_majority),
        ("quota threshold for a functional dependency", fd_threshold),
        ("referential constraint quota grid", ric),
        ("positive existential union commutation", existential_union),
        ("inclusion suites and pinned strict example", inclusions),
        ("axiom matrix", axiom_matrix),
        ("constraint translation oracle", translation),
        ("permuted dictatorship outside the profile", gdic),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = check().unwrap_or_else(|e| fail(format!("error: {e}")));
        if !c.ok {
            failures += 1;
        }
        println!(
            "{} criterion {}: {name}: {} [{:.2?}]",
            if c.ok { "PASS" } else { "FAIL" },
            i + 1,
            c.detail,
            start.elapsed()
        );
    }
    println!("{}/{} criteria pass", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
