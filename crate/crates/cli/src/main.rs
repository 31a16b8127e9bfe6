//! `dbagg`: aggregate relational instances, evaluate queries and run the
//! bounded verification labs from the command line.
//!
//! Exit status: 0 when the result holds, 1 when a counterexample or paradox
//! was found, 2 on usage or input errors.

mod experiments;
mod input;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dbagg_core::aggregators::Aggregator;
use dbagg_core::axiom_lab::{check_axioms, replay, Axiom, Verdict, Witness};
use dbagg_core::constraints::Constraint;
use dbagg_core::fo::{self, Formula};
use dbagg_core::lifting_lab::{check_lift, replay_lift, LiftVerdict, LiftWitness};
use dbagg_core::query_agg::{check_commutation, AnswerAggregator};
use dbagg_core::relational::{Profile, Schema};
use serde_json::{json, Value};

use input::BoundsArgs;

#[derive(Parser)]
#[command(name = "dbagg", version, about = "Aggregation of relational databases: rules, queries and bounded checks")]
struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for exhaustive searches.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Largest search space to enumerate.
    #[arg(long, global = true)]
    ceiling: Option<u64>,
    /// Print run metadata (version, timing) on stderr.
    #[arg(long, global = true)]
    meta: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Space {
    /// Relation symbols, e.g. `P/1,Q/2`, or schema JSON.
    #[arg(long)]
    schema: Option<String>,
    /// Number of agents.
    #[arg(long)]
    n: Option<usize>,
    /// Carrier size; elements are named e0, e1, ...
    #[arg(long)]
    domain: Option<usize>,
    /// Carrier names, e.g. `a,b,c`.
    #[arg(long)]
    elements: Option<String>,
    /// At most this many tuples per relation.
    #[arg(long)]
    max_tuples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a rule to a profile.
    Aggregate {
        /// Rule shorthand (`majority`, `quota:2`, `dictator:1`, ...) or rule JSON.
        #[arg(long)]
        rule: String,
        /// Profile JSON or a file holding it.
        #[arg(long)]
        profile: String,
    },
    /// Evaluate a sentence on an instance.
    Eval {
        /// First-order sentence.
        #[arg(long)]
        sentence: String,
        /// Instance JSON or a file holding it.
        #[arg(long)]
        instance: String,
    },
    /// Answer a query on an instance.
    Query {
        /// First-order formula with free variables.
        #[arg(long)]
        query: String,
        /// Instance JSON or a file holding it.
        #[arg(long)]
        instance: String,
    },
    /// Search for a profile of consistent instances with an inconsistent aggregate.
    CheckLift {
        /// Rule shorthand (`majority`, `quota:2`, `dictator:1`, ...) or rule JSON.
        #[arg(long)]
        rule: String,
        /// Constraint as a first-order sentence.
        #[arg(long, conflicts_with = "constraint")]
        sentence: Option<String>,
        /// Constraint JSON or a file holding it.
        #[arg(long)]
        constraint: Option<String>,
        #[command(flatten)]
        space: Space,
    },
    /// Check aggregation axioms within bounds.
    Axioms {
        /// Rule shorthand (`majority`, `quota:2`, `dictator:1`, ...) or rule JSON.
        #[arg(long)]
        rule: String,
        /// Comma-separated axioms (I,U,G,A,N+,N-,S,NP,M); all when omitted.
        #[arg(long)]
        axiom: Option<String>,
        #[command(flatten)]
        space: Space,
    },
    /// Compare the query answer on the aggregate with the aggregated answers.
    Commute {
        /// Rule shorthand (`majority`, `quota:2`, `dictator:1`, ...) or rule JSON.
        #[arg(long)]
        rule: String,
        /// Answer aggregator: `union` or `intersection`.
        #[arg(long)]
        star: String,
        /// First-order formula with free variables.
        #[arg(long)]
        query: String,
        /// Profile JSON or a file holding it.
        #[arg(long)]
        profile: String,
    },
    /// Run a named experiment.
    Experiments {
        /// One of quota-char, majority-char, distance-majority, fd-threshold, value, ric,
        /// literals, equiv, gdic, exist-union, univ-intersect, exist-grounded.
        name: String,
        #[command(flatten)]
        space: Space,
        /// Formula depth for the query suites.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Re-verify the witnesses in a JSON report.
    Replay {
        /// Report JSON written by `--json`, or a file holding it.
        report: String,
    },
}

enum Status {
    Holds,
    Refuted,
}

struct Output {
    value: Value,
    text: String,
    status: Status,
}

impl Output {
    fn new(value: Value, text: String, holds: bool) -> Self {
        Output { value, text, status: if holds { Status::Holds } else { Status::Refuted } }
    }
}

fn pretty(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn space_bounds(space: &Space, ceiling: Option<u64>, default_n: usize, default_domain: usize) -> BoundsArgs<'_> {
    BoundsArgs {
        n: space.n.unwrap_or(default_n),
        domain: space.domain.unwrap_or(default_domain),
        elements: space.elements.as_deref(),
        max_tuples: space.max_tuples,
        ceiling,
    }
}

fn lift_text(v: &LiftVerdict) -> String {
    match &v.witness {
        None => format!(
            "{} lifts {} within bounds ({} profiles, n = {}, domain {})",
            v.rule.name(),
            v.constraint,
            v.searched,
            v.n,
            v.bounds.domain_size
        ),
        Some(w) => {
            let mut s = format!("paradox: {} does not lift {}\n", v.rule.name(), v.constraint);
            for (i, d) in w.profile.agents().iter().enumerate() {
                s.push_str(&format!("  D{} = {:?}\n", i + 1, d));
            }
            s.push_str(&format!("  F   = {:?}", w.aggregate));
            s
        }
    }
}

fn verdict_text(v: &Verdict) -> String {
    let status = if v.holds() { "holds within bounds" } else { "counterexample" };
    let mut s = format!("{:<3} {:<20} ({} cases)", v.axiom.to_string(), status, v.searched);
    if let Some(w) = &v.witness {
        for p in &w.profiles {
            s.push_str(&format!("\n      profile {:?}", p.agents()));
        }
        if !w.facts.is_empty() {
            let facts: Vec<String> = w.facts.iter().map(|f| format!("{}{:?}", f.symbol, f.tuple)).collect();
            s.push_str(&format!("\n      facts {}", facts.join(", ")));
        }
        if let Some(pi) = &w.agent_permutation {
            s.push_str(&format!("\n      agents permuted as {pi:?}"));
        }
        if let Some(rho) = &w.domain_permutation {
            let pairs: Vec<String> = rho.pairs().filter(|(a, b)| a != b).map(|(a, b)| format!("{a}->{b}")).collect();
            s.push_str(&format!("\n      elements permuted as {}", pairs.join(", ")));
        }
    }
    s
}

fn lift_constraint(
    sentence: Option<&str>,
    constraint: Option<&str>,
    schema: Option<&str>,
) -> Result<(Constraint, std::sync::Arc<Schema>)> {
    match (sentence, constraint) {
        (Some(text), None) => {
            let explicit = schema.map(input::schema).transpose()?;
            let phi = input::formula(text, explicit.as_deref())?;
            let schema = match explicit {
                Some(s) => s,
                None => input::schema_for(None, Some(&phi))?,
            };
            Ok((Constraint::from_formula(phi)?, schema))
        }
        (None, Some(text)) => {
            let c = input::constraint(text)?;
            let schema = match (schema, &c) {
                (Some(s), _) => input::schema(s)?,
                (None, Constraint::Sentence(phi)) => input::schema_for(None, Some(phi))?,
                (None, _) => bail!("--schema is required for this constraint"),
            };
            Ok((c, schema))
        }
        _ => bail!("give exactly one of --sentence and --constraint"),
    }
}

fn run(cli: &Cli) -> Result<Output> {
    Ok(match &cli.command {
        Command::Aggregate { rule, profile } => {
            let rule = input::rule(rule)?;
            let profile = input::profile(profile)?;
            let out = rule.aggregate(&profile)?;
            let value = serde_json::to_value(&out)?;
            Output::new(value.clone(), pretty(&value)?, true)
        }
        Command::Eval { sentence, instance } => {
            let d = input::instance(instance)?;
            let phi = input::formula(sentence, Some(d.schema()))?;
            let holds = fo::is_true(&d, &phi)?;
            Output::new(json!(holds), holds.to_string(), holds)
        }
        Command::Query { query, instance } => {
            let d = input::instance(instance)?;
            let phi: Formula = input::formula(query, Some(d.schema()))?;
            let answers = fo::answer_free(&d, &phi)?;
            let value = serde_json::to_value(&answers)?;
            Output::new(value.clone(), serde_json::to_string(&value)?, true)
        }
        Command::CheckLift { rule, sentence, constraint, space } => {
            let rule = input::rule(rule)?;
            let (c, schema) = lift_constraint(sentence.as_deref(), constraint.as_deref(), space.schema.as_deref())?;
            let b = space_bounds(space, cli.ceiling, 2, 2);
            let v = check_lift(&rule, &c, &schema, &b.build()?, b.n)?;
            Output::new(serde_json::to_value(&v)?, lift_text(&v), v.lifted())
        }
        Command::Axioms { rule, axiom, space } => {
            let rule = input::rule(rule)?;
            let axioms: Vec<Axiom> = match axiom {
                None => Axiom::ALL.to_vec(),
                Some(list) => list.split(',').map(|a| a.parse()).collect::<Result<_, _>>()?,
            };
            let schema = input::schema(space.schema.as_deref().unwrap_or("P/1"))?;
            let b = space_bounds(space, cli.ceiling, 2, 2);
            let verdicts = check_axioms(&rule, &axioms, &schema, &b.build()?)?;
            let text = std::iter::once(format!("{} on {} agents, domain {}", rule.name(), b.n, b.domain))
                .chain(verdicts.iter().map(verdict_text))
                .collect::<Vec<_>>()
                .join("\n");
            let holds = verdicts.iter().all(Verdict::holds);
            Output::new(serde_json::to_value(&verdicts)?, text, holds)
        }
        Command::Commute { rule, star, query, profile } => {
            let rule = input::rule(rule)?;
            let star: AnswerAggregator = star.parse()?;
            let profile: Profile = input::profile(profile)?;
            let phi = input::formula(query, Some(profile.schema()))?;
            let r = check_commutation(&rule, star, &phi, &profile)?;
            let text = format!(
                "ans(F(D), phi) = {:?}\nF*(ans(D_i, phi)) = {:?}\n{}",
                r.lhs,
                r.rhs,
                if r.commutes { "commutes" } else { "does not commute" }
            );
            Output::new(serde_json::to_value(&r)?, text, r.commutes)
        }
        Command::Experiments { name, space, depth } => {
            let params = experiments::Params {
                n: space.n,
                domain: space.domain,
                elements: space.elements.as_deref(),
                max_tuples: space.max_tuples,
                ceiling: cli.ceiling,
                schema: space.schema.as_deref(),
                depth: *depth,
            };
            let o = experiments::run(name, &params)?;
            let text = format!("{}\nclaim: {}", o.summary, if o.pass { "PASS" } else { "FAIL" });
            Output::new(o.report, text, o.pass)
        }
        Command::Replay { report } => replay_report(&input::read_json(report)?)?,
    })
}

/// Re-checks one report: a witness must still refute, a "holds" verdict is
/// recomputed from its embedded bounds.
fn replay_one(v: &Value) -> Result<(bool, String)> {
    let rule: Aggregator =
        serde_json::from_value(v.get("rule").cloned().ok_or_else(|| anyhow!("report has no rule"))?)?;
    if let Some(axiom) = v.get("axiom") {
        let axiom: Axiom = serde_json::from_value(axiom.clone())?;
        return Ok(match v.get("witness") {
            Some(w) => {
                let w: Witness = serde_json::from_value(w.clone()).context("malformed witness")?;
                if !replay(&rule, axiom, &w)? {
                    bail!("witness for {axiom} does not refute the axiom");
                }
                (false, format!("{axiom}: counterexample re-verified"))
            }
            None => {
                let verdict: Verdict = serde_json::from_value(v.clone())?;
                let again = check_axioms(&rule, &[axiom], &std::sync::Arc::new(verdict.schema), &verdict.bounds)?;
                (
                    again[0].holds(),
                    format!("{axiom}: re-checked, {}", if again[0].holds() { "holds" } else { "counterexample" }),
                )
            }
        });
    }
    if let Some(c) = v.get("constraint") {
        let c: Constraint = serde_json::from_value(c.clone())?;
        return Ok(match v.get("witness") {
            Some(w) => {
                let w: LiftWitness = serde_json::from_value(w.clone()).context("malformed witness")?;
                if !replay_lift(&rule, &c, &w)? {
                    bail!("witness does not show a paradox for {c}");
                }
                (false, format!("{c}: paradox re-verified"))
            }
            None => {
                let verdict: LiftVerdict = serde_json::from_value(v.clone())?;
                let schema = std::sync::Arc::new(verdict.schema);
                let again = check_lift(&rule, &c, &schema, &verdict.bounds, verdict.n)?;
                (again.lifted(), format!("{c}: re-checked, {}", if again.lifted() { "lifted" } else { "paradox" }))
            }
        });
    }
    if let (Some(star), Some(query), Some(profile)) = (v.get("star"), v.get("query"), v.get("profile")) {
        let star: AnswerAggregator = serde_json::from_value(star.clone())?;
        let profile: Profile = serde_json::from_value(profile.clone())?;
        let phi = fo::parse_with_schema(query.as_str().unwrap_or_default(), profile.schema())?;
        let r = check_commutation(&rule, star, &phi, &profile)?;
        if Some(r.commutes) != v.get("commutes").and_then(Value::as_bool) {
            bail!("commutation verdict differs on replay");
        }
        return Ok((r.commutes, format!("{}: {}", r.query, if r.commutes { "commutes" } else { "does not commute" })));
    }
    bail!("unrecognised report")
}

fn replay_report(v: &Value) -> Result<Output> {
    let items: Vec<&Value> = match v {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    let mut holds = true;
    let mut lines = Vec::new();
    let mut results = Vec::new();
    for item in items {
        let (h, line) = replay_one(item)?;
        holds &= h;
        results.push(json!({"holds": h, "detail": line}));
        lines.push(line);
    }
    Ok(Output::new(Value::Array(results), lines.join("\n"), holds))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let result = run(&cli).and_then(|o| {
        let body = if cli.json { serde_json::to_string(&o.value)? } else { o.text };
        println!("{body}");
        Ok(o.status)
    });
    if cli.meta {
        let since = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        eprintln!(
            "{}",
            json!({"version": env!("CARGO_PKG_VERSION"), "finished_at": since, "elapsed_ms": start.elapsed().as_millis() as u64})
        );
    }
    match result {
        Ok(Status::Holds) => ExitCode::SUCCESS,
        Ok(Status::Refuted) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
