use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use dbagg_core::aggregators::{Aggregator, QuotaFunction};
use dbagg_core::constraints::Constraint;
use dbagg_core::fo::{self, Formula};
use dbagg_core::relational::{Bounds, Instance, Profile, Schema};
use serde_json::Value;

/// Inline JSON, a path to a JSON file, or (for `shorthand`) a short name.
fn json_or_file(text: &str) -> Result<Option<Value>> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(Some(serde_json::from_str(text).context("malformed JSON")?));
    }
    let path = Path::new(text);
    if path.is_file() {
        let body = fs::read_to_string(path).with_context(|| format!("cannot read {text}"))?;
        return Ok(Some(serde_json::from_str(&body).with_context(|| format!("malformed JSON in {text}"))?));
    }
    Ok(None)
}

pub fn read_json(path: &str) -> Result<Value> {
    json_or_file(path)?.ok_or_else(|| anyhow!("no such file: {path}"))
}

/// `union`, `intersection`, `majority`, `distance`, `parity`,
/// `most-representative`, `quota:Q`, `dictator:I`, `oligarchy:I,J,...`, or
/// aggregator JSON.
pub fn rule(text: &str) -> Result<Aggregator> {
    if let Some(v) = json_or_file(text)? {
        return serde_json::from_value(v).context("malformed rule");
    }
    let (name, arg) = match text.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (text.trim(), None),
    };
    let num = |a: Option<&str>| -> Result<usize> {
        a.ok_or_else(|| anyhow!("rule {name} needs a parameter, e.g. {name}:1"))?
            .parse()
            .with_context(|| format!("bad parameter for {name}"))
    };
    Ok(match name.to_ascii_lowercase().as_str() {
        "union" => Aggregator::Union,
        "intersection" => Aggregator::Intersection,
        "majority" => Aggregator::Majority,
        "distance" => Aggregator::distance(),
        "parity" => Aggregator::Parity,
        "most-representative" => Aggregator::most_representative(),
        "quota" => Aggregator::Quota(QuotaFunction::uniform(num(arg)?)),
        "dictator" => Aggregator::dictator(num(arg)?),
        "oligarchy" => {
            let list = arg.ok_or_else(|| anyhow!("oligarchy needs a coalition, e.g. oligarchy:1,2"))?;
            let coalition = list
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .context("bad coalition")?;
            Aggregator::oligarchy(&coalition)
        }
        _ => bail!("unknown rule {text:?}"),
    })
}

/// `P/1,Q/2` or schema JSON `{"P":1,"Q":2}`.
pub fn schema(text: &str) -> Result<Arc<Schema>> {
    if let Some(v) = json_or_file(text)? {
        return Ok(Arc::new(serde_json::from_value(v).context("malformed schema")?));
    }
    let decls = text
        .split(',')
        .map(|d| {
            let (name, arity) = d.trim().split_once('/').ok_or_else(|| anyhow!("expected NAME/ARITY, got {d:?}"))?;
            Ok((name.trim().to_string(), arity.trim().parse::<usize>().with_context(|| format!("bad arity in {d:?}"))?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Schema::shared(decls)?)
}

pub fn instance(path: &str) -> Result<Instance> {
    serde_json::from_value(read_json(path)?).context("malformed instance")
}

pub fn profile(path: &str) -> Result<Profile> {
    serde_json::from_value(read_json(path)?).context("malformed profile")
}

pub fn formula(text: &str, schema: Option<&Schema>) -> Result<Formula> {
    Ok(match schema {
        Some(s) => fo::parse_with_schema(text, s)?,
        None => fo::parse(text)?,
    })
}

pub fn constraint(text: &str) -> Result<Constraint> {
    let v = json_or_file(text)?.ok_or_else(|| anyhow!("constraint must be JSON or a JSON file"))?;
    serde_json::from_value(v).context("malformed constraint")
}

/// The schema given explicitly, or the relation symbols a formula uses.
pub fn schema_for(explicit: Option<&str>, phi: Option<&Formula>) -> Result<Arc<Schema>> {
    match (explicit, phi) {
        (Some(text), _) => schema(text),
        (None, Some(phi)) => Ok(Schema::shared(phi.symbols()?)?),
        (None, None) => bail!("--schema is required here"),
    }
}

pub struct BoundsArgs<'a> {
    pub n: usize,
    pub domain: usize,
    pub elements: Option<&'a str>,
    pub max_tuples: Option<usize>,
    pub ceiling: Option<u64>,
}

impl BoundsArgs<'_> {
    pub fn build(&self) -> Result<Bounds> {
        let mut b = Bounds::new(self.domain, self.n)?;
        if let Some(names) = self.elements {
            let names: Vec<&str> = names.split(',').map(str::trim).collect();
            b = b.with_elements(&names)?;
        }
        if let Some(m) = self.max_tuples {
            b = b.with_max_tuples(m)?;
        }
        if let Some(c) = self.ceiling {
            b = b.with_ceiling(c);
        }
        Ok(b)
    }
}
