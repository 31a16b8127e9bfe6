//! Bit-level encodings of bounded search spaces.
//!
//! An [`AtomSpace`] numbers every (symbol, tuple) pair over a finite carrier so
//! an instance inside it becomes a `u128`. A [`ProfileSpace`] indexes the
//! profiles of `n` agents drawn from a fixed list of instances as a
//! mixed-radix number, agent 1 being the fastest digit.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::relational::{
    enumerate_instances, tuples_over, Bounds, Element, Instance, Permutation, Profile, Schema, Tuple,
};

pub const MAX_ATOMS: usize = 128;

/// An instance split into its part inside an [`AtomSpace`] and the tuples
/// that fall outside it (symbol index, tuple), sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub mask: u128,
    pub extra: Vec<(usize, Tuple)>,
}

impl Outcome {
    pub fn inside(mask: u128) -> Self {
        Outcome { mask, extra: Vec::new() }
    }
}

#[derive(Debug)]
pub struct AtomSpace {
    schema: Arc<Schema>,
    carrier: Vec<Element>,
    atoms: Vec<(usize, Tuple)>,
    index: HashMap<(usize, Tuple), usize>,
    symbol_masks: Vec<u128>,
    element_masks: Vec<u128>,
    /// Carrier positions of the elements each atom mentions, as a bit set.
    atom_elements: Vec<u64>,
}

impl AtomSpace {
    pub fn new(schema: &Arc<Schema>, carrier: &[Element]) -> Result<Self> {
        let total: u128 =
            schema.relations().iter().map(|(_, q)| (carrier.len() as u128).saturating_pow(*q as u32)).sum();
        if total > MAX_ATOMS as u128 || carrier.len() > 64 {
            return Err(Error::TooLarge { cardinality: total, ceiling: MAX_ATOMS as u128 });
        }
        let position: HashMap<&Element, usize> = carrier.iter().enumerate().map(|(i, e)| (e, i)).collect();
        let mut atoms = Vec::new();
        let mut symbol_masks = Vec::new();
        for (s, (_, q)) in schema.relations().iter().enumerate() {
            let mut mask = 0u128;
            for t in tuples_over(carrier, *q) {
                mask |= 1 << atoms.len();
                atoms.push((s, t));
            }
            symbol_masks.push(mask);
        }
        let mut element_masks = vec![0u128; carrier.len()];
        let mut atom_elements = Vec::with_capacity(atoms.len());
        for (a, (_, t)) in atoms.iter().enumerate() {
            let mut elems = 0u64;
            for e in t.iter() {
                let p = position[e];
                element_masks[p] |= 1 << a;
                elems |= 1 << p;
            }
            atom_elements.push(elems);
        }
        let index = atoms.iter().cloned().enumerate().map(|(i, key)| (key, i)).collect();
        Ok(AtomSpace {
            schema: schema.clone(),
            carrier: carrier.to_vec(),
            atoms,
            index,
            symbol_masks,
            element_masks,
            atom_elements,
        })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn carrier(&self) -> &[Element] {
        &self.carrier
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn symbol_index(&self, atom: usize) -> usize {
        self.atoms[atom].0
    }

    pub fn symbol(&self, atom: usize) -> &str {
        &self.schema.relations()[self.atoms[atom].0].0
    }

    pub fn tuple(&self, atom: usize) -> &Tuple {
        &self.atoms[atom].1
    }

    pub fn atom(&self, symbol: &str, tuple: &Tuple) -> Option<usize> {
        let s = self.schema.position(symbol)?;
        self.index.get(&(s, tuple.clone())).copied()
    }

    pub fn symbol_mask(&self, symbol_index: usize) -> u128 {
        self.symbol_masks[symbol_index]
    }

    pub fn atom_elements(&self, atom: usize) -> u64 {
        self.atom_elements[atom]
    }

    /// Carrier positions of the elements occurring in `mask`.
    pub fn active_elements(&self, mask: u128) -> u64 {
        self.element_masks.iter().enumerate().filter(|(_, m)| *m & mask != 0).fold(0, |acc, (p, _)| acc | 1 << p)
    }

    pub fn split(&self, instance: &Instance) -> Outcome {
        let mut mask = 0u128;
        let mut extra = Vec::new();
        for (s, (_, rel)) in instance.relations().enumerate() {
            for t in rel {
                match self.index.get(&(s, t.clone())) {
                    Some(&a) => mask |= 1 << a,
                    None => extra.push((s, t.clone())),
                }
            }
        }
        Outcome { mask, extra }
    }

    /// The mask of an instance lying entirely inside the space.
    pub fn encode(&self, instance: &Instance) -> Option<u128> {
        let outcome = self.split(instance);
        outcome.extra.is_empty().then_some(outcome.mask)
    }

    pub fn decode(&self, mask: u128) -> Instance {
        self.join(&Outcome::inside(mask))
    }

    pub fn join(&self, outcome: &Outcome) -> Instance {
        let mut relations: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); self.schema.len()];
        for (a, (s, t)) in self.atoms.iter().enumerate() {
            if outcome.mask >> a & 1 == 1 {
                relations[*s].insert(t.clone());
            }
        }
        for (s, t) in &outcome.extra {
            relations[*s].insert(t.clone());
        }
        let mut instance = Instance::empty(self.schema.clone());
        for ((symbol, _), tuples) in self.schema.relations().iter().zip(relations) {
            instance.set_relation(symbol, tuples).expect("atoms respect the schema");
        }
        instance
    }

    /// Image of every atom under `rho`, which must map the carrier onto itself.
    pub fn atom_permutation(&self, rho: &Permutation) -> Result<Vec<usize>> {
        self.atoms
            .iter()
            .map(|(s, t)| {
                let image = rho.apply_tuple(t)?;
                self.index
                    .get(&(*s, image))
                    .copied()
                    .ok_or_else(|| Error::Domain("permutation does not map the carrier onto itself".into()))
            })
            .collect()
    }

    pub fn permute_mask(mask: u128, images: &[usize]) -> u128 {
        let mut out = 0u128;
        let mut rest = mask;
        while rest != 0 {
            let a = rest.trailing_zeros() as usize;
            out |= 1 << images[a];
            rest &= rest - 1;
        }
        out
    }

    /// `rho` applied to an outcome; elements outside the carrier are fixed.
    pub fn permute_outcome(&self, outcome: &Outcome, images: &[usize], rho: &Permutation) -> Outcome {
        let mask = Self::permute_mask(outcome.mask, images);
        let mut extra: Vec<(usize, Tuple)> = outcome
            .extra
            .iter()
            .map(|(s, t)| (*s, t.iter().map(|e| rho.apply(e).unwrap_or_else(|_| e.clone())).collect()))
            .collect();
        extra.sort();
        Outcome { mask, extra }
    }
}

/// All profiles of `n` agents over a list of instances.
#[derive(Debug)]
pub struct ProfileSpace {
    pub space: Arc<AtomSpace>,
    pub instances: Vec<Instance>,
    pub masks: Vec<u128>,
    pub n: usize,
    count: u64,
}

impl ProfileSpace {
    /// Enumerates the instances within `bounds` that pass `keep`, in canonical
    /// order, and refuses when the resulting profile count exceeds the ceiling.
    pub fn new(
        schema: &Arc<Schema>,
        bounds: &Bounds,
        n: usize,
        keep: impl Fn(&Instance) -> Result<bool> + Sync,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("a profile needs at least one agent".into()));
        }
        if n > 32 {
            return Err(Error::Parameter("at most 32 agents are supported".into()));
        }
        let space = Arc::new(AtomSpace::new(schema, &bounds.carrier())?);
        let candidates: Vec<Instance> = enumerate_instances(schema, bounds)?.collect();
        let verdicts: Vec<bool> = candidates.par_iter().map(&keep).collect::<Result<_>>()?;
        let instances: Vec<Instance> =
            candidates.into_iter().zip(verdicts).filter_map(|(d, k)| k.then_some(d)).collect();
        let count = (instances.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        bounds.check_ceiling(count)?;
        let masks =
            instances.iter().map(|d| space.encode(d).expect("enumerated instances lie in the carrier")).collect();
        Ok(ProfileSpace { space, instances, masks, n, count: count as u64 })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn radix(&self) -> usize {
        self.instances.len()
    }

    /// Instance indices of each agent, agent 1 first.
    pub fn digits(&self, mut p: u64) -> Vec<usize> {
        let k = self.instances.len() as u64;
        (0..self.n)
            .map(|_| {
                let d = (p % k) as usize;
                p /= k;
                d
            })
            .collect()
    }

    pub fn index(&self, digits: &[usize]) -> u64 {
        let k = self.instances.len() as u64;
        digits.iter().rev().fold(0, |acc, &d| acc * k + d as u64)
    }

    pub fn profile_masks(&self, p: u64) -> Vec<u128> {
        self.digits(p).into_iter().map(|d| self.masks[d]).collect()
    }

    pub fn profile(&self, p: u64) -> Profile {
        Profile::new(self.digits(p).into_iter().map(|d| self.instances[d].clone()).collect())
            .expect("agents share the schema")
    }
}

const CHUNK: u64 = 1 << 12;

/// Evaluates `test` on `0..count` and returns the smallest index with a hit,
/// together with the number of cases examined in canonical order. Work is
/// parallel inside fixed chunks, so the answer does not depend on scheduling.
pub fn first_hit<R: Send>(
    count: u64,
    test: impl Fn(u64) -> Result<Option<R>> + Sync,
) -> Result<(Option<(u64, R)>, u64)> {
    let mut start = 0;
    while start < count {
        let end = count.min(start + CHUNK);
        let hit = (start..end)
            .into_par_iter()
            .map(|i| test(i).map(|r| r.map(|r| (i, r))))
            .find_first(|r| !matches!(r, Ok(None)));
        match hit {
            Some(Ok(Some((i, r)))) => return Ok((Some((i, r)), i + 1)),
            Some(Err(e)) => return Err(e),
            _ => start = end,
        }
    }
    Ok((None, count))
}
