//! Hash-function model, the induced slot distribution, and per-slot key counts.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::probability::{KeySequence, ProbabilityVector};
use crate::rng::KeyRng;

/// Upper limit on `n` and `U` accepted from configs and the command line.
pub const MAX_TABLE_SIZE: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Mapping {
    /// `U = n`, `h(x) = x`.
    Identity,
    /// `table[x]` is the slot of key `x`.
    Table(Vec<u32>),
}

/// A fixed map from the key universe `0..U` to slots `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashModel {
    slots: usize,
    mapping: Mapping,
}

impl HashModel {
    pub fn identity(slots: usize) -> Result<Self> {
        if slots == 0 {
            return Err(Error::invalid("hash model needs at least one slot"));
        }
        Ok(HashModel {
            slots,
            mapping: Mapping::Identity,
        })
    }

    pub fn from_table(table: Vec<u32>, slots: usize) -> Result<Self> {
        if slots == 0 {
            return Err(Error::invalid("hash model needs at least one slot"));
        }
        if table.is_empty() {
            return Err(Error::invalid("hash table must cover at least one key"));
        }
        if let Some((key, slot)) = table
            .iter()
            .enumerate()
            .find(|(_, s)| **s as usize >= slots)
        {
            return Err(Error::invalid(format!(
                "key {key} maps to slot {slot}, but the table has only {slots} slots"
            )));
        }
        Ok(HashModel {
            slots,
            mapping: Mapping::Table(table),
        })
    }

    /// Each key's slot drawn independently as `floor(u * n)` from the
    /// generator seeded with `seed`, keys visited in increasing order.
    pub fn random_table(universe: usize, slots: usize, seed: u64) -> Result<Self> {
        if slots == 0 || slots > u32::MAX as usize {
            return Err(Error::invalid(format!("unsupported slot count {slots}")));
        }
        let mut rng = KeyRng::new(seed);
        let table = (0..universe).map(|_| rng.below(slots) as u32).collect();
        Self::from_table(table, slots)
    }

    /// Reads one decimal slot index per line; line `j` (0-based) is key `j`.
    pub fn load_table_file(path: impl AsRef<Path>, slots: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_table(&text, slots)
    }

    pub fn parse_table(text: &str, slots: usize) -> Result<Self> {
        let body = text.trim_end_matches(['\n', '\r']);
        let table = body
            .lines()
            .enumerate()
            .map(|(key, line)| {
                line.trim().parse::<u32>().map_err(|_| {
                    Error::invalid(format!("line {}: expected a slot index, got {line:?}", key + 1))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_table(table, slots)
    }

    pub fn write_table(&self) -> String {
        (0..self.universe())
            .map(|k| format!("{}\n", self.slot_of(k)))
            .collect()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Size `U` of the key universe.
    pub fn universe(&self) -> usize {
        match &self.mapping {
            Mapping::Identity => self.slots,
            Mapping::Table(t) => t.len(),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.mapping, Mapping::Identity)
    }

    /// Slot of `key`. Panics if `key >= universe()`.
    pub fn slot_of(&self, key: usize) -> usize {
        match &self.mapping {
            Mapping::Identity => {
                assert!(key < self.slots, "key {key} outside universe");
                key
            }
            Mapping::Table(t) => t[key] as usize,
        }
    }

    fn check_keys(&self, x: &KeySequence) -> Result<()> {
        let universe = self.universe();
        match x.keys().iter().find(|&&k| k >= universe) {
            Some(k) => Err(Error::invalid(format!(
                "key {k} outside universe of size {universe}"
            ))),
            None => Ok(()),
        }
    }
}

/// Number of keys, with multiplicity, hashed to each slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotCounts {
    counts: Vec<u64>,
    total: u64,
}

impl SlotCounts {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        SlotCounts { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of keys `m`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn slots(&self) -> usize {
        self.counts.len()
    }

    /// Componentwise sum. Both operands must have the same number of slots.
    pub fn merged(&self, other: &SlotCounts) -> Result<SlotCounts> {
        if self.slots() != other.slots() {
            return Err(Error::invalid("slot counts have different lengths"));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SlotCounts::from_counts(counts))
    }
}

/// `p_i = sum of q(x) over keys x with h(x) = i`.
pub fn slot_probabilities(q: &ProbabilityVector, h: &HashModel) -> Result<ProbabilityVector> {
    if q.len() != h.universe() {
        return Err(Error::invalid(format!(
            "key distribution has {} entries but the universe has {}",
            q.len(),
            h.universe()
        )));
    }
    let mut p = vec![0.0; h.slots()];
    for (key, w) in q.weights().iter().enumerate() {
        p[h.slot_of(key)] += w;
    }
    Ok(ProbabilityVector::from_normalized(p))
}

pub fn count_slots(x: &KeySequence, h: &HashModel) -> Result<SlotCounts> {
    h.check_keys(x)?;
    let mut counts = vec![0u64; h.slots()];
    for &k in x.keys() {
        counts[h.slot_of(k)] += 1;
    }
    Ok(SlotCounts {
        counts,
        total: x.len() as u64,
    })
}

/// Chain lengths when repeated keys are stored once.
pub fn distinct_counts(x: &KeySequence, h: &HashModel) -> Result<SlotCounts> {
    h.check_keys(x)?;
    let mut keys = x.keys().to_vec();
    keys.sort_unstable();
    keys.dedup();
    let mut counts = vec![0u64; h.slots()];
    for k in keys {
        counts[h.slot_of(k)] += 1;
    }
    Ok(SlotCounts::from_counts(counts))
}
