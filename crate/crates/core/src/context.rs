//! Two-sided contexts and the partition of interior positions by context.
//!
//! The context of position `t` is `(z_{t-k}..z_{t-1}, z_{t+1}..z_{t+k})`,
//! packed as base-`|Z|` digits (left block first, most significant digit
//! first) into a [`ContextId`]. Only contexts that actually occur are stored,
//! in compressed form: positions grouped by context, contexts sorted by id.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::SymbolSequence;

pub type ContextId = u64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextPartition {
    k: usize,
    n: usize,
    noisy_size: usize,
    /// Sorted, distinct context ids; the index into this list is the slot.
    ids: Vec<ContextId>,
    /// `offsets[slot]..offsets[slot + 1]` indexes `order`.
    offsets: Vec<usize>,
    /// 1-based interior positions grouped by slot, increasing within a slot.
    order: Vec<usize>,
    /// Slot of each interior position (`t - k - 1`).
    slot_of: Vec<u32>,
    /// Index into `order` of each interior position (`t - k - 1`).
    rank_of: Vec<u32>,
}

impl ContextPartition {
    pub fn build(z: &SymbolSequence, k: usize) -> Result<Self> {
        let n = z.len();
        if n <= 2 * k {
            return Err(Error::SequenceTooShort { n, k });
        }
        let q = z.alphabet_size() as u64;
        u32::try_from(2 * k)
            .ok()
            .and_then(|e| q.checked_pow(e))
            .ok_or_else(|| Error::range(format!("{q}^{} contexts do not fit in 64 bits", 2 * k)))?;
        let sym = z.symbols();
        let labels = (k..n - k)
            .map(|i| {
                let left = &sym[i - k..i];
                let right = &sym[i + 1..i + 1 + k];
                let id = left.iter().chain(right).fold(0u64, |acc, &s| acc * q + s as u64);
                (i + 1, id)
            })
            .collect();
        Self::from_labels(k, n, z.alphabet_size(), labels)
    }

    /// Assembles a partition from `(position, context id)` pairs given in any
    /// order. Positions must cover the interior `k+1..=n-k` exactly once.
    pub fn from_labels(k: usize, n: usize, noisy_size: usize, mut labels: Vec<(usize, ContextId)>) -> Result<Self> {
        if n <= 2 * k {
            return Err(Error::SequenceTooShort { n, k });
        }
        let interior = n - 2 * k;
        if labels.len() != interior {
            return Err(Error::validation(format!("expected {interior} labelled positions, got {}", labels.len())));
        }
        labels.sort_unstable_by_key(|&(t, id)| (id, t));

        let mut ids = Vec::new();
        let mut offsets = Vec::new();
        let mut order = Vec::with_capacity(interior);
        let mut slot_of = vec![u32::MAX; interior];
        let mut rank_of = vec![0u32; interior];
        for (t, id) in labels {
            if t <= k || t > n - k || slot_of[t - k - 1] != u32::MAX {
                return Err(Error::validation(format!("position {t} invalid or repeated")));
            }
            if ids.last() != Some(&id) {
                ids.push(id);
                offsets.push(order.len());
            }
            slot_of[t - k - 1] = (ids.len() - 1) as u32;
            rank_of[t - k - 1] = order.len() as u32;
            order.push(t);
        }
        offsets.push(order.len());
        Ok(Self { k, n, noisy_size, ids, offsets, order, slot_of, rank_of })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn noisy_size(&self) -> usize {
        self.noisy_size
    }

    /// Number of interior positions, `n - 2k`.
    pub fn interior_len(&self) -> usize {
        self.order.len()
    }

    /// Distinct contexts that occur, ascending.
    pub fn context_ids(&self) -> &[ContextId] {
        &self.ids
    }

    pub fn num_contexts(&self) -> usize {
        self.ids.len()
    }

    pub fn slot(&self, id: ContextId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Positions with context `id`, increasing. Empty if it never occurs.
    pub fn occurrences(&self, id: ContextId) -> &[usize] {
        self.slot(id).map_or(&[], |s| self.slot_occurrences(s))
    }

    pub fn slot_occurrences(&self, slot: usize) -> &[usize] {
        &self.order[self.offsets[slot]..self.offsets[slot + 1]]
    }

    /// Occurrence counts per slot.
    pub fn slot_lengths(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// All interior positions grouped by slot.
    pub fn grouped_positions(&self) -> &[usize] {
        &self.order
    }

    pub fn context_of(&self, t: usize) -> Option<ContextId> {
        self.slot_of_position(t).map(|s| self.ids[s])
    }

    pub fn slot_of_position(&self, t: usize) -> Option<usize> {
        self.interior_index(t).map(|i| self.slot_of[i] as usize)
    }

    /// Index of position `t` within [`Self::grouped_positions`].
    pub fn rank_of_position(&self, t: usize) -> Option<usize> {
        self.interior_index(t).map(|i| self.rank_of[i] as usize)
    }

    fn interior_index(&self, t: usize) -> Option<usize> {
        (t > self.k && t <= self.n - self.k).then(|| t - self.k - 1)
    }

    /// Splits a context id back into its left and right symbol blocks.
    pub fn decode(&self, id: ContextId) -> (Vec<usize>, Vec<usize>) {
        let q = self.noisy_size as u64;
        let mut digits = vec![0usize; 2 * self.k];
        let mut rest = id;
        for d in digits.iter_mut().rev() {
            *d = (rest % q) as usize;
            rest /= q;
        }
        let right = digits.split_off(self.k);
        (digits, right)
    }

    /// Symbol histogram of the positions carrying context `id`.
    pub fn count_vector(&self, z: &SymbolSequence, id: ContextId) -> CountVector {
        let mut counts = vec![0u64; self.noisy_size];
        for &t in self.occurrences(id) {
            counts[z.at(t)] += 1;
        }
        CountVector { counts }
    }

    pub fn slot_count_vector(&self, z: &SymbolSequence, slot: usize) -> CountVector {
        let mut counts = vec![0u64; self.noisy_size];
        for &t in self.slot_occurrences(slot) {
            counts[z.at(t)] += 1;
        }
        CountVector { counts }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    pub counts: Vec<u64>,
}

impl CountVector {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_weights(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

/// Maps each distinct context to its occurrences without going through the
/// packed representation. Used as an independent cross-check.
pub(crate) fn naive_contexts(z: &[usize], k: usize) -> HashMap<Vec<usize>, Vec<usize>> {
    let mut map: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for i in k..z.len().saturating_sub(k) {
        let key: Vec<usize> = z[i - k..i].iter().chain(&z[i + 1..i + 1 + k]).copied().collect();
        map.entry(key).or_default().push(i + 1);
    }
    map
}
