//! The (k, m)-S-DUDE.
//!
//! Within every context the interior positions form an independent
//! subsequence. On each one we pick the sequence of single-symbol denoisers,
//! with at most `m` switches, that minimises the cumulative estimated loss.
//! A forward pass fills, for every position `t`, a `(m+1) x N` matrix
//!
//! ```text
//! M_t(i, j) = cost_t(j) + min(M_prev(i, j), M_prev(i-1, argmin_j' M_prev(i-1, j')))
//! ```
//!
//! where `prev` is the previous occurrence of the same context and row `i`
//! allows at most `i` switches (row 0 has no switch term). Each row also
//! keeps its argmin. A backward pass then walks every context from its last
//! occurrence, starting at the best denoiser of the last row, and steps down
//! one row whenever the switch term was strictly cheaper than staying.
//!
//! Matrices live in one arena laid out context by context, so each context
//! owns a contiguous slice and both passes run per context in parallel.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::context::{ContextId, ContextPartition};
use crate::dude::{boundary_rule, check_compatible, DenoiseOptions};
use crate::error::{Error, Result};
use crate::estimated_loss::EstimatedLossTable;
use crate::exec::{split_lengths, Execution};
use crate::model::{ChannelModel, LossMatrix, SymbolSequence};

/// Per-position loss of every single-symbol denoiser.
pub trait StepCosts: Sync {
    /// Costs at 1-based position `t`, indexed by denoiser.
    fn costs(&self, t: usize) -> &[f64];
}

/// `ell(z_t, .)`, the observable estimate.
pub struct EstimatedCosts<'a> {
    table: &'a EstimatedLossTable,
    z: &'a [usize],
}

impl<'a> EstimatedCosts<'a> {
    pub fn new(table: &'a EstimatedLossTable, z: &'a SymbolSequence) -> Self {
        Self { table, z: z.symbols() }
    }
}

impl StepCosts for EstimatedCosts<'_> {
    fn costs(&self, t: usize) -> &[f64] {
        self.table.ell_row(self.z[t - 1])
    }
}

/// Forward-pass matrices for every interior position.
#[derive(Debug, Clone)]
pub struct DpState {
    partition: ContextPartition,
    m: usize,
    rows: usize,
    width: usize,
    values: Vec<f64>,
    argmins: Vec<u32>,
}

impl DpState {
    pub fn partition(&self) -> &ContextPartition {
        &self.partition
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of single-symbol denoisers.
    pub fn width(&self) -> usize {
        self.width
    }

    fn row_index(&self, switches: usize) -> usize {
        switches.min(self.rows - 1)
    }

    fn base(&self, t: usize) -> usize {
        self.partition.rank_of_position(t).expect("interior position")
    }

    /// Minimum cumulative cost over the occurrences of `t`'s context up to
    /// and including `t`, using at most `switches` switches and ending in
    /// `denoiser`.
    pub fn value(&self, t: usize, switches: usize, denoiser: usize) -> f64 {
        let r = self.row_index(switches);
        self.values[(self.base(t) * self.rows + r) * self.width + denoiser]
    }

    /// Cheapest final denoiser for the given switch budget at `t`.
    pub fn argmin(&self, t: usize, switches: usize) -> usize {
        let r = self.row_index(switches);
        self.argmins[self.base(t) * self.rows + r] as usize
    }

    pub fn context_minimum(&self, id: ContextId) -> Option<f64> {
        let last = *self.partition.occurrences(id).last()?;
        Some(self.value(last, self.m, self.argmin(last, self.m)))
    }

    /// Sum over contexts (ascending id) of each context's optimum.
    pub fn minimum(&self) -> f64 {
        self.partition.context_ids().iter().map(|&id| self.context_minimum(id).expect("occurring context")).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Run {
    /// 1-based position where this denoiser takes over.
    pub start: usize,
    pub denoiser: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextSchedule {
    pub occurrences: usize,
    pub switches: usize,
    pub runs: Vec<Run>,
}

/// A denoiser for every interior position, piecewise constant along each
/// context's subsequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchingSchedule {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    #[serde(skip)]
    assignment: Vec<u32>,
    pub contexts: BTreeMap<ContextId, ContextSchedule>,
}

impl SwitchingSchedule {
    /// Denoiser index used at 1-based interior position `t`.
    pub fn denoiser_at(&self, t: usize) -> Option<usize> {
        (t > self.k && t <= self.n - self.k).then(|| self.assignment[t - self.k - 1] as usize)
    }

    /// Denoiser indices for positions `k+1..=n-k`.
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn switches(&self, id: ContextId) -> Option<usize> {
        self.contexts.get(&id).map(|c| c.switches)
    }

    pub fn total_switches(&self) -> usize {
        self.contexts.values().map(|c| c.switches).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_m(n: usize, k: usize, m: usize) -> Result<()> {
    if n <= 2 * k {
        return Err(Error::SequenceTooShort { n, k });
    }
    let limit = (n - 2 * k) / 2;
    if m > limit {
        return Err(Error::range(format!("m = {m} exceeds floor((n - 2k) / 2) = {limit}")));
    }
    Ok(())
}

/// Forward pass on the estimated loss of `z`.
pub fn forward_pass(z: &SymbolSequence, k: usize, m: usize, tables: &EstimatedLossTable) -> Result<DpState> {
    forward_pass_exec(z, k, m, tables, Execution::default())
}

pub fn forward_pass_exec(
    z: &SymbolSequence,
    k: usize,
    m: usize,
    tables: &EstimatedLossTable,
    exec: Execution,
) -> Result<DpState> {
    check_m(z.len(), k, m)?;
    if z.alphabet_size() != tables.alphabets().noisy_size {
        return Err(Error::validation("sequence alphabet differs from the noisy alphabet"));
    }
    let partition = ContextPartition::build(z, k)?;
    let costs = EstimatedCosts::new(tables, z);
    Ok(run_forward(partition, m, tables.denoiser_count(), &costs, exec))
}

/// Fills the DP arena for an arbitrary per-step cost. No bound on `m` is
/// enforced here; rows beyond the longest subsequence are never allocated.
pub fn run_forward(
    partition: ContextPartition,
    m: usize,
    width: usize,
    costs: &impl StepCosts,
    exec: Execution,
) -> DpState {
    let lengths = partition.slot_lengths();
    let longest = lengths.iter().copied().max().unwrap_or(1);
    let rows = m.min(longest.saturating_sub(1)) + 1;
    let interior = partition.interior_len();
    let mut values = vec![0.0; interior * rows * width];
    let mut argmins = vec![0u32; interior * rows];

    let value_lengths: Vec<usize> = lengths.iter().map(|l| l * rows * width).collect();
    let arg_lengths: Vec<usize> = lengths.iter().map(|l| l * rows).collect();
    let jobs: Vec<_> = split_lengths(&mut values, &value_lengths)
        .into_iter()
        .zip(split_lengths(&mut argmins, &arg_lengths))
        .enumerate()
        .collect();
    exec.for_each(jobs, |(slot, (vals, args))| {
        forward_context(partition.slot_occurrences(slot), rows, width, costs, vals, args)
    });

    DpState { partition, m, rows, width, values, argmins }
}

fn forward_context(
    positions: &[usize],
    rows: usize,
    width: usize,
    costs: &impl StepCosts,
    vals: &mut [f64],
    args: &mut [u32],
) {
    let block = rows * width;
    let mut switch_in = vec![f64::INFINITY; rows];
    for (idx, &t) in positions.iter().enumerate() {
        let cost = costs.costs(t);
        debug_assert_eq!(cost.len(), width);
        let (done, rest) = vals.split_at_mut(idx * block);
        let cur = &mut rest[..block];
        if idx == 0 {
            for row in cur.chunks_exact_mut(width) {
                row.copy_from_slice(cost);
            }
        } else {
            let prev = &done[(idx - 1) * block..];
            let prev_args = &args[(idx - 1) * rows..idx * rows];
            for i in 1..rows {
                switch_in[i] = prev[(i - 1) * width + prev_args[i - 1] as usize];
            }
            for i in 0..rows {
                let prev_row = &prev[i * width..(i + 1) * width];
                let cur_row = &mut cur[i * width..(i + 1) * width];
                let sw = switch_in[i];
                for ((out, &stay), &c) in cur_row.iter_mut().zip(prev_row).zip(cost) {
                    let best = if sw < stay { sw } else { stay };
                    *out = c + best;
                }
            }
        }
        for (i, row) in cur.chunks_exact(width).enumerate() {
            args[idx * rows + i] = row_argmin(row) as u32;
        }
    }
}

fn row_argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v < row[best] {
            best = j;
        }
    }
    best
}

/// Recovers an optimal schedule from a completed forward pass.
pub fn backward_pass(state: &DpState) -> SwitchingSchedule {
    backward_pass_exec(state, Execution::default())
}

pub fn backward_pass_exec(state: &DpState, exec: Execution) -> SwitchingSchedule {
    let p = &state.partition;
    let (rows, width) = (state.rows, state.width);
    let lengths = p.slot_lengths();
    let mut grouped = vec![0u32; p.interior_len()];
    let mut offset = 0;
    let jobs: Vec<_> = split_lengths(&mut grouped, &lengths)
        .into_iter()
        .enumerate()
        .map(|(slot, chunk)| {
            let start = offset;
            offset += chunk.len();
            (slot, start, chunk)
        })
        .collect();
    exec.for_each(jobs, |(_, start, chunk)| {
        let len = chunk.len();
        let vals = &state.values[start * rows * width..(start + len) * rows * width];
        let args = &state.argmins[start * rows..(start + len) * rows];
        backward_context(rows, width, vals, args, chunk)
    });

    let mut assignment = vec![0u32; p.interior_len()];
    let mut contexts = BTreeMap::new();
    for (slot, &id) in p.context_ids().iter().enumerate() {
        let positions = p.slot_occurrences(slot);
        let mut runs: Vec<Run> = Vec::new();
        for &t in positions {
            let d = grouped[p.rank_of_position(t).expect("interior")];
            assignment[t - p.k() - 1] = d;
            if runs.last().map(|r| r.denoiser) != Some(d as usize) {
                runs.push(Run { start: t, denoiser: d as usize });
            }
        }
        let switches = runs.len() - 1;
        contexts.insert(id, ContextSchedule { occurrences: positions.len(), switches, runs });
    }
    SwitchingSchedule { k: p.k(), m: state.m, n: p.n(), assignment, contexts }
}

fn backward_context(rows: usize, width: usize, vals: &[f64], args: &[u32], out: &mut [u32]) {
    let len = out.len();
    let block = rows * width;
    let mut r = rows - 1;
    let mut q = args[(len - 1) * rows + r] as usize;
    out[len - 1] = q as u32;
    for idx in (0..len - 1).rev() {
        // The later occurrence was reached from (r, q) here unless the switch
        // term into row r was strictly cheaper.
        if r > 0 {
            let a = args[idx * rows + r - 1] as usize;
            let switch_in = vals[idx * block + (r - 1) * width + a];
            let stay = vals[idx * block + r * width + q];
            if switch_in < stay {
                r -= 1;
                q = a;
            }
        }
        out[idx] = q as u32;
    }
}

#[derive(Debug, Clone)]
pub struct SdudeOutput {
    pub output: SymbolSequence,
    pub schedule: SwitchingSchedule,
    /// Normalised estimated cumulative loss of the schedule over the
    /// interior, which is the minimum over all admissible schedules.
    pub estimated_loss: f64,
    /// Unnormalised forward-pass minimum.
    pub forward_minimum: f64,
}

pub fn sdude_denoise(
    z: &SymbolSequence,
    k: usize,
    m: usize,
    channel: &ChannelModel,
    loss: &LossMatrix,
) -> Result<SdudeOutput> {
    sdude_denoise_with(z, k, m, channel, loss, &DenoiseOptions::default())
}

pub fn sdude_denoise_with(
    z: &SymbolSequence,
    k: usize,
    m: usize,
    channel: &ChannelModel,
    loss: &LossMatrix,
    opts: &DenoiseOptions,
) -> Result<SdudeOutput> {
    check_compatible(z, channel, loss)?;
    check_m(z.len(), k, m)?;
    let tables = EstimatedLossTable::build(channel, loss)?;
    let boundary = boundary_rule(opts, channel.noisy_size(), loss.recon_size())?;
    let state = forward_pass_exec(z, k, m, &tables, opts.exec)?;
    let schedule = backward_pass_exec(&state, opts.exec);
    let forward_minimum = state.minimum();

    let denoisers = tables.denoisers();
    let mut out: Vec<usize> = z.symbols().iter().map(|&s| boundary.emit(s)).collect();
    for t in k + 1..=z.len() - k {
        let s = schedule.denoiser_at(t).expect("interior");
        out[t - 1] = denoisers[s].mapping()[z.at(t)];
    }
    Ok(SdudeOutput {
        output: SymbolSequence::new(out, loss.recon_size())?,
        estimated_loss: forward_minimum / (z.len() - 2 * k) as f64,
        forward_minimum,
        schedule,
    })
}
