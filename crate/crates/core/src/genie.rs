//! Clean-data (genie) targets and an exhaustive oracle.
//!
//! `genie_min_loss` is the best normalised true loss achievable by any
//! k-th order schedule with at most `m` switches per context, which the
//! S-DUDE is measured against. It runs the very same dynamic program as the
//! denoiser, fed with `Lambda(x_t, s(z_t))` instead of `ell(z_t, s)`.
//!
//! `brute_force_min` enumerates the schedule class directly and shares no
//! code with the dynamic program.

use std::collections::BTreeMap;

use crate::context::{naive_contexts, ContextPartition};
use crate::error::{Error, Result};
use crate::estimated_loss::EstimatedLossTable;
use crate::exec::Execution;
use crate::model::{Alphabets, LossMatrix, SingleSymbolDenoiser, SymbolSequence};
use crate::sdude::{backward_pass_exec, run_forward, StepCosts, SwitchingSchedule};

/// Per-candidate enumeration budget for [`brute_force_min`].
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

/// `Lambda(x_t, s(z_t))` for every denoiser `s`, tabulated per `(x, z)`.
pub struct TrueCosts<'a> {
    rows: Vec<f64>,
    width: usize,
    noisy: usize,
    x: &'a [usize],
    z: &'a [usize],
}

impl<'a> TrueCosts<'a> {
    pub fn new(
        x: &'a SymbolSequence,
        z: &'a SymbolSequence,
        loss: &LossMatrix,
        denoisers: &[SingleSymbolDenoiser],
    ) -> Self {
        let (clean, noisy, width) = (loss.clean_size(), z.alphabet_size(), denoisers.len());
        let mut rows = Vec::with_capacity(clean * noisy * width);
        for a in 0..clean {
            for b in 0..noisy {
                rows.extend(denoisers.iter().map(|s| loss.get(a, s.mapping()[b])));
            }
        }
        Self { rows, width, noisy, x: x.symbols(), z: z.symbols() }
    }
}

impl StepCosts for TrueCosts<'_> {
    fn costs(&self, t: usize) -> &[f64] {
        let row = self.x[t - 1] * self.noisy + self.z[t - 1];
        &self.rows[row * self.width..(row + 1) * self.width]
    }
}

fn genie_alphabets(x: &SymbolSequence, z: &SymbolSequence, loss: &LossMatrix) -> Result<Alphabets> {
    if x.len() != z.len() {
        return Err(Error::validation(format!("clean length {} differs from noisy length {}", x.len(), z.len())));
    }
    if x.alphabet_size() != loss.clean_size() {
        return Err(Error::validation("clean alphabet does not match loss matrix rows"));
    }
    Alphabets::new(loss.clean_size(), z.alphabet_size(), loss.recon_size())
}

/// `D_{k,m}(x, z)` and a schedule attaining it. `m = 0` gives `D_k`.
pub fn genie_min_loss(
    x: &SymbolSequence,
    z: &SymbolSequence,
    k: usize,
    m: usize,
    loss: &LossMatrix,
) -> Result<(f64, SwitchingSchedule)> {
    genie_min_loss_exec(x, z, k, m, loss, Execution::default())
}

pub fn genie_min_loss_exec(
    x: &SymbolSequence,
    z: &SymbolSequence,
    k: usize,
    m: usize,
    loss: &LossMatrix,
    exec: Execution,
) -> Result<(f64, SwitchingSchedule)> {
    let alphabets = genie_alphabets(x, z, loss)?;
    let denoisers = SingleSymbolDenoiser::enumerate(&alphabets)?;
    let partition = ContextPartition::build(z, k)?;
    let costs = TrueCosts::new(x, z, loss, &denoisers);
    let state = run_forward(partition, m, denoisers.len(), &costs, exec);
    let schedule = backward_pass_exec(&state, exec);
    Ok((state.minimum() / (z.len() - 2 * k) as f64, schedule))
}

/// Which per-step loss [`brute_force_min`] minimises.
#[derive(Debug, Clone, Copy)]
pub enum LossMode<'a> {
    /// `ell(z_t, s)`.
    Estimated,
    /// `Lambda(x_t, s(z_t))`.
    True { x: &'a SymbolSequence, loss: &'a LossMatrix },
}

/// Exact unnormalised minimum over the k-th order schedules with at most
/// `min(n(c), m)` switches per context, by exhaustive enumeration.
///
/// Contexts are summed in lexicographic order of their symbol blocks, and
/// losses along a context in time order, which matches the summation order
/// of the dynamic program.
pub fn brute_force_min(
    z: &SymbolSequence,
    k: usize,
    m: usize,
    tables: &EstimatedLossTable,
    mode: LossMode<'_>,
) -> Result<f64> {
    let n = z.len();
    if n <= 2 * k {
        return Err(Error::SequenceTooShort { n, k });
    }
    let denoisers = tables.denoisers();
    let cost = |t: usize, s: usize| -> f64 {
        let zt = z.symbols()[t - 1];
        match mode {
            LossMode::Estimated => tables.ell(zt, s),
            LossMode::True { x, loss } => loss.get(x.symbols()[t - 1], denoisers[s].mapping()[zt]),
        }
    };
    if let LossMode::True { x, .. } = mode {
        if x.len() != n {
            return Err(Error::validation("clean and noisy lengths differ"));
        }
    }

    let groups: BTreeMap<_, _> = naive_contexts(z.symbols(), k).into_iter().collect();
    let big_n = denoisers.len() as u128;
    for positions in groups.values() {
        let size = class_size(positions.len(), m.min(positions.len()), big_n);
        if size > BRUTE_FORCE_LIMIT {
            return Err(Error::TooLarge { size, limit: BRUTE_FORCE_LIMIT });
        }
    }

    let mut total = 0.0;
    for positions in groups.values() {
        let budget = m.min(positions.len());
        let mut search = Search { positions, width: denoisers.len(), cost: &cost, best: f64::INFINITY };
        for first in 0..denoisers.len() {
            search.run(1, first, budget, cost(positions[0], first));
        }
        total += search.best;
    }
    Ok(total)
}

struct Search<'c, F> {
    positions: &'c [usize],
    width: usize,
    cost: &'c F,
    best: f64,
}

impl<F: Fn(usize, usize) -> f64> Search<'_, F> {
    fn run(&mut self, idx: usize, current: usize, budget: usize, partial: f64) {
        if idx == self.positions.len() {
            if partial < self.best {
                self.best = partial;
            }
            return;
        }
        let t = self.positions[idx];
        self.run(idx + 1, current, budget, partial + (self.cost)(t, current));
        if budget > 0 {
            for next in (0..self.width).filter(|&s| s != current) {
                self.run(idx + 1, next, budget - 1, partial + (self.cost)(t, next));
            }
        }
    }
}

/// `sum_{j <= budget} C(len - 1, j) * N * (N - 1)^j`.
pub fn class_size(len: usize, budget: usize, big_n: u128) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    let mut pow: u128 = 1;
    for j in 0..=budget.min(len.saturating_sub(1)) {
        if j > 0 {
            binom = binom * (len - j) as u128 / j as u128;
            pow = pow.saturating_mul(big_n.saturating_sub(1));
        }
        total = total.saturating_add(binom.saturating_mul(big_n).saturating_mul(pow));
    }
    total
}
