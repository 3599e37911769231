//! The k-th order DUDE: one fixed single-symbol denoiser per context, chosen
//! by the estimated-loss Bayes response to the context's symbol counts.

use crate::context::ContextPartition;
use crate::error::{Error, Result};
use crate::estimated_loss::{b_h_from_weights, clean_weights};
use crate::exec::Execution;
use crate::model::{ChannelModel, LossMatrix, SymbolSequence};

/// What to emit at the `k` positions on either end, which have no full
/// context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Copy the noisy symbol through. Requires `recon_size >= noisy_size`.
    CopyNoisy,
    Fixed(usize),
}

impl BoundaryRule {
    pub fn default_for(noisy_size: usize, recon_size: usize) -> Self {
        if recon_size >= noisy_size {
            BoundaryRule::CopyNoisy
        } else {
            BoundaryRule::Fixed(0)
        }
    }

    pub(crate) fn resolve(self, noisy_size: usize, recon_size: usize) -> Result<Self> {
        match self {
            BoundaryRule::CopyNoisy if recon_size < noisy_size => {
                Err(Error::validation("cannot copy noisy symbols into a smaller reconstruction alphabet"))
            }
            BoundaryRule::Fixed(s) if s >= recon_size => {
                Err(Error::range(format!("boundary symbol {s} outside reconstruction alphabet")))
            }
            rule => Ok(rule),
        }
    }

    pub(crate) fn emit(self, z: usize) -> usize {
        match self {
            BoundaryRule::CopyNoisy => z,
            BoundaryRule::Fixed(s) => s,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DenoiseOptions {
    /// `None` picks [`BoundaryRule::default_for`].
    pub boundary: Option<BoundaryRule>,
    pub exec: Execution,
}

pub fn dude_denoise(z: &SymbolSequence, k: usize, channel: &ChannelModel, loss: &LossMatrix) -> Result<SymbolSequence> {
    dude_denoise_with(z, k, channel, loss, &DenoiseOptions::default())
}

pub fn dude_denoise_with(
    z: &SymbolSequence,
    k: usize,
    channel: &ChannelModel,
    loss: &LossMatrix,
    opts: &DenoiseOptions,
) -> Result<SymbolSequence> {
    check_compatible(z, channel, loss)?;
    let partition = ContextPartition::build(z, k)?;
    let rules = context_rules(z, &partition, channel, loss, opts.exec);

    let recon = loss.recon_size();
    let boundary = boundary_rule(opts, channel.noisy_size(), recon)?;
    let mut out: Vec<usize> = z.symbols().iter().map(|&s| boundary.emit(s)).collect();
    for t in k + 1..=z.len() - k {
        let slot = partition.slot_of_position(t).expect("interior position");
        out[t - 1] = rules[slot][z.at(t)];
    }
    SymbolSequence::new(out, recon)
}

/// Per-slot reconstruction mapping `z -> B_H(m(c), z)`.
pub(crate) fn context_rules(
    z: &SymbolSequence,
    partition: &ContextPartition,
    channel: &ChannelModel,
    loss: &LossMatrix,
    exec: Execution,
) -> Vec<Vec<usize>> {
    let noisy = channel.noisy_size();
    exec.map((0..partition.num_contexts()).collect(), |slot| {
        let counts = partition.slot_count_vector(z, slot).as_weights();
        let weights = clean_weights(&counts, channel);
        (0..noisy).map(|sym| b_h_from_weights(&weights, sym, channel, loss)).collect()
    })
}

pub(crate) fn boundary_rule(opts: &DenoiseOptions, noisy: usize, recon: usize) -> Result<BoundaryRule> {
    opts.boundary.unwrap_or_else(|| BoundaryRule::default_for(noisy, recon)).resolve(noisy, recon)
}

pub(crate) fn check_compatible(z: &SymbolSequence, channel: &ChannelModel, loss: &LossMatrix) -> Result<()> {
    if z.alphabet_size() != channel.noisy_size() {
        return Err(Error::validation(format!(
            "sequence alphabet {} differs from channel output alphabet {}",
            z.alphabet_size(),
            channel.noisy_size()
        )));
    }
    if loss.clean_size() != channel.clean_size() {
        return Err(Error::validation("loss matrix rows do not match channel input alphabet"));
    }
    Ok(())
}
