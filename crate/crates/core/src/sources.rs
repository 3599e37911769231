//! Piecewise stationary sources and DMC corruption.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`), seeded with
//! `seed_from_u64(seed)`. Block `b` of a piecewise source draws from stream
//! `b`; channel corruption draws from stream [`CHANNEL_STREAM`]. Streams are
//! independent, so the same seed can drive a source and its channel.

use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelModel, SymbolSequence, TOLERANCE};

/// ChaCha stream reserved for channel noise.
pub const CHANNEL_STREAM: u64 = 1 << 63;

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ComponentSpec {
    Iid {
        probs: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        /// Defaults to the stationary distribution of `transition`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
}

impl ComponentSpec {
    pub fn constant(symbol: usize, alphabet_size: usize) -> Self {
        let mut probs = vec![0.0; alphabet_size];
        probs[symbol] = 1.0;
        ComponentSpec::Iid { probs }
    }

    /// Binary symmetric Markov chain flipping state with probability `p`.
    pub fn binary_symmetric_markov(p: f64) -> Self {
        ComponentSpec::Markov { transition: vec![vec![1.0 - p, p], vec![p, 1.0 - p]], initial: None }
    }

    fn validate(&self, alphabet_size: usize) -> Result<()> {
        match self {
            ComponentSpec::Iid { probs } => check_distribution(probs, alphabet_size, "iid"),
            ComponentSpec::Markov { transition, initial } => {
                if transition.len() != alphabet_size {
                    return Err(Error::validation("transition matrix must be square over the alphabet"));
                }
                for row in transition {
                    check_distribution(row, alphabet_size, "transition row")?;
                }
                if let Some(init) = initial {
                    check_distribution(init, alphabet_size, "initial")?;
                }
                Ok(())
            }
        }
    }

    fn sampler(&self) -> Result<ComponentSampler> {
        let weighted = |p: &[f64]| WeightedIndex::new(p.iter().copied()).map_err(|e| Error::validation(e.to_string()));
        Ok(match self {
            ComponentSpec::Iid { probs } => ComponentSampler::Iid(weighted(probs)?),
            ComponentSpec::Markov { transition, initial } => {
                let init = match initial {
                    Some(p) => p.clone(),
                    None => stationary_distribution(transition)?,
                };
                ComponentSampler::Markov {
                    initial: weighted(&init)?,
                    rows: transition.iter().map(|r| weighted(r)).collect::<Result<_>>()?,
                }
            }
        })
    }
}

enum ComponentSampler {
    Iid(WeightedIndex<f64>),
    Markov { initial: WeightedIndex<f64>, rows: Vec<WeightedIndex<f64>> },
}

fn check_distribution(p: &[f64], size: usize, what: &str) -> Result<()> {
    if p.len() != size {
        return Err(Error::validation(format!("{what} distribution has {} entries, expected {size}", p.len())));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::validation(format!("{what} distribution has a negative entry")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > TOLERANCE {
        return Err(Error::validation(format!("{what} distribution sums to {sum}")));
    }
    Ok(())
}

/// Solves `pi P = pi`, `sum pi = 1`. Fails when the chain has no unique
/// stationary distribution.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let q = transition.len();
    let mut a = DMatrix::from_fn(q, q, |i, j| transition[j][i] - if i == j { 1.0 } else { 0.0 });
    for j in 0..q {
        a[(q - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(q);
    b[q - 1] = 1.0;
    let unique = || Error::validation("transition matrix has no unique stationary distribution");
    let pi = a.lu().solve(&b).ok_or_else(unique)?;
    if pi.iter().any(|v| !v.is_finite() || *v < -TOLERANCE) {
        return Err(unique());
    }
    Ok(pi.iter().map(|v| v.max(0.0)).collect())
}

/// Components plus a deterministic switching schedule.
///
/// Block `i` covers 0-based indices `[tau_i, tau_{i+1})` with `tau_0 = 0`
/// and `tau_{r+1} = n`, and follows component `block_labels[i]`. Switch
/// points are given either absolutely (`switch_times`) or as fractions of
/// `n` (`switch_fractions`, rounded to the nearest index).
///
/// By default blocks are independent realisations. With `continuing` set,
/// a Markov block instead continues from the previous block's last symbol
/// using its own transition matrix, i.e. a single chain whose parameters
/// change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSourceSpec {
    pub alphabet_size: usize,
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub switch_times: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_fractions: Option<Vec<f64>>,
    pub block_labels: Vec<usize>,
    #[serde(default)]
    pub continuing: bool,
}

impl PiecewiseSourceSpec {
    /// `0^{n/2} 1^{n/2}` for any `n`.
    pub fn two_block() -> Self {
        Self {
            alphabet_size: 2,
            components: vec![ComponentSpec::constant(0, 2), ComponentSpec::constant(1, 2)],
            switch_times: vec![],
            switch_fractions: Some(vec![0.5]),
            block_labels: vec![0, 1],
            continuing: false,
        }
    }

    /// One binary symmetric Markov chain whose flip probability changes from
    /// `p1` to `p2` after `switch_at` symbols.
    pub fn switching_markov(p1: f64, p2: f64, switch_at: usize) -> Self {
        Self {
            alphabet_size: 2,
            components: vec![ComponentSpec::binary_symmetric_markov(p1), ComponentSpec::binary_symmetric_markov(p2)],
            switch_times: vec![switch_at],
            switch_fractions: None,
            block_labels: vec![0, 1],
            continuing: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet_size == 0 || self.alphabet_size > 256 {
            return Err(Error::validation("alphabet size must be in 1..=256"));
        }
        if self.components.is_empty() {
            return Err(Error::validation("at least one component is required"));
        }
        for c in &self.components {
            c.validate(self.alphabet_size)?;
        }
        let switches = match &self.switch_fractions {
            Some(_) if !self.switch_times.is_empty() => {
                return Err(Error::validation("give switch_times or switch_fractions, not both"));
            }
            Some(f) => {
                if f.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || f.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::validation("switch fractions must increase strictly within (0, 1)"));
                }
                f.len()
            }
            None => {
                if self.switch_times.first() == Some(&0) || self.switch_times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::validation("switch times must be positive and strictly increasing"));
                }
                self.switch_times.len()
            }
        };
        if self.block_labels.len() != switches + 1 {
            return Err(Error::validation(format!(
                "{} switches need {} block labels, got {}",
                switches,
                switches + 1,
                self.block_labels.len()
            )));
        }
        if let Some(&bad) = self.block_labels.iter().find(|&&l| l >= self.components.len()) {
            return Err(Error::validation(format!("block label {bad} names no component")));
        }
        if self.block_labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::validation("adjacent blocks must follow different components"));
        }
        Ok(())
    }

    /// Absolute switch indices for a sequence of length `n`.
    pub fn switch_times_for(&self, n: usize) -> Result<Vec<usize>> {
        let times: Vec<usize> = match &self.switch_fractions {
            Some(f) => f.iter().map(|v| (v * n as f64).round() as usize).collect(),
            None => self.switch_times.clone(),
        };
        if times.first() == Some(&0) || times.last().is_some_and(|&t| t >= n) || times.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::validation(format!("switch times {times:?} do not fit in length {n}")));
        }
        Ok(times)
    }
}

/// Samples `n` symbols from a piecewise stationary source.
pub fn sample_piecewise(spec: &PiecewiseSourceSpec, n: usize, seed: u64) -> Result<SymbolSequence> {
    spec.validate()?;
    let times = spec.switch_times_for(n)?;
    let samplers = spec.components.iter().map(ComponentSpec::sampler).collect::<Result<Vec<_>>>()?;

    let bounds: Vec<usize> = std::iter::once(0).chain(times).chain(std::iter::once(n)).collect();
    let mut out = Vec::with_capacity(n);
    for (b, (w, &label)) in bounds.windows(2).zip(&spec.block_labels).enumerate() {
        let mut rng = rng_for(seed, b as u64);
        let len = w[1] - w[0];
        match &samplers[label] {
            ComponentSampler::Iid(d) => out.extend((0..len).map(|_| d.sample(&mut rng))),
            ComponentSampler::Markov { initial, rows } => {
                let mut state = match out.last() {
                    Some(&prev) if spec.continuing => rows[prev].sample(&mut rng),
                    _ => initial.sample(&mut rng),
                };
                for i in 0..len {
                    if i > 0 {
                        state = rows[state].sample(&mut rng);
                    }
                    out.push(state);
                }
            }
        }
    }
    SymbolSequence::new(out, spec.alphabet_size)
}

/// Passes `x` through the channel, one independent draw per symbol.
pub fn corrupt(x: &SymbolSequence, channel: &ChannelModel, seed: u64) -> Result<SymbolSequence> {
    if x.alphabet_size() > channel.clean_size() {
        return Err(Error::validation("sequence alphabet exceeds channel input alphabet"));
    }
    let pi = channel.pi();
    let rows = (0..channel.clean_size())
        .map(|a| WeightedIndex::new(pi.row(a).iter().copied()).map_err(|e| Error::validation(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = rng_for(seed, CHANNEL_STREAM);
    let out = x.symbols().iter().map(|&a| rows[a].sample(&mut rng)).collect();
    SymbolSequence::new(out, channel.noisy_size())
}
