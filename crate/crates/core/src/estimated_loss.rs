//! Unbiased estimates of the loss of a single-symbol denoiser from the noisy
//! symbol alone, plus Bayes responses under both the true and the estimated
//! loss.
//!
//! For a denoiser `s`, `rho_x(s) = sum_z Lambda(x, s(z)) Pi(x, z)` is its
//! expected loss when the clean symbol is `x`, and
//! `ell(z, s) = h(z)^T rho(s)` (with `h(z)` the `z`-th row of the right
//! inverse) satisfies `E[ell(Z, s) | X = x] = rho_x(s)`. Entries of `ell` are
//! signed.
//!
//! Every argmin here resolves ties towards the smallest index, using exact
//! `f64` comparison.

use crate::error::{Error, Result};
use crate::model::{Alphabets, ChannelModel, LossMatrix, SingleSymbolDenoiser};

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedLossTable {
    alphabets: Alphabets,
    denoisers: Vec<SingleSymbolDenoiser>,
    /// `noisy_size x N`, row-major.
    ell: Vec<f64>,
    /// `clean_size x N`, row-major.
    rho: Vec<f64>,
    ell_max: f64,
}

impl EstimatedLossTable {
    pub fn build(channel: &ChannelModel, loss: &LossMatrix) -> Result<Self> {
        if channel.clean_size() != loss.clean_size() {
            return Err(Error::validation(format!(
                "channel has {} clean symbols but loss matrix has {} rows",
                channel.clean_size(),
                loss.clean_size()
            )));
        }
        let alphabets = Alphabets::new(channel.clean_size(), channel.noisy_size(), loss.recon_size())?;
        let denoisers = SingleSymbolDenoiser::enumerate(&alphabets)?;
        let n = denoisers.len();
        let (pi, h) = (channel.pi(), channel.h());

        let mut rho = vec![0.0; alphabets.clean_size * n];
        for x in 0..alphabets.clean_size {
            for (j, s) in denoisers.iter().enumerate() {
                rho[x * n + j] = (0..alphabets.noisy_size).map(|z| loss.get(x, s.mapping()[z]) * pi[(x, z)]).sum();
            }
        }

        let mut ell = vec![0.0; alphabets.noisy_size * n];
        for z in 0..alphabets.noisy_size {
            for j in 0..n {
                ell[z * n + j] = (0..alphabets.clean_size).map(|x| h[(z, x)] * rho[x * n + j]).sum();
            }
        }

        let hi = ell.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ell.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Self { alphabets, denoisers, ell, rho, ell_max: hi - lo })
    }

    pub fn alphabets(&self) -> &Alphabets {
        &self.alphabets
    }

    pub fn denoisers(&self) -> &[SingleSymbolDenoiser] {
        &self.denoisers
    }

    pub fn denoiser_count(&self) -> usize {
        self.denoisers.len()
    }

    pub fn ell(&self, z: usize, s: usize) -> f64 {
        self.ell[z * self.denoisers.len() + s]
    }

    /// Estimated losses of every denoiser for noisy symbol `z`.
    pub fn ell_row(&self, z: usize) -> &[f64] {
        let n = self.denoisers.len();
        &self.ell[z * n..(z + 1) * n]
    }

    pub fn rho(&self, x: usize, s: usize) -> f64 {
        self.rho[x * self.denoisers.len() + s]
    }

    /// Spread of the estimated loss, `max ell - min ell`.
    pub fn ell_max(&self) -> f64 {
        self.ell_max
    }

    /// `max_{x,s} |sum_z Pi(x,z) ell(z,s) - rho_x(s)|`.
    pub fn unbiasedness_residual(&self, channel: &ChannelModel) -> f64 {
        let pi = channel.pi();
        let mut worst: f64 = 0.0;
        for x in 0..self.alphabets.clean_size {
            for s in 0..self.denoisers.len() {
                let expected: f64 = (0..self.alphabets.noisy_size).map(|z| pi[(x, z)] * self.ell(z, s)).sum();
                worst = worst.max((expected - self.rho(x, s)).abs());
            }
        }
        worst
    }

    /// Mapping-level argmin `argmin_s sum_z xi_z ell(z, s)`.
    pub fn best_denoiser(&self, xi: &[f64]) -> usize {
        let n = self.denoisers.len();
        let mut best = (0, f64::INFINITY);
        for s in 0..n {
            let score: f64 = xi.iter().enumerate().map(|(z, w)| w * self.ell(z, s)).sum();
            if score < best.1 {
                best = (s, score);
            }
        }
        best.0
    }
}

fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// `argmin_a zeta^T Lambda[:, a]`, smallest action on ties.
pub fn bayes_response(zeta: &[f64], loss: &LossMatrix) -> usize {
    argmin(action_costs(zeta, loss)).0
}

/// `min_a zeta^T Lambda[:, a]`.
pub fn bayes_envelope(zeta: &[f64], loss: &LossMatrix) -> f64 {
    argmin(action_costs(zeta, loss)).1
}

fn action_costs<'a>(zeta: &'a [f64], loss: &'a LossMatrix) -> impl Iterator<Item = f64> + 'a {
    (0..loss.recon_size()).map(move |a| zeta.iter().enumerate().map(|(x, w)| w * loss.get(x, a)).sum())
}

/// Per-symbol Bayes response under the estimated loss:
/// `argmin_xhat xi^T H [lambda_xhat (.) pi_z]`.
pub fn b_h_rule(xi: &[f64], z: usize, channel: &ChannelModel, loss: &LossMatrix) -> usize {
    let weights = clean_weights(xi, channel);
    b_h_from_weights(&weights, z, channel, loss)
}

/// `xi^T H`, the clean-alphabet weight vector shared by every noisy symbol.
pub(crate) fn clean_weights(xi: &[f64], channel: &ChannelModel) -> Vec<f64> {
    let h = channel.h();
    (0..channel.clean_size()).map(|x| xi.iter().enumerate().map(|(z, w)| w * h[(z, x)]).sum()).collect()
}

pub(crate) fn b_h_from_weights(weights: &[f64], z: usize, channel: &ChannelModel, loss: &LossMatrix) -> usize {
    let pi = channel.pi();
    argmin(
        (0..loss.recon_size())
            .map(|xhat| weights.iter().enumerate().map(|(x, w)| w * loss.get(x, xhat) * pi[(x, z)]).sum()),
    )
    .0
}
