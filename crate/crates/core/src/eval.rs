//! Loss accounting and the experiment harnesses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::dude::{dude_denoise_with, DenoiseOptions};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::genie::genie_min_loss_exec;
use crate::hmm::{fb_posteriors, map_denoise, switching_segments};
use crate::model::{ChannelModel, LossMatrix, SymbolSequence};
use crate::sdude::sdude_denoise_with;
use crate::sources::{corrupt, rng_for, sample_piecewise, PiecewiseSourceSpec};

/// Average of `Lambda(x_t, xhat_t)` over 1-based positions `from..=to`.
pub fn cumulative_loss(
    x: &SymbolSequence,
    xhat: &SymbolSequence,
    loss: &LossMatrix,
    from: usize,
    to: usize,
) -> Result<f64> {
    if x.len() != xhat.len() {
        return Err(Error::validation("clean and reconstructed lengths differ"));
    }
    if from == 0 || from > to || to > x.len() {
        return Err(Error::range(format!("range {from}..={to} invalid for length {}", x.len())));
    }
    let total: f64 = (from..=to).map(|t| loss.get(x.at(t), xhat.at(t))).sum();
    Ok(total / (to - from + 1) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenoiserResult {
    pub denoiser: String,
    pub seed: u64,
    pub k: Option<usize>,
    pub m: Option<usize>,
    /// Normalised loss over the whole sequence, boundary included.
    pub loss: f64,
    /// Normalised loss over positions `k+1..=n-k`.
    pub interior_loss: f64,
    pub estimated_loss: Option<f64>,
    /// Genie target `D_{k,m}` on the same interior.
    pub genie: Option<f64>,
    /// `loss / delta`, rounded to 4 decimals.
    pub ber_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub experiment: String,
    pub n: usize,
    pub channel: String,
    pub loss: String,
    pub seeds: Vec<u64>,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub results: Vec<DenoiserResult>,
}

impl EvalReport {
    pub fn find(&self, denoiser: &str, seed: u64) -> Option<&DenoiserResult> {
        self.results.iter().find(|r| r.denoiser == denoiser && r.seed == seed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("experiment,seed,denoiser,k,m,loss,interior_loss,estimated_loss,genie,ber_ratio\n");
        for r in &self.results {
            writeln!(
                out,
                "{},{},\"{}\",{},{},{},{},{},{},{}",
                self.experiment,
                r.seed,
                r.denoiser.replace('"', "\"\""),
                opt_u(r.k),
                opt_u(r.m),
                r.loss,
                r.interior_loss,
                opt(r.estimated_loss),
                opt(r.genie),
                r.ber_ratio.map(|v| format!("{v:.4}")).unwrap_or_default(),
            )
            .unwrap();
        }
        out
    }
}

fn ber_ratio(ber: f64, delta: f64) -> Option<f64> {
    if delta > 0.0 {
        Some((ber / delta * 1e4).round() / 1e4)
    } else if ber == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

struct Scored<'a> {
    x: &'a SymbolSequence,
    loss: &'a LossMatrix,
    delta: f64,
    seed: u64,
}

impl Scored<'_> {
    fn result(
        &self,
        denoiser: String,
        xhat: &SymbolSequence,
        k: Option<usize>,
        m: Option<usize>,
    ) -> Result<DenoiserResult> {
        let n = self.x.len();
        let kk = k.unwrap_or(0);
        let full = cumulative_loss(self.x, xhat, self.loss, 1, n)?;
        Ok(DenoiserResult {
            denoiser,
            seed: self.seed,
            k,
            m,
            loss: full,
            interior_loss: cumulative_loss(self.x, xhat, self.loss, kk + 1, n - kk)?,
            estimated_loss: None,
            genie: None,
            ber_ratio: ber_ratio(full, self.delta),
        })
    }
}

/// `0^{n/2} 1^{n/2}` through BSC(delta), denoised by DUDE(k) and
/// S-DUDE(k, m), once per seed.
pub fn run_two_block_experiment(
    n: usize,
    delta: f64,
    k: usize,
    m: usize,
    seeds: &[u64],
    exec: Execution,
) -> Result<EvalReport> {
    let channel = ChannelModel::bsc(delta)?;
    let loss = LossMatrix::hamming(2)?;
    let x = sample_piecewise(&PiecewiseSourceSpec::two_block(), n, 0)?;
    let inner = DenoiseOptions { exec: Execution::Sequential, ..Default::default() };

    let per_seed = exec.map(seeds.to_vec(), |seed| -> Result<Vec<DenoiserResult>> {
        let z = corrupt(&x, &channel, seed)?;
        let score = Scored { x: &x, loss: &loss, delta, seed };

        let dude = dude_denoise_with(&z, k, &channel, &loss, &inner)?;
        let mut dude_row = score.result(format!("dude(k={k})"), &dude, Some(k), Some(0))?;
        dude_row.genie = Some(genie_min_loss_exec(&x, &z, k, 0, &loss, Execution::Sequential)?.0);

        let s = sdude_denoise_with(&z, k, m, &channel, &loss, &inner)?;
        let mut s_row = score.result(format!("sdude(k={k},m={m})"), &s.output, Some(k), Some(m))?;
        s_row.estimated_loss = Some(s.estimated_loss);
        s_row.genie = Some(genie_min_loss_exec(&x, &z, k, m, &loss, Execution::Sequential)?.0);
        Ok(vec![dude_row, s_row])
    });

    let mut results = Vec::new();
    for r in per_seed {
        results.extend(r?);
    }
    let parameters = BTreeMap::from([
        ("delta".to_string(), serde_json::json!(delta)),
        ("k".to_string(), serde_json::json!(k)),
        ("m".to_string(), serde_json::json!(m)),
    ]);
    Ok(EvalReport {
        experiment: "two-block".into(),
        n,
        channel: format!("bsc:{delta}"),
        loss: "hamming".into(),
        seeds: seeds.to_vec(),
        parameters,
        results,
    })
}

/// Binary symmetric Markov chain switching from `p1` to `p2` after
/// `switch_at` symbols, through BSC(delta). Reports the genie-aided
/// forward-backward MAP denoiser, DUDE for every `k` in `k_list`, and
/// S-DUDE for every `(k, m)` in `k_list x m_list`.
#[allow(clippy::too_many_arguments)]
pub fn run_switching_hmm_experiment(
    n: usize,
    delta: f64,
    p1: f64,
    p2: f64,
    switch_at: usize,
    k_list: &[usize],
    m_list: &[usize],
    seed: u64,
    exec: Execution,
) -> Result<EvalReport> {
    let channel = ChannelModel::bsc(delta)?;
    let loss = LossMatrix::hamming(2)?;
    let x = sample_piecewise(&PiecewiseSourceSpec::switching_markov(p1, p2, switch_at), n, seed)?;
    let z = corrupt(&x, &channel, seed)?;
    let score = Scored { x: &x, loss: &loss, delta, seed };
    let opts = DenoiseOptions { exec, ..Default::default() };

    let mut results = Vec::new();
    let post = fb_posteriors(&z, &switching_segments(n, p1, p2, switch_at), &channel)?;
    results.push(score.result("genie-fb".into(), &map_denoise(&post, &loss)?, None, None)?);

    for &k in k_list {
        let out = dude_denoise_with(&z, k, &channel, &loss, &opts)?;
        results.push(score.result(format!("dude(k={k})"), &out, Some(k), Some(0))?);
    }
    // configurations run one after another; each one parallelises internally
    for &k in k_list {
        for &m in m_list {
            let s = sdude_denoise_with(&z, k, m, &channel, &loss, &opts)?;
            let mut row = score.result(format!("sdude(k={k},m={m})"), &s.output, Some(k), Some(m))?;
            row.estimated_loss = Some(s.estimated_loss);
            row.genie = Some(genie_min_loss_exec(&x, &z, k, m, &loss, exec)?.0);
            results.push(row);
        }
    }

    let parameters = BTreeMap::from([
        ("delta".to_string(), serde_json::json!(delta)),
        ("p1".to_string(), serde_json::json!(p1)),
        ("p2".to_string(), serde_json::json!(p2)),
        ("switch_at".to_string(), serde_json::json!(switch_at)),
        ("k_list".to_string(), serde_json::json!(k_list)),
        ("m_list".to_string(), serde_json::json!(m_list)),
    ]);
    Ok(EvalReport {
        experiment: "switching-hmm".into(),
        n,
        channel: format!("bsc:{delta}"),
        loss: "hamming".into(),
        seeds: vec![seed],
        parameters,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub trials: usize,
    pub mean_gap: f64,
    pub max_gap: f64,
    pub min_gap: f64,
}

pub fn concentration_csv(rows: &[ConcentrationRow]) -> String {
    let mut out = String::from("n,trials,mean_gap,max_gap,min_gap\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.n, r.trials, r.mean_gap, r.max_gap, r.min_gap).unwrap();
    }
    out
}

pub fn concentration_json(rows: &[ConcentrationRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

/// Semi-stochastic sweep: for each `n` the clean sequence is drawn once
/// from `x_spec`, then `trials` channel realisations are denoised and the
/// interior gap `L_{S-DUDE} - D_{k,m}` recorded.
#[allow(clippy::too_many_arguments)]
pub fn concentration_sweep(
    x_spec: &PiecewiseSourceSpec,
    channel: &ChannelModel,
    loss: &LossMatrix,
    k: usize,
    m: usize,
    n_list: &[usize],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ConcentrationRow>> {
    if trials == 0 {
        return Err(Error::range("at least one trial is required"));
    }
    let inner = DenoiseOptions { exec: Execution::Sequential, ..Default::default() };
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let x = sample_piecewise(x_spec, n, seed)?;
        let mut master = rng_for(seed, 1 + i as u64);
        let trial_seeds: Vec<u64> = (0..trials).map(|_| master.random()).collect();
        let gaps = exec.map(trial_seeds, |s| -> Result<f64> {
            let z = corrupt(&x, channel, s)?;
            let out = sdude_denoise_with(&z, k, m, channel, loss, &inner)?;
            let l = cumulative_loss(&x, &out.output, loss, k + 1, n - k)?;
            let (d, _) = genie_min_loss_exec(&x, &z, k, m, loss, Execution::Sequential)?;
            Ok(l - d)
        });
        let gaps = gaps.into_iter().collect::<Result<Vec<_>>>()?;
        rows.push(ConcentrationRow {
            n,
            trials,
            mean_gap: gaps.iter().sum::<f64>() / trials as f64,
            max_gap: gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            min_gap: gaps.iter().cloned().fold(f64::INFINITY, f64::min),
        });
    }
    Ok(rows)
}
