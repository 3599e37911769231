#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sdude::hmm::Segment;
use sdude::{ChannelModel, LossMatrix, SymbolSequence};

pub fn random_stochastic_row(rng: &mut ChaCha8Rng, len: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| floor + rng.random::<f64>()).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Random channel with `clean <= noisy` that passes the rank check.
pub fn random_channel(rng: &mut ChaCha8Rng, clean: usize, noisy: usize) -> ChannelModel {
    loop {
        let rows: Vec<Vec<f64>> = (0..clean).map(|_| random_stochastic_row(rng, noisy, 0.0)).collect();
        if let Ok(ch) = ChannelModel::from_rows(&rows) {
            return ch;
        }
    }
}

pub fn random_loss(rng: &mut ChaCha8Rng, clean: usize, recon: usize) -> LossMatrix {
    let rows: Vec<Vec<f64>> = (0..clean).map(|_| (0..recon).map(|_| rng.random::<f64>() * 3.0).collect()).collect();
    LossMatrix::from_rows(&rows).unwrap()
}

pub fn binary(v: Vec<usize>) -> SymbolSequence {
    SymbolSequence::new(v, 2).unwrap()
}

pub fn random_binary(rng: &mut ChaCha8Rng, n: usize) -> SymbolSequence {
    binary((0..n).map(|_| rng.random_range(0..2)).collect())
}

/// Stationary distribution by repeated squaring of a strictly positive
/// transition matrix. Rows are renormalised after every squaring so that
/// rounding cannot compound.
pub fn stationary_by_power(p: &[Vec<f64>]) -> Vec<f64> {
    let q = p.len();
    let mut m = p.to_vec();
    for _ in 0..64 {
        let mut sq = vec![vec![0.0; q]; q];
        for i in 0..q {
            for j in 0..q {
                sq[i][j] = (0..q).map(|l| m[i][l] * m[l][j]).sum();
            }
            let sum: f64 = sq[i].iter().sum();
            sq[i].iter_mut().for_each(|v| *v /= sum);
        }
        m = sq;
    }
    m[0].clone()
}

/// Posterior marginals by summing the joint over every clean path. Step
/// `t -> t+1` (1-based) uses the matrix of the segment containing `t+1`.
pub fn posteriors_by_enumeration(z: &[usize], segments: &[Segment], pi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = z.len();
    let q = pi.len();
    let seg_at = |t: usize| segments.iter().find(|s| s.start <= t && t <= s.end).unwrap();
    let init = stationary_by_power(&segments[0].transition);

    let mut marg = vec![vec![0.0; q]; n];
    let mut path = vec![0usize; n];
    let total_paths = q.pow(n as u32);
    let mut evidence = 0.0;
    for code in 0..total_paths {
        let mut c = code;
        for slot in path.iter_mut() {
            *slot = c % q;
            c /= q;
        }
        let mut p = init[path[0]] * pi[path[0]][z[0]];
        for t in 2..=n {
            p *= seg_at(t).transition[path[t - 2]][path[t - 1]] * pi[path[t - 1]][z[t - 1]];
        }
        evidence += p;
        for (t, &s) in path.iter().enumerate() {
            marg[t][s] += p;
        }
    }
    for row in &mut marg {
        row.iter_mut().for_each(|v| *v /= evidence);
    }
    marg
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn linear_r2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - (my + slope * (a - mx))).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    1.0 - ss_res / ss_tot
}
