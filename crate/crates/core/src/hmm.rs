//! Genie-aided Bayes denoising of a hidden Markov chain whose transition
//! matrix changes at known points, observed through a known DMC.

use crate::error::{Error, Result};
use crate::estimated_loss::bayes_response;
use crate::model::{ChannelModel, LossMatrix, SymbolSequence, TOLERANCE};
use crate::sources::stationary_distribution;

/// Positions `start..=end` (1-based) evolve with `transition`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub transition: Vec<Vec<f64>>,
}

/// Which segment's matrix drives the step `t -> t+1` when `t` and `t+1`
/// lie in different segments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum TransitionConvention {
    /// The segment containing `t + 1`.
    #[default]
    Entering,
    /// The segment containing `t`.
    Leaving,
}

/// Row-major `n x |X|` posterior marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Posteriors {
    states: usize,
    data: Vec<f64>,
}

impl Posteriors {
    pub fn len(&self) -> usize {
        self.data.len() / self.states
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn states(&self) -> usize {
        self.states
    }

    /// `P(X_t = . | z^n)` at 1-based `t`.
    pub fn at(&self, t: usize) -> &[f64] {
        &self.data[(t - 1) * self.states..t * self.states]
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let states = rows.first().map_or(0, Vec::len);
        if states == 0 || rows.iter().any(|r| r.len() != states) {
            return Err(Error::validation("posterior rows must be non-empty and equally long"));
        }
        for r in rows {
            let sum: f64 = r.iter().sum();
            if r.iter().any(|v| *v < 0.0) || (sum - 1.0).abs() > TOLERANCE {
                return Err(Error::validation("posterior rows must be probability vectors"));
            }
        }
        Ok(Self { states, data: rows.concat() })
    }
}

fn validate_segments(n: usize, states: usize, segments: &[Segment]) -> Result<Vec<usize>> {
    let mut expected = 1;
    let mut seg_of = Vec::with_capacity(n);
    for (i, s) in segments.iter().enumerate() {
        if s.start != expected || s.end < s.start {
            return Err(Error::validation(format!("segments must tile 1..={n} in order")));
        }
        if s.transition.len() != states
            || s.transition.iter().any(|r| {
                r.len() != states
                    || r.iter().any(|v| !v.is_finite() || *v < 0.0)
                    || (r.iter().sum::<f64>() - 1.0).abs() > TOLERANCE
            })
        {
            return Err(Error::validation(format!("segment {i} transition is not row-stochastic")));
        }
        seg_of.extend(std::iter::repeat_n(i, s.end - s.start + 1));
        expected = s.end + 1;
    }
    if expected != n + 1 {
        return Err(Error::validation(format!("segments must tile 1..={n} in order")));
    }
    Ok(seg_of)
}

pub fn fb_posteriors(z: &SymbolSequence, segments: &[Segment], channel: &ChannelModel) -> Result<Posteriors> {
    fb_posteriors_with(z, segments, channel, TransitionConvention::default())
}

/// Normalised forward-backward smoothing. The chain starts from the
/// stationary distribution of the first segment.
pub fn fb_posteriors_with(
    z: &SymbolSequence,
    segments: &[Segment],
    channel: &ChannelModel,
    convention: TransitionConvention,
) -> Result<Posteriors> {
    let n = z.len();
    let q = channel.clean_size();
    if n == 0 {
        return Err(Error::validation("empty observation sequence"));
    }
    if z.alphabet_size() != channel.noisy_size() {
        return Err(Error::validation("observation alphabet differs from channel output"));
    }
    let seg_of = validate_segments(n, q, segments)?;
    let pi = channel.pi();
    let zs = z.symbols();
    // matrix for the step into 0-based index i (i >= 1)
    let step = |i: usize| -> &Vec<Vec<f64>> {
        let s = match convention {
            TransitionConvention::Entering => seg_of[i],
            TransitionConvention::Leaving => seg_of[i - 1],
        };
        &segments[s].transition
    };
    let normalize = |v: &mut [f64]| -> Result<()> {
        let s: f64 = v.iter().sum();
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::validation("observation sequence has zero probability"));
        }
        v.iter_mut().for_each(|x| *x /= s);
        Ok(())
    };

    let init = stationary_distribution(&segments[0].transition)?;
    let mut alpha = vec![0.0; n * q];
    for x in 0..q {
        alpha[x] = init[x] * pi[(x, zs[0])];
    }
    normalize(&mut alpha[..q])?;
    for i in 1..n {
        let p = step(i);
        let (done, rest) = alpha.split_at_mut(i * q);
        let prev = &done[(i - 1) * q..];
        let cur = &mut rest[..q];
        for (y, out) in cur.iter_mut().enumerate() {
            let mass: f64 = (0..q).map(|x| prev[x] * p[x][y]).sum();
            *out = mass * pi[(y, zs[i])];
        }
        normalize(cur)?;
    }

    let mut beta = vec![1.0; n * q];
    for i in (0..n - 1).rev() {
        let p = step(i + 1);
        let (head, tail) = beta.split_at_mut((i + 1) * q);
        let next = &tail[..q];
        let cur = &mut head[i * q..];
        for (x, out) in cur.iter_mut().enumerate() {
            *out = (0..q).map(|y| p[x][y] * pi[(y, zs[i + 1])] * next[y]).sum();
        }
        normalize(cur)?;
    }

    let mut data = alpha;
    for (a, b) in data.chunks_exact_mut(q).zip(beta.chunks_exact(q)) {
        a.iter_mut().zip(b).for_each(|(x, y)| *x *= y);
        normalize(a)?;
    }
    Ok(Posteriors { states: q, data })
}

/// Bayes response to each posterior; the MAP symbol under Hamming loss.
pub fn map_denoise(posteriors: &Posteriors, loss: &LossMatrix) -> Result<SymbolSequence> {
    if posteriors.states() != loss.clean_size() {
        return Err(Error::validation("posterior dimension differs from loss matrix rows"));
    }
    let out = posteriors.data.chunks_exact(posteriors.states).map(|p| bayes_response(p, loss)).collect();
    SymbolSequence::new(out, loss.recon_size())
}

/// Segments for a binary symmetric chain switching from `p1` to `p2` after
/// `switch_at` symbols.
pub fn switching_segments(n: usize, p1: f64, p2: f64, switch_at: usize) -> Vec<Segment> {
    let bsm = |p: f64| vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
    if switch_at == 0 || switch_at >= n {
        return vec![Segment { start: 1, end: n, transition: bsm(p1) }];
    }
    vec![
        Segment { start: 1, end: switch_at, transition: bsm(p1) },
        Segment { start: switch_at + 1, end: n, transition: bsm(p2) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_channel_gives_point_masses() {
        let z = SymbolSequence::new(vec![0, 1, 1, 0, 1], 2).unwrap();
        let ch = ChannelModel::identity(2).unwrap();
        let post = fb_posteriors(&z, &switching_segments(5, 0.1, 0.3, 2), &ch).unwrap();
        for t in 1..=5 {
            let p = post.at(t);
            assert_eq!(p[z.at(t)], 1.0);
        }
    }

    #[test]
    fn segments_must_tile() {
        let z = SymbolSequence::new(vec![0; 6], 2).unwrap();
        let ch = ChannelModel::bsc(0.1).unwrap();
        let mut segs = switching_segments(6, 0.1, 0.2, 3);
        segs[1].start = 5;
        assert!(fb_posteriors(&z, &segs, &ch).is_err());
        let short = switching_segments(5, 0.1, 0.2, 3);
        assert!(fb_posteriors(&z, &short, &ch).is_err());
    }

    #[test]
    fn map_decisions() {
        let l = LossMatrix::hamming(2).unwrap();
        let post = Posteriors::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        assert_eq!(map_denoise(&post, &l).unwrap().symbols(), &[0, 0, 1]);
        let uniform = Posteriors::from_rows(&vec![vec![0.5, 0.5]; 10]).unwrap();
        assert!(map_denoise(&uniform, &l).unwrap().symbols().iter().all(|&s| s == 0));
    }
}
