mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use sdude::hmm::{fb_posteriors, fb_posteriors_with, map_denoise, switching_segments, Segment, TransitionConvention};
use sdude::sources::{corrupt, sample_piecewise, PiecewiseSourceSpec};
use sdude::{ChannelModel, LossMatrix, SymbolSequence};

#[test]
fn single_symbol_posterior_by_bayes_rule() {
    // stationary (2/3, 1/3), BSC(0.2), observe 1
    let seg = vec![Segment { start: 1, end: 1, transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]] }];
    let ch = ChannelModel::bsc(0.2).unwrap();
    let post = fb_posteriors(&binary(vec![1]), &seg, &ch).unwrap();
    let p1 = (1.0 / 3.0 * 0.8) / (1.0 / 3.0 * 0.8 + 2.0 / 3.0 * 0.2);
    assert!((post.at(1)[1] - p1).abs() < 1e-15);
}

#[test]
fn convention_only_matters_near_switches() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let ch = ChannelModel::bsc(0.15).unwrap();
    for _ in 0..10 {
        let n = 400;
        let switches = [rng.random_range(100..150), rng.random_range(250..300)];
        let bounds = [0, switches[0], switches[1], n];
        let segments: Vec<Segment> = bounds
            .windows(2)
            .map(|w| Segment {
                start: w[0] + 1,
                end: w[1],
                transition: (0..2).map(|_| random_stochastic_row(&mut rng, 2, 0.1)).collect(),
            })
            .collect();
        let z = random_binary(&mut rng, n);
        let a = fb_posteriors_with(&z, &segments, &ch, TransitionConvention::Entering).unwrap();
        let b = fb_posteriors_with(&z, &segments, &ch, TransitionConvention::Leaving).unwrap();
        for t in 1..=n {
            if switches.iter().all(|&s| t.abs_diff(s) > 50) {
                for x in 0..2 {
                    assert!((a.at(t)[x] - b.at(t)[x]).abs() < 1e-9, "t={t}");
                }
            }
        }
    }
}

#[test]
fn long_sequences_stay_normalised() {
    let ch = ChannelModel::bsc(0.1).unwrap();
    let spec = PiecewiseSourceSpec::switching_markov(0.01, 0.2, 50_000);
    let x = sample_piecewise(&spec, 100_000, 1).unwrap();
    let z = corrupt(&x, &ch, 1).unwrap();
    let post = fb_posteriors(&z, &switching_segments(100_000, 0.01, 0.2, 50_000), &ch).unwrap();
    for t in [1, 2, 49_999, 50_000, 50_001, 100_000] {
        let p = post.at(t);
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    let xhat = map_denoise(&post, &LossMatrix::hamming(2).unwrap()).unwrap();
    let errors = x.symbols().iter().zip(xhat.symbols()).filter(|(a, b)| a != b).count();
    assert!((errors as f64) < 0.1 * 100_000.0);
}

#[test]
fn impossible_observations_rejected() {
    // a channel that can never emit symbol 1 from either state
    let ch = ChannelModel::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let z = SymbolSequence::new(vec![0, 1, 2], 3).unwrap();
    assert!(fb_posteriors(&z, &switching_segments(3, 0.1, 0.1, 0), &ch).is_err());
}
