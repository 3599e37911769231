use sdude::sources::{corrupt, sample_piecewise, ComponentSpec, PiecewiseSourceSpec};
use sdude::{ChannelModel, SymbolSequence};

#[test]
fn bsc_flip_rate() {
    let x = sample_piecewise(&PiecewiseSourceSpec::two_block(), 1_000_000, 0).unwrap();
    let z = corrupt(&x, &ChannelModel::bsc(0.1).unwrap(), 5).unwrap();
    let flips = x.symbols().iter().zip(z.symbols()).filter(|(a, b)| a != b).count();
    let rate = flips as f64 / 1e6;
    assert!((rate - 0.1).abs() < 0.001, "flip rate {rate}");
}

#[test]
fn nearly_pure_noise_keeps_little_correlation() {
    // BSC(0.5) has no right inverse and is refused outright
    assert!(ChannelModel::bsc(0.5).is_err());
    let spec = PiecewiseSourceSpec::switching_markov(0.2, 0.4, 500_000);
    let x = sample_piecewise(&spec, 1_000_000, 1).unwrap();
    let z = corrupt(&x, &ChannelModel::bsc(0.49).unwrap(), 1).unwrap();
    let n = 1e6;
    let mean = |v: &SymbolSequence| v.symbols().iter().sum::<usize>() as f64 / n;
    let (mx, mz) = (mean(&x), mean(&z));
    let cov = x.symbols().iter().zip(z.symbols()).map(|(&a, &b)| (a as f64 - mx) * (b as f64 - mz)).sum::<f64>() / n;
    let corr = cov / (mx * (1.0 - mx) * mz * (1.0 - mz)).sqrt();
    // correlation of input and output of BSC(d) with symmetric input is 1 - 2d
    assert!((corr - 0.02).abs() < 0.005, "correlation {corr}");
}

#[test]
fn conditional_histogram_matches_channel_rows() {
    let rows = vec![vec![0.7, 0.2, 0.1], vec![0.15, 0.25, 0.6]];
    let ch = ChannelModel::from_rows(&rows).unwrap();
    let x = sample_piecewise(&PiecewiseSourceSpec::two_block(), 1_000_000, 2).unwrap();
    let z = corrupt(&x, &ch, 2).unwrap();
    for (a, row) in rows.iter().enumerate() {
        let outputs: Vec<usize> =
            x.symbols().iter().zip(z.symbols()).filter(|(&xa, _)| xa == a).map(|(_, &zb)| zb).collect();
        let total = outputs.len() as f64;
        for (b, &p) in row.iter().enumerate() {
            let freq = outputs.iter().filter(|&&zb| zb == b).count() as f64 / total;
            let sigma = (p * (1.0 - p) / total).sqrt();
            assert!((freq - p).abs() < 3.0 * sigma, "row {a} col {b}: {freq} vs {p}");
        }
    }
}

#[test]
fn seeded_runs_repeat_across_threads() {
    let spec = PiecewiseSourceSpec::switching_markov(0.01, 0.2, 5_000);
    let ch = ChannelModel::bsc(0.1).unwrap();
    let reference = corrupt(&sample_piecewise(&spec, 10_000, 9).unwrap(), &ch, 9).unwrap();
    let handles: Vec<_> = (0..4)
        .map(|_| {
            let (spec, ch) = (spec.clone(), ch.clone());
            std::thread::spawn(move || corrupt(&sample_piecewise(&spec, 10_000, 9).unwrap(), &ch, 9).unwrap())
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), reference);
    }
    let other = corrupt(&sample_piecewise(&spec, 10_000, 10).unwrap(), &ch, 10).unwrap();
    assert_ne!(other, reference);
}

/// Pearson chi-square statistic of a 2x2 contingency table.
fn chi_square(table: [[f64; 2]; 2]) -> f64 {
    let total: f64 = table.iter().flatten().sum();
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut stat = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = rows[i] * cols[j] / total;
            stat += (table[i][j] - expected).powi(2) / expected;
        }
    }
    stat
}

fn boundary_pairs(continuing: bool) -> [[f64; 2]; 2] {
    // persistent chains on both sides of the switch at 100
    let spec = PiecewiseSourceSpec {
        alphabet_size: 2,
        components: vec![ComponentSpec::binary_symmetric_markov(0.02), ComponentSpec::binary_symmetric_markov(0.03)],
        switch_times: vec![100, 200],
        switch_fractions: None,
        block_labels: vec![0, 1, 0],
        continuing,
    };
    let mut table = [[0.0; 2]; 2];
    for seed in 0..2_000 {
        let x = sample_piecewise(&spec, 300, seed).unwrap();
        table[x.at(100)][x.at(101)] += 1.0;
    }
    table
}

#[test]
fn blocks_are_independent() {
    // 1% critical value of chi-square with one degree of freedom
    let critical = 6.635;
    assert!(chi_square(boundary_pairs(false)) < critical);
    // a single chain carried across the switch is strongly dependent, which
    // shows the statistic has the power to notice
    assert!(chi_square(boundary_pairs(true)) > critical);
}

#[test]
fn markov_blocks_start_stationary() {
    let spec = PiecewiseSourceSpec {
        alphabet_size: 2,
        components: vec![ComponentSpec::Markov { transition: vec![vec![0.9, 0.1], vec![0.3, 0.7]], initial: None }],
        switch_times: vec![],
        switch_fractions: None,
        block_labels: vec![0],
        continuing: false,
    };
    let ones = (0..20_000).filter(|&seed| sample_piecewise(&spec, 1, seed).unwrap().at(1) == 1).count();
    // stationary mass on 1 is 0.25; 3 sigma at 20000 draws is about 0.0092
    assert!((ones as f64 / 20_000.0 - 0.25).abs() < 0.0092);
}

#[test]
fn identity_channel_is_transparent() {
    let x = sample_piecewise(&PiecewiseSourceSpec::switching_markov(0.1, 0.3, 500), 1_000, 3).unwrap();
    assert_eq!(corrupt(&x, &ChannelModel::identity(2).unwrap(), 3).unwrap(), x);
}

#[test]
fn json_spec_files() {
    let text = r#"{
        "alphabet_size": 3,
        "components": [
            {"type": "iid", "probs": [0.5, 0.25, 0.25]},
            {"type": "markov", "transition": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]]}
        ],
        "switch_times": [],
        "switch_fractions": [0.5],
        "block_labels": [0, 1],
        "continuing": false
    }"#;
    let spec = PiecewiseSourceSpec::from_json(text).unwrap();
    assert_eq!(spec.switch_times_for(1_000).unwrap(), vec![500]);
    assert_eq!(sample_piecewise(&spec, 1_000, 0).unwrap().len(), 1_000);
    assert!(PiecewiseSourceSpec::from_json(&text.replace("[0, 1]", "[1, 1]")).is_err());
}
