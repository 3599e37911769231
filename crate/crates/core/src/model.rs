//! Alphabets, sequences, channel and loss matrices, single-symbol denoisers.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tolerance used for every structural check on channel matrices.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabets {
    pub clean_size: usize,
    pub noisy_size: usize,
    pub recon_size: usize,
}

impl Alphabets {
    pub fn new(clean_size: usize, noisy_size: usize, recon_size: usize) -> Result<Self> {
        if clean_size == 0 || noisy_size == 0 || recon_size == 0 {
            return Err(Error::validation("alphabet sizes must be positive"));
        }
        Ok(Self { clean_size, noisy_size, recon_size })
    }

    pub fn binary() -> Self {
        Self { clean_size: 2, noisy_size: 2, recon_size: 2 }
    }

    /// Number of single-symbol denoisers, i.e. mappings from the noisy to the
    /// reconstruction alphabet: `recon_size ^ noisy_size`.
    pub fn denoiser_count(&self) -> Result<usize> {
        u32::try_from(self.noisy_size)
            .ok()
            .and_then(|e| self.recon_size.checked_pow(e))
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| {
                Error::range(format!(
                    "{}^{} single-symbol denoisers is not enumerable",
                    self.recon_size, self.noisy_size
                ))
            })
    }
}

/// A finite-alphabet sequence with every symbol checked against its alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    symbols: Vec<usize>,
    alphabet_size: usize,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        if alphabet_size == 0 {
            return Err(Error::validation("alphabet size must be positive"));
        }
        if let Some((t, &s)) = symbols.iter().enumerate().find(|(_, &s)| s >= alphabet_size) {
            return Err(Error::range(format!("symbol {s} at index {t} outside alphabet of size {alphabet_size}")));
        }
        Ok(Self { symbols, alphabet_size })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<usize> {
        self.symbols
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol at 1-based position `t`.
    pub fn at(&self, t: usize) -> usize {
        self.symbols[t - 1]
    }
}

/// A discrete memoryless channel `pi` (clean x noisy, row-stochastic) together
/// with a right inverse `h` (noisy x clean) satisfying `pi * h = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    pi: DMatrix<f64>,
    h: DMatrix<f64>,
}

impl ChannelModel {
    /// Validates `pi` and attaches the Moore-Penrose right inverse
    /// `pi^T (pi pi^T)^-1`.
    pub fn new(pi: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(&pi)?;
        let rows = pi.nrows();
        let rank = numerical_rank(&pi);
        if rank < rows {
            return Err(Error::Rank { rank, needed: rows });
        }
        let gram = &pi * pi.transpose();
        let inv = gram.try_inverse().ok_or(Error::Rank { rank: rows - 1, needed: rows })?;
        let h = pi.transpose() * inv;
        let channel = Self { pi, h };
        if channel.right_inverse_residual() >= TOLERANCE {
            // Numerically singular even though the SVD rank test passed.
            return Err(Error::Rank { rank: rows - 1, needed: rows });
        }
        Ok(channel)
    }

    /// Uses a caller-supplied right inverse instead of the Moore-Penrose one.
    pub fn with_right_inverse(pi: DMatrix<f64>, h: DMatrix<f64>) -> Result<Self> {
        validate_stochastic(&pi)?;
        if h.nrows() != pi.ncols() || h.ncols() != pi.nrows() {
            return Err(Error::validation(format!(
                "right inverse must be {}x{}, got {}x{}",
                pi.ncols(),
                pi.nrows(),
                h.nrows(),
                h.ncols()
            )));
        }
        let channel = Self { pi, h };
        let residual = channel.right_inverse_residual();
        if residual >= TOLERANCE {
            return Err(Error::validation(format!("pi * h deviates from identity by {residual:e}")));
        }
        Ok(channel)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// Binary symmetric channel with crossover probability `delta`.
    pub fn bsc(delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::range(format!("crossover probability {delta} not in [0, 1]")));
        }
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0 - delta, delta, delta, 1.0 - delta]))
    }

    pub fn identity(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::validation("alphabet size must be positive"));
        }
        Self::new(DMatrix::identity(size, size))
    }

    /// Resolves `bsc:<delta>`, `identity`, `identity:<size>` or a matrix file.
    pub fn from_descriptor(descriptor: &str) -> Result<Self> {
        if let Some(delta) = descriptor.strip_prefix("bsc:") {
            let delta = delta
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad crossover probability {delta:?}: {e}")))?;
            return Self::bsc(delta);
        }
        if descriptor == "identity" {
            return Self::identity(2);
        }
        if let Some(size) = descriptor.strip_prefix("identity:") {
            let size =
                size.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad identity size {size:?}: {e}")))?;
            return Self::identity(size);
        }
        Self::new(read_matrix_file(descriptor)?)
    }

    pub fn pi(&self) -> &DMatrix<f64> {
        &self.pi
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn clean_size(&self) -> usize {
        self.pi.nrows()
    }

    pub fn noisy_size(&self) -> usize {
        self.pi.ncols()
    }

    /// `max |pi * h - I|` over all entries.
    pub fn right_inverse_residual(&self) -> f64 {
        let prod = &self.pi * &self.h;
        let n = prod.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        worst
    }
}

fn validate_stochastic(pi: &DMatrix<f64>) -> Result<()> {
    if pi.nrows() == 0 || pi.ncols() == 0 {
        return Err(Error::validation("channel matrix is empty"));
    }
    for (x, row) in pi.row_iter().enumerate() {
        if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0) {
            return Err(Error::validation(format!("channel row {x} has entry {v} outside [0, 1]")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > TOLERANCE {
            return Err(Error::validation(format!("channel row {x} sums to {sum}, not 1")));
        }
    }
    Ok(())
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let svd = m.clone().svd(false, false);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = largest * (m.nrows().max(m.ncols()) as f64) * f64::EPSILON;
    svd.singular_values.iter().filter(|&&s| s > eps).count()
}

/// Nonnegative loss matrix indexed by (clean symbol, reconstruction symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix {
    lambda: DMatrix<f64>,
    lambda_max: f64,
}

impl LossMatrix {
    pub fn new(lambda: DMatrix<f64>) -> Result<Self> {
        if lambda.nrows() == 0 || lambda.ncols() == 0 {
            return Err(Error::validation("loss matrix is empty"));
        }
        if let Some(v) = lambda.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::validation(format!("loss entry {v} is negative or not finite")));
        }
        let lambda_max = lambda.iter().cloned().fold(0.0, f64::max);
        Ok(Self { lambda, lambda_max })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn hamming(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::validation("alphabet size must be positive"));
        }
        Self::new(DMatrix::from_fn(size, size, |i, j| if i == j { 0.0 } else { 1.0 }))
    }

    /// Resolves `hamming`, `hamming:<size>` or a matrix file.
    pub fn from_descriptor(descriptor: &str) -> Result<Self> {
        if descriptor == "hamming" {
            return Self::hamming(2);
        }
        if let Some(size) = descriptor.strip_prefix("hamming:") {
            let size =
                size.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad hamming size {size:?}: {e}")))?;
            return Self::hamming(size);
        }
        Self::new(read_matrix_file(descriptor)?)
    }

    pub fn lambda(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.lambda[(x, xhat)]
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn clean_size(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn recon_size(&self) -> usize {
        self.lambda.ncols()
    }
}

/// A mapping from noisy symbols to reconstruction symbols.
///
/// Denoisers are enumerated by reading the mapping as base-`recon_size`
/// digits, least significant digit first: `index = sum_z mapping[z] * R^z`.
/// For binary alphabets this gives 0 = always-say-0, 1 = flip-what-you-see,
/// 2 = say-what-you-see, 3 = always-say-1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SingleSymbolDenoiser {
    index: usize,
    mapping: Vec<usize>,
}

impl SingleSymbolDenoiser {
    pub fn from_index(index: usize, alphabets: &Alphabets) -> Result<Self> {
        let count = alphabets.denoiser_count()?;
        if index >= count {
            return Err(Error::range(format!("denoiser index {index} not below {count}")));
        }
        let radix = alphabets.recon_size;
        let mut rest = index;
        let mapping = (0..alphabets.noisy_size)
            .map(|_| {
                let digit = rest % radix;
                rest /= radix;
                digit
            })
            .collect();
        Ok(Self { index, mapping })
    }

    pub fn from_mapping(mapping: Vec<usize>, alphabets: &Alphabets) -> Result<Self> {
        if mapping.len() != alphabets.noisy_size {
            return Err(Error::validation(format!(
                "mapping has {} entries, noisy alphabet has {}",
                mapping.len(),
                alphabets.noisy_size
            )));
        }
        alphabets.denoiser_count()?;
        if let Some(&bad) = mapping.iter().find(|&&s| s >= alphabets.recon_size) {
            return Err(Error::range(format!("reconstruction symbol {bad} out of range")));
        }
        let index = mapping.iter().rev().fold(0, |acc, &d| acc * alphabets.recon_size + d);
        Ok(Self { index, mapping })
    }

    /// Every single-symbol denoiser, in index order.
    pub fn enumerate(alphabets: &Alphabets) -> Result<Vec<Self>> {
        let count = alphabets.denoiser_count()?;
        (0..count).map(|i| Self::from_index(i, alphabets)).collect()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn apply(&self, z: usize) -> Result<usize> {
        self.mapping.get(z).copied().ok_or_else(|| Error::range(format!("noisy symbol {z} out of range")))
    }
}

impl fmt::Display for SingleSymbolDenoiser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}{:?}", self.index, self.mapping)
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(Error::validation("matrix is empty"));
    }
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::validation("matrix rows have differing lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// Parses the plain-text matrix format: a `rows cols` header followed by
/// `rows * cols` whitespace-separated decimals in row-major order.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        let tok = tokens.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?;
        tok.parse().map_err(|_| Error::Parse(format!("bad {what} {tok:?}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::Parse("matrix dimensions must be positive".into()));
    }
    let values = tokens
        .map(|tok| tok.parse::<f64>().map_err(|_| Error::Parse(format!("bad matrix entry {tok:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries for a {rows}x{cols} matrix, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: &DMatrix<f64>, b: &[f64], tol: f64) {
        for (x, y) in a.transpose().iter().zip(b) {
            assert!((x - y).abs() < tol, "{a} vs {b:?}");
        }
    }

    #[test]
    fn identity_channel_inverse_is_identity() {
        let ch = ChannelModel::identity(2).unwrap();
        assert_close(ch.h(), &[1.0, 0.0, 0.0, 1.0], 1e-15);
    }

    #[test]
    fn bsc_inverse_matches_hand_solution() {
        // [[.9,.1],[.1,.9]]^-1 = (1/.8) [[.9,-.1],[-.1,.9]]
        let ch = ChannelModel::bsc(0.1).unwrap();
        assert_close(ch.h(), &[1.125, -0.125, -0.125, 1.125], 1e-12);
        assert!(ch.right_inverse_residual() < 1e-12);
    }

    #[test]
    fn rank_one_channel_rejected() {
        let err = ChannelModel::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap_err();
        assert!(matches!(err, Error::Rank { rank: 1, needed: 2 }), "{err}");
        assert!(matches!(ChannelModel::bsc(0.5), Err(Error::Rank { .. })));
    }

    #[test]
    fn malformed_channels_rejected() {
        let bad_sum = ChannelModel::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.9]]);
        assert!(matches!(bad_sum, Err(Error::Validation(_))));
        let negative = ChannelModel::from_rows(&[vec![1.1, -0.1], vec![0.1, 0.9]]);
        assert!(matches!(negative, Err(Error::Validation(_))));
        // more inputs than outputs can never have full row rank
        let wide = ChannelModel::from_rows(&[vec![1.0], vec![1.0]]);
        assert!(matches!(wide, Err(Error::Rank { .. })));
    }

    #[test]
    fn rectangular_channel_has_right_inverse() {
        let ch = ChannelModel::from_rows(&[vec![0.8, 0.1, 0.1], vec![0.1, 0.1, 0.8]]).unwrap();
        assert_eq!(ch.h().shape(), (3, 2));
        assert!(ch.right_inverse_residual() < 1e-12);
    }

    #[test]
    fn explicit_right_inverse_checked() {
        let pi = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.1, 0.9]);
        let good = DMatrix::from_row_slice(2, 2, &[1.125, -0.125, -0.125, 1.125]);
        assert!(ChannelModel::with_right_inverse(pi.clone(), good).is_ok());
        let bad = DMatrix::identity(2, 2);
        assert!(ChannelModel::with_right_inverse(pi, bad).is_err());
    }

    #[test]
    fn descriptors() {
        assert_eq!(ChannelModel::from_descriptor("bsc:0.1").unwrap(), ChannelModel::bsc(0.1).unwrap());
        assert_eq!(ChannelModel::from_descriptor("identity:3").unwrap().noisy_size(), 3);
        assert_eq!(LossMatrix::from_descriptor("hamming").unwrap(), LossMatrix::hamming(2).unwrap());
        assert!(ChannelModel::from_descriptor("bsc:abc").is_err());
        assert!(ChannelModel::from_descriptor("/nonexistent/channel.txt").is_err());
    }

    #[test]
    fn matrix_text_format() {
        let m = parse_matrix("2 3\n0.8 0.1 0.1\n0.1 0.1 0.8\n").unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m[(1, 2)], 0.8);
        assert!(parse_matrix("2 2\n1 0 0").is_err());
        assert!(parse_matrix("2 x").is_err());
        assert!(parse_matrix("").is_err());
    }

    #[test]
    fn loss_matrix_max_and_validation() {
        let l = LossMatrix::from_rows(&[vec![0.0, 2.5], vec![1.0, 0.0]]).unwrap();
        assert_eq!(l.lambda_max(), 2.5);
        assert!(LossMatrix::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn binary_denoiser_indices() {
        let ab = Alphabets::binary();
        let expect = [[0, 0], [1, 0], [0, 1], [1, 1]];
        for (i, mapping) in expect.iter().enumerate() {
            assert_eq!(SingleSymbolDenoiser::from_index(i, &ab).unwrap().mapping(), mapping);
        }
        let say_what = SingleSymbolDenoiser::from_index(2, &ab).unwrap();
        let flip = SingleSymbolDenoiser::from_index(1, &ab).unwrap();
        let zero = SingleSymbolDenoiser::from_index(0, &ab).unwrap();
        assert_eq!(say_what.apply(1).unwrap(), 1);
        assert_eq!(flip.apply(1).unwrap(), 0);
        assert_eq!(zero.apply(1).unwrap(), 0);
        assert!(zero.apply(2).is_err());
        assert!(matches!(SingleSymbolDenoiser::from_index(4, &ab), Err(Error::Range(_))));
    }

    #[test]
    fn sequence_rejects_out_of_alphabet() {
        assert!(SymbolSequence::new(vec![0, 1, 2], 2).is_err());
        let s = SymbolSequence::new(vec![0, 1, 1], 2).unwrap();
        assert_eq!(s.at(2), 1);
    }

    proptest! {
        #[test]
        fn denoiser_encoding_is_bijective(noisy in 1usize..=4, recon in 1usize..=4, seed in any::<u64>()) {
            let ab = Alphabets::new(2, noisy, recon).unwrap();
            let count = ab.denoiser_count().unwrap();
            prop_assume!(count <= 4096);
            let index = (seed % count as u64) as usize;
            let d = SingleSymbolDenoiser::from_index(index, &ab).unwrap();
            let back = SingleSymbolDenoiser::from_mapping(d.mapping().to_vec(), &ab).unwrap();
            prop_assert_eq!(back.index(), index);
        }

        #[test]
        fn square_channel_inverse_is_matrix_inverse(raw in proptest::collection::vec(0.05f64..1.0, 9)) {
            let rows: Vec<Vec<f64>> = raw.chunks(3).map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|v| v / s).collect()
            }).collect();
            let pi = matrix_from_rows(&rows).unwrap();
            if let Ok(ch) = ChannelModel::new(pi.clone()) {
                let inv = pi.try_inverse().unwrap();
                let diff = (ch.h() - inv).abs().max();
                prop_assert!(diff < 1e-6 * (1.0 + ch.h().abs().max()));
                prop_assert!(ch.right_inverse_residual() < TOLERANCE);
            }
        }
    }
}
