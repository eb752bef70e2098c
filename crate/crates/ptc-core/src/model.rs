//! Discrete memoryless sources, distortion measures, and exact
//! information functionals.
//!
//! Conventions used everywhere:
//!
//! * information values are computed and stored in nats and converted to
//!   bits only for presentation ([`InfoValue::bits`]);
//! * `0 * ln 0 = 0`, and probabilities at or below 1e-300 are treated as
//!   exact zeros;
//! * a vector is accepted as a distribution when its entries are
//!   nonnegative and sum to 1 within 1e-12.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{self, MIN_PROB, PROB_TOLERANCE};

/// An information quantity in nats, convertible to bits.
///
/// Mutual informations computed by this crate clamp round-off noise in
/// `(-1e-12, 0)` to exactly zero, so well-formed values are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InfoValue {
    nats: f64,
}

impl InfoValue {
    /// Exactly zero information.
    pub const ZERO: InfoValue = InfoValue { nats: 0.0 };

    /// Wraps a value measured in nats.
    pub fn from_nats(nats: f64) -> Self {
        InfoValue { nats }
    }

    /// The value in nats.
    pub fn nats(self) -> f64 {
        self.nats
    }

    /// The value in bits (nats divided by ln 2).
    pub fn bits(self) -> f64 {
        self.nats / core::f64::consts::LN_2
    }
}

fn validate_pmf(pmf: &[f64]) -> Result<()> {
    let mut sum = 0.0;
    for &p in pmf {
        if p.is_nan() || p < 0.0 {
            return Err(Error::NegativeProbability(p));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// Shannon entropy of a probability vector, in nats.
///
/// `H(P) = -sum_x P(x) ln P(x)` with `0 ln 0 = 0`. The vector must be a
/// distribution (nonnegative, summing to 1 within 1e-12).
pub fn entropy(pmf: &[f64]) -> Result<InfoValue> {
    validate_pmf(pmf)?;
    let h: f64 = pmf.iter().map(|&p| -math::xlnx(p)).sum();
    // Entropy is nonnegative up to round-off; snap tiny negatives to 0.
    Ok(InfoValue::from_nats(if h < 0.0 { 0.0 } else { h }))
}

/// Exact mutual information of a finite joint distribution, in nats.
///
/// `I(X;Y) = sum_{x,y} P(x,y) ln( P(x,y) / (P(x) P(y)) )` over a joint
/// table indexed `joint[x][y]`. The table must be rectangular and a valid
/// distribution. Round-off in `(-1e-12, 0)` is clamped to exactly 0.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<InfoValue> {
    if joint.is_empty() || joint[0].is_empty() {
        return Err(Error::EmptyCollection("joint distribution"));
    }
    let cols = joint[0].len();
    let mut sum = 0.0;
    for row in joint {
        if row.len() != cols {
            return Err(Error::LengthMismatch(row.len(), cols));
        }
        for &p in row {
            if p.is_nan() || p < 0.0 {
                return Err(Error::NegativeProbability(p));
            }
            sum += p;
        }
    }
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::NotNormalized(sum));
    }

    let row_marginal: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let mut col_marginal = vec![0.0f64; cols];
    for row in joint {
        for (j, &p) in row.iter().enumerate() {
            col_marginal[j] += p;
        }
    }

    let mut info = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > MIN_PROB {
                info += p * (math::ln(p) - math::ln(row_marginal[i]) - math::ln(col_marginal[j]));
            }
        }
    }
    if info < 0.0 && info > -PROB_TOLERANCE {
        info = 0.0;
    }
    Ok(InfoValue::from_nats(info))
}

/// A block of source or reconstruction symbols.
///
/// Symbols are small alphabet indices; which alphabet governs is decided by
/// the operation consuming the sequence, and symbol-range validation happens
/// there. Blocks are nonempty by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequence {
    symbols: Vec<u8>,
}

impl Sequence {
    /// Wraps a nonempty symbol block.
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Sequence { symbols })
    }

    /// Block length `n`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false: sequences are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The raw symbols.
    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    /// Mutable access to the symbols, for transforming a block in place.
    /// The length cannot change, so the nonemptiness invariant holds.
    pub fn symbols_mut(&mut self) -> &mut [u8] {
        &mut self.symbols
    }

    /// Checks that every symbol is a valid index into an alphabet of the
    /// given size.
    pub fn check_alphabet(&self, alphabet_size: usize) -> Result<()> {
        for &s in &self.symbols {
            if (s as usize) >= alphabet_size {
                return Err(Error::SymbolOutOfRange {
                    symbol: s,
                    alphabet: alphabet_size,
                });
            }
        }
        Ok(())
    }
}

/// A discrete memoryless source: an alphabet `{0, .., k-1}` with `k >= 2`
/// and a probability for each symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    pmf: Vec<f64>,
}

impl SourceModel {
    /// Validates and wraps a source distribution.
    pub fn new(pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() < 2 {
            return Err(Error::AlphabetTooSmall(pmf.len()));
        }
        validate_pmf(&pmf)?;
        Ok(SourceModel { pmf })
    }

    /// Number of source symbols.
    pub fn alphabet_size(&self) -> usize {
        self.pmf.len()
    }

    /// The symbol distribution.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Probability of one symbol.
    pub fn prob(&self, symbol: u8) -> f64 {
        self.pmf[symbol as usize]
    }

    /// Source entropy `H(P_X)` in nats.
    pub fn entropy(&self) -> InfoValue {
        entropy(&self.pmf).expect("pmf validated at construction")
    }

    /// Probability that the source emits exactly this block:
    /// the product of per-symbol probabilities.
    pub fn sequence_probability(&self, x: &Sequence) -> Result<f64> {
        x.check_alphabet(self.alphabet_size())?;
        Ok(x.symbols().iter().map(|&s| self.prob(s)).product())
    }

    /// Draws an i.i.d. block of length `n` from the source.
    ///
    /// Sampling is inverse-CDF per symbol so the mapping from generator
    /// output to symbols is pinned by this crate and never changes under
    /// dependency upgrades.
    pub fn sample_iid<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sequence> {
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let mut symbols = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = (self.pmf.len() - 1) as u8;
            for (s, &p) in self.pmf.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = s as u8;
                    break;
                }
            }
            symbols.push(chosen);
        }
        Sequence::new(symbols)
    }
}

/// A per-letter distortion table `d(x, y) >= 0` between a source alphabet
/// and a reconstruction alphabet.
///
/// Entries may be `+inf` to forbid pairings, but every source symbol must
/// have at least one finite reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMeasure {
    table: Vec<f64>,
    source_alphabet: usize,
    reconstruction_alphabet: usize,
}

impl DistortionMeasure {
    /// Builds a measure from a rectangular table indexed `table[x][y]`.
    pub fn from_table(table: Vec<Vec<f64>>) -> Result<Self> {
        let source_alphabet = table.len();
        if source_alphabet < 2 {
            return Err(Error::AlphabetTooSmall(source_alphabet));
        }
        let reconstruction_alphabet = table[0].len();
        if reconstruction_alphabet < 1 {
            return Err(Error::AlphabetTooSmall(reconstruction_alphabet));
        }
        let mut flat = Vec::with_capacity(source_alphabet * reconstruction_alphabet);
        for (x, row) in table.iter().enumerate() {
            if row.len() != reconstruction_alphabet {
                return Err(Error::LengthMismatch(row.len(), reconstruction_alphabet));
            }
            let mut covered = false;
            for (y, &value) in row.iter().enumerate() {
                if value.is_nan() || value < 0.0 {
                    return Err(Error::InvalidDistortion {
                        x: x as u8,
                        y: y as u8,
                        value,
                    });
                }
                covered |= value.is_finite();
                flat.push(value);
            }
            if !covered {
                return Err(Error::UncoverableSymbol(x as u8));
            }
        }
        Ok(DistortionMeasure {
            table: flat,
            source_alphabet,
            reconstruction_alphabet,
        })
    }

    /// Hamming distortion on a shared alphabet of the given size:
    /// 0 when symbols agree, 1 when they differ.
    pub fn hamming(alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::AlphabetTooSmall(alphabet_size));
        }
        let mut table = vec![vec![1.0; alphabet_size]; alphabet_size];
        for (x, row) in table.iter_mut().enumerate() {
            row[x] = 0.0;
        }
        Self::from_table(table)
    }

    /// Size of the source alphabet.
    pub fn source_alphabet(&self) -> usize {
        self.source_alphabet
    }

    /// Size of the reconstruction alphabet.
    pub fn reconstruction_alphabet(&self) -> usize {
        self.reconstruction_alphabet
    }

    /// Per-letter distortion `d(x, y)`.
    #[inline]
    pub fn value(&self, x: u8, y: u8) -> f64 {
        self.table[x as usize * self.reconstruction_alphabet + y as usize]
    }

    /// Average per-letter distortion between two blocks of equal length:
    /// `(1/n) sum_i d(x_i, y_i)`.
    pub fn sequence_distortion(&self, x: &Sequence, y: &Sequence) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        x.check_alphabet(self.source_alphabet)?;
        y.check_alphabet(self.reconstruction_alphabet)?;
        let total: f64 = x
            .symbols()
            .iter()
            .zip(y.symbols())
            .map(|(&a, &b)| self.value(a, b))
            .sum();
        Ok(total / x.len() as f64)
    }
}
