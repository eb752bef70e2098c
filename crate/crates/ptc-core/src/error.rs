//! Error type shared by every module in the crate.

use alloc::string::String;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when building models or running
/// enumerations.
///
/// Budget refusals ([`Error::EnumerationBudget`], [`Error::ComputeBudget`],
/// [`Error::CodebookTooLarge`]) are deliberate: callers asked for an exact
/// computation whose size exceeds the configured ceiling, and the error
/// reports the size that would have been required so the caller can decide
/// whether to raise the ceiling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability vector needs at least two entries.
    #[error("alphabet has {0} symbols; need at least 2")]
    AlphabetTooSmall(usize),
    /// A probability was negative.
    #[error("probability {0} is negative")]
    NegativeProbability(f64),
    /// A probability vector does not sum to 1 within tolerance.
    #[error("probabilities sum to {0}; expected 1 within 1e-12")]
    NotNormalized(f64),
    /// Two sequences (or a sequence and a block length) disagree in length.
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    /// A sequence is empty; block length must be at least 1.
    #[error("sequence is empty; block length must be at least 1")]
    EmptySequence,
    /// A symbol exceeds the governing alphabet.
    #[error("symbol {symbol} out of range for alphabet of size {alphabet}")]
    SymbolOutOfRange {
        /// Offending symbol value.
        symbol: u8,
        /// Size of the alphabet it was checked against.
        alphabet: usize,
    },
    /// A distortion entry was negative or NaN.
    #[error("distortion entry d({x},{y}) = {value} is not a nonnegative real")]
    InvalidDistortion {
        /// Source symbol.
        x: u8,
        /// Reconstruction symbol.
        y: u8,
        /// Offending value.
        value: f64,
    },
    /// A distortion row has no finite entry, so the symbol cannot be covered.
    #[error("distortion row for source symbol {0} has no finite entry")]
    UncoverableSymbol(u8),
    /// A mapping vector is not a permutation of its index range.
    #[error("mapping of length {0} is not a bijection")]
    NotAPermutation(usize),
    /// A secret key lies outside the cipher's key space.
    #[error("key {key} out of range for key space {key_space}")]
    KeyOutOfRange {
        /// Offending key value.
        key: u64,
        /// Number of keys the cipher supports.
        key_space: u64,
    },
    /// A payload value is not reduced modulo the cipher modulus.
    #[error("value {value} not reduced modulo {modulus}")]
    ModulusMismatch {
        /// Offending value.
        value: u64,
        /// Cipher modulus.
        modulus: u64,
    },
    /// A type composition's counts do not describe the expected block length.
    #[error("type counts sum to {0}; expected block length {1}")]
    CompositionMismatch(u64, usize),
    /// Exhaustive enumeration of a type class would exceed the budget.
    #[error("type class holds ~{required:.3e} sequences; enumeration budget is {budget}")]
    EnumerationBudget {
        /// Approximate number of sequences that would be enumerated.
        required: f64,
        /// Configured ceiling.
        budget: u64,
    },
    /// An exact computation would exceed the pairwise-evaluation budget.
    #[error("exact computation needs ~{required:.3e} pair evaluations; budget is {budget}")]
    ComputeBudget {
        /// Approximate number of (sequence, key) pairs that would be visited.
        required: f64,
        /// Configured ceiling.
        budget: u64,
    },
    /// Random codebooks are capped to keep nearest-codeword search tractable.
    #[error("codebook size {m} exceeds the supported maximum {max}")]
    CodebookTooLarge {
        /// Requested number of codewords.
        m: u64,
        /// Hard ceiling.
        max: u64,
    },
    /// A codeword or compression index is out of range.
    #[error("index {index} out of range; codebook holds {size} codewords")]
    IndexOutOfRange {
        /// Offending index.
        index: u64,
        /// Number of codewords.
        size: u64,
    },
    /// The Blahut-Arimoto iteration did not meet its tolerance.
    #[error(
        "rate-distortion solver did not converge after {iterations} iterations \
         (last rate {last_rate_nats} nats, last distortion {last_distortion})"
    )]
    SolverDidNotConverge {
        /// Iterations performed.
        iterations: u32,
        /// Rate of the final iterate, in nats.
        last_rate_nats: f64,
        /// Distortion of the final iterate.
        last_distortion: f64,
    },
    /// A rate-distortion sweep produced a non-monotonic curve.
    #[error("rate-distortion sweep is not monotone at slope {slope}")]
    NonMonotonicSweep {
        /// Slope at which monotonicity failed.
        slope: f64,
    },
    /// A requested distortion target lies below what the codec can reach.
    #[error("target distortion {target} is unreachable; minimum achievable is {minimum}")]
    UnreachableDistortion {
        /// Requested distortion.
        target: f64,
        /// Minimum expected distortion over all reconstructions.
        minimum: f64,
    },
    /// A scalar parameter failed validation.
    #[error("parameter {name} = {value} is invalid: {reason}")]
    InvalidParameter {
        /// Parameter name as it appears in the API.
        name: &'static str,
        /// Offending value.
        value: f64,
        /// Why it was rejected.
        reason: &'static str,
    },
    /// Leakage experiments require a strictly positive rate margin.
    #[error("key rate {key_rate_nats} nats/symbol must exceed coding rate {rate_nats}")]
    RateMarginViolation {
        /// Coding rate (1/n) ln M in nats per symbol.
        rate_nats: f64,
        /// Key rate (1/n) ln N in nats per symbol.
        key_rate_nats: f64,
    },
    /// A bin or ensemble that must be nonempty was empty.
    #[error("{0} must be nonempty")]
    EmptyCollection(&'static str),
    /// Catch-all for invariant violations detected at runtime.
    #[error("{0}")]
    Invariant(String),
}
