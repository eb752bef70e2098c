//! Exact leakage measurement for permute-then-compress systems, the
//! analytic bound the measurements are checked against, and the
//! compress-then-add baseline.
//!
//! The central quantity is the information the compression index `J =
//! g(permute_K(X))` carries about the block `X`. Conditioned on its type,
//! an i.i.d. block is uniform on the type class, so everything reduces to
//! integer counting: `c_j(x) = #{k : g(permute_k(x)) = j}` determines the
//! conditional law of `J` exactly, and
//!
//! `I(J; X | type) = ln|T| + (S1 - S2) / (|T| N)`
//!
//! where `S1 = sum_{x,j} c_j(x) ln c_j(x)`, `S2 = sum_j C_j ln C_j`,
//! `C_j = sum_x c_j(x)`, `|T|` is the class size and `N` the key-space
//! size. No sampling error enters; the only cost is enumeration, so every
//! entry point takes a [`Budgets`] and refuses work past it.
//!
//! [`leakage_bound`] is the three-term analytic ceiling on that quantity
//! for a cipher drawn at random: a term for compression cells too small
//! to equidistribute over, a concentration-failure term, and the
//! distortion `delta` of the equidistribution itself.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cipher::{CipherKind, ModuloSumCipher, Permutation, PermutationCipher, SecretKey};
use crate::error::{Error, Result};
use crate::math;
use crate::model::{entropy, InfoValue, Sequence, SourceModel};
use crate::rd::CompressionFn;
use crate::typeclass::{all_types, type_distribution_entropy, TypeComposition};

/// Work limits for exhaustive computations.
///
/// `enumeration` caps how many blocks may be walked (a type class or a
/// whole source alphabet power); `pair_evaluations` caps block-key pairs,
/// the unit of work of exact leakage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Largest number of blocks any single computation may enumerate.
    pub enumeration: u64,
    /// Largest number of (block, key) evaluations allowed.
    pub pair_evaluations: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enumeration: 10_000_000,
            pair_evaluations: 100_000_000,
        }
    }
}

impl Budgets {
    fn check_pairs(&self, blocks: u64, keys: u64) -> Result<()> {
        if (blocks as u128) * (keys as u128) > self.pair_evaluations as u128 {
            return Err(Error::ComputeBudget {
                required: blocks as f64 * keys as f64,
                budget: self.pair_evaluations,
            });
        }
        Ok(())
    }

    fn check_enumeration(&self, blocks: u128) -> Result<()> {
        if blocks > self.enumeration as u128 {
            return Err(Error::EnumerationBudget {
                required: blocks as f64,
                budget: self.enumeration,
            });
        }
        Ok(())
    }
}

/// Splits the ranks `0..class_size` of a lexicographically ordered type
/// class into contiguous bins of size `ceil(class_size / big_delta)`.
///
/// This is the granularity parameter of the leakage bound made concrete:
/// a set is "small" exactly when it holds less than one bin's worth of
/// the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinPartition {
    class_size: u64,
    bin_size: u64,
    bin_count: u64,
}

impl BinPartition {
    /// Partitions a class of the given size into at most `big_delta` bins.
    pub fn new(class_size: u64, big_delta: u64) -> Result<Self> {
        if class_size == 0 {
            return Err(Error::EmptyCollection("type class"));
        }
        if big_delta == 0 {
            return Err(Error::InvalidParameter {
                name: "big_delta",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let bin_size = class_size.div_ceil(big_delta);
        let bin_count = class_size.div_ceil(bin_size);
        Ok(BinPartition {
            class_size,
            bin_size,
            bin_count,
        })
    }

    /// Number of ranks partitioned.
    pub fn class_size(&self) -> u64 {
        self.class_size
    }

    /// Width of every bin but possibly the last.
    pub fn nominal_bin_size(&self) -> u64 {
        self.bin_size
    }

    /// Number of nonempty bins (at most `big_delta`).
    pub fn bin_count(&self) -> u64 {
        self.bin_count
    }

    /// The bin a rank falls in.
    pub fn bin_of(&self, rank: u64) -> Result<u64> {
        if rank >= self.class_size {
            return Err(Error::IndexOutOfRange {
                index: rank,
                size: self.class_size,
            });
        }
        Ok(rank / self.bin_size)
    }

    /// Half-open rank range `[start, end)` of a bin.
    pub fn bin_range(&self, bin: u64) -> Result<(u64, u64)> {
        if bin >= self.bin_count {
            return Err(Error::IndexOutOfRange {
                index: bin,
                size: self.bin_count,
            });
        }
        let start = bin * self.bin_size;
        let end = (start + self.bin_size).min(self.class_size);
        Ok((start, end))
    }
}

/// How a compression function carves one type class into index cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCensus {
    /// Size of the enumerated class.
    pub class_size: u64,
    /// Granularity parameter the census was taken at.
    pub big_delta: u64,
    /// `cell_sizes[j] = #{x in class : g(x) = j}`.
    pub cell_sizes: Vec<u64>,
    /// Indices whose cell holds less than `1/big_delta` of the class.
    pub small_cells: Vec<u64>,
    /// Fraction of the class covered by small cells (`eta`).
    pub small_mass: f64,
    /// Deterministic ceiling on `small_mass`: `M / big_delta`.
    pub small_mass_bound: f64,
}

/// Enumerates a type class and tallies the compression cells, flagging
/// the ones too small for key-equidistribution to help with.
///
/// A cell is small when `|cell| * big_delta < class_size`; their total
/// mass `eta` can never exceed `M / big_delta`.
pub fn small_set_report(
    g: &dyn CompressionFn,
    composition: &TypeComposition,
    big_delta: u64,
    budgets: &Budgets,
) -> Result<CellCensus> {
    if big_delta == 0 {
        return Err(Error::InvalidParameter {
            name: "big_delta",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let class_size = composition.size_within(budgets.enumeration)?;
    let m = checked_index_count(g)?;
    let mut cell_sizes = vec![0u64; m as usize];
    for block in composition.enumerate(budgets.enumeration)? {
        cell_sizes[g.compress_index(&block) as usize] += 1;
    }
    Ok(census_from_cells(class_size, big_delta, m, cell_sizes))
}

fn census_from_cells(
    class_size: u64,
    big_delta: u64,
    index_count: u64,
    cell_sizes: Vec<u64>,
) -> CellCensus {
    let mut small_cells = Vec::new();
    let mut small_total = 0u64;
    for (j, &size) in cell_sizes.iter().enumerate() {
        if (size as u128) * (big_delta as u128) < class_size as u128 {
            small_cells.push(j as u64);
            small_total += size;
        }
    }
    CellCensus {
        class_size,
        big_delta,
        cell_sizes,
        small_cells,
        small_mass: small_total as f64 / class_size as f64,
        small_mass_bound: index_count as f64 / big_delta as f64,
    }
}

fn checked_index_count(g: &dyn CompressionFn) -> Result<u64> {
    let m = g.index_count();
    if m == 0 {
        return Err(Error::EmptyCollection("compression indices"));
    }
    Ok(m)
}

/// Exact conditional leakage of one type class.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactLeakage {
    /// `I(J; X | type)` in nats.
    pub leakage: InfoValue,
    /// Size of the enumerated class.
    pub class_size: u64,
    /// Key-space size `N`.
    pub key_space: u64,
    /// `C_j = sum_x c_j(x)`; equals `N * |cell_j|` for any true cipher.
    pub index_counts: Vec<u64>,
}

/// Counts, for one block, how many keys send it into each compression
/// cell.
fn index_histogram(
    g: &dyn CompressionFn,
    resolved: &[Permutation],
    block: &[u8],
    scratch: &mut Sequence,
    counts: &mut [u64],
) {
    for c in counts.iter_mut() {
        *c = 0;
    }
    for sigma in resolved {
        sigma.apply_into(block, scratch.symbols_mut());
        counts[g.compress_index(scratch) as usize] += 1;
    }
}

/// Measures `I(J; X | type)` exactly by enumerating every (block, key)
/// pair of the class.
///
/// The result is an integer-counting identity, not an estimate: given the
/// model, it is exact to floating-point rounding.
pub fn exact_leakage_given_type(
    g: &dyn CompressionFn,
    cipher: &PermutationCipher,
    composition: &TypeComposition,
    budgets: &Budgets,
) -> Result<ExactLeakage> {
    if cipher.block_len() != composition.n() as usize {
        return Err(Error::LengthMismatch(
            cipher.block_len(),
            composition.n() as usize,
        ));
    }
    let class_size = composition.size_within(budgets.enumeration)?;
    let key_space = cipher.key_space();
    budgets.check_pairs(class_size, key_space)?;
    let m = checked_index_count(g)?;
    let resolved = cipher.resolve_all()?;
    let n = composition.n() as usize;
    let mut scratch = Sequence::new(vec![0u8; n])?;
    let mut counts = vec![0u64; m as usize];
    let mut totals = vec![0u64; m as usize];
    let mut s1 = 0.0f64;
    for block in composition.enumerate(budgets.enumeration)? {
        index_histogram(g, &resolved, block.symbols(), &mut scratch, &mut counts);
        for (total, &c) in totals.iter_mut().zip(counts.iter()) {
            if c > 1 {
                s1 += c as f64 * math::ln(c as f64);
            }
            *total += c;
        }
    }
    let mut s2 = 0.0f64;
    for &c in &totals {
        if c > 1 {
            s2 += c as f64 * math::ln(c as f64);
        }
    }
    let ln_class = composition.ln_class_size();
    let pairs = class_size as f64 * key_space as f64;
    let raw = ln_class + (s1 - s2) / pairs;
    if raw < -1e-9 {
        return Err(Error::Invariant(format!(
            "conditional leakage computed as {raw} nats; it can never be negative"
        )));
    }
    Ok(ExactLeakage {
        leakage: InfoValue::from_nats(raw.clamp(0.0, ln_class.max(0.0))),
        class_size,
        key_space,
        index_counts: totals,
    })
}

/// The three-term analytic ceiling on conditional leakage for a randomly
/// drawn cipher, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageBound {
    /// `(M / big_delta) ln|T|`: mass stuck in cells too small to smooth.
    pub small_mass_term: f64,
    /// `ln|T|` times the tail probability that key-equidistribution fails
    /// by more than a `delta` factor on some probed cell.
    pub deviation_term: f64,
    /// The equidistribution slack itself: `delta`.
    pub slack_term: f64,
    /// Sum of the three terms.
    pub total: f64,
    /// False when the parameters are outside the meaningful regime
    /// (`delta >= 1` or `big_delta < M`), where the bound is vacuous.
    pub regime_ok: bool,
}

/// Evaluates the leakage ceiling at the given parameters.
///
/// The deviation term depends on the cipher family: independent key
/// draws (table ciphers) admit a Chernoff tail
/// `2 exp(-delta^2/(2(2+delta)) * N/big_delta)`, while pairwise-
/// independent composed ciphers get the Chebyshev tail
/// `big_delta/(delta^2 N)`.
pub fn leakage_bound(
    ln_class_size: f64,
    index_count: u64,
    key_space: u64,
    big_delta: u64,
    delta: f64,
    kind: CipherKind,
) -> Result<LeakageBound> {
    if !ln_class_size.is_finite() || ln_class_size < 0.0 {
        return Err(Error::InvalidParameter {
            name: "ln_class_size",
            value: ln_class_size,
            reason: "must be a finite nonnegative real",
        });
    }
    if index_count == 0 || key_space == 0 || big_delta == 0 {
        return Err(Error::InvalidParameter {
            name: "index_count/key_space/big_delta",
            value: 0.0,
            reason: "must all be at least 1",
        });
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be a finite positive real",
        });
    }
    let m = index_count as f64;
    let dd = big_delta as f64;
    let nn = key_space as f64;
    let small_mass_term = m / dd * ln_class_size;
    let tail = match kind {
        CipherKind::TypeI => 2.0 * math::exp(-(delta * delta) / (2.0 * (2.0 + delta)) * nn / dd),
        CipherKind::TypeII => dd / (delta * delta * nn),
    };
    let deviation_term = ln_class_size * tail;
    let slack_term = delta;
    Ok(LeakageBound {
        small_mass_term,
        deviation_term,
        slack_term,
        total: small_mass_term + deviation_term + slack_term,
        regime_ok: delta < 1.0 && big_delta >= index_count,
    })
}

/// One type's share of the leakage survey.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeLeakageRow {
    /// The type.
    pub composition: TypeComposition,
    /// Probability the source emits this type.
    pub type_probability: f64,
    /// Size of the class.
    pub class_size: u64,
    /// Exact `I(J; X | type)`.
    pub leakage: InfoValue,
    /// Small-cell mass `eta` of the compressor on this class.
    pub small_mass: f64,
    /// Analytic ceiling evaluated at this class's size.
    pub bound: LeakageBound,
}

/// Exact leakage surveyed across every type the source can emit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageReport {
    /// Per-type measurements, in ascending lexicographic type order.
    pub rows: Vec<TypeLeakageRow>,
    /// `I(J; X | T)`: the type-weighted average of the rows.
    pub conditional_leakage: InfoValue,
    /// Type-weighted average of the per-type bound totals.
    pub weighted_bound: f64,
    /// `H(T)`: ceiling on the leakage through the (unhidden) type itself.
    pub type_entropy: InfoValue,
    /// Key-space size `N`.
    pub key_space: u64,
    /// Compression index count `M`.
    pub index_count: u64,
}

/// Measures exact conditional leakage for every type of positive
/// probability and aggregates the type-weighted average.
///
/// Per-type cell sizes are recovered from the exact counts via the
/// identity `C_j = N * |cell_j|` (each key permutes the class onto
/// itself), which doubles as an internal consistency check.
pub fn leakage_given_type_marginal(
    g: &dyn CompressionFn,
    cipher: &PermutationCipher,
    source: &SourceModel,
    big_delta: u64,
    delta: f64,
    budgets: &Budgets,
) -> Result<LeakageReport> {
    let n = cipher.block_len();
    let k = source.alphabet_size();
    let total_blocks = (k as u128)
        .checked_pow(n as u32)
        .ok_or(Error::ComputeBudget {
            required: f64::INFINITY,
            budget: budgets.enumeration,
        })?;
    budgets.check_enumeration(total_blocks)?;
    budgets.check_pairs(total_blocks as u64, cipher.key_space())?;
    let m = checked_index_count(g)?;
    let key_space = cipher.key_space();
    let mut rows = Vec::new();
    let mut conditional = 0.0f64;
    let mut weighted_bound = 0.0f64;
    for composition in all_types(n as u64, k)? {
        let type_probability = composition.probability(source)?;
        if type_probability == 0.0 {
            continue;
        }
        let exact = exact_leakage_given_type(g, cipher, &composition, budgets)?;
        let mut cell_sizes = Vec::with_capacity(exact.index_counts.len());
        for &c in &exact.index_counts {
            if c % key_space != 0 {
                return Err(Error::Invariant(format!(
                    "aggregate count {c} is not a multiple of the key space \
                     {key_space}; keys are not permuting the class onto itself"
                )));
            }
            cell_sizes.push(c / key_space);
        }
        let census = census_from_cells(exact.class_size, big_delta, m, cell_sizes);
        let bound = leakage_bound(
            composition.ln_class_size(),
            m,
            key_space,
            big_delta,
            delta,
            cipher.kind(),
        )?;
        conditional += type_probability * exact.leakage.nats();
        weighted_bound += type_probability * bound.total;
        rows.push(TypeLeakageRow {
            composition,
            type_probability,
            class_size: exact.class_size,
            leakage: exact.leakage,
            small_mass: census.small_mass,
            bound,
        });
    }
    Ok(LeakageReport {
        rows,
        conditional_leakage: InfoValue::from_nats(conditional),
        weighted_bound,
        type_entropy: type_distribution_entropy(source, n as u64)?,
        key_space,
        index_count: m,
    })
}

/// The chain-rule split of the total leakage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionCheck {
    /// `I(J; X)` measured directly on the full block space.
    pub total: InfoValue,
    /// `I(J; T)`: what the index reveals about the type alone.
    pub type_part: InfoValue,
    /// `I(J; X | T)`: what it reveals within the type.
    pub conditional_part: InfoValue,
    /// `total - type_part - conditional_part`; zero up to rounding.
    pub gap: f64,
}

/// Computes `I(J; X)`, `I(J; T)` and `I(J; X | T)` by three separate
/// exhaustive tallies and reports how exactly they satisfy the chain
/// rule `I(J; X) = I(J; T) + I(J; X | T)` (the type is a function of the
/// block, so the identity must hold to rounding).
pub fn total_leakage_decomposition_check(
    g: &dyn CompressionFn,
    cipher: &PermutationCipher,
    source: &SourceModel,
    budgets: &Budgets,
) -> Result<DecompositionCheck> {
    let n = cipher.block_len();
    let k = source.alphabet_size();
    let total_blocks = (k as u128)
        .checked_pow(n as u32)
        .ok_or(Error::ComputeBudget {
            required: f64::INFINITY,
            budget: budgets.enumeration,
        })?;
    budgets.check_enumeration(total_blocks)?;
    budgets.check_pairs(total_blocks as u64, cipher.key_space())?;
    let m = checked_index_count(g)? as usize;
    let key_space = cipher.key_space();
    let resolved = cipher.resolve_all()?;

    struct TypeTally {
        probability: f64,
        blocks: u64,
        totals: Vec<u64>,
        s1: f64,
    }

    let mut block = Sequence::new(vec![0u8; n])?;
    let mut scratch = Sequence::new(vec![0u8; n])?;
    let mut counts = vec![0u64; m];
    let mut index_marginal = vec![0.0f64; m];
    let mut h_index_given_block = 0.0f64;
    let mut tallies: BTreeMap<Vec<u64>, TypeTally> = BTreeMap::new();
    loop {
        let p = source.sequence_probability(&block)?;
        if p > 0.0 {
            index_histogram(g, &resolved, block.symbols(), &mut scratch, &mut counts);
            let mut type_counts = vec![0u64; k];
            for &s in block.symbols() {
                type_counts[s as usize] += 1;
            }
            let tally = tallies.entry(type_counts).or_insert_with(|| TypeTally {
                probability: 0.0,
                blocks: 0,
                totals: vec![0u64; m],
                s1: 0.0,
            });
            tally.probability += p;
            tally.blocks += 1;
            for (j, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let w = c as f64 / key_space as f64;
                    h_index_given_block -= p * w * math::ln(w);
                    index_marginal[j] += p * w;
                    if c > 1 {
                        tally.s1 += c as f64 * math::ln(c as f64);
                    }
                    tally.totals[j] += c;
                }
            }
        }
        if !advance_odometer(block.symbols_mut(), k) {
            break;
        }
    }

    let h_index = entropy(&index_marginal)?.nats();
    let total = h_index - h_index_given_block;
    let mut h_index_given_type = 0.0f64;
    let mut conditional = 0.0f64;
    for tally in tallies.values() {
        let pairs = tally.blocks as f64 * key_space as f64;
        let mut h_t = 0.0f64;
        let mut s2 = 0.0f64;
        for &c in &tally.totals {
            if c > 0 {
                let q = c as f64 / pairs;
                h_t -= q * math::ln(q);
                if c > 1 {
                    s2 += c as f64 * math::ln(c as f64);
                }
            }
        }
        h_index_given_type += tally.probability * h_t;
        let i_t = math::ln(tally.blocks as f64) + (tally.s1 - s2) / pairs;
        conditional += tally.probability * i_t;
    }
    let type_part = h_index - h_index_given_type;
    let gap = total - type_part - conditional;
    Ok(DecompositionCheck {
        total: InfoValue::from_nats(total.max(0.0)),
        type_part: InfoValue::from_nats(type_part.max(0.0)),
        conditional_part: InfoValue::from_nats(conditional.max(0.0)),
        gap,
    })
}

/// Advances a mixed-radix block through the full alphabet power in
/// lexicographic order; false once it wraps back to all zeros.
fn advance_odometer(block: &mut [u8], alphabet_size: usize) -> bool {
    for digit in block.iter_mut().rev() {
        *digit += 1;
        if (*digit as usize) < alphabet_size {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Exact leakage `I(C; X)` of the conventional compress-then-add system,
/// where `C = (g(X) + K) mod M` with `K` uniform on `[0, key_space)`.
///
/// With `key_space` equal to the full index count the key acts as a
/// one-time pad on the index and the leakage is identically zero; smaller
/// key spaces leak.
pub fn modulo_sum_exact_leakage(
    g: &dyn CompressionFn,
    source: &SourceModel,
    block_len: usize,
    key_space: u64,
    budgets: &Budgets,
) -> Result<InfoValue> {
    let m = checked_index_count(g)?;
    let cipher = ModuloSumCipher::new(m)?;
    if key_space == 0 || key_space > m {
        return Err(Error::ModulusMismatch {
            value: key_space,
            modulus: m,
        });
    }
    let k = source.alphabet_size();
    let total_blocks = (k as u128)
        .checked_pow(block_len as u32)
        .ok_or(Error::ComputeBudget {
            required: f64::INFINITY,
            budget: budgets.enumeration,
        })?;
    budgets.check_enumeration(total_blocks)?;
    budgets.check_pairs(total_blocks as u64, key_space)?;

    let mut block = Sequence::new(vec![0u8; block_len])?;
    let mut counts = vec![0u64; m as usize];
    let mut marginal = vec![0.0f64; m as usize];
    let mut h_given_block = 0.0f64;
    loop {
        let p = source.sequence_probability(&block)?;
        if p > 0.0 {
            for c in counts.iter_mut() {
                *c = 0;
            }
            let index = g.compress_index(&block);
            for key in 0..key_space {
                let ciphertext = cipher.encrypt_index(SecretKey { value: key }, index)?;
                counts[ciphertext as usize] += 1;
            }
            for (j, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let w = c as f64 / key_space as f64;
                    h_given_block -= p * w * math::ln(w);
                    marginal[j] += p * w;
                }
            }
        }
        if !advance_odometer(block.symbols_mut(), k) {
            break;
        }
    }
    let raw = entropy(&marginal)?.nats() - h_given_block;
    if raw < -1e-9 {
        return Err(Error::Invariant(format!(
            "index leakage computed as {raw} nats; it can never be negative"
        )));
    }
    Ok(InfoValue::from_nats(raw.max(0.0)))
}

/// Scaling schedule that drives every bound term to zero as the block
/// length grows, at excess key rate `epsilon` nats per symbol:
/// `big_delta = M e^{n eps/2}`, `key_space = M e^{n eps}`,
/// `delta = e^{-n eps/6}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticSettings {
    /// Block length the schedule is evaluated at.
    pub block_len: u64,
    /// Excess key rate in nats per symbol.
    pub epsilon: f64,
    /// Compression index count `M`.
    pub index_count: u64,
    /// Granularity parameter (real-valued; round as needed).
    pub big_delta: f64,
    /// Key-space size (real-valued; round as needed).
    pub key_space: f64,
    /// Equidistribution slack.
    pub delta: f64,
    /// False when the schedule lands outside the meaningful regime
    /// (`epsilon = 0` gives `delta = 1`).
    pub regime_ok: bool,
}

/// Evaluates the vanishing-leakage schedule at a block length.
///
/// Under it the three bound terms scale as `e^{-n eps/2}`,
/// `exp(-Theta(e^{n eps/2}))` (or `e^{-n eps/6}` under the Chebyshev
/// tail), and `e^{-n eps/6}`: all vanish for any `epsilon > 0`.
pub fn asymptotic_settings(
    block_len: u64,
    epsilon: f64,
    index_count: u64,
) -> Result<AsymptoticSettings> {
    if block_len == 0 {
        return Err(Error::InvalidParameter {
            name: "block_len",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "must be a finite nonnegative real",
        });
    }
    if index_count == 0 {
        return Err(Error::InvalidParameter {
            name: "index_count",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let ne = block_len as f64 * epsilon;
    let big_delta = index_count as f64 * math::exp(ne / 2.0);
    let key_space = big_delta * math::exp(ne / 2.0);
    let delta = math::exp(-ne / 6.0);
    if !big_delta.is_finite() || !key_space.is_finite() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            reason: "schedule overflows at this block length",
        });
    }
    Ok(AsymptoticSettings {
        block_len,
        epsilon,
        index_count,
        big_delta,
        key_space,
        delta,
        regime_ok: delta < 1.0,
    })
}

/// Result of sampling the cipher ensemble and measuring each draw.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSearchReport {
    /// Conditional leakage `I(J; X | T)` of each sampled cipher, nats.
    pub leakages: Vec<f64>,
    /// Sample mean of the leakages.
    pub mean: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Index of the best (lowest-leakage) sample.
    pub best_index: usize,
    /// Leakage of the best sample.
    pub best_leakage: f64,
    /// Type-weighted analytic ceiling shared by every sample.
    pub weighted_bound: f64,
    /// `H(T)` in nats: the part of the total leakage the permutation can
    /// never hide.
    pub type_entropy: f64,
    /// Coding rate `(ln M)/n` in nats per symbol.
    pub rate_nats: f64,
    /// Key rate `(ln N)/n` in nats per symbol.
    pub key_rate_nats: f64,
}

/// Draws ciphers from the ensemble, measures each one exactly, and
/// reports the sample statistics together with the shared bound.
///
/// Because the ensemble mean sits below the bound, some draw must too;
/// the report hands back the best draw's index so the caller can keep
/// that cipher. Requires a strictly positive key-rate margin
/// (`key_space > index count`); without it no secrecy is possible.
#[allow(clippy::too_many_arguments)]
pub fn ensemble_leakage_search<R: Rng + ?Sized>(
    g: &dyn CompressionFn,
    kind: CipherKind,
    source: &SourceModel,
    block_len: usize,
    key_space: u64,
    big_delta: u64,
    delta: f64,
    samples: u64,
    budgets: &Budgets,
    rng: &mut R,
) -> Result<EnsembleSearchReport> {
    if samples == 0 {
        return Err(Error::EmptyCollection("cipher samples"));
    }
    let m = checked_index_count(g)?;
    let rate_nats = math::ln(m as f64) / block_len as f64;
    let key_rate_nats = math::ln(key_space.max(1) as f64) / block_len as f64;
    if key_space <= m {
        return Err(Error::RateMarginViolation {
            rate_nats,
            key_rate_nats,
        });
    }
    let mut leakages = Vec::with_capacity(samples as usize);
    let mut weighted_bound = 0.0f64;
    let mut type_entropy = 0.0f64;
    for sample in 0..samples {
        let cipher = PermutationCipher::build(kind, block_len, key_space, rng)?;
        let report = leakage_given_type_marginal(g, &cipher, source, big_delta, delta, budgets)?;
        if sample == 0 {
            weighted_bound = report.weighted_bound;
            type_entropy = report.type_entropy.nats();
        }
        leakages.push(report.conditional_leakage.nats());
    }
    let (mean, std_error) = math::mean_and_std_error(&leakages);
    let best_index = leakages
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("leakages are finite"))
        .map(|(i, _)| i)
        .expect("samples is nonzero");
    Ok(EnsembleSearchReport {
        best_leakage: leakages[best_index],
        best_index,
        mean,
        std_error,
        weighted_bound,
        type_entropy,
        rate_nats,
        key_rate_nats,
        leakages,
    })
}
