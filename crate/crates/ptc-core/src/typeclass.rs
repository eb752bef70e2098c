//! Empirical types and type classes.
//!
//! The empirical type of a block `x^n` over an alphabet of size `k` is its
//! count vector `(c_0, .., c_{k-1})` with `sum c_a = n`. The type class of
//! a composition `P` is the set of all blocks with that exact count vector;
//! its cardinality is the multinomial coefficient
//!
//! `|T_P| = n! / (c_0! c_1! .. c_{k-1}!)`
//!
//! computed here as an exact big integer. The number of distinct types of
//! length `n` is at most `(n+1)^k`, so the entropy of the type random
//! variable is at most `k ln(n+1)` — the polynomial overhead term that
//! appears in total-leakage accounting.
//!
//! Type classes can be astronomically large, so every operation that walks
//! one takes an explicit enumeration budget and refuses (with the required
//! size) rather than start a hopeless loop.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{InfoValue, Sequence, SourceModel};

/// A count vector: how many times each alphabet symbol occurs in a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeComposition {
    counts: Vec<u64>,
    n: u64,
}

impl TypeComposition {
    /// Wraps a count vector; the alphabet must have at least two symbols
    /// and the counts must describe a nonempty block.
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::AlphabetTooSmall(counts.len()));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(TypeComposition { counts, n })
    }

    /// The empirical type of a block under the given alphabet size.
    pub fn of_sequence(x: &Sequence, alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(Error::AlphabetTooSmall(alphabet_size));
        }
        x.check_alphabet(alphabet_size)?;
        let mut counts = vec![0u64; alphabet_size];
        for &s in x.symbols() {
            counts[s as usize] += 1;
        }
        TypeComposition::new(counts)
    }

    /// Count vector.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Alphabet size `k`.
    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Block length `n`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Exact cardinality of the type class: `n! / prod_a c_a!`.
    ///
    /// Computed as a product of binomial coefficients over prefix sums, so
    /// every intermediate value is an integer.
    pub fn class_size(&self) -> BigUint {
        let mut size = BigUint::from(1u8);
        let mut placed = 0u64;
        for &c in &self.counts {
            placed += c;
            size *= binomial(placed, c);
        }
        size
    }

    /// Natural log of the class size.
    pub fn ln_class_size(&self) -> f64 {
        math::ln_big(&self.class_size())
    }

    /// Probability that an i.i.d. block from `source` lands in this class:
    /// `|T_P| * prod_a P(a)^{c_a}`, evaluated in the log domain.
    pub fn probability(&self, source: &SourceModel) -> Result<f64> {
        if source.alphabet_size() != self.alphabet_size() {
            return Err(Error::LengthMismatch(
                source.alphabet_size(),
                self.alphabet_size(),
            ));
        }
        let mut log_p = self.ln_class_size();
        for (a, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = source.prob(a as u8);
            if p <= math::MIN_PROB {
                return Ok(0.0);
            }
            log_p += c as f64 * math::ln(p);
        }
        Ok(math::exp(log_p))
    }

    /// Streams the type class in lexicographic order.
    ///
    /// Refuses when the class size exceeds `budget`, reporting the size the
    /// enumeration would have needed. The stream is independently
    /// restartable: each call returns a fresh iterator from the smallest
    /// block.
    pub fn enumerate(&self, budget: u64) -> Result<TypeClassIter> {
        self.size_within(budget)?;
        Ok(TypeClassIter {
            next: Some(self.first_block()),
        })
    }

    /// Materializes the class as an indexable view (lexicographic order).
    pub fn view(&self, budget: u64) -> Result<TypeClassView> {
        let size = self.size_within(budget)?;
        let n = self.n as usize;
        let bits = symbol_bits(self.alphabet_size());
        let mut block = self.first_block();
        let index = if (n as u32) * bits <= 128 {
            let mut keys = Vec::with_capacity(size as usize);
            loop {
                keys.push(pack_block(&block, bits));
                if !advance_multiset_permutation(&mut block) {
                    break;
                }
            }
            ViewIndex::Packed { bits, keys }
        } else {
            let mut blocks = Vec::with_capacity(size as usize);
            loop {
                blocks.push(block.clone());
                if !advance_multiset_permutation(&mut block) {
                    break;
                }
            }
            ViewIndex::Raw(blocks)
        };
        Ok(TypeClassView {
            composition: self.clone(),
            size,
            index,
        })
    }

    /// Returns the class size as `u64` when it fits the budget, otherwise
    /// the standard refusal error.
    pub fn size_within(&self, budget: u64) -> Result<u64> {
        let size = self.class_size();
        let fits = u64::try_from(&size).ok().filter(|&s| s <= budget);
        match fits {
            Some(s) => Ok(s),
            None => Err(Error::EnumerationBudget {
                required: math::exp(math::ln_big(&size)),
                budget,
            }),
        }
    }

    /// Lexicographically smallest block of this type: symbols ascending.
    fn first_block(&self) -> Vec<u8> {
        let mut block = Vec::with_capacity(self.n as usize);
        for (a, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                block.push(a as u8);
            }
        }
        block
    }
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u8);
    }
    let k = k.min(n - k);
    let mut result = BigUint::from(1u8);
    for i in 0..k {
        result = result * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    result
}

fn symbol_bits(alphabet_size: usize) -> u32 {
    (alphabet_size.next_power_of_two().trailing_zeros()).max(1)
}

fn pack_block(block: &[u8], bits: u32) -> u128 {
    let mut key = 0u128;
    for &s in block {
        key = (key << bits) | s as u128;
    }
    key
}

/// Lexicographic stream over one type class.
#[derive(Debug)]
pub struct TypeClassIter {
    next: Option<Vec<u8>>,
}

impl Iterator for TypeClassIter {
    type Item = Sequence;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut successor = current.clone();
        if advance_multiset_permutation(&mut successor) {
            self.next = Some(successor);
        }
        Some(Sequence::new(current).expect("type class blocks are nonempty"))
    }
}

/// Steps a block to its lexicographic successor among rearrangements of
/// the same multiset. Returns false when the block is already the largest.
fn advance_multiset_permutation(block: &mut [u8]) -> bool {
    let n = block.len();
    if n < 2 {
        return false;
    }
    // Largest i with block[i] < block[i+1].
    let mut i = n - 1;
    while i > 0 && block[i - 1] >= block[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let pivot = i - 1;
    // Largest j > pivot with block[j] > block[pivot].
    let mut j = n - 1;
    while block[j] <= block[pivot] {
        j -= 1;
    }
    block.swap(pivot, j);
    block[pivot + 1..].reverse();
    true
}

enum ViewIndex {
    /// Blocks packed MSB-first into integers; numeric order equals
    /// lexicographic order, so position in the sorted vector is the
    /// enumeration index.
    Packed { bits: u32, keys: Vec<u128> },
    /// Fallback for blocks too long to pack: the raw blocks in order.
    Raw(Vec<Vec<u8>>),
}

/// A materialized type class: composition, exact size, and constant-ish
/// time mapping between blocks and their lexicographic indices.
pub struct TypeClassView {
    composition: TypeComposition,
    size: u64,
    index: ViewIndex,
}

impl TypeClassView {
    /// The composition this class realizes.
    pub fn composition(&self) -> &TypeComposition {
        &self.composition
    }

    /// Number of blocks in the class.
    pub fn size(&self) -> u64 {
        self.size
    }

    /// Block length `n`.
    pub fn block_len(&self) -> usize {
        self.composition.n() as usize
    }

    /// The block at one lexicographic index.
    pub fn sequence(&self, index: u64) -> Result<Sequence> {
        if index >= self.size {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            });
        }
        let block = match &self.index {
            ViewIndex::Packed { bits, keys } => {
                let mut key = keys[index as usize];
                let n = self.block_len();
                let mask = (1u128 << bits) - 1;
                let mut block = vec![0u8; n];
                for slot in block.iter_mut().rev() {
                    *slot = (key & mask) as u8;
                    key >>= bits;
                }
                block
            }
            ViewIndex::Raw(blocks) => blocks[index as usize].clone(),
        };
        Sequence::new(block)
    }

    /// Lexicographic index of a block, or None when it is not in the class.
    pub fn index_of(&self, x: &Sequence) -> Option<u64> {
        self.index_of_slice(x.symbols())
    }

    /// Slice-level lookup used by hot enumeration loops.
    #[inline]
    pub fn index_of_slice(&self, block: &[u8]) -> Option<u64> {
        if block.len() != self.block_len() {
            return None;
        }
        match &self.index {
            ViewIndex::Packed { bits, keys } => {
                let key = pack_block(block, *bits);
                keys.binary_search(&key).ok().map(|i| i as u64)
            }
            ViewIndex::Raw(blocks) => blocks
                .binary_search_by(|probe| probe.as_slice().cmp(block))
                .ok()
                .map(|i| i as u64),
        }
    }

    /// Iterates the class in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = Sequence> + '_ {
        (0..self.size).map(move |i| self.sequence(i).expect("index in range"))
    }
}

/// All distinct types of length `n` over the given alphabet, in ascending
/// lexicographic order of count vectors.
pub fn all_types(n: u64, alphabet_size: usize) -> Result<Vec<TypeComposition>> {
    if alphabet_size < 2 {
        return Err(Error::AlphabetTooSmall(alphabet_size));
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut out = Vec::new();
    let mut counts = vec![0u64; alphabet_size];
    fill_compositions(n, 0, &mut counts, &mut out);
    Ok(out)
}

fn fill_compositions(
    remaining: u64,
    slot: usize,
    counts: &mut Vec<u64>,
    out: &mut Vec<TypeComposition>,
) {
    if slot + 1 == counts.len() {
        counts[slot] = remaining;
        out.push(TypeComposition::new(counts.clone()).expect("valid composition"));
        return;
    }
    for c in 0..=remaining {
        counts[slot] = c;
        fill_compositions(remaining - c, slot + 1, counts, out);
    }
}

/// Upper bound on the entropy of the type random variable:
/// `k ln(n+1)` nats, from the polynomial count of types.
pub fn type_info_bound(alphabet_size: usize, n: u64) -> InfoValue {
    InfoValue::from_nats(alphabet_size as f64 * math::ln(n as f64 + 1.0))
}

/// Exact entropy `H(P_{X^n})` of the type of an i.i.d. block.
pub fn type_distribution_entropy(source: &SourceModel, n: u64) -> Result<InfoValue> {
    let types = all_types(n, source.alphabet_size())?;
    let mut h = 0.0;
    for t in &types {
        h -= math::xlnx(t.probability(source)?);
    }
    Ok(InfoValue::from_nats(if h < 0.0 { 0.0 } else { h }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Sequence, SourceModel};
    use approx::assert_relative_eq;

    fn seq(symbols: &[u8]) -> Sequence {
        Sequence::new(symbols.to_vec()).unwrap()
    }

    #[test]
    fn class_size_matches_brute_force_count() {
        // Oracle: enumerate all 2^10 binary blocks and count type (5,5).
        let mut count = 0u64;
        for word in 0u32..(1 << 10) {
            if word.count_ones() == 5 {
                count += 1;
            }
        }
        assert_eq!(count, 252);
        let comp = TypeComposition::new(vec![5, 5]).unwrap();
        assert_eq!(comp.class_size(), BigUint::from(252u32));
    }

    #[test]
    fn class_size_of_constant_block_is_one() {
        let comp = TypeComposition::new(vec![0, 3]).unwrap();
        assert_eq!(comp.class_size(), BigUint::from(1u8));
    }

    #[test]
    fn class_sizes_sum_to_alphabet_power() {
        // sum over all types of |T_P| = k^n.
        let n = 7u64;
        for k in [2usize, 3] {
            let total: BigUint = all_types(n, k)
                .unwrap()
                .iter()
                .map(|t| t.class_size())
                .sum();
            let expected = BigUint::from(k as u64).pow(n as u32);
            assert_eq!(total, expected);
        }
    }

    #[test]
    fn type_of_sequence_counts_symbols() {
        let comp = TypeComposition::of_sequence(&seq(&[0, 1, 1, 2, 1]), 3).unwrap();
        assert_eq!(comp.counts(), &[1, 3, 1]);
        assert_eq!(comp.n(), 5);
    }

    #[test]
    fn type_is_invariant_under_position_swaps() {
        let x = seq(&[0, 0, 1, 2, 2, 1, 0]);
        let mut swapped = x.symbols().to_vec();
        swapped.swap(0, 5);
        swapped.swap(2, 6);
        let y = Sequence::new(swapped).unwrap();
        assert_eq!(
            TypeComposition::of_sequence(&x, 3).unwrap(),
            TypeComposition::of_sequence(&y, 3).unwrap()
        );
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let comp = TypeComposition::new(vec![2, 1]).unwrap();
        let blocks: Vec<_> = comp.enumerate(100).unwrap().collect();
        assert_eq!(
            blocks,
            vec![seq(&[0, 0, 1]), seq(&[0, 1, 0]), seq(&[1, 0, 0])]
        );

        let comp = TypeComposition::new(vec![1, 1, 1]).unwrap();
        let blocks: Vec<_> = comp.enumerate(100).unwrap().collect();
        let expected = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        assert_eq!(blocks.len(), 6);
        for (b, e) in blocks.iter().zip(expected.iter()) {
            assert_eq!(b.symbols(), e);
        }
        // Strictly increasing lexicographic order.
        for pair in blocks.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn enumeration_count_matches_class_size() {
        let comp = TypeComposition::new(vec![3, 4, 2]).unwrap();
        let expected: u64 = (&comp.class_size()).try_into().unwrap();
        assert_eq!(comp.enumerate(10_000).unwrap().count() as u64, expected);
    }

    #[test]
    fn enumeration_refuses_over_budget() {
        let comp = TypeComposition::new(vec![20, 20]).unwrap();
        // C(40, 20) = 137846528820.
        match comp.enumerate(10_000_000) {
            Err(Error::EnumerationBudget { required, budget }) => {
                assert_eq!(budget, 10_000_000);
                assert_relative_eq!(required, 137_846_528_820.0, max_relative = 1e-6);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn view_round_trips_indices() {
        let comp = TypeComposition::new(vec![2, 2, 1]).unwrap();
        let view = comp.view(10_000).unwrap();
        assert_eq!(view.size(), 30);
        for i in 0..view.size() {
            let block = view.sequence(i).unwrap();
            assert_eq!(view.index_of(&block), Some(i));
        }
        assert_eq!(view.index_of(&seq(&[0, 0, 0, 0, 0])), None);
        assert_eq!(view.index_of(&seq(&[0, 1])), None);
    }

    #[test]
    fn view_matches_enumeration_order() {
        let comp = TypeComposition::new(vec![3, 3]).unwrap();
        let view = comp.view(10_000).unwrap();
        for (i, block) in comp.enumerate(10_000).unwrap().enumerate() {
            assert_eq!(view.sequence(i as u64).unwrap(), block);
        }
    }

    #[test]
    fn type_probability_matches_closed_form() {
        // Binary p = (0.3, 0.7), counts (2, 2): 6 * 0.3^2 * 0.7^2 = 0.2646.
        let source = SourceModel::new(vec![0.3, 0.7]).unwrap();
        let comp = TypeComposition::new(vec![2, 2]).unwrap();
        let p = comp.probability(&source).unwrap();
        assert_relative_eq!(p, 0.2646, max_relative = 1e-12);
    }

    #[test]
    fn type_probability_matches_sequence_sum() {
        // The class probability equals the summed probability of its blocks.
        let source = SourceModel::new(vec![0.2, 0.5, 0.3]).unwrap();
        let comp = TypeComposition::new(vec![2, 1, 2]).unwrap();
        let direct = comp.probability(&source).unwrap();
        let summed: f64 = comp
            .enumerate(10_000)
            .unwrap()
            .map(|x| source.sequence_probability(&x).unwrap())
            .sum();
        assert_relative_eq!(direct, summed, max_relative = 1e-12);
    }

    #[test]
    fn type_probabilities_sum_to_one() {
        let source = SourceModel::new(vec![0.3, 0.7]).unwrap();
        for n in [1u64, 4, 9] {
            let total: f64 = all_types(n, 2)
                .unwrap()
                .iter()
                .map(|t| t.probability(&source).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n}: sum {total}");
        }
    }

    #[test]
    fn number_of_types_is_polynomial() {
        let types = all_types(3, 3).unwrap();
        assert_eq!(types.len(), 10); // C(5,2)
        assert!(types.len() as u64 <= 4u64.pow(3));
        // Deterministic ascending order.
        for pair in types.windows(2) {
            assert!(pair[0].counts() < pair[1].counts());
        }
    }

    #[test]
    fn info_bound_value() {
        let b = type_info_bound(2, 7);
        assert_relative_eq!(b.nats(), 2.0 * 8.0f64.ln(), max_relative = 1e-12);
        assert!((b.nats() - 4.1589).abs() < 1e-4);
    }

    #[test]
    fn type_entropy_at_n1_is_source_entropy() {
        let source = SourceModel::new(vec![0.3, 0.7]).unwrap();
        let h = type_distribution_entropy(&source, 1).unwrap();
        assert_relative_eq!(h.nats(), source.entropy().nats(), max_relative = 1e-10);
    }

    #[test]
    fn type_entropy_below_polynomial_bound() {
        let source = SourceModel::new(vec![0.25, 0.35, 0.4]).unwrap();
        for n in [2u64, 5, 9] {
            let h = type_distribution_entropy(&source, n).unwrap();
            assert!(h.nats() <= type_info_bound(3, n).nats() + 1e-12);
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 5), BigUint::from(252u32));
        assert_eq!(binomial(0, 0), BigUint::from(1u8));
        assert_eq!(binomial(5, 9), BigUint::from(0u8));
        assert_eq!(
            binomial(64, 32),
            "1832624140942590534".parse::<BigUint>().unwrap()
        );
    }
}
