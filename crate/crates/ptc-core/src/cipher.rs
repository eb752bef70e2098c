//! Permutation ciphers over block positions, and the modulo-sum cipher
//! used by the conventional compress-then-encrypt baseline.
//!
//! A permutation cipher encrypts a block by shuffling its positions:
//! `f(x^n, k) = pi_k(x^n)`. Position shuffles preserve the empirical type
//! of the block exactly, and map an i.i.d. source law to itself — the two
//! facts the reversed encrypt-then-compress pipeline rests on.
//!
//! Two key-indexed families are provided:
//!
//! * **Type I** stores `N` independently drawn uniform permutations; the
//!   key is the table index.
//! * **Type II** stores only `L = ceil(log2 N)` base permutations
//!   `sigma_1, .., sigma_L`. Key bits select factors, and the resolved
//!   permutation is the composition `f_{K_L} o .. o f_{K_1}` where
//!   `f_{K_i}` is `sigma_i` when bit `i` is set and the identity otherwise.
//!   Bit 0 (the least significant bit of the key integer) drives
//!   `sigma_1`, which is applied first. Key 0 therefore resolves to the
//!   identity permutation — the construction is implemented literally, and
//!   [`resolved_marginal_distances`] measures how far each key's resolved
//!   permutation is from uniform over the symmetric group.
//!
//! The modulo-sum cipher adds a uniform key to a compressed index (or
//! symbol-wise to a block) modulo a fixed modulus; with a uniform key the
//! ciphertext is independent of the payload.

use alloc::borrow::Cow;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Sequence;

/// A permutation of block positions.
///
/// `map[i]` is the destination of position `i`: encrypting a block `x`
/// produces `y` with `y[map[i]] = x[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    /// Validates that `map` is a bijection on `0..map.len()` and wraps it.
    pub fn new(map: Vec<u32>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let mut seen = vec![false; n];
        for &dest in &map {
            let d = dest as usize;
            if d >= n || seen[d] {
                return Err(Error::NotAPermutation(n));
            }
            seen[d] = true;
        }
        Ok(Permutation { map })
    }

    /// The identity permutation on `n` positions.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(Permutation {
            map: (0..n as u32).collect(),
        })
    }

    /// Draws a uniformly random permutation via an unbiased Fisher-Yates
    /// shuffle of the identity mapping.
    pub fn sample_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut map: Vec<u32> = (0..n as u32).collect();
        if map.is_empty() {
            return Err(Error::EmptySequence);
        }
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            map.swap(i, j);
        }
        Ok(Permutation { map })
    }

    /// Number of positions.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Always false: permutations act on at least one position.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The destination table.
    pub fn mapping(&self) -> &[u32] {
        &self.map
    }

    /// Applies the permutation: returns `y` with `y[map[i]] = x[i]`.
    pub fn apply(&self, x: &Sequence) -> Result<Sequence> {
        if x.len() != self.len() {
            return Err(Error::LengthMismatch(x.len(), self.len()));
        }
        let mut out = vec![0u8; x.len()];
        self.apply_into(x.symbols(), &mut out);
        Sequence::new(out)
    }

    /// Applies the inverse permutation: returns `x` with `x[i] = y[map[i]]`.
    pub fn apply_inverse(&self, y: &Sequence) -> Result<Sequence> {
        if y.len() != self.len() {
            return Err(Error::LengthMismatch(y.len(), self.len()));
        }
        let src = y.symbols();
        let out = self.map.iter().map(|&d| src[d as usize]).collect();
        Sequence::new(out)
    }

    /// Slice-level application for hot loops; lengths must already agree.
    #[inline]
    pub fn apply_into(&self, src: &[u8], dst: &mut [u8]) {
        for (i, &dest) in self.map.iter().enumerate() {
            dst[dest as usize] = src[i];
        }
    }

    /// The inverse permutation as a standalone object.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.map.len()];
        for (i, &dest) in self.map.iter().enumerate() {
            inv[dest as usize] = i as u32;
        }
        Permutation { map: inv }
    }

    /// Functional composition `self o inner`: `inner` is applied first.
    pub fn compose(&self, inner: &Permutation) -> Result<Permutation> {
        if self.len() != inner.len() {
            return Err(Error::LengthMismatch(self.len(), inner.len()));
        }
        // Position i goes to inner.map[i], then to self.map[inner.map[i]].
        let map = inner
            .map
            .iter()
            .map(|&mid| self.map[mid as usize])
            .collect();
        Ok(Permutation { map })
    }
}

/// A secret key: an integer in `[0, key_space)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecretKey {
    /// Key value.
    pub value: u64,
}

impl SecretKey {
    /// Draws a key uniformly from `[0, key_space)`.
    pub fn sample_uniform<R: Rng + ?Sized>(key_space: u64, rng: &mut R) -> Result<Self> {
        if key_space == 0 {
            return Err(Error::InvalidParameter {
                name: "key_space",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(SecretKey {
            value: rng.gen_range(0..key_space),
        })
    }
}

/// Type I permutation cipher: an explicit table of `N` uniform
/// permutations, keyed by table index.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeICipher {
    table: Vec<Permutation>,
}

impl TypeICipher {
    /// Draws `key_space` independent uniform permutations of `n` positions.
    pub fn build<R: Rng + ?Sized>(n: usize, key_space: u64, rng: &mut R) -> Result<Self> {
        validate_cipher_dims(n, key_space)?;
        let mut table = Vec::with_capacity(key_space as usize);
        for _ in 0..key_space {
            table.push(Permutation::sample_uniform(n, rng)?);
        }
        Ok(TypeICipher { table })
    }

    /// Wraps an explicit permutation table (all of one length).
    pub fn from_table(table: Vec<Permutation>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::EmptyCollection("permutation table"));
        }
        let n = table[0].len();
        for p in &table {
            if p.len() != n {
                return Err(Error::LengthMismatch(p.len(), n));
            }
        }
        Ok(TypeICipher { table })
    }

    /// Block length.
    pub fn block_len(&self) -> usize {
        self.table[0].len()
    }

    /// Number of keys `N`.
    pub fn key_space(&self) -> u64 {
        self.table.len() as u64
    }

    /// The stored permutation table.
    pub fn table(&self) -> &[Permutation] {
        &self.table
    }

    /// The permutation selected by a key.
    pub fn resolve(&self, key: SecretKey) -> Result<&Permutation> {
        self.table
            .get(key.value as usize)
            .ok_or(Error::KeyOutOfRange {
                key: key.value,
                key_space: self.key_space(),
            })
    }
}

/// Type II permutation cipher: `L = ceil(log2 N)` stored base
/// permutations; key bits select which factors enter the composition.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeIICipher {
    base: Vec<Permutation>,
    n: usize,
    key_space: u64,
}

impl TypeIICipher {
    /// Draws the `ceil(log2 key_space)` base permutations.
    pub fn build<R: Rng + ?Sized>(n: usize, key_space: u64, rng: &mut R) -> Result<Self> {
        validate_cipher_dims(n, key_space)?;
        let levels = bit_width(key_space);
        let mut base = Vec::with_capacity(levels as usize);
        for _ in 0..levels {
            base.push(Permutation::sample_uniform(n, rng)?);
        }
        Ok(TypeIICipher { base, n, key_space })
    }

    /// Wraps explicit base permutations for a given key space.
    pub fn from_base(base: Vec<Permutation>, n: usize, key_space: u64) -> Result<Self> {
        validate_cipher_dims(n, key_space)?;
        if (base.len() as u32) < bit_width(key_space) {
            return Err(Error::Invariant(alloc::format!(
                "{} base permutations cannot index a key space of {}",
                base.len(),
                key_space
            )));
        }
        for p in &base {
            if p.len() != n {
                return Err(Error::LengthMismatch(p.len(), n));
            }
        }
        Ok(TypeIICipher { base, n, key_space })
    }

    /// Block length.
    pub fn block_len(&self) -> usize {
        self.n
    }

    /// Number of keys `N` (not necessarily a power of two; keys at or
    /// beyond `N` are never issued).
    pub fn key_space(&self) -> u64 {
        self.key_space
    }

    /// The stored base permutations `sigma_1, .., sigma_L`.
    pub fn base(&self) -> &[Permutation] {
        &self.base
    }

    /// Resolves a key to its composed permutation.
    ///
    /// Bit `i` of the key (bit 0 = least significant) decides whether
    /// `sigma_{i+1}` participates; participating factors compose with
    /// `sigma_1` applied first, i.e. `pi_K = f_{K_L} o .. o f_{K_1}`.
    /// Key 0 resolves to the identity.
    pub fn resolve(&self, key: SecretKey) -> Result<Permutation> {
        if key.value >= self.key_space {
            return Err(Error::KeyOutOfRange {
                key: key.value,
                key_space: self.key_space,
            });
        }
        let mut resolved = Permutation::identity(self.n)?;
        for (bit, sigma) in self.base.iter().enumerate() {
            if key.value >> bit & 1 == 1 {
                resolved = sigma.compose(&resolved)?;
            }
        }
        Ok(resolved)
    }
}

/// Either permutation cipher behind one interface, so experiments can be
/// run against both families uniformly.
#[derive(Debug, Clone, PartialEq)]
pub enum PermutationCipher {
    /// Table cipher.
    TypeI(TypeICipher),
    /// Composed cipher.
    TypeII(TypeIICipher),
}

/// Which permutation-cipher family an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CipherKind {
    /// Explicit table of `N` permutations.
    TypeI,
    /// `ceil(log2 N)` composed base permutations.
    TypeII,
}

impl PermutationCipher {
    /// Builds a cipher of the requested family.
    pub fn build<R: Rng + ?Sized>(
        kind: CipherKind,
        n: usize,
        key_space: u64,
        rng: &mut R,
    ) -> Result<Self> {
        Ok(match kind {
            CipherKind::TypeI => PermutationCipher::TypeI(TypeICipher::build(n, key_space, rng)?),
            CipherKind::TypeII => {
                PermutationCipher::TypeII(TypeIICipher::build(n, key_space, rng)?)
            }
        })
    }

    /// Which family this cipher belongs to.
    pub fn kind(&self) -> CipherKind {
        match self {
            PermutationCipher::TypeI(_) => CipherKind::TypeI,
            PermutationCipher::TypeII(_) => CipherKind::TypeII,
        }
    }

    /// Block length `n`.
    pub fn block_len(&self) -> usize {
        match self {
            PermutationCipher::TypeI(c) => c.block_len(),
            PermutationCipher::TypeII(c) => c.block_len(),
        }
    }

    /// Number of keys `N`.
    pub fn key_space(&self) -> u64 {
        match self {
            PermutationCipher::TypeI(c) => c.key_space(),
            PermutationCipher::TypeII(c) => c.key_space(),
        }
    }

    /// How many permutations the cipher actually stores: `N` for Type I,
    /// `ceil(log2 N)` for Type II.
    pub fn stored_permutations(&self) -> usize {
        match self {
            PermutationCipher::TypeI(c) => c.table.len(),
            PermutationCipher::TypeII(c) => c.base.len(),
        }
    }

    /// The permutation a key resolves to.
    pub fn resolve(&self, key: SecretKey) -> Result<Cow<'_, Permutation>> {
        Ok(match self {
            PermutationCipher::TypeI(c) => Cow::Borrowed(c.resolve(key)?),
            PermutationCipher::TypeII(c) => Cow::Owned(c.resolve(key)?),
        })
    }

    /// Resolves every key `0..N` at once.
    ///
    /// For Type II the table is built by sharing composition prefixes
    /// (each key extends the key with its top bit cleared by one factor),
    /// so the whole family costs `O(N n)` rather than `O(N L n)`.
    pub fn resolve_all(&self) -> Result<Vec<Permutation>> {
        match self {
            PermutationCipher::TypeI(c) => Ok(c.table.clone()),
            PermutationCipher::TypeII(c) => {
                let n = c.block_len();
                let key_space = c.key_space();
                let mut resolved = Vec::with_capacity(key_space as usize);
                resolved.push(Permutation::identity(n)?);
                for key in 1..key_space {
                    let top = 63 - key.leading_zeros() as u64;
                    let rest = key & !(1u64 << top);
                    let sigma = &c.base[top as usize];
                    resolved.push(sigma.compose(&resolved[rest as usize])?);
                }
                Ok(resolved)
            }
        }
    }

    /// Encryption: `f(x^n, k) = pi_k(x^n)`.
    pub fn encrypt(&self, key: SecretKey, x: &Sequence) -> Result<Sequence> {
        self.resolve(key)?.apply(x)
    }

    /// Decryption: applies the inverse permutation, so
    /// `decrypt(k, encrypt(k, x)) = x` for every key and block.
    pub fn decrypt(&self, key: SecretKey, y: &Sequence) -> Result<Sequence> {
        self.resolve(key)?.apply_inverse(y)
    }
}

fn validate_cipher_dims(n: usize, key_space: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if key_space == 0 {
        return Err(Error::InvalidParameter {
            name: "key_space",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    Ok(())
}

/// `ceil(log2 v)` for `v >= 1`.
fn bit_width(v: u64) -> u32 {
    v.next_power_of_two().trailing_zeros()
}

/// Measures, for each key of a Type II cipher, the total-variation
/// distance between the resolved permutation's distribution (over fresh
/// base draws) and the uniform distribution on all `n!` permutations.
///
/// Intended for small `n` (the tally is over `n!` outcomes). Key 0 always
/// resolves to the identity, so its distance sits near `1 - 1/n!` no
/// matter how many redraws are spent; keys with at least one set bit
/// measure close to uniform.
pub fn resolved_marginal_distances<R: Rng + ?Sized>(
    n: usize,
    key_space: u64,
    redraws: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    validate_cipher_dims(n, key_space)?;
    if redraws == 0 {
        return Err(Error::EmptyCollection("redraws"));
    }
    let mut tallies: Vec<BTreeMap<Vec<u32>, u64>> =
        (0..key_space).map(|_| BTreeMap::new()).collect();
    for _ in 0..redraws {
        let cipher = PermutationCipher::build(CipherKind::TypeII, n, key_space, rng)?;
        for (key, resolved) in cipher.resolve_all()?.into_iter().enumerate() {
            *tallies[key].entry(resolved.mapping().to_vec()).or_insert(0) += 1;
        }
    }
    let factorial: u64 = (1..=n as u64).product();
    let uniform = 1.0 / factorial as f64;
    let distances = tallies
        .iter()
        .map(|tally| {
            let observed: f64 = tally
                .values()
                .map(|&c| (c as f64 / redraws as f64 - uniform).abs())
                .sum();
            let unseen = (factorial - tally.len() as u64) as f64 * uniform;
            0.5 * (observed + unseen)
        })
        .collect();
    Ok(distances)
}

/// Modulo-sum cipher: `c = (payload + key) mod modulus`.
///
/// Used by the conventional system on the compressed index; with a key
/// drawn uniformly from `[0, modulus)` the ciphertext distribution is
/// uniform for every fixed payload, so the ciphertext reveals nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModuloSumCipher {
    modulus: u64,
}

impl ModuloSumCipher {
    /// Creates a cipher with the given modulus (at least 2).
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidParameter {
                name: "modulus",
                value: modulus as f64,
                reason: "must be at least 2",
            });
        }
        Ok(ModuloSumCipher { modulus })
    }

    /// The modulus (also the key space).
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Encrypts one index: `(payload + key) mod modulus`.
    pub fn encrypt_index(&self, key: SecretKey, payload: u64) -> Result<u64> {
        self.check_reduced(payload)?;
        self.check_reduced(key.value)?;
        Ok((payload + key.value) % self.modulus)
    }

    /// Decrypts one index: `(ciphertext - key) mod modulus`.
    pub fn decrypt_index(&self, key: SecretKey, ciphertext: u64) -> Result<u64> {
        self.check_reduced(ciphertext)?;
        self.check_reduced(key.value)?;
        Ok((ciphertext + self.modulus - key.value) % self.modulus)
    }

    /// Symbol-wise encryption of a block under a same-length key stream.
    pub fn encrypt_sequence(&self, key_stream: &Sequence, payload: &Sequence) -> Result<Sequence> {
        self.map_sequences(key_stream, payload, |k, p| (p + k) % self.modulus)
    }

    /// Symbol-wise decryption of a block under a same-length key stream.
    pub fn decrypt_sequence(
        &self,
        key_stream: &Sequence,
        ciphertext: &Sequence,
    ) -> Result<Sequence> {
        self.map_sequences(key_stream, ciphertext, |k, c| {
            (c + self.modulus - k) % self.modulus
        })
    }

    fn map_sequences(
        &self,
        key_stream: &Sequence,
        data: &Sequence,
        op: impl Fn(u64, u64) -> u64,
    ) -> Result<Sequence> {
        if key_stream.len() != data.len() {
            return Err(Error::LengthMismatch(key_stream.len(), data.len()));
        }
        if self.modulus > 256 {
            return Err(Error::InvalidParameter {
                name: "modulus",
                value: self.modulus as f64,
                reason: "symbol-wise mode supports moduli up to 256",
            });
        }
        let mut out = Vec::with_capacity(data.len());
        for (&k, &d) in key_stream.symbols().iter().zip(data.symbols()) {
            self.check_reduced(k as u64)?;
            self.check_reduced(d as u64)?;
            out.push(op(k as u64, d as u64) as u8);
        }
        Sequence::new(out)
    }

    fn check_reduced(&self, value: u64) -> Result<()> {
        if value >= self.modulus {
            return Err(Error::ModulusMismatch {
                value,
                modulus: self.modulus,
            });
        }
        Ok(())
    }
}
