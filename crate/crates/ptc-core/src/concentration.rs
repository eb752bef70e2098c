//! Empirical stress tests of the concentration step inside the leakage
//! bound.
//!
//! The bound's deviation term rests on one probabilistic fact: fix a
//! block `x` of a type class and a "normal" subset `B` of the class
//! (one holding at least `1/big_delta` of it); when a cipher is drawn,
//! the number of keys sending `x` into `B`,
//!
//! `hits = #{k : permute_k(x) in B}`,
//!
//! concentrates around its mean `N |B| / |T|`. Independent key draws
//! (table ciphers) obey a Chernoff tail; composed ciphers are only
//! pairwise independent and get the weaker Chebyshev tail. This module
//! redraws ciphers, counts how often `hits` strays by more than a
//! `delta` factor, and compares the observed frequency against the
//! matching analytic tail.

use alloc::vec;

use rand::Rng;

use crate::cipher::{CipherKind, PermutationCipher};
use crate::error::{Error, Result};
use crate::leakage::{BinPartition, Budgets};
use crate::math;
use crate::typeclass::{TypeClassView, TypeComposition};

/// Chernoff tail for the hit count under mutually independent keys:
/// `min(1, 2 exp(-delta^2/(2(2+delta)) * ratio))`, where `ratio` is the
/// guaranteed expectation floor `N / big_delta`.
pub fn chernoff_bound(delta: f64, ratio: f64) -> Result<f64> {
    check_tail_args(delta, ratio)?;
    let exponent = -(delta * delta) / (2.0 * (2.0 + delta)) * ratio;
    Ok((2.0 * math::exp(exponent)).min(1.0))
}

/// Chebyshev tail for the hit count under pairwise independent keys:
/// `min(1, 1 / (delta^2 * ratio))`.
pub fn chebyshev_bound(delta: f64, ratio: f64) -> Result<f64> {
    check_tail_args(delta, ratio)?;
    Ok((1.0 / (delta * delta * ratio)).min(1.0))
}

fn check_tail_args(delta: f64, ratio: f64) -> Result<()> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be a finite positive real",
        });
    }
    if !ratio.is_finite() || ratio <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "ratio",
            value: ratio,
            reason: "must be a finite positive real",
        });
    }
    Ok(())
}

/// The expectation ratio beyond which the Chernoff tail drops below the
/// Chebyshev tail for good: the larger root of
/// `ln 2 - c r + ln(delta^2 r) = 0` with `c = delta^2 / (2(2+delta))`.
///
/// Below the returned ratio the pairwise-independence guarantee is as
/// tight as the independent one; beyond it, mutual independence pays.
pub fn bound_crossover_ratio(delta: f64) -> Result<f64> {
    if !delta.is_finite() || delta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be a finite positive real",
        });
    }
    let c = delta * delta / (2.0 * (2.0 + delta));
    let f = |r: f64| core::f64::consts::LN_2 - c * r + math::ln(delta * delta * r);
    // f peaks at r = 1/c with value ln 2 - 1 + ln(2(2+delta)) > 0 and
    // falls monotonically beyond, so the larger root always exists.
    let mut low = 1.0 / c;
    let mut high = low * 2.0;
    while f(high) > 0.0 {
        high *= 2.0;
        if !high.is_finite() {
            return Err(Error::Invariant(alloc::format!(
                "crossover search diverged at delta {delta}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (low + high);
        if f(mid) > 0.0 {
            low = mid;
        } else {
            high = mid;
        }
    }
    Ok(0.5 * (low + high))
}

/// How an observed deviation frequency compares to its analytic tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The estimate (minus two standard errors) sits at or below the tail.
    Holds,
    /// The estimate sits above the tail but on fewer than ten observed
    /// events; too little evidence to call.
    Inconclusive,
    /// Ten or more observed events and still above the tail.
    Violated,
}

/// Outcome of redrawing ciphers and counting concentration failures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    /// Number of ciphers drawn.
    pub redraws: u64,
    /// Redraws on which the hit count strayed past the `delta` band.
    pub deviations: u64,
    /// `deviations / redraws`.
    pub empirical: f64,
    /// Binomial standard error of the estimate.
    pub std_error: f64,
    /// The matching analytic tail (Chernoff or Chebyshev), clamped to 1.
    pub bound: f64,
    /// Comparison verdict.
    pub verdict: Verdict,
}

/// A fixed (class, subset, probe block) triple whose hit count is
/// re-measured across freshly drawn ciphers.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationExperiment {
    composition: TypeComposition,
    class_size: u64,
    bin_start: u64,
    bin_end: u64,
    probe_rank: u64,
    key_space: u64,
    big_delta: u64,
    delta: f64,
    kind: CipherKind,
}

impl DeviationExperiment {
    /// Builds an experiment on an explicit rank range `[bin_start,
    /// bin_end)` of the lexicographically ordered class.
    ///
    /// The range must be "normal" — at least a `1/big_delta` share of
    /// the class — because the analytic tails assume that floor on the
    /// expected hit count.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        composition: TypeComposition,
        bin_start: u64,
        bin_end: u64,
        probe_rank: u64,
        key_space: u64,
        big_delta: u64,
        delta: f64,
        kind: CipherKind,
        enumeration_budget: u64,
    ) -> Result<Self> {
        let class_size = composition.size_within(enumeration_budget)?;
        if big_delta == 0 {
            return Err(Error::InvalidParameter {
                name: "big_delta",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if key_space == 0 {
            return Err(Error::InvalidParameter {
                name: "key_space",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                reason: "must be a finite positive real",
            });
        }
        if bin_start >= bin_end || bin_end > class_size {
            return Err(Error::IndexOutOfRange {
                index: bin_end,
                size: class_size,
            });
        }
        if probe_rank >= class_size {
            return Err(Error::IndexOutOfRange {
                index: probe_rank,
                size: class_size,
            });
        }
        let bin_len = bin_end - bin_start;
        if (bin_len as u128) * (big_delta as u128) < class_size as u128 {
            return Err(Error::InvalidParameter {
                name: "bin",
                value: bin_len as f64,
                reason: "subset holds less than a 1/big_delta share of the class",
            });
        }
        Ok(DeviationExperiment {
            composition,
            class_size,
            bin_start,
            bin_end,
            probe_rank,
            key_space,
            big_delta,
            delta,
            kind,
        })
    }

    /// Builds the canonical experiment on the first bin of the
    /// `big_delta`-way prefix partition.
    pub fn with_prefix_bin(
        composition: TypeComposition,
        big_delta: u64,
        probe_rank: u64,
        key_space: u64,
        delta: f64,
        kind: CipherKind,
        enumeration_budget: u64,
    ) -> Result<Self> {
        let class_size = composition.size_within(enumeration_budget)?;
        let (start, end) = BinPartition::new(class_size, big_delta)?.bin_range(0)?;
        Self::new(
            composition,
            start,
            end,
            probe_rank,
            key_space,
            big_delta,
            delta,
            kind,
            enumeration_budget,
        )
    }

    /// The monitored rank range.
    pub fn bin(&self) -> (u64, u64) {
        (self.bin_start, self.bin_end)
    }

    /// Size of the enumerated class.
    pub fn class_size(&self) -> u64 {
        self.class_size
    }

    /// Expected hit count `N |B| / |T|`.
    pub fn expected_hits(&self) -> f64 {
        self.key_space as f64 * (self.bin_end - self.bin_start) as f64 / self.class_size as f64
    }

    /// Counts the keys of one concrete cipher that send the probe block
    /// into the monitored subset.
    pub fn conditional_prob_statistic(
        &self,
        cipher: &PermutationCipher,
        view: &TypeClassView,
    ) -> Result<u64> {
        if view.composition() != &self.composition {
            return Err(Error::Invariant(alloc::format!(
                "view enumerates type {:?}, experiment probes type {:?}",
                view.composition().counts(),
                self.composition.counts()
            )));
        }
        if cipher.block_len() != view.block_len() {
            return Err(Error::LengthMismatch(cipher.block_len(), view.block_len()));
        }
        if cipher.key_space() != self.key_space {
            return Err(Error::InvalidParameter {
                name: "cipher",
                value: cipher.key_space() as f64,
                reason: "key space differs from the experiment's",
            });
        }
        let probe = view.sequence(self.probe_rank)?;
        let resolved = cipher.resolve_all()?;
        let mut permuted = vec![0u8; view.block_len()];
        let mut hits = 0u64;
        for sigma in &resolved {
            sigma.apply_into(probe.symbols(), &mut permuted);
            let rank = view.index_of_slice(&permuted).ok_or_else(|| {
                Error::Invariant(alloc::format!(
                    "permuted block {permuted:?} left its type class"
                ))
            })?;
            if (self.bin_start..self.bin_end).contains(&rank) {
                hits += 1;
            }
        }
        Ok(hits)
    }

    /// Whether a hit count strays from its expectation by more than a
    /// `delta` factor: `|hits |T| - N |B|| > delta N |B|`.
    pub fn is_deviation(&self, hits: u64) -> bool {
        let bin_len = self.bin_end - self.bin_start;
        let observed = hits as f64 * self.class_size as f64;
        let expected = self.key_space as f64 * bin_len as f64;
        (observed - expected).abs() > self.delta * expected
    }

    /// The analytic tail matched to the cipher family, at the
    /// conservative expectation floor `N / big_delta`.
    pub fn tail_bound(&self) -> Result<f64> {
        let ratio = self.key_space as f64 / self.big_delta as f64;
        match self.kind {
            CipherKind::TypeI => chernoff_bound(self.delta, ratio),
            CipherKind::TypeII => chebyshev_bound(self.delta, ratio),
        }
    }

    /// Redraws ciphers, counts deviations, and weighs the observed
    /// frequency against the analytic tail.
    pub fn estimate_tail<R: Rng + ?Sized>(
        &self,
        redraws: u64,
        budgets: &Budgets,
        rng: &mut R,
    ) -> Result<TailEstimate> {
        if redraws == 0 {
            return Err(Error::EmptyCollection("cipher redraws"));
        }
        if (redraws as u128) * (self.key_space as u128) > budgets.pair_evaluations as u128 {
            return Err(Error::ComputeBudget {
                required: redraws as f64 * self.key_space as f64,
                budget: budgets.pair_evaluations,
            });
        }
        let view = self.composition.view(budgets.enumeration)?;
        let n = view.block_len();
        let mut deviations = 0u64;
        for _ in 0..redraws {
            let cipher = PermutationCipher::build(self.kind, n, self.key_space, rng)?;
            let hits = self.conditional_prob_statistic(&cipher, &view)?;
            if self.is_deviation(hits) {
                deviations += 1;
            }
        }
        let empirical = deviations as f64 / redraws as f64;
        let std_error = math::sqrt(empirical * (1.0 - empirical) / redraws as f64);
        let bound = self.tail_bound()?;
        let verdict = if empirical - 2.0 * std_error <= bound {
            Verdict::Holds
        } else if deviations >= 10 {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        };
        Ok(TailEstimate {
            redraws,
            deviations,
            empirical,
            std_error,
            bound,
            verdict,
        })
    }
}
