//! Small numeric helpers shared across the crate.
//!
//! All transcendental functions are routed through `libm` rather than the
//! platform math library: the crate is `no_std`, and `libm` is pure Rust,
//! so identical inputs produce identical bits on every platform. That is
//! what makes regenerated reports byte-comparable.

use num_bigint::BigUint;

/// Probabilities at or below this threshold are treated as exact zeros in
/// entropy-style sums, implementing the convention `0 * ln 0 = 0`.
pub const MIN_PROB: f64 = 1e-300;

/// Absolute tolerance for "this vector is a probability distribution".
pub const PROB_TOLERANCE: f64 = 1e-12;

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Exponential.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `p * ln(p)` with the `0 * ln 0 = 0` convention.
#[inline]
pub fn xlnx(p: f64) -> f64 {
    if p <= MIN_PROB {
        0.0
    } else {
        p * ln(p)
    }
}

/// Natural logarithm of an arbitrarily large exact integer.
///
/// For values with at most 63 significant bits the conversion is exact; for
/// larger values the top 63 bits are kept and the discarded tail contributes
/// a relative error below 2^-62, far inside f64 round-off.
pub fn ln_big(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 63 {
        let v: u64 = value.try_into().expect("fits in u64");
        return ln(v as f64);
    }
    let shift = bits - 63;
    let top: u64 = (value >> shift).try_into().expect("63 bits fit in u64");
    ln(top as f64) + (shift as f64) * core::f64::consts::LN_2
}

/// Sample mean and standard error of a slice of observations.
///
/// Returns `(mean, standard_error)`; the standard error is the sample
/// standard deviation divided by sqrt(count), and 0 when there are fewer
/// than two observations.
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let count = values.len();
    if count == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let variance = ss / (count as f64 - 1.0);
    (mean, sqrt(variance / count as f64))
}
