//! Rate-distortion solving and random-codebook compression.
//!
//! [`blahut_arimoto`] computes one point of the rate-distortion function
//! `R(D) = min_{P(Y|X): E d <= D} I(X;Y)` using the Lagrange-slope
//! parameterization: for a slope `s >= 0` the alternating updates
//!
//! `w(y|x) ∝ q(y) exp(-s d(x,y))`, `q(y) = sum_x p(x) w(y|x)`
//!
//! converge to the curve point whose tangent has slope `-s`. Sweeping the
//! slope grid traces the curve; bisection over the slope answers
//! "which point achieves distortion D" or "which point achieves rate R".
//!
//! [`build_codebook`] then draws `M` codewords i.i.d. from the optimal
//! output marginal `q`, and [`Codebook::compress`] maps a block to its
//! nearest codeword (lowest index wins ties). The codebook is the
//! compression function `g` whose leakage behaviour the rest of the crate
//! measures; the [`CompressionFn`] trait is the hook the leakage module
//! enumerates against.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{DistortionMeasure, InfoValue, Sequence, SourceModel};

/// Convergence threshold for the Blahut-Arimoto iteration: successive
/// rate iterates must agree to this many nats.
pub const BA_TOLERANCE_NATS: f64 = 1e-10;

/// Iteration cap for the Blahut-Arimoto solver.
pub const BA_MAX_ITERATIONS: u32 = 10_000;

/// Hard ceiling on codebook size; nearest-codeword search is linear in
/// the number of codewords, so larger books are refused rather than run.
pub const MAX_CODEBOOK_SIZE: u64 = 1 << 20;

/// One solved point of the rate-distortion curve.
#[derive(Debug, Clone, PartialEq)]
pub struct RdPoint {
    /// Lagrange slope the point was solved at.
    pub slope: f64,
    /// Achieved rate `I(X;Y)`.
    pub rate: InfoValue,
    /// Achieved expected distortion `E d(X,Y)`.
    pub distortion: f64,
    /// Optimal output marginal `q(y)`; codebooks are drawn from this.
    pub output_marginal: Vec<f64>,
    /// Optimal test channel `w(y|x)`, indexed `channel[x][y]`.
    pub channel: Vec<Vec<f64>>,
    /// Iterations the solver spent.
    pub iterations: u32,
}

fn validate_pair(source: &SourceModel, distortion: &DistortionMeasure) -> Result<()> {
    if source.alphabet_size() != distortion.source_alphabet() {
        return Err(Error::LengthMismatch(
            source.alphabet_size(),
            distortion.source_alphabet(),
        ));
    }
    Ok(())
}

/// Solves one rate-distortion point at the given slope.
///
/// Converges when successive rate iterates differ by less than
/// [`BA_TOLERANCE_NATS`]; gives up with an error carrying the last iterate
/// after [`BA_MAX_ITERATIONS`].
pub fn blahut_arimoto(
    source: &SourceModel,
    distortion: &DistortionMeasure,
    slope: f64,
) -> Result<RdPoint> {
    let k_y = distortion.reconstruction_alphabet();
    let uniform = vec![1.0 / k_y as f64; k_y];
    blahut_arimoto_from(source, distortion, slope, &uniform)
}

/// Blahut-Arimoto with an explicit starting marginal (used for warm
/// starts along a sweep).
fn blahut_arimoto_from(
    source: &SourceModel,
    distortion: &DistortionMeasure,
    slope: f64,
    initial_marginal: &[f64],
) -> Result<RdPoint> {
    validate_pair(source, distortion)?;
    if !slope.is_finite() || slope < 0.0 {
        return Err(Error::InvalidParameter {
            name: "slope",
            value: slope,
            reason: "must be a finite nonnegative real",
        });
    }
    let p = source.pmf();
    let k_x = p.len();
    let k_y = distortion.reconstruction_alphabet();

    // weight[x][y] = exp(-slope d(x,y)); infinite distortion gives 0.
    let weight: Vec<Vec<f64>> = (0..k_x)
        .map(|x| {
            (0..k_y)
                .map(|y| {
                    let d = distortion.value(x as u8, y as u8);
                    if d.is_finite() {
                        math::exp(-slope * d)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    let mut q: Vec<f64> = initial_marginal.to_vec();
    let mut channel = vec![vec![0.0f64; k_y]; k_x];
    let mut previous_rate = f64::INFINITY;

    for iteration in 1..=BA_MAX_ITERATIONS {
        // Channel update: w(y|x) proportional to q(y) exp(-s d(x,y)).
        for x in 0..k_x {
            if p[x] <= math::MIN_PROB {
                channel[x].fill(0.0);
                continue;
            }
            let mut z = 0.0;
            for y in 0..k_y {
                z += q[y] * weight[x][y];
            }
            if z <= 0.0 {
                return Err(Error::Invariant(alloc::format!(
                    "normalizer vanished for source symbol {x}; the output \
                     marginal lost all mass on its finite-distortion columns"
                )));
            }
            for y in 0..k_y {
                channel[x][y] = q[y] * weight[x][y] / z;
            }
        }
        // Marginal update: q(y) = sum_x p(x) w(y|x).
        for y in 0..k_y {
            q[y] = (0..k_x).map(|x| p[x] * channel[x][y]).sum();
        }
        // Rate against the induced marginal.
        let mut rate = 0.0;
        let mut avg_distortion = 0.0;
        for x in 0..k_x {
            if p[x] <= math::MIN_PROB {
                continue;
            }
            for y in 0..k_y {
                let w = channel[x][y];
                if w > math::MIN_PROB {
                    rate += p[x] * w * (math::ln(w) - math::ln(q[y]));
                    avg_distortion += p[x] * w * distortion.value(x as u8, y as u8);
                }
            }
        }
        if rate < 0.0 {
            rate = 0.0;
        }
        if (rate - previous_rate).abs() < BA_TOLERANCE_NATS {
            return Ok(RdPoint {
                slope,
                rate: InfoValue::from_nats(rate),
                distortion: avg_distortion,
                output_marginal: q,
                channel,
                iterations: iteration,
            });
        }
        previous_rate = rate;
        if iteration == BA_MAX_ITERATIONS {
            return Err(Error::SolverDidNotConverge {
                iterations: iteration,
                last_rate_nats: rate,
                last_distortion: avg_distortion,
            });
        }
    }
    unreachable!("loop returns or errors at the iteration cap")
}

/// Solves the curve over a slope grid, warm-starting each point from the
/// previous marginal.
///
/// The grid must be sorted ascending and nonnegative. The resulting
/// points are checked for the curve's monotone shape: distortion must not
/// increase and rate must not decrease as the slope grows.
pub fn rd_sweep(
    source: &SourceModel,
    distortion: &DistortionMeasure,
    slopes: &[f64],
) -> Result<Vec<RdPoint>> {
    if slopes.is_empty() {
        return Err(Error::EmptyCollection("slope grid"));
    }
    for pair in slopes.windows(2) {
        if pair[0] > pair[1] {
            return Err(Error::InvalidParameter {
                name: "slopes",
                value: pair[1],
                reason: "grid must be sorted ascending",
            });
        }
    }
    let k_y = distortion.reconstruction_alphabet();
    let mut marginal = vec![1.0 / k_y as f64; k_y];
    let mut points = Vec::with_capacity(slopes.len());
    for &slope in slopes {
        let point = blahut_arimoto_from(source, distortion, slope, &marginal)?;
        marginal = point.output_marginal.clone();
        points.push(point);
    }
    for pair in points.windows(2) {
        let monotone = pair[1].distortion <= pair[0].distortion + 1e-9
            && pair[1].rate.nats() >= pair[0].rate.nats() - 1e-9;
        if !monotone {
            return Err(Error::NonMonotonicSweep {
                slope: pair[1].slope,
            });
        }
    }
    Ok(points)
}

/// Maximum slope probed by the bisection lookups. `exp(-700)` underflows
/// to a denormal, so larger slopes cannot change the iteration.
const SLOPE_CAP: f64 = 700.0;

/// Bisection tolerance for [`rd_point_at_distortion`].
pub const TARGET_DISTORTION_TOLERANCE: f64 = 1e-8;

/// Finds the curve point achieving a target expected distortion, by
/// bisection over the slope (distortion is monotone non-increasing in it).
///
/// Targets below the measure's minimum achievable expected distortion are
/// refused.
pub fn rd_point_at_distortion(
    source: &SourceModel,
    distortion: &DistortionMeasure,
    target: f64,
) -> Result<RdPoint> {
    validate_pair(source, distortion)?;
    if !target.is_finite() || target < 0.0 {
        return Err(Error::InvalidParameter {
            name: "target_distortion",
            value: target,
            reason: "must be a finite nonnegative real",
        });
    }
    let minimum: f64 = source
        .pmf()
        .iter()
        .enumerate()
        .map(|(x, &px)| {
            let best = (0..distortion.reconstruction_alphabet())
                .map(|y| distortion.value(x as u8, y as u8))
                .fold(f64::INFINITY, f64::min);
            px * best
        })
        .sum();
    if target < minimum - TARGET_DISTORTION_TOLERANCE {
        return Err(Error::UnreachableDistortion { target, minimum });
    }

    let point = blahut_arimoto(source, distortion, 0.0)?;
    if point.distortion <= target + TARGET_DISTORTION_TOLERANCE {
        return Ok(point);
    }
    let mut low = 0.0f64;
    let mut high = 1.0f64;
    let mut at_high = blahut_arimoto(source, distortion, high)?;
    while at_high.distortion > target && high < SLOPE_CAP {
        high = (high * 2.0).min(SLOPE_CAP);
        at_high = blahut_arimoto(source, distortion, high)?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (low + high);
        let point = blahut_arimoto(source, distortion, mid)?;
        if (point.distortion - target).abs() <= TARGET_DISTORTION_TOLERANCE {
            return Ok(point);
        }
        if point.distortion > target {
            low = mid;
        } else {
            high = mid;
        }
    }
    let last = blahut_arimoto(source, distortion, 0.5 * (low + high))?;
    Err(Error::SolverDidNotConverge {
        iterations: 200,
        last_rate_nats: last.rate.nats(),
        last_distortion: last.distortion,
    })
}

/// Finds the curve point achieving a target rate in nats per symbol, by
/// bisection over the slope (rate is monotone non-decreasing in it).
///
/// When the target exceeds the largest rate reachable within the slope
/// cap (that is, the source entropy side of the curve), the cap point is
/// returned: its marginal is the right codebook distribution for any
/// rate at or beyond the curve's end.
pub fn rd_point_at_rate(
    source: &SourceModel,
    distortion: &DistortionMeasure,
    target_nats: f64,
) -> Result<RdPoint> {
    validate_pair(source, distortion)?;
    if !target_nats.is_finite() || target_nats < 0.0 {
        return Err(Error::InvalidParameter {
            name: "target_rate",
            value: target_nats,
            reason: "must be a finite nonnegative real",
        });
    }
    const RATE_TOLERANCE: f64 = 1e-8;
    let point = blahut_arimoto(source, distortion, 0.0)?;
    if point.rate.nats() >= target_nats {
        return Ok(point);
    }
    let mut low = 0.0f64;
    let mut high = 1.0f64;
    let mut at_high = blahut_arimoto(source, distortion, high)?;
    while at_high.rate.nats() < target_nats && high < SLOPE_CAP {
        high = (high * 2.0).min(SLOPE_CAP);
        at_high = blahut_arimoto(source, distortion, high)?;
    }
    if at_high.rate.nats() < target_nats {
        return Ok(at_high);
    }
    for _ in 0..200 {
        let mid = 0.5 * (low + high);
        let point = blahut_arimoto(source, distortion, mid)?;
        if (point.rate.nats() - target_nats).abs() <= RATE_TOLERANCE {
            return Ok(point);
        }
        if point.rate.nats() < target_nats {
            low = mid;
        } else {
            high = mid;
        }
    }
    let last = blahut_arimoto(source, distortion, 0.5 * (low + high))?;
    Err(Error::SolverDidNotConverge {
        iterations: 200,
        last_rate_nats: last.rate.nats(),
        last_distortion: last.distortion,
    })
}

/// A block compression function `g : X^n -> {0, .., M-1}` that the
/// leakage machinery can enumerate against.
///
/// Implementations may assume blocks have the correct length and
/// alphabet; enumeration code always supplies valid blocks.
pub trait CompressionFn {
    /// Number of compression indices `M`.
    fn index_count(&self) -> u64;
    /// The index assigned to a block.
    fn compress_index(&self, x: &Sequence) -> u64;
}

/// A fixed list of `M` codewords of a common block length.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    alphabet_size: usize,
    codewords: Vec<Sequence>,
}

impl Codebook {
    /// Wraps explicit codewords over a reconstruction alphabet.
    pub fn from_codewords(alphabet_size: usize, codewords: Vec<Sequence>) -> Result<Self> {
        if codewords.is_empty() {
            return Err(Error::EmptyCollection("codebook"));
        }
        if codewords.len() as u64 > MAX_CODEBOOK_SIZE {
            return Err(Error::CodebookTooLarge {
                m: codewords.len() as u64,
                max: MAX_CODEBOOK_SIZE,
            });
        }
        let n = codewords[0].len();
        for c in &codewords {
            if c.len() != n {
                return Err(Error::LengthMismatch(c.len(), n));
            }
            c.check_alphabet(alphabet_size)?;
        }
        Ok(Codebook {
            alphabet_size,
            codewords,
        })
    }

    /// Number of codewords `M`.
    pub fn size(&self) -> u64 {
        self.codewords.len() as u64
    }

    /// Block length `n`.
    pub fn block_len(&self) -> usize {
        self.codewords[0].len()
    }

    /// Size of the reconstruction alphabet.
    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// All codewords, in index order.
    pub fn codewords(&self) -> &[Sequence] {
        &self.codewords
    }

    /// The reconstruction for a compression index.
    pub fn reconstruct(&self, index: u64) -> Result<&Sequence> {
        self.codewords
            .get(index as usize)
            .ok_or(Error::IndexOutOfRange {
                index,
                size: self.size(),
            })
    }

    /// Maps a block to the index of its nearest codeword under the given
    /// measure; ties break to the lowest index.
    pub fn compress(&self, x: &Sequence, distortion: &DistortionMeasure) -> Result<u64> {
        if x.len() != self.block_len() {
            return Err(Error::LengthMismatch(x.len(), self.block_len()));
        }
        x.check_alphabet(distortion.source_alphabet())?;
        if self.alphabet_size > distortion.reconstruction_alphabet() {
            return Err(Error::LengthMismatch(
                self.alphabet_size,
                distortion.reconstruction_alphabet(),
            ));
        }
        Ok(self.nearest_unchecked(x.symbols(), distortion))
    }

    /// Nearest-codeword search without validation, for enumeration loops.
    #[inline]
    fn nearest_unchecked(&self, block: &[u8], distortion: &DistortionMeasure) -> u64 {
        let mut best_index = 0u64;
        let mut best_total = f64::INFINITY;
        for (j, codeword) in self.codewords.iter().enumerate() {
            let mut total = 0.0;
            for (&a, &b) in block.iter().zip(codeword.symbols()) {
                total += distortion.value(a, b);
            }
            if total < best_total {
                best_total = total;
                best_index = j as u64;
            }
        }
        best_index
    }
}

/// Draws an `M`-codeword codebook i.i.d. from a solved point's output
/// marginal: every symbol of every codeword is an independent sample of
/// `q(y)`.
pub fn build_codebook<R: Rng + ?Sized>(
    rd_point: &RdPoint,
    n: usize,
    m: u64,
    rng: &mut R,
) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if m == 0 {
        return Err(Error::EmptyCollection("codebook"));
    }
    if m > MAX_CODEBOOK_SIZE {
        return Err(Error::CodebookTooLarge {
            m,
            max: MAX_CODEBOOK_SIZE,
        });
    }
    let q = &rd_point.output_marginal;
    let mut codewords = Vec::with_capacity(m as usize);
    for _ in 0..m {
        let mut symbols = Vec::with_capacity(n);
        for _ in 0..n {
            symbols.push(sample_from_pmf(q, rng));
        }
        codewords.push(Sequence::new(symbols)?);
    }
    Codebook::from_codewords(q.len(), codewords)
}

/// Inverse-CDF draw from a probability vector.
fn sample_from_pmf<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (s, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return s as u8;
        }
    }
    (pmf.len() - 1) as u8
}

/// Nearest-codeword compression of a fixed codebook under a fixed
/// measure, as a [`CompressionFn`].
pub struct NearestCodeword<'a> {
    codebook: &'a Codebook,
    distortion: &'a DistortionMeasure,
}

impl<'a> NearestCodeword<'a> {
    /// Pairs a codebook with the measure it quantizes under.
    pub fn new(codebook: &'a Codebook, distortion: &'a DistortionMeasure) -> Result<Self> {
        if codebook.alphabet_size() > distortion.reconstruction_alphabet() {
            return Err(Error::LengthMismatch(
                codebook.alphabet_size(),
                distortion.reconstruction_alphabet(),
            ));
        }
        Ok(NearestCodeword {
            codebook,
            distortion,
        })
    }
}

impl CompressionFn for NearestCodeword<'_> {
    fn index_count(&self) -> u64 {
        self.codebook.size()
    }

    fn compress_index(&self, x: &Sequence) -> u64 {
        self.codebook
            .nearest_unchecked(x.symbols(), self.distortion)
    }
}

/// Monte Carlo estimate of a codebook's operational performance on a
/// source: rate `(ln M)/n` plus the sample mean and standard error of
/// the achieved distortion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerformanceSummary {
    /// Coding rate in nats per symbol.
    pub rate_nats: f64,
    /// Sample mean of the per-block distortion.
    pub mean_distortion: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Number of Monte Carlo trials.
    pub trials: u64,
}

/// Runs `trials` compress-reconstruct trials on i.i.d. source blocks.
///
/// Each trial uses its own substream derived from the passed generator,
/// so the estimate does not depend on how trials might be batched.
pub fn measure_performance<R: Rng + ?Sized>(
    codebook: &Codebook,
    source: &SourceModel,
    distortion: &DistortionMeasure,
    trials: u64,
    rng: &mut R,
) -> Result<PerformanceSummary> {
    if trials == 0 {
        return Err(Error::EmptyCollection("trials"));
    }
    validate_pair(source, distortion)?;
    let n = codebook.block_len();
    let substream_seed: u64 = rng.gen();
    let mut samples = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut trial_rng = ChaCha12Rng::seed_from_u64(substream_seed);
        trial_rng.set_stream(trial);
        let x = source.sample_iid(n, &mut trial_rng)?;
        let index = codebook.compress(&x, distortion)?;
        let reconstruction = codebook.reconstruct(index)?;
        samples.push(distortion.sequence_distortion(&x, reconstruction)?);
    }
    let (mean, std_error) = math::mean_and_std_error(&samples);
    Ok(PerformanceSummary {
        rate_nats: math::ln(codebook.size() as f64) / n as f64,
        mean_distortion: mean,
        std_error,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mutual_information;
    use crate::rng;
    use approx::assert_relative_eq;

    fn binary_source(p1: f64) -> SourceModel {
        SourceModel::new(vec![1.0 - p1, p1]).unwrap()
    }

    /// Independent closed form for the binary-Hamming curve, in nats:
    /// R(D) = h(p) - h(D) for 0 <= D < min(p, 1-p).
    fn binary_hamming_rate(p: f64, d: f64) -> f64 {
        let h = |q: f64| -> f64 {
            if q <= 0.0 || q >= 1.0 {
                0.0
            } else {
                -(q * q.ln() + (1.0 - q) * (1.0 - q).ln())
            }
        };
        (h(p) - h(d)).max(0.0)
    }

    #[test]
    fn slope_zero_gives_zero_rate() {
        let source = binary_source(0.5);
        let d = DistortionMeasure::hamming(2).unwrap();
        let point = blahut_arimoto(&source, &d, 0.0).unwrap();
        assert!(point.rate.nats().abs() < 1e-12);
        assert_relative_eq!(point.distortion, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn solved_points_match_binary_closed_form() {
        let d = DistortionMeasure::hamming(2).unwrap();
        // p = 0.5, D = 0.1: R = ln 2 - h(0.1) = 0.3680 nats = 0.5310 bits.
        let point = rd_point_at_distortion(&binary_source(0.5), &d, 0.1).unwrap();
        let expected = binary_hamming_rate(0.5, 0.1);
        assert!((point.rate.nats() - expected).abs() < 1e-7);
        assert!((point.rate.nats() - 0.3680).abs() < 1e-4);
        assert!((point.rate.bits() - 0.5310).abs() < 1e-4);

        // p = 0.3, D = 0.1: R = 0.4123 bits.
        let point = rd_point_at_distortion(&binary_source(0.3), &d, 0.1).unwrap();
        let expected = binary_hamming_rate(0.3, 0.1);
        assert!((point.rate.nats() - expected).abs() < 1e-7);
        assert!((point.rate.bits() - 0.4123).abs() < 1e-4);
    }

    #[test]
    fn rate_matches_mutual_information_of_solved_channel() {
        // Dual route: the solver's rate must agree with the generic
        // mutual-information functional applied to p(x) w(y|x).
        let source = SourceModel::new(vec![0.2, 0.3, 0.5]).unwrap();
        let d = DistortionMeasure::hamming(3).unwrap();
        let point = blahut_arimoto(&source, &d, 2.5).unwrap();
        let joint: Vec<Vec<f64>> = point
            .channel
            .iter()
            .enumerate()
            .map(|(x, row)| row.iter().map(|w| source.pmf()[x] * w).collect())
            .collect();
        let info = mutual_information(&joint).unwrap();
        assert!((info.nats() - point.rate.nats()).abs() < 1e-9);
    }

    #[test]
    fn sweep_is_monotone_and_convex() {
        let source = binary_source(0.4);
        let d = DistortionMeasure::hamming(2).unwrap();
        let slopes: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let points = rd_sweep(&source, &d, &slopes).unwrap();
        for pair in points.windows(2) {
            assert!(pair[1].distortion <= pair[0].distortion + 1e-9);
            assert!(pair[1].rate.nats() >= pair[0].rate.nats() - 1e-9);
        }
        // Convexity: chord slopes (in the (D, R) plane) must steepen as
        // distortion falls. Walk points in decreasing-D order.
        let mut previous_chord = f64::INFINITY;
        for pair in points.windows(2) {
            let dd = pair[1].distortion - pair[0].distortion;
            if dd.abs() < 1e-9 {
                continue;
            }
            let chord = (pair[1].rate.nats() - pair[0].rate.nats()) / dd;
            assert!(chord <= previous_chord + 1e-6, "curve not convex");
            previous_chord = chord;
        }
    }

    #[test]
    fn sweep_rejects_unsorted_grids() {
        let source = binary_source(0.5);
        let d = DistortionMeasure::hamming(2).unwrap();
        assert!(matches!(
            rd_sweep(&source, &d, &[1.0, 0.5]),
            Err(Error::InvalidParameter { name: "slopes", .. })
        ));
    }

    #[test]
    fn unreachable_distortion_is_refused() {
        let source = binary_source(0.5);
        let d = DistortionMeasure::hamming(2).unwrap();
        assert!(matches!(
            rd_point_at_distortion(&source, &d, -0.2),
            Err(Error::InvalidParameter { .. })
        ));
        // Hamming with matched alphabets reaches 0, so 0 must work.
        let point = rd_point_at_distortion(&source, &d, 0.0).unwrap();
        assert!(point.distortion <= 1e-8);
    }

    #[test]
    fn rate_lookup_hits_target() {
        let source = binary_source(0.5);
        let d = DistortionMeasure::hamming(2).unwrap();
        let target = 0.5 * core::f64::consts::LN_2; // half a bit
        let point = rd_point_at_rate(&source, &d, target).unwrap();
        assert!((point.rate.nats() - target).abs() < 1e-7);
        // At rate 1/2 bit the binary symmetric curve sits near D = 0.110.
        assert!((point.distortion - 0.110).abs() < 1e-3);
    }

    #[test]
    fn codebook_compress_breaks_ties_low() {
        let d = DistortionMeasure::hamming(2).unwrap();
        let codewords = vec![
            Sequence::new(vec![0, 0]).unwrap(),
            Sequence::new(vec![0, 0]).unwrap(),
            Sequence::new(vec![1, 1]).unwrap(),
        ];
        let book = Codebook::from_codewords(2, codewords).unwrap();
        let x = Sequence::new(vec![0, 0]).unwrap();
        assert_eq!(book.compress(&x, &d).unwrap(), 0);
        // Equidistant between codewords 0/1 (distance 1) and 2 (distance 1).
        let y = Sequence::new(vec![0, 1]).unwrap();
        assert_eq!(book.compress(&y, &d).unwrap(), 0);
    }

    #[test]
    fn compress_matches_brute_force_on_all_blocks() {
        let d = DistortionMeasure::hamming(2).unwrap();
        let mut r = rng::for_role(71, "codebook");
        let point = blahut_arimoto(&binary_source(0.5), &d, 3.0).unwrap();
        let book = build_codebook(&point, 4, 2, &mut r).unwrap();
        for word in 0u8..16 {
            let block: Vec<u8> = (0..4).map(|i| (word >> (3 - i)) & 1).collect();
            let x = Sequence::new(block).unwrap();
            let fast = book.compress(&x, &d).unwrap();
            // Brute force with explicit lowest-index tie-break.
            let mut best = 0u64;
            let mut best_d = f64::INFINITY;
            for (j, c) in book.codewords().iter().enumerate() {
                let dist = d.sequence_distortion(&x, c).unwrap();
                if dist < best_d {
                    best_d = dist;
                    best = j as u64;
                }
            }
            assert_eq!(fast, best);
        }
    }

    #[test]
    fn reconstruct_round_trip_has_zero_distortion() {
        let d = DistortionMeasure::hamming(2).unwrap();
        let mut r = rng::for_role(73, "roundtrip");
        let point = blahut_arimoto(&binary_source(0.3), &d, 2.0).unwrap();
        let book = build_codebook(&point, 6, 8, &mut r).unwrap();
        for j in 0..book.size() {
            let c = book.reconstruct(j).unwrap().clone();
            let back = book.compress(&c, &d).unwrap();
            let via = book.reconstruct(back).unwrap();
            assert_eq!(d.sequence_distortion(&c, via).unwrap(), 0.0);
            assert!(back <= j, "ties must resolve to the lowest index");
        }
        assert!(matches!(
            book.reconstruct(8),
            Err(Error::IndexOutOfRange { index: 8, size: 8 })
        ));
    }

    #[test]
    fn codeword_statistics_match_the_marginal() {
        // M * n = 100_000 symbols drawn from q; empirical frequency of
        // each symbol within 3 sigma.
        let source = binary_source(0.3);
        let d = DistortionMeasure::hamming(2).unwrap();
        let point = rd_point_at_distortion(&source, &d, 0.05).unwrap();
        let mut r = rng::for_role(79, "stats");
        let n = 16usize;
        let m = 6250u64;
        let book = build_codebook(&point, n, m, &mut r).unwrap();
        let total = (n as u64 * m) as f64;
        let mut counts = [0f64; 2];
        for c in book.codewords() {
            for &s in c.symbols() {
                counts[s as usize] += 1.0;
            }
        }
        for (y, &count) in counts.iter().enumerate() {
            let q = point.output_marginal[y];
            let sigma = (total * q * (1.0 - q)).sqrt();
            assert!(
                (count - total * q).abs() < 3.0 * sigma,
                "symbol {y}: count {count} expected {}",
                total * q
            );
        }
    }

    #[test]
    fn oversized_codebooks_are_refused() {
        let source = binary_source(0.5);
        let d = DistortionMeasure::hamming(2).unwrap();
        let point = blahut_arimoto(&source, &d, 1.0).unwrap();
        let mut r = rng::for_role(83, "big");
        assert!(matches!(
            build_codebook(&point, 4, (1 << 20) + 1, &mut r),
            Err(Error::CodebookTooLarge { .. })
        ));
    }

    #[test]
    fn constant_codebook_measures_source_bias() {
        // M = 1, all-zeros codeword, p = 0.5: every block compresses to
        // the constant, so mean distortion estimates 0.5.
        let source = binary_source(0.5);
        let d = DistortionMeasure::hamming(2).unwrap();
        let book = Codebook::from_codewords(2, vec![Sequence::new(vec![0; 16]).unwrap()]).unwrap();
        let mut r = rng::for_role(89, "constant");
        let perf = measure_performance(&book, &source, &d, 2000, &mut r).unwrap();
        assert_eq!(perf.rate_nats, 0.0);
        assert!(
            (perf.mean_distortion - 0.5).abs() < 4.0 * perf.std_error + 1e-9,
            "mean {} se {}",
            perf.mean_distortion,
            perf.std_error
        );
    }

    #[test]
    fn performance_is_seed_deterministic() {
        let source = binary_source(0.4);
        let d = DistortionMeasure::hamming(2).unwrap();
        let point = blahut_arimoto(&source, &d, 2.0).unwrap();
        let book = build_codebook(&point, 8, 4, &mut rng::for_role(97, "cb")).unwrap();
        let a = measure_performance(&book, &source, &d, 500, &mut rng::for_role(97, "mp")).unwrap();
        let b = measure_performance(&book, &source, &d, 500, &mut rng::for_role(97, "mp")).unwrap();
        assert_eq!(a, b);
    }
}
