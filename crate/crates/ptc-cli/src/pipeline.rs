//! End-to-end pipeline drivers for the two systems.
//!
//! Both systems quantize with the same random codebook, drawn from the
//! output marginal of the rate-distortion curve point at the configured
//! coding rate. The reversed system permutes the block under a secret
//! key before compressing and un-permutes the decoded codeword; the
//! conventional system compresses first and hides only the index with a
//! modular one-time pad, which requires a key space equal to the
//! codebook size.
//!
//! Every randomized object gets its own named substream of the master
//! seed (`"cipher"`, `"codebook"`, `"trial"`), so a report is a pure
//! function of config plus seed and the same source blocks feed both
//! systems in a comparison.

use ptc_core::cipher::{ModuloSumCipher, PermutationCipher, SecretKey};
use ptc_core::leakage::{leakage_given_type_marginal, modulo_sum_exact_leakage};
use ptc_core::model::{DistortionMeasure, SourceModel};
use ptc_core::rd::{build_codebook, rd_point_at_rate, Codebook, NearestCodeword, RdPoint};
use ptc_core::rng;

use crate::config::ExperimentConfig;
use crate::persist;
use crate::report::{LeakageSummary, PipelineBody};
use crate::{CliError, CliResult};

/// Role label for the cipher-drawing substream.
pub const ROLE_CIPHER: &str = "cipher";
/// Role label for the codebook-drawing substream.
pub const ROLE_CODEBOOK: &str = "codebook";
/// Role label for per-trial substreams.
pub const ROLE_TRIAL: &str = "trial";

/// Which end-to-end system a pipeline run measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Permute under a secret key, then compress.
    Reversed,
    /// Compress, then pad the index modulo the codebook size.
    Conventional,
}

impl SystemKind {
    /// Stable lowercase name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Reversed => "reversed",
            SystemKind::Conventional => "conventional",
        }
    }
}

/// Source, distortion, solved curve point, and drawn codebook for a
/// config: everything the compression side of either system needs.
#[derive(Debug, Clone)]
pub struct CodingArtifacts {
    /// Validated source model.
    pub source: SourceModel,
    /// Validated distortion measure.
    pub distortion: DistortionMeasure,
    /// Curve point at the coding rate `ln(M)/n` (the large-block
    /// benchmark this codebook chases).
    pub rd_point: RdPoint,
    /// Codebook drawn i.i.d. from the point's output marginal.
    pub codebook: Codebook,
}

/// Solves the curve at the configured rate and draws the codebook from
/// the `"codebook"` substream of the seed.
pub fn build_coding_artifacts(config: &ExperimentConfig, seed: u64) -> CliResult<CodingArtifacts> {
    let source = config.source_model()?;
    let distortion = config.distortion_measure()?;
    let n = config.block_len;
    let target_rate = (config.codebook_size as f64).ln() / n as f64;
    let rd_point = rd_point_at_rate(&source, &distortion, target_rate)?;
    let mut rng = rng::for_role(seed, ROLE_CODEBOOK);
    let codebook = build_codebook(&rd_point, n, config.codebook_size, &mut rng)?;
    Ok(CodingArtifacts {
        source,
        distortion,
        rd_point,
        codebook,
    })
}

/// Builds the configured permutation cipher from the `"cipher"`
/// substream of the seed.
pub fn build_cipher(config: &ExperimentConfig, seed: u64) -> CliResult<PermutationCipher> {
    let mut rng = rng::for_role(seed, ROLE_CIPHER);
    Ok(PermutationCipher::build(
        config.cipher_kind(),
        config.block_len,
        config.key_space,
        &mut rng,
    )?)
}

/// Runs the requested system end to end and summarizes its measured
/// rate, distortion, and (when configured) leakage.
pub fn run_pipeline(
    config: &ExperimentConfig,
    seed: u64,
    system: SystemKind,
) -> CliResult<PipelineBody> {
    let artifacts = build_coding_artifacts(config, seed)?;
    match system {
        SystemKind::Reversed => run_reversed(config, seed, &artifacts),
        SystemKind::Conventional => run_conventional(config, seed, &artifacts),
    }
}

/// Runs both systems on the same codebook and the same source blocks.
pub fn compare_systems(
    config: &ExperimentConfig,
    seed: u64,
) -> CliResult<(PipelineBody, PipelineBody)> {
    let artifacts = build_coding_artifacts(config, seed)?;
    let reversed = run_reversed(config, seed, &artifacts)?;
    let conventional = run_conventional(config, seed, &artifacts)?;
    Ok((reversed, conventional))
}

/// Reversed system: per trial, draw a block and a key, permute, vector
/// quantize the permuted block, and un-permute the decoded codeword.
fn run_reversed(
    config: &ExperimentConfig,
    seed: u64,
    artifacts: &CodingArtifacts,
) -> CliResult<PipelineBody> {
    let cipher = build_cipher(config, seed)?;
    let n = config.block_len;
    let mut samples = Vec::with_capacity(config.trials as usize);
    for trial in 0..config.trials {
        let mut rng = rng::substream(seed, ROLE_TRIAL, trial);
        let x = artifacts.source.sample_iid(n, &mut rng)?;
        let key = SecretKey::sample_uniform(config.key_space, &mut rng)?;
        let y = cipher.encrypt(key, &x)?;
        let index = artifacts.codebook.compress(&y, &artifacts.distortion)?;
        let codeword = artifacts.codebook.reconstruct(index)?;
        let reconstruction = cipher.resolve(key)?.apply_inverse(codeword)?;
        samples.push(
            artifacts
                .distortion
                .sequence_distortion(&x, &reconstruction)?,
        );
    }
    let (mean, std_error) = mean_and_std_error(&samples);

    let leakage = match &config.leakage {
        Some(section) => {
            let g = NearestCodeword::new(&artifacts.codebook, &artifacts.distortion)?;
            let report = leakage_given_type_marginal(
                &g,
                &cipher,
                &artifacts.source,
                section.big_delta,
                section.delta,
                &config.budgets(),
            )?;
            Some(LeakageSummary::Reversed {
                conditional_leakage_nats: report.conditional_leakage.nats(),
                weighted_bound_nats: report.weighted_bound,
                type_entropy_nats: report.type_entropy.nats(),
                regime_ok: report.rows.iter().all(|r| r.bound.regime_ok),
            })
        }
        None => None,
    };

    Ok(body(
        config,
        SystemKind::Reversed,
        config.key_space,
        artifacts,
        mean,
        std_error,
        leakage,
        persist::codebook_fingerprint(&artifacts.codebook)?,
        Some(persist::cipher_fingerprint(&cipher)?),
    ))
}

/// Conventional system: per trial, draw a block, vector quantize it,
/// and pad the index with a fresh uniform key modulo the codebook size.
///
/// The pad hides the index perfectly only when the key space equals the
/// codebook size; a smaller key space is allowed and its exact residual
/// leakage is reported, while a larger one is rejected (the extra keys
/// could not be used uniformly).
fn run_conventional(
    config: &ExperimentConfig,
    seed: u64,
    artifacts: &CodingArtifacts,
) -> CliResult<PipelineBody> {
    if config.key_space > config.codebook_size {
        return Err(CliError::config(format!(
            "the conventional system pads the compression index modulo the \
             codebook size: key_space must not exceed codebook_size \
             (got {} and {}); the pad is only perfect when they are equal",
            config.key_space, config.codebook_size
        )));
    }
    let pad = ModuloSumCipher::new(config.codebook_size)?;
    let n = config.block_len;
    let mut samples = Vec::with_capacity(config.trials as usize);
    for trial in 0..config.trials {
        let mut rng = rng::substream(seed, ROLE_TRIAL, trial);
        let x = artifacts.source.sample_iid(n, &mut rng)?;
        let index = artifacts.codebook.compress(&x, &artifacts.distortion)?;
        let key = SecretKey::sample_uniform(config.key_space, &mut rng)?;
        let ciphertext = pad.encrypt_index(key, index)?;
        let decoded = pad.decrypt_index(key, ciphertext)?;
        let reconstruction = artifacts.codebook.reconstruct(decoded)?;
        samples.push(
            artifacts
                .distortion
                .sequence_distortion(&x, reconstruction)?,
        );
    }
    let (mean, std_error) = mean_and_std_error(&samples);

    let g = NearestCodeword::new(&artifacts.codebook, &artifacts.distortion)?;
    let index_leakage = modulo_sum_exact_leakage(
        &g,
        &artifacts.source,
        n,
        config.key_space,
        &config.budgets(),
    )?;
    let leakage = Some(LeakageSummary::Conventional {
        index_leakage_nats: index_leakage.nats(),
    });

    Ok(body(
        config,
        SystemKind::Conventional,
        config.key_space,
        artifacts,
        mean,
        std_error,
        leakage,
        persist::codebook_fingerprint(&artifacts.codebook)?,
        None,
    ))
}

#[allow(clippy::too_many_arguments)]
fn body(
    config: &ExperimentConfig,
    system: SystemKind,
    key_space: u64,
    artifacts: &CodingArtifacts,
    mean_distortion: f64,
    std_error: f64,
    leakage: Option<LeakageSummary>,
    codebook_fingerprint: String,
    cipher_fingerprint: Option<String>,
) -> PipelineBody {
    let n = config.block_len;
    let rate_nats = (config.codebook_size as f64).ln() / n as f64;
    PipelineBody {
        system: system.name().to_string(),
        block_len: n,
        codebook_size: config.codebook_size,
        key_space,
        trials: config.trials,
        rate_nats,
        rate_bits: rate_nats / core::f64::consts::LN_2,
        curve_distortion: artifacts.rd_point.distortion,
        mean_distortion,
        std_error,
        leakage,
        codebook_fingerprint,
        cipher_fingerprint,
    }
}

/// Sample mean and standard error of the mean.
fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}
