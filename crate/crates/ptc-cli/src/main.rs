//! `ptc` — experiments on permute-then-compress secrecy systems.
//!
//! Every command reads one JSON config, optionally takes a master seed,
//! and writes exactly one report (JSON or CSV) to stdout or `--output`.
//! Reports are byte-identical across re-runs with the same config and
//! seed; timing goes to stderr only.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 budget
//! exceeded, 4 `--assert-bounds` found a violated bound.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use ptc_core::cipher::{CipherKind, SecretKey};
use ptc_core::concentration::{DeviationExperiment, Verdict};
use ptc_core::leakage::leakage_given_type_marginal;
use ptc_core::model::Sequence;
use ptc_core::rd::{rd_sweep, NearestCodeword};
use ptc_core::rng;
use ptc_core::typeclass::TypeComposition;

use ptc_cli::config::ExperimentConfig;
use ptc_cli::pipeline::{self, SystemKind};
use ptc_cli::report::{
    BoundColumns, CompareDoc, CompressDoc, ConcentrationDoc, EncryptDoc, Format, LeakageReportDoc,
    LeakageRow, LeakageSummary, Meta, PipelineBody, PipelineDoc, RdPointRow, RdSweepReport, Render,
};
use ptc_cli::{persist, CliError, CliResult};

/// Slack allowed when comparing a measured value against its bound,
/// absorbing accumulated floating-point rounding.
const BOUND_TOLERANCE: f64 = 1e-9;

/// Role label for the concentration experiment's substream.
const ROLE_CONCENTRATION: &str = "concentration";

#[derive(Parser)]
#[command(
    name = "ptc",
    version,
    about = "Permute-then-compress experiments: pipelines, exact leakage \
             surveys, concentration stress tests, and rate-distortion sweeps."
)]
struct Cli {
    /// Experiment config file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,

    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Exit 4 if any measured quantity breaks its analytic bound.
    #[arg(long, global = true)]
    assert_bounds: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(arg: FormatArg) -> Format {
        match arg {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    /// Permute under a secret key, then compress.
    Reversed,
    /// Compress, then pad the index.
    Conventional,
}

impl From<SystemArg> for SystemKind {
    fn from(arg: SystemArg) -> SystemKind {
        match arg {
            SystemArg::Reversed => SystemKind::Reversed,
            SystemArg::Conventional => SystemKind::Conventional,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Trace the rate-distortion curve over the configured slope grid.
    RdSweep,
    /// Encrypt one block with a keyed permutation.
    Encrypt {
        /// Block as a string of decimal digits, one symbol each.
        #[arg(long)]
        block: String,
        /// Key value in `[0, key_space)`.
        #[arg(long)]
        key: u64,
        /// Load the cipher from this file instead of deriving it.
        #[arg(long, value_name = "FILE")]
        cipher: Option<PathBuf>,
        /// Save the cipher used to this file.
        #[arg(long, value_name = "FILE")]
        save_cipher: Option<PathBuf>,
    },
    /// Compress one block to its nearest codeword.
    Compress {
        /// Block as a string of decimal digits, one symbol each.
        #[arg(long)]
        block: String,
        /// Load the codebook from this file instead of deriving it.
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
        /// Save the codebook used to this file.
        #[arg(long, value_name = "FILE")]
        save_codebook: Option<PathBuf>,
    },
    /// Run one system end to end: rate, distortion, and leakage.
    Pipeline {
        /// Which system to run.
        #[arg(long, value_enum)]
        system: SystemArg,
    },
    /// Survey exact leakage across every type the source can emit.
    Leakage,
    /// Redraw ciphers and stress the concentration tail bound.
    Concentration,
    /// Run both systems on the same blocks and codebook, side by side.
    Compare,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(&cli);
    eprintln!("elapsed_ms {}", start.elapsed().as_millis());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class.code() as u8)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config <FILE> is required"))?;
    let config = ExperimentConfig::from_file(config_path)?;
    let config_fingerprint = persist::fingerprint(&config.canonical_bytes()?);
    let format = Format::from(cli.format);

    let (rendered, violations) = match &cli.command {
        Command::RdSweep => cmd_rd_sweep(&config, &config_fingerprint, format)?,
        Command::Encrypt {
            block,
            key,
            cipher,
            save_cipher,
        } => cmd_encrypt(
            &config,
            &config_fingerprint,
            format,
            cli.seed,
            block,
            *key,
            cipher.as_deref(),
            save_cipher.as_deref(),
        )?,
        Command::Compress {
            block,
            codebook,
            save_codebook,
        } => cmd_compress(
            &config,
            &config_fingerprint,
            format,
            cli.seed,
            block,
            codebook.as_deref(),
            save_codebook.as_deref(),
        )?,
        Command::Pipeline { system } => cmd_pipeline(
            &config,
            &config_fingerprint,
            format,
            cli.seed,
            SystemKind::from(*system),
        )?,
        Command::Leakage => cmd_leakage(&config, &config_fingerprint, format, cli.seed)?,
        Command::Concentration => {
            cmd_concentration(&config, &config_fingerprint, format, cli.seed)?
        }
        Command::Compare => cmd_compare(&config, &config_fingerprint, format, cli.seed)?,
    };

    emit(&rendered, cli.output.as_deref())?;
    if cli.assert_bounds && !violations.is_empty() {
        return Err(CliError::bounds(violations.join("; ")));
    }
    Ok(())
}

/// Writes the report to the chosen sink.
fn emit(text: &str, output: Option<&std::path::Path>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text.as_bytes())?,
        None => {
            use std::io::Write as _;
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Parses a block given as a string of decimal digits.
fn parse_block(text: &str) -> CliResult<Sequence> {
    let mut symbols = Vec::with_capacity(text.len());
    for c in text.chars() {
        let digit = c.to_digit(10).ok_or_else(|| {
            CliError::config(format!(
                "block must be a string of decimal digits, one symbol each; \
                 found {c:?}"
            ))
        })?;
        symbols.push(digit as u8);
    }
    Ok(Sequence::new(symbols)?)
}

/// Stable lowercase cipher-family name for reports.
fn cipher_name(kind: CipherKind) -> &'static str {
    match kind {
        CipherKind::TypeI => "type-i",
        CipherKind::TypeII => "type-ii",
    }
}

fn cmd_rd_sweep(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
) -> CliResult<(String, Vec<String>)> {
    let section = config.rd_sweep.as_ref().ok_or_else(|| {
        CliError::config("config needs an rd_sweep section with a slope grid for this command")
    })?;
    let source = config.source_model()?;
    let distortion = config.distortion_measure()?;
    let points = rd_sweep(&source, &distortion, &section.slopes)?;
    let doc = RdSweepReport {
        meta: Meta::new("rd-sweep", None, fingerprint.to_string()),
        points: points
            .iter()
            .map(|p| RdPointRow {
                slope: p.slope,
                rate_nats: p.rate.nats(),
                rate_bits: p.rate.bits(),
                distortion: p.distortion,
                iterations: p.iterations,
                output_marginal: p.output_marginal.clone(),
            })
            .collect(),
    };
    Ok((doc.render(format), Vec::new()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_encrypt(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
    cli_seed: Option<u64>,
    block: &str,
    key: u64,
    cipher_path: Option<&std::path::Path>,
    save_path: Option<&std::path::Path>,
) -> CliResult<(String, Vec<String>)> {
    let x = parse_block(block)?;
    x.check_alphabet(config.source.pmf.len())?;
    let (cipher, seed_used) = match cipher_path {
        Some(path) => (persist::load_cipher(path)?, None),
        None => {
            let seed = config.resolve_seed(cli_seed)?;
            (pipeline::build_cipher(config, seed)?, Some(seed))
        }
    };
    if x.len() != cipher.block_len() {
        return Err(CliError::config(format!(
            "block has {} symbols but the cipher permutes blocks of {}",
            x.len(),
            cipher.block_len()
        )));
    }
    let ciphertext = cipher.encrypt(SecretKey { value: key }, &x)?;
    if let Some(path) = save_path {
        persist::save_cipher(path, &cipher)?;
    }
    let doc = EncryptDoc {
        meta: Meta::new("encrypt", seed_used, fingerprint.to_string()),
        block: x.symbols().to_vec(),
        key,
        ciphertext: ciphertext.symbols().to_vec(),
        cipher_fingerprint: persist::cipher_fingerprint(&cipher)?,
    };
    Ok((doc.render(format), Vec::new()))
}

fn cmd_compress(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
    cli_seed: Option<u64>,
    block: &str,
    codebook_path: Option<&std::path::Path>,
    save_path: Option<&std::path::Path>,
) -> CliResult<(String, Vec<String>)> {
    let distortion = config.distortion_measure()?;
    let x = parse_block(block)?;
    x.check_alphabet(distortion.source_alphabet())?;
    let (codebook, seed_used) = match codebook_path {
        Some(path) => (persist::load_codebook(path)?, None),
        None => {
            let seed = config.resolve_seed(cli_seed)?;
            let artifacts = pipeline::build_coding_artifacts(config, seed)?;
            (artifacts.codebook, Some(seed))
        }
    };
    if x.len() != codebook.block_len() {
        return Err(CliError::config(format!(
            "block has {} symbols but the codebook holds codewords of {}",
            x.len(),
            codebook.block_len()
        )));
    }
    let index = codebook.compress(&x, &distortion)?;
    let reconstruction = codebook.reconstruct(index)?.clone();
    let distortion_value = distortion.sequence_distortion(&x, &reconstruction)?;
    if let Some(path) = save_path {
        persist::save_codebook(path, &codebook)?;
    }
    let doc = CompressDoc {
        meta: Meta::new("compress", seed_used, fingerprint.to_string()),
        block: x.symbols().to_vec(),
        index,
        reconstruction: reconstruction.symbols().to_vec(),
        distortion: distortion_value,
        codebook_fingerprint: persist::codebook_fingerprint(&codebook)?,
    };
    Ok((doc.render(format), Vec::new()))
}

/// Bound violations visible in a pipeline body.
fn body_violations(body: &PipelineBody) -> Vec<String> {
    let mut violations = Vec::new();
    match &body.leakage {
        Some(LeakageSummary::Reversed {
            conditional_leakage_nats,
            weighted_bound_nats,
            regime_ok,
            ..
        }) if *regime_ok && *conditional_leakage_nats > weighted_bound_nats + BOUND_TOLERANCE => {
            violations.push(format!(
                "reversed system: conditional leakage {conditional_leakage_nats} nats \
                 exceeds its weighted bound {weighted_bound_nats}"
            ));
        }
        Some(LeakageSummary::Conventional { index_leakage_nats })
            if *index_leakage_nats > BOUND_TOLERANCE =>
        {
            violations.push(format!(
                "conventional system: padded index leaks {index_leakage_nats} nats \
                 but should be exactly secret"
            ));
        }
        _ => {}
    }
    violations
}

fn cmd_pipeline(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
    cli_seed: Option<u64>,
    system: SystemKind,
) -> CliResult<(String, Vec<String>)> {
    let seed = config.resolve_seed(cli_seed)?;
    let body = pipeline::run_pipeline(config, seed, system)?;
    let violations = body_violations(&body);
    let doc = PipelineDoc {
        meta: Meta::new("pipeline", Some(seed), fingerprint.to_string()),
        body,
    };
    Ok((doc.render(format), violations))
}

fn cmd_leakage(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
    cli_seed: Option<u64>,
) -> CliResult<(String, Vec<String>)> {
    let section = config.leakage.as_ref().ok_or_else(|| {
        CliError::config("config needs a leakage section (big_delta, delta) for this command")
    })?;
    let seed = config.resolve_seed(cli_seed)?;
    let artifacts = pipeline::build_coding_artifacts(config, seed)?;
    let cipher = pipeline::build_cipher(config, seed)?;
    let g = NearestCodeword::new(&artifacts.codebook, &artifacts.distortion)?;
    let report = leakage_given_type_marginal(
        &g,
        &cipher,
        &artifacts.source,
        section.big_delta,
        section.delta,
        &config.budgets(),
    )?;

    let mut violations = Vec::new();
    let mut rows = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        if row.bound.regime_ok && row.leakage.nats() > row.bound.total + BOUND_TOLERANCE {
            violations.push(format!(
                "type {:?}: leakage {} nats exceeds its bound {}",
                row.composition.counts(),
                row.leakage.nats(),
                row.bound.total
            ));
        }
        rows.push(LeakageRow {
            composition: row.composition.counts().to_vec(),
            probability: row.type_probability,
            class_size: row.class_size,
            leakage_nats: row.leakage.nats(),
            small_mass: row.small_mass,
            bound: BoundColumns {
                small_mass_term: row.bound.small_mass_term,
                deviation_term: row.bound.deviation_term,
                slack_term: row.bound.slack_term,
                total: row.bound.total,
                regime_ok: row.bound.regime_ok,
            },
        });
    }
    if report.rows.iter().all(|r| r.bound.regime_ok)
        && report.conditional_leakage.nats() > report.weighted_bound + BOUND_TOLERANCE
    {
        violations.push(format!(
            "conditional leakage {} nats exceeds the weighted bound {}",
            report.conditional_leakage.nats(),
            report.weighted_bound
        ));
    }

    let doc = LeakageReportDoc {
        meta: Meta::new("leakage", Some(seed), fingerprint.to_string()),
        cipher: cipher_name(config.cipher_kind()).to_string(),
        key_space: report.key_space,
        index_count: report.index_count,
        big_delta: section.big_delta,
        delta: section.delta,
        rows,
        conditional_leakage_nats: report.conditional_leakage.nats(),
        weighted_bound_nats: report.weighted_bound,
        type_entropy_nats: report.type_entropy.nats(),
        cipher_fingerprint: persist::cipher_fingerprint(&cipher)?,
        codebook_fingerprint: persist::codebook_fingerprint(&artifacts.codebook)?,
    };
    Ok((doc.render(format), violations))
}

fn cmd_concentration(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
    cli_seed: Option<u64>,
) -> CliResult<(String, Vec<String>)> {
    let section = config
        .concentration
        .as_ref()
        .ok_or_else(|| CliError::config("config needs a concentration section for this command"))?;
    let seed = config.resolve_seed(cli_seed)?;
    let composition = TypeComposition::new(section.composition.clone())?;
    let kind = config.cipher_kind();
    let budgets = config.budgets();
    let experiment = match section.bin {
        Some((start, end)) => DeviationExperiment::new(
            composition,
            start,
            end,
            section.probe_rank,
            config.key_space,
            section.big_delta,
            section.delta,
            kind,
            budgets.enumeration,
        )?,
        None => DeviationExperiment::with_prefix_bin(
            composition,
            section.big_delta,
            section.probe_rank,
            config.key_space,
            section.delta,
            kind,
            budgets.enumeration,
        )?,
    };
    let mut rng = rng::for_role(seed, ROLE_CONCENTRATION);
    let estimate = experiment.estimate_tail(section.redraws, &budgets, &mut rng)?;

    let verdict = match estimate.verdict {
        Verdict::Holds => "holds",
        Verdict::Inconclusive => "inconclusive",
        Verdict::Violated => "violated",
    };
    let violations = if estimate.verdict == Verdict::Violated {
        vec![format!(
            "concentration tail {} (over {} redraws) exceeds its analytic bound {}",
            estimate.empirical, estimate.redraws, estimate.bound
        )]
    } else {
        Vec::new()
    };

    let (bin_start, bin_end) = experiment.bin();
    let doc = ConcentrationDoc {
        meta: Meta::new("concentration", Some(seed), fingerprint.to_string()),
        composition: section.composition.clone(),
        class_size: experiment.class_size(),
        bin_start,
        bin_end,
        probe_rank: section.probe_rank,
        key_space: config.key_space,
        big_delta: section.big_delta,
        delta: section.delta,
        cipher: cipher_name(kind).to_string(),
        redraws: estimate.redraws,
        deviations: estimate.deviations,
        empirical: estimate.empirical,
        std_error: estimate.std_error,
        bound: estimate.bound,
        expected_hits: experiment.expected_hits(),
        verdict: verdict.to_string(),
    };
    Ok((doc.render(format), violations))
}

fn cmd_compare(
    config: &ExperimentConfig,
    fingerprint: &str,
    format: Format,
    cli_seed: Option<u64>,
) -> CliResult<(String, Vec<String>)> {
    let seed = config.resolve_seed(cli_seed)?;
    let (reversed, conventional) = pipeline::compare_systems(config, seed)?;
    let mut violations = body_violations(&reversed);
    violations.extend(body_violations(&conventional));
    let distortion_difference = reversed.mean_distortion - conventional.mean_distortion;
    let doc = CompareDoc {
        meta: Meta::new("compare", Some(seed), fingerprint.to_string()),
        reversed,
        conventional,
        distortion_difference,
    };
    Ok((doc.render(format), violations))
}
