//! Report documents the CLI emits: serializable mirrors of the core
//! results, rendered as pretty JSON or fixed-format CSV.
//!
//! Rendering is deterministic: struct field order fixes JSON key order,
//! floats print in shortest round-trip (JSON) or 12-significant-digit
//! (CSV) form, and no timestamps or environment data are embedded.

use serde::Serialize;

use crate::csvfmt;

/// Report format version embedded in every document.
pub const REPORT_VERSION: u32 = 1;

/// Common header of every report.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    /// Subcommand that produced the report.
    pub command: String,
    /// Report format version.
    pub report_version: u32,
    /// Master seed (absent for deterministic commands).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// SHA-256 of the canonical config serialization.
    pub config_fingerprint: String,
}

impl Meta {
    /// Builds the header for a command.
    pub fn new(command: &str, seed: Option<u64>, config_fingerprint: String) -> Self {
        Meta {
            command: command.to_string(),
            report_version: REPORT_VERSION,
            seed,
            config_fingerprint,
        }
    }
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// Pretty JSON, LF line endings.
    Json,
    /// Fixed-format CSV.
    Csv,
}

/// A document that can render itself in both output formats.
pub trait Render: Serialize {
    /// CSV form of the document.
    fn to_csv(&self) -> String;

    /// Pretty JSON, with a trailing newline.
    fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("reports always serialize");
        out.push('\n');
        out
    }

    /// Renders in the requested format.
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// One solved point of the rate-distortion curve.
#[derive(Debug, Clone, Serialize)]
pub struct RdPointRow {
    /// Lagrange slope.
    pub slope: f64,
    /// Rate in nats per symbol.
    pub rate_nats: f64,
    /// Rate in bits per symbol.
    pub rate_bits: f64,
    /// Expected distortion.
    pub distortion: f64,
    /// Solver iterations spent.
    pub iterations: u32,
    /// Optimal output marginal (JSON only).
    pub output_marginal: Vec<f64>,
}

/// The rate-distortion sweep document.
#[derive(Debug, Clone, Serialize)]
pub struct RdSweepReport {
    /// Header.
    pub meta: Meta,
    /// Curve points in ascending slope order.
    pub points: Vec<RdPointRow>,
}

impl Render for RdSweepReport {
    fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .points
            .iter()
            .map(|p| {
                vec![
                    csvfmt::float(p.slope),
                    csvfmt::float(p.rate_nats),
                    csvfmt::float(p.rate_bits),
                    csvfmt::float(p.distortion),
                    p.iterations.to_string(),
                ]
            })
            .collect();
        csvfmt::table(
            &[
                "slope",
                "rate_nats",
                "rate_bits",
                "distortion",
                "iterations",
            ],
            &rows,
        )
    }
}

/// The three bound terms, flattened for reports.
#[derive(Debug, Clone, Serialize)]
pub struct BoundColumns {
    /// Small-cell mass term.
    pub small_mass_term: f64,
    /// Concentration-failure term.
    pub deviation_term: f64,
    /// Equidistribution slack term.
    pub slack_term: f64,
    /// Sum of the three.
    pub total: f64,
    /// Whether the parameters are in the meaningful regime.
    pub regime_ok: bool,
}

/// One type's row in the leakage survey.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageRow {
    /// Count vector of the type.
    pub composition: Vec<u64>,
    /// Probability of the type.
    pub probability: f64,
    /// Class size.
    pub class_size: u64,
    /// Exact conditional leakage, nats.
    pub leakage_nats: f64,
    /// Small-cell mass of the compressor on this class.
    pub small_mass: f64,
    /// Analytic ceiling for this class.
    pub bound: BoundColumns,
}

/// The leakage survey document.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageReportDoc {
    /// Header.
    pub meta: Meta,
    /// Cipher family (`"type-i"` or `"type-ii"`).
    pub cipher: String,
    /// Key-space size `N`.
    pub key_space: u64,
    /// Compression index count `M`.
    pub index_count: u64,
    /// Granularity parameter of the bound.
    pub big_delta: u64,
    /// Equidistribution slack of the bound.
    pub delta: f64,
    /// Per-type measurements.
    pub rows: Vec<LeakageRow>,
    /// Type-weighted exact conditional leakage, nats.
    pub conditional_leakage_nats: f64,
    /// Type-weighted bound total, nats.
    pub weighted_bound_nats: f64,
    /// Entropy of the type distribution, nats.
    pub type_entropy_nats: f64,
    /// Fingerprint of the measured cipher.
    pub cipher_fingerprint: String,
    /// Fingerprint of the measured codebook.
    pub codebook_fingerprint: String,
}

impl Render for LeakageReportDoc {
    fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    join_counts(&r.composition),
                    csvfmt::float(r.probability),
                    r.class_size.to_string(),
                    csvfmt::float(r.leakage_nats),
                    csvfmt::float(r.small_mass),
                    csvfmt::float(r.bound.small_mass_term),
                    csvfmt::float(r.bound.deviation_term),
                    csvfmt::float(r.bound.slack_term),
                    csvfmt::float(r.bound.total),
                    r.bound.regime_ok.to_string(),
                ]
            })
            .collect();
        csvfmt::table(
            &[
                "composition",
                "probability",
                "class_size",
                "leakage_nats",
                "small_mass",
                "bound_small_mass_term",
                "bound_deviation_term",
                "bound_slack_term",
                "bound_total",
                "bound_regime_ok",
            ],
            &rows,
        )
    }
}

/// Joins a count vector for a single CSV cell.
fn join_counts(counts: &[u64]) -> String {
    counts
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

/// The concentration experiment document.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationDoc {
    /// Header.
    pub meta: Meta,
    /// Count vector of the probed class.
    pub composition: Vec<u64>,
    /// Class size.
    pub class_size: u64,
    /// Monitored rank range, inclusive start.
    pub bin_start: u64,
    /// Monitored rank range, exclusive end.
    pub bin_end: u64,
    /// Rank of the probe block.
    pub probe_rank: u64,
    /// Key-space size `N`.
    pub key_space: u64,
    /// Granularity parameter.
    pub big_delta: u64,
    /// Relative deviation band.
    pub delta: f64,
    /// Cipher family.
    pub cipher: String,
    /// Ciphers redrawn.
    pub redraws: u64,
    /// Redraws that strayed past the band.
    pub deviations: u64,
    /// Observed deviation frequency.
    pub empirical: f64,
    /// Binomial standard error.
    pub std_error: f64,
    /// Matching analytic tail.
    pub bound: f64,
    /// Expected hit count.
    pub expected_hits: f64,
    /// `"holds"`, `"inconclusive"`, or `"violated"`.
    pub verdict: String,
}

impl Render for ConcentrationDoc {
    fn to_csv(&self) -> String {
        csvfmt::key_values(&[
            ("composition", join_counts(&self.composition)),
            ("class_size", self.class_size.to_string()),
            ("bin_start", self.bin_start.to_string()),
            ("bin_end", self.bin_end.to_string()),
            ("probe_rank", self.probe_rank.to_string()),
            ("key_space", self.key_space.to_string()),
            ("big_delta", self.big_delta.to_string()),
            ("delta", csvfmt::float(self.delta)),
            ("cipher", self.cipher.clone()),
            ("redraws", self.redraws.to_string()),
            ("deviations", self.deviations.to_string()),
            ("empirical", csvfmt::float(self.empirical)),
            ("std_error", csvfmt::float(self.std_error)),
            ("bound", csvfmt::float(self.bound)),
            ("expected_hits", csvfmt::float(self.expected_hits)),
            ("verdict", self.verdict.clone()),
        ])
    }
}

/// Leakage summary attached to a pipeline run.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "system", rename_all = "kebab-case")]
pub enum LeakageSummary {
    /// Reversed system: exact conditional leakage plus its ceiling.
    Reversed {
        /// `I(J; X | T)` in nats.
        conditional_leakage_nats: f64,
        /// Type-weighted bound total in nats.
        weighted_bound_nats: f64,
        /// `H(T)` in nats.
        type_entropy_nats: f64,
        /// Whether every surveyed type sat in the bound's regime.
        regime_ok: bool,
    },
    /// Conventional system: exact leakage of the padded index.
    Conventional {
        /// `I(C; X)` in nats.
        index_leakage_nats: f64,
    },
}

/// Measured behaviour of one end-to-end system.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineBody {
    /// `"reversed"` or `"conventional"`.
    pub system: String,
    /// Block length `n`.
    pub block_len: usize,
    /// Codebook size `M`.
    pub codebook_size: u64,
    /// Key-space size.
    pub key_space: u64,
    /// Monte Carlo trials run.
    pub trials: u64,
    /// Coding rate in nats per symbol.
    pub rate_nats: f64,
    /// Coding rate in bits per symbol.
    pub rate_bits: f64,
    /// Distortion of the rate-distortion curve at this rate (the
    /// large-block benchmark).
    pub curve_distortion: f64,
    /// Sample mean of the end-to-end distortion.
    pub mean_distortion: f64,
    /// Standard error of the mean.
    pub std_error: f64,
    /// Leakage summary, when the config asked for one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leakage: Option<LeakageSummary>,
    /// Fingerprint of the codebook used.
    pub codebook_fingerprint: String,
    /// Fingerprint of the permutation cipher (reversed system only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cipher_fingerprint: Option<String>,
}

impl PipelineBody {
    fn key_value_pairs(&self, prefix: &str) -> Vec<(String, String)> {
        let mut pairs = vec![
            (format!("{prefix}system"), self.system.clone()),
            (format!("{prefix}block_len"), self.block_len.to_string()),
            (
                format!("{prefix}codebook_size"),
                self.codebook_size.to_string(),
            ),
            (format!("{prefix}key_space"), self.key_space.to_string()),
            (format!("{prefix}trials"), self.trials.to_string()),
            (format!("{prefix}rate_nats"), csvfmt::float(self.rate_nats)),
            (format!("{prefix}rate_bits"), csvfmt::float(self.rate_bits)),
            (
                format!("{prefix}curve_distortion"),
                csvfmt::float(self.curve_distortion),
            ),
            (
                format!("{prefix}mean_distortion"),
                csvfmt::float(self.mean_distortion),
            ),
            (format!("{prefix}std_error"), csvfmt::float(self.std_error)),
        ];
        match &self.leakage {
            Some(LeakageSummary::Reversed {
                conditional_leakage_nats,
                weighted_bound_nats,
                type_entropy_nats,
                regime_ok,
            }) => {
                pairs.push((
                    format!("{prefix}conditional_leakage_nats"),
                    csvfmt::float(*conditional_leakage_nats),
                ));
                pairs.push((
                    format!("{prefix}weighted_bound_nats"),
                    csvfmt::float(*weighted_bound_nats),
                ));
                pairs.push((
                    format!("{prefix}type_entropy_nats"),
                    csvfmt::float(*type_entropy_nats),
                ));
                pairs.push((format!("{prefix}regime_ok"), regime_ok.to_string()));
            }
            Some(LeakageSummary::Conventional { index_leakage_nats }) => {
                pairs.push((
                    format!("{prefix}index_leakage_nats"),
                    csvfmt::float(*index_leakage_nats),
                ));
            }
            None => {}
        }
        pairs
    }
}

/// The single-pipeline document.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineDoc {
    /// Header.
    pub meta: Meta,
    /// The measured system.
    pub body: PipelineBody,
}

impl Render for PipelineDoc {
    fn to_csv(&self) -> String {
        let pairs = self.body.key_value_pairs("");
        let borrowed: Vec<(&str, String)> =
            pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        csvfmt::key_values(&borrowed)
    }
}

/// The side-by-side comparison document.
#[derive(Debug, Clone, Serialize)]
pub struct CompareDoc {
    /// Header.
    pub meta: Meta,
    /// Reversed system (encrypt, then compress).
    pub reversed: PipelineBody,
    /// Conventional system (compress, then pad the index).
    pub conventional: PipelineBody,
    /// `reversed.mean_distortion - conventional.mean_distortion`.
    pub distortion_difference: f64,
}

impl Render for CompareDoc {
    fn to_csv(&self) -> String {
        let mut pairs = self.reversed.key_value_pairs("reversed_");
        pairs.extend(self.conventional.key_value_pairs("conventional_"));
        pairs.push((
            "distortion_difference".to_string(),
            csvfmt::float(self.distortion_difference),
        ));
        let borrowed: Vec<(&str, String)> =
            pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        csvfmt::key_values(&borrowed)
    }
}

/// The single-block encryption document.
#[derive(Debug, Clone, Serialize)]
pub struct EncryptDoc {
    /// Header.
    pub meta: Meta,
    /// Plaintext block.
    pub block: Vec<u8>,
    /// Key used.
    pub key: u64,
    /// Ciphertext block.
    pub ciphertext: Vec<u8>,
    /// Fingerprint of the cipher used.
    pub cipher_fingerprint: String,
}

impl Render for EncryptDoc {
    fn to_csv(&self) -> String {
        csvfmt::key_values(&[
            ("block", join_symbols(&self.block)),
            ("key", self.key.to_string()),
            ("ciphertext", join_symbols(&self.ciphertext)),
            ("cipher_fingerprint", self.cipher_fingerprint.clone()),
        ])
    }
}

/// The single-block compression document.
#[derive(Debug, Clone, Serialize)]
pub struct CompressDoc {
    /// Header.
    pub meta: Meta,
    /// Input block.
    pub block: Vec<u8>,
    /// Compression index assigned.
    pub index: u64,
    /// Reconstructed block (the codeword).
    pub reconstruction: Vec<u8>,
    /// Per-symbol distortion between block and reconstruction.
    pub distortion: f64,
    /// Fingerprint of the codebook used.
    pub codebook_fingerprint: String,
}

impl Render for CompressDoc {
    fn to_csv(&self) -> String {
        csvfmt::key_values(&[
            ("block", join_symbols(&self.block)),
            ("index", self.index.to_string()),
            ("reconstruction", join_symbols(&self.reconstruction)),
            ("distortion", csvfmt::float(self.distortion)),
            ("codebook_fingerprint", self.codebook_fingerprint.clone()),
        ])
    }
}

/// Joins a symbol block for a single CSV cell.
fn join_symbols(symbols: &[u8]) -> String {
    symbols
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Meta {
        Meta::new("rd-sweep", Some(7), "ff".repeat(32))
    }

    #[test]
    fn json_rendering_is_stable_and_newline_terminated() {
        let doc = RdSweepReport {
            meta: meta(),
            points: vec![RdPointRow {
                slope: 1.0,
                rate_nats: 0.25,
                rate_bits: 0.25 / core::f64::consts::LN_2,
                distortion: 0.125,
                iterations: 12,
                output_marginal: vec![0.5, 0.5],
            }],
        };
        let a = doc.to_json();
        let b = doc.to_json();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        assert!(a.contains("\"command\": \"rd-sweep\""));
        assert!(a.contains("\"report_version\": 1"));
    }

    #[test]
    fn csv_rendering_uses_the_fixed_float_format() {
        let doc = RdSweepReport {
            meta: meta(),
            points: vec![RdPointRow {
                slope: 2.0,
                rate_nats: 0.5,
                rate_bits: 0.75,
                distortion: 0.1,
                iterations: 3,
                output_marginal: vec![0.5, 0.5],
            }],
        };
        let csv = doc.to_csv();
        assert_eq!(
            csv,
            "slope,rate_nats,rate_bits,distortion,iterations\n\
             2.00000000000e0,5.00000000000e-1,7.50000000000e-1,1.00000000000e-1,3\n"
        );
    }

    #[test]
    fn optional_fields_are_omitted_not_null() {
        let body = PipelineBody {
            system: "conventional".into(),
            block_len: 4,
            codebook_size: 4,
            key_space: 4,
            trials: 10,
            rate_nats: 0.3,
            rate_bits: 0.4,
            curve_distortion: 0.2,
            mean_distortion: 0.25,
            std_error: 0.01,
            leakage: None,
            codebook_fingerprint: "aa".repeat(32),
            cipher_fingerprint: None,
        };
        let doc = PipelineDoc { meta: meta(), body };
        let json = doc.to_json();
        assert!(!json.contains("cipher_fingerprint"));
        assert!(!json.contains("leakage"));
        assert!(!json.contains("null"));
    }
}
