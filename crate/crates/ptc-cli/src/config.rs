//! Experiment configuration: a versioned JSON document describing the
//! source, block length, code, cipher, and measurement parameters.
//!
//! Unknown fields are rejected so typos fail loudly, and every numeric
//! constraint is validated before any work starts.

use serde::{Deserialize, Serialize};

use ptc_core::cipher::CipherKind;
use ptc_core::leakage::Budgets;
use ptc_core::model::{DistortionMeasure, SourceModel};

use crate::{CliError, CliResult};

/// The config format version this build reads.
pub const CONFIG_VERSION: u32 = 1;

/// Full experiment description, as parsed from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Format version; must equal [`CONFIG_VERSION`].
    pub version: u32,
    /// Default master seed; `--seed` on the command line overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Source distribution.
    pub source: SourceSpec,
    /// Block length `n`.
    pub block_len: usize,
    /// Distortion measure.
    pub distortion: DistortionSpec,
    /// Codebook size `M`.
    pub codebook_size: u64,
    /// Key-space size `N`.
    pub key_space: u64,
    /// Permutation cipher family.
    pub cipher: CipherSpec,
    /// Monte Carlo trials for pipeline runs.
    pub trials: u64,
    /// Work limits; defaults apply when omitted.
    #[serde(default)]
    pub budgets: BudgetSpec,
    /// Leakage survey parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leakage: Option<LeakageSpec>,
    /// Concentration experiment parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationSpec>,
    /// Rate-distortion sweep grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rd_sweep: Option<RdSweepSpec>,
}

/// Source distribution over `{0, .., k-1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Symbol probabilities; must sum to 1.
    pub pmf: Vec<f64>,
}

/// Distortion measure description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistortionSpec {
    /// 0/1 distortion on matching alphabets.
    Hamming,
    /// Explicit per-pair table; `null` entries mean "forbidden pair"
    /// (infinite distortion).
    Table {
        /// `rows[x][y]`, one row per source symbol.
        rows: Vec<Vec<Option<f64>>>,
    },
}

/// Permutation cipher family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CipherSpec {
    /// Independent table of `N` permutations.
    TypeI,
    /// `ceil(log2 N)` base permutations composed by key bits.
    TypeII,
}

impl From<CipherSpec> for CipherKind {
    fn from(spec: CipherSpec) -> CipherKind {
        match spec {
            CipherSpec::TypeI => CipherKind::TypeI,
            CipherSpec::TypeII => CipherKind::TypeII,
        }
    }
}

/// Work limits, mirroring [`Budgets`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    /// Largest block enumeration allowed.
    pub enumeration: u64,
    /// Largest number of (block, key) evaluations allowed.
    pub pair_evaluations: u64,
}

impl Default for BudgetSpec {
    fn default() -> Self {
        let b = Budgets::default();
        BudgetSpec {
            enumeration: b.enumeration,
            pair_evaluations: b.pair_evaluations,
        }
    }
}

impl From<BudgetSpec> for Budgets {
    fn from(spec: BudgetSpec) -> Budgets {
        Budgets {
            enumeration: spec.enumeration,
            pair_evaluations: spec.pair_evaluations,
        }
    }
}

/// Parameters of the leakage survey and its analytic bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageSpec {
    /// Granularity parameter of the bound.
    pub big_delta: u64,
    /// Equidistribution slack of the bound.
    pub delta: f64,
}

/// Parameters of the concentration experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSpec {
    /// Count vector of the probed type class.
    pub composition: Vec<u64>,
    /// Granularity parameter (bin share of the class).
    pub big_delta: u64,
    /// Relative deviation band.
    pub delta: f64,
    /// Number of ciphers to redraw.
    pub redraws: u64,
    /// Rank of the probe block within the class (default 0).
    #[serde(default)]
    pub probe_rank: u64,
    /// Explicit rank range to monitor; default is the first prefix bin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin: Option<(u64, u64)>,
}

/// Slope grid for the rate-distortion sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RdSweepSpec {
    /// Ascending nonnegative Lagrange slopes.
    pub slopes: Vec<f64>,
}

impl ExperimentConfig {
    /// Parses and validates a config from JSON bytes.
    pub fn from_json(bytes: &[u8]) -> CliResult<Self> {
        let config: ExperimentConfig = serde_json::from_slice(bytes)
            .map_err(|e| CliError::config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and validates a config file.
    pub fn from_file(path: &std::path::Path) -> CliResult<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&bytes)
    }

    /// Structural validation beyond what parsing enforces.
    pub fn validate(&self) -> CliResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::config(format!(
                "config version {} not supported; this build reads version {CONFIG_VERSION}",
                self.version
            )));
        }
        if self.block_len == 0 {
            return Err(CliError::config("block_len must be at least 1"));
        }
        if self.codebook_size == 0 {
            return Err(CliError::config("codebook_size must be at least 1"));
        }
        if self.key_space == 0 {
            return Err(CliError::config("key_space must be at least 1"));
        }
        if self.trials == 0 {
            return Err(CliError::config("trials must be at least 1"));
        }
        self.source_model()?;
        self.distortion_measure()?;
        if let Some(leakage) = &self.leakage {
            if leakage.big_delta == 0 {
                return Err(CliError::config("leakage.big_delta must be at least 1"));
            }
            if !leakage.delta.is_finite() || leakage.delta <= 0.0 {
                return Err(CliError::config(
                    "leakage.delta must be a finite positive real",
                ));
            }
        }
        if let Some(c) = &self.concentration {
            if c.composition.iter().sum::<u64>() != self.block_len as u64 {
                return Err(CliError::config(
                    "concentration.composition must sum to block_len",
                ));
            }
            if c.composition.len() != self.source.pmf.len() {
                return Err(CliError::config(
                    "concentration.composition must cover the source alphabet",
                ));
            }
        }
        Ok(())
    }

    /// Builds the validated source model.
    pub fn source_model(&self) -> CliResult<SourceModel> {
        SourceModel::new(self.source.pmf.clone())
            .map_err(|e| CliError::config(format!("source: {e}")))
    }

    /// Builds the validated distortion measure.
    pub fn distortion_measure(&self) -> CliResult<DistortionMeasure> {
        let k = self.source.pmf.len();
        match &self.distortion {
            DistortionSpec::Hamming => DistortionMeasure::hamming(k)
                .map_err(|e| CliError::config(format!("distortion: {e}"))),
            DistortionSpec::Table { rows } => {
                if rows.len() != k {
                    return Err(CliError::config(format!(
                        "distortion table has {} rows but the source alphabet has {k} symbols",
                        rows.len()
                    )));
                }
                let table: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|cell| cell.unwrap_or(f64::INFINITY))
                            .collect()
                    })
                    .collect();
                DistortionMeasure::from_table(table)
                    .map_err(|e| CliError::config(format!("distortion: {e}")))
            }
        }
    }

    /// The work budgets as core types.
    pub fn budgets(&self) -> Budgets {
        self.budgets.into()
    }

    /// The cipher family as a core type.
    pub fn cipher_kind(&self) -> CipherKind {
        self.cipher.into()
    }

    /// Resolves the master seed: the command line wins, then the config.
    pub fn resolve_seed(&self, cli_seed: Option<u64>) -> CliResult<u64> {
        cli_seed
            .or(self.seed)
            .ok_or_else(|| CliError::config("no seed: pass --seed or set \"seed\" in the config"))
    }

    /// Canonical bytes for fingerprinting: the config re-serialized in
    /// struct field order, independent of input formatting.
    pub fn canonical_bytes(&self) -> CliResult<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }
}
