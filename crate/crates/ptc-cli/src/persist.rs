//! On-disk formats for ciphers and codebooks, plus content fingerprints.
//!
//! Artifacts are versioned JSON. A composed cipher stores only its base
//! permutations — that compactness is the family's point — while a table
//! cipher stores the full table. Fingerprints are SHA-256 over the
//! canonical serialization, so two artifacts match exactly when their
//! fingerprints do.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ptc_core::cipher::{Permutation, PermutationCipher, TypeICipher, TypeIICipher};
use ptc_core::model::Sequence;
use ptc_core::rd::Codebook;

use crate::{CliError, CliResult};

/// Artifact format version this build reads and writes.
pub const ARTIFACT_VERSION: u32 = 1;

/// Serialized permutation cipher.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CipherFile {
    /// Format version.
    pub version: u32,
    /// `"type-i"` (full table) or `"type-ii"` (base permutations only).
    pub kind: String,
    /// Block length `n`.
    pub block_len: usize,
    /// Key-space size `N`.
    pub key_space: u64,
    /// Stored permutations: the table for type-i, the base for type-ii.
    pub permutations: Vec<Vec<u32>>,
}

/// Serialized codebook.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookFile {
    /// Format version.
    pub version: u32,
    /// Reconstruction alphabet size.
    pub alphabet_size: usize,
    /// Codewords in index order.
    pub codewords: Vec<Vec<u8>>,
}

/// Hex SHA-256 of a byte string.
pub fn fingerprint(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn check_version(version: u32, what: &str) -> CliResult<()> {
    if version != ARTIFACT_VERSION {
        return Err(CliError::config(format!(
            "{what} file version {version} not supported; this build reads version {ARTIFACT_VERSION}"
        )));
    }
    Ok(())
}

impl CipherFile {
    /// Captures a cipher's stored permutations.
    pub fn from_cipher(cipher: &PermutationCipher) -> Self {
        let (kind, permutations): (&str, Vec<Vec<u32>>) = match cipher {
            PermutationCipher::TypeI(inner) => (
                "type-i",
                inner.table().iter().map(|p| p.mapping().to_vec()).collect(),
            ),
            PermutationCipher::TypeII(inner) => (
                "type-ii",
                inner.base().iter().map(|p| p.mapping().to_vec()).collect(),
            ),
        };
        CipherFile {
            version: ARTIFACT_VERSION,
            kind: kind.to_string(),
            block_len: cipher.block_len(),
            key_space: cipher.key_space(),
            permutations,
        }
    }

    /// Reconstructs the cipher, revalidating every permutation.
    pub fn into_cipher(self) -> CliResult<PermutationCipher> {
        check_version(self.version, "cipher")?;
        let perms: Vec<Permutation> = self
            .permutations
            .into_iter()
            .map(Permutation::new)
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::config(format!("cipher file: {e}")))?;
        for p in &perms {
            if p.len() != self.block_len {
                return Err(CliError::config(format!(
                    "cipher file: permutation length {} does not match block_len {}",
                    p.len(),
                    self.block_len
                )));
            }
        }
        match self.kind.as_str() {
            "type-i" => {
                if perms.len() as u64 != self.key_space {
                    return Err(CliError::config(format!(
                        "cipher file: table has {} permutations but key_space is {}",
                        perms.len(),
                        self.key_space
                    )));
                }
                Ok(PermutationCipher::TypeI(
                    TypeICipher::from_table(perms)
                        .map_err(|e| CliError::config(format!("cipher file: {e}")))?,
                ))
            }
            "type-ii" => Ok(PermutationCipher::TypeII(
                TypeIICipher::from_base(perms, self.block_len, self.key_space)
                    .map_err(|e| CliError::config(format!("cipher file: {e}")))?,
            )),
            other => Err(CliError::config(format!(
                "cipher file: unknown kind {other:?}"
            ))),
        }
    }
}

impl CodebookFile {
    /// Captures a codebook's codewords.
    pub fn from_codebook(codebook: &Codebook) -> Self {
        CodebookFile {
            version: ARTIFACT_VERSION,
            alphabet_size: codebook.alphabet_size(),
            codewords: codebook
                .codewords()
                .iter()
                .map(|c| c.symbols().to_vec())
                .collect(),
        }
    }

    /// Reconstructs the codebook, revalidating alphabet and lengths.
    pub fn into_codebook(self) -> CliResult<Codebook> {
        check_version(self.version, "codebook")?;
        let words: Vec<Sequence> = self
            .codewords
            .into_iter()
            .map(Sequence::new)
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::config(format!("codebook file: {e}")))?;
        Codebook::from_codewords(self.alphabet_size, words)
            .map_err(|e| CliError::config(format!("codebook file: {e}")))
    }
}

/// Writes a cipher artifact.
pub fn save_cipher(path: &Path, cipher: &PermutationCipher) -> CliResult<()> {
    let file = CipherFile::from_cipher(cipher);
    std::fs::write(path, serde_json::to_vec_pretty(&file)?)?;
    Ok(())
}

/// Reads a cipher artifact.
pub fn load_cipher(path: &Path) -> CliResult<PermutationCipher> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let file: CipherFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::config(format!("cipher file parse error: {e}")))?;
    file.into_cipher()
}

/// Writes a codebook artifact.
pub fn save_codebook(path: &Path, codebook: &Codebook) -> CliResult<()> {
    let file = CodebookFile::from_codebook(codebook);
    std::fs::write(path, serde_json::to_vec_pretty(&file)?)?;
    Ok(())
}

/// Reads a codebook artifact.
pub fn load_codebook(path: &Path) -> CliResult<Codebook> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let file: CodebookFile = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::config(format!("codebook file parse error: {e}")))?;
    file.into_codebook()
}

/// Canonical fingerprint of a cipher (hash of its serialized form).
pub fn cipher_fingerprint(cipher: &PermutationCipher) -> CliResult<String> {
    Ok(fingerprint(&serde_json::to_vec(&CipherFile::from_cipher(
        cipher,
    ))?))
}

/// Canonical fingerprint of a codebook.
pub fn codebook_fingerprint(codebook: &Codebook) -> CliResult<String> {
    Ok(fingerprint(&serde_json::to_vec(
        &CodebookFile::from_codebook(codebook),
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ptc_core::cipher::CipherKind;
    use ptc_core::rng;

    #[test]
    fn fingerprints_are_hex_sha256() {
        // SHA-256 of the empty string, a fixed reference value.
        assert_eq!(
            fingerprint(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(fingerprint(b"abc").len(), 64);
    }

    #[test]
    fn cipher_round_trips_through_serialization() {
        for kind in [CipherKind::TypeI, CipherKind::TypeII] {
            let mut r = rng::for_role(41, "persist");
            let cipher = PermutationCipher::build(kind, 6, 8, &mut r).unwrap();
            let file = CipherFile::from_cipher(&cipher);
            let bytes = serde_json::to_vec(&file).unwrap();
            let parsed: CipherFile = serde_json::from_slice(&bytes).unwrap();
            let restored = parsed.into_cipher().unwrap();
            assert_eq!(restored.key_space(), cipher.key_space());
            assert_eq!(restored.kind(), cipher.kind());
            // Same resolved permutation for every key.
            for key in 0..8 {
                let key = ptc_core::cipher::SecretKey { value: key };
                let x = Sequence::new(vec![0, 1, 2, 3, 0, 1]).unwrap();
                assert_eq!(
                    cipher.encrypt(key, &x).unwrap(),
                    restored.encrypt(key, &x).unwrap()
                );
            }
            assert_eq!(
                cipher_fingerprint(&cipher).unwrap(),
                cipher_fingerprint(&restored).unwrap()
            );
        }
    }

    #[test]
    fn composed_cipher_files_store_only_the_base() {
        let mut r = rng::for_role(43, "persist");
        let cipher = PermutationCipher::build(CipherKind::TypeII, 5, 1024, &mut r).unwrap();
        let file = CipherFile::from_cipher(&cipher);
        assert_eq!(file.permutations.len(), 10); // log2(1024)
        assert_eq!(file.key_space, 1024);
    }

    #[test]
    fn corrupted_artifacts_are_rejected() {
        let file = CipherFile {
            version: ARTIFACT_VERSION,
            kind: "type-i".into(),
            block_len: 4,
            key_space: 2,
            permutations: vec![vec![0, 1, 2, 3], vec![0, 0, 2, 3]],
        };
        assert!(file.into_cipher().is_err());

        let stale = CipherFile {
            version: 99,
            kind: "type-i".into(),
            block_len: 4,
            key_space: 1,
            permutations: vec![vec![0, 1, 2, 3]],
        };
        let err = stale.into_cipher().unwrap_err();
        assert!(err.message.contains("version 99"));

        let book = CodebookFile {
            version: ARTIFACT_VERSION,
            alphabet_size: 2,
            codewords: vec![vec![0, 1], vec![0, 2]],
        };
        assert!(book.into_codebook().is_err());
    }
}
