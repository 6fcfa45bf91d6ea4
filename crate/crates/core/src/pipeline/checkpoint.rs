//! Binary model files.
//!
//! Layout: the magic bytes `SDPL`, a little-endian `u16` format version, a
//! `u64` payload length, the bincode payload, and a CRC-64 of everything
//! before it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_XZ};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::TrainConfig;
use super::encode::FeatureEncoders;
use crate::neural::ModelParams;

pub const MAGIC: &[u8; 4] = b"SDPL";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 8;
const CHECKSUM_LEN: usize = 8;
const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("model file has format version {found}, this build reads version {expected}")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("model file is truncated or corrupted (checksum mismatch)")]
    CorruptChecksum,
    #[error("cannot encode or decode model payload: {0}")]
    Payload(String),
}

/// A trained classifier with everything needed to encode new instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u16,
    pub config: TrainConfig,
    pub model: ModelParams,
    pub encoders: FeatureEncoders,
    pub oov_seed: u64,
    pub word_dim: usize,
    /// Persisted vectors of the generalization tokens.
    pub special_vectors: BTreeMap<String, Vec<f64>>,
    /// Fine-tuned word vectors; empty when embeddings were frozen.
    pub tuned_vectors: BTreeMap<String, Vec<f64>>,
    /// Mean training loss of every epoch.
    pub epoch_losses: Vec<f64>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CheckpointError> {
        encode_versioned(self, FORMAT_VERSION)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        decode_versioned(bytes, FORMAT_VERSION)
    }
}

fn encode_versioned(ck: &Checkpoint, version: u16) -> Result<Vec<u8>, CheckpointError> {
    let payload = bincode::serialize(ck).map_err(|e| CheckpointError::Payload(e.to_string()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + CHECKSUM_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&version.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(&payload);
    let sum = CRC64.checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    Ok(out)
}

fn decode_versioned(bytes: &[u8], expected: u16) -> Result<Checkpoint, CheckpointError> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(if bytes.len() < MAGIC.len() && MAGIC.starts_with(bytes) {
            CheckpointError::CorruptChecksum
        } else {
            CheckpointError::BadMagic
        });
    }
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(CheckpointError::CorruptChecksum);
    }
    let found = u16::from_le_bytes([bytes[4], bytes[5]]);
    if found != expected {
        return Err(CheckpointError::VersionMismatch { found, expected });
    }
    let len = u64::from_le_bytes(bytes[6..14].try_into().expect("8 bytes"));
    let body_end = HEADER_LEN as u64 + len;
    if body_end + CHECKSUM_LEN as u64 != bytes.len() as u64 {
        return Err(CheckpointError::CorruptChecksum);
    }
    let body_end = body_end as usize;
    let stored = u64::from_le_bytes(bytes[body_end..].try_into().expect("8 bytes"));
    if CRC64.checksum(&bytes[..body_end]) != stored {
        return Err(CheckpointError::CorruptChecksum);
    }
    bincode::deserialize(&bytes[HEADER_LEN..body_end]).map_err(|e| CheckpointError::Payload(e.to_string()))
}

pub fn save_checkpoint(ck: &Checkpoint, path: impl AsRef<Path>) -> Result<(), CheckpointError> {
    fs::write(path, ck.to_bytes()?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint, CheckpointError> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::PosTable;
    use crate::neural::{Architecture, HeadShape};
    use crate::pipeline::config::FeatureSettings;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = ModelParams::init(Architecture::SdpLstm { units: 3 }, 5, HeadShape::default(), &mut rng);
        Checkpoint {
            format_version: FORMAT_VERSION,
            config: TrainConfig::default(),
            model,
            encoders: FeatureEncoders {
                settings: FeatureSettings::default(),
                pos_table: PosTable::default(),
                pos_autoencoder: None,
                position_autoencoder: None,
            },
            oov_seed: 11,
            word_dim: 5,
            special_vectors: BTreeMap::from([("PROT1".into(), vec![0.1, -0.2, 1.0 / 3.0, 0.0, -0.0])]),
            tuned_vectors: BTreeMap::new(),
            epoch_losses: vec![0.7, 0.5],
        }
    }

    #[test]
    fn bytes_round_trip_exactly() {
        let ck = sample();
        let bytes = ck.to_bytes().unwrap();
        let back = Checkpoint::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes().unwrap(), bytes);
        assert_eq!(back, ck);
        assert_eq!(&bytes[..4], b"SDPL");
    }

    #[test]
    fn truncation_and_bit_flips_are_detected() {
        let bytes = sample().to_bytes().unwrap();
        for cut in [bytes.len() - 1, bytes.len() / 2, 15, 5, 2] {
            assert!(
                matches!(
                    Checkpoint::from_bytes(&bytes[..cut]),
                    Err(CheckpointError::CorruptChecksum)
                ),
                "cut {cut}"
            );
        }
        let mut flipped = bytes.clone();
        flipped[bytes.len() / 2] ^= 0x10;
        assert!(matches!(
            Checkpoint::from_bytes(&flipped),
            Err(CheckpointError::CorruptChecksum)
        ));
    }

    #[test]
    fn foreign_version_is_named() {
        let old = encode_versioned(&sample(), 1).unwrap();
        let err = decode_versioned(&old, 2).unwrap_err();
        assert!(matches!(
            err,
            CheckpointError::VersionMismatch { found: 1, expected: 2 }
        ));
        let msg = err.to_string();
        assert!(msg.contains('1') && msg.contains('2'), "{msg}");
    }

    #[test]
    fn wrong_magic() {
        assert!(matches!(
            Checkpoint::from_bytes(b"JUNKJUNKJUNKJUNKJUNKJUNK"),
            Err(CheckpointError::BadMagic)
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.ck");
        let ck = sample();
        save_checkpoint(&ck, &p).unwrap();
        assert_eq!(load_checkpoint(&p).unwrap(), ck);
    }
}
