//! Versioned, checksummed model files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes   "SENSEMDL"
//! version    u16
//! arch tag   u8        0 baseline, 1 knn, 2 mlp
//! header     u32 length + JSON (dim, shapes, hyperparameters, metadata)
//! payload    u64 count + count f64 values
//! checksum   32 bytes  SHA-256 of everything above
//! ```

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{SensorimotorVector, MODALITY_COUNT};

use super::{BaselineModel, KnnModel, MlpModel, ModelError, Projection, ProjectionModel};

pub const MAGIC: &[u8; 8] = b"SENSEMDL";
pub const FORMAT_VERSION: u16 = 1;

const CHECKSUM_LEN: usize = 32;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    architecture: String,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hidden_size: Option<usize>,
    outputs: usize,
    metadata: serde_json::Value,
}

fn tag(model: &ProjectionModel) -> u8 {
    match model {
        ProjectionModel::Baseline(_) => 0,
        ProjectionModel::Knn(_) => 1,
        ProjectionModel::Mlp(_) => 2,
    }
}

/// Serializes a model. `metadata` is stored verbatim in the header (training
/// hyperparameters, dev scores, provenance).
pub fn save_model(model: &ProjectionModel, metadata: &serde_json::Value) -> Vec<u8> {
    let mut header = Header {
        architecture: model.architecture().key().to_string(),
        dim: model.dim(),
        k: None,
        rows: None,
        hidden_size: None,
        outputs: MODALITY_COUNT,
        metadata: metadata.clone(),
    };
    let mut payload: Vec<f64> = Vec::new();
    match model {
        ProjectionModel::Baseline(m) => payload.extend_from_slice(m.mean_norms.values()),
        ProjectionModel::Knn(m) => {
            header.k = Some(m.k());
            header.rows = Some(m.len());
            payload.extend_from_slice(m.train_vectors());
            for n in m.train_norms() {
                payload.extend_from_slice(n.values());
            }
        }
        ProjectionModel::Mlp(m) => {
            header.hidden_size = Some(m.hidden_size());
            payload.extend_from_slice(m.params());
        }
    }

    let header_json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(64 + header_json.len() + payload.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(tag(model));
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    let start = out.len();
    out.resize(start + payload.len() * 8, 0);
    LittleEndian::write_f64_into(&payload, &mut out[start..]);
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| ModelError::Container("unexpected end of data".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

/// Parses a model file. The checksum is verified before anything else is
/// interpreted, so a corrupted file never yields a model.
pub fn load_model(bytes: &[u8]) -> Result<(ProjectionModel, serde_json::Value), ModelError> {
    if bytes.len() < MAGIC.len() + CHECKSUM_LEN || &bytes[..MAGIC.len()] != MAGIC {
        return Err(ModelError::Container("not a model file".into()));
    }
    let (body, checksum) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(ModelError::Checksum);
    }

    let mut cur = Cursor {
        bytes: body,
        pos: MAGIC.len(),
    };
    let version = LittleEndian::read_u16(cur.take(2)?);
    if version != FORMAT_VERSION {
        return Err(ModelError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let tag = cur.take(1)?[0];
    let header_len = LittleEndian::read_u32(cur.take(4)?) as usize;
    let header: Header = serde_json::from_slice(cur.take(header_len)?)
        .map_err(|e| ModelError::Container(format!("bad header: {e}")))?;
    let count = usize::try_from(LittleEndian::read_u64(cur.take(8)?))
        .map_err(|_| ModelError::Container("payload too large".into()))?;
    let raw = cur.take(count.checked_mul(8).ok_or_else(|| ModelError::Container("payload too large".into()))?)?;
    if cur.pos != body.len() {
        return Err(ModelError::Container("trailing bytes after payload".into()));
    }
    let mut payload = vec![0f64; count];
    LittleEndian::read_f64_into(raw, &mut payload);
    if header.outputs != MODALITY_COUNT || header.dim == 0 {
        return Err(ModelError::Container("header shape is invalid".into()));
    }

    let model = match (tag, header.architecture.as_str()) {
        (0, "baseline") => {
            if payload.len() != MODALITY_COUNT {
                return Err(ModelError::Container("baseline payload has the wrong length".into()));
            }
            let mut mean = SensorimotorVector::ZERO;
            mean.0.copy_from_slice(&payload);
            ProjectionModel::Baseline(BaselineModel {
                dim: header.dim,
                mean_norms: mean,
            })
        }
        (1, "knn") => {
            let (k, rows) = header
                .k
                .zip(header.rows)
                .ok_or_else(|| ModelError::Container("kNN header lacks k or rows".into()))?;
            let split = rows * header.dim;
            if payload.len() != split + rows * MODALITY_COUNT {
                return Err(ModelError::Container("kNN payload has the wrong length".into()));
            }
            let norms_block = payload.split_off(split);
            let norms = norms_block
                .chunks_exact(MODALITY_COUNT)
                .map(|c| {
                    let mut v = SensorimotorVector::ZERO;
                    v.0.copy_from_slice(c);
                    v
                })
                .collect();
            ProjectionModel::Knn(KnnModel::from_parts(k, header.dim, payload, norms)?)
        }
        (2, "mlp") => {
            let hidden = header
                .hidden_size
                .ok_or_else(|| ModelError::Container("MLP header lacks hidden_size".into()))?;
            ProjectionModel::Mlp(MlpModel::from_flat(header.dim, hidden, payload)?)
        }
        (t, a) => {
            return Err(ModelError::Container(format!(
                "architecture tag {t} does not match `{a}`"
            )))
        }
    };
    Ok((model, header.metadata))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Examples;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    fn random_mlp(seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MlpModel::init(6, 64, &mut rng);
        for p in m.params_mut() {
            *p += rng.gen_range(-0.01..0.01);
        }
        m
    }

    #[test]
    fn baseline_round_trip() {
        let mut mean = SensorimotorVector::splat(0.25);
        mean.0[7] = 0.8125;
        let m = ProjectionModel::Baseline(BaselineModel { dim: 300, mean_norms: mean });
        let bytes = save_model(&m, &json!({"split_seed": 1}));
        let (back, meta) = load_model(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta["split_seed"], 1);
    }

    #[test]
    fn mlp_round_trip_predictions() {
        let m = ProjectionModel::Mlp(random_mlp(1));
        let (back, _) = load_model(&save_model(&m, &json!(null))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let q: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (a, b) = (m.predict(&q).unwrap(), back.predict(&q).unwrap());
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn knn_round_trip() {
        let xs = vec![vec![1.0, 0.5], vec![0.0, 1.0], vec![-1.0, 0.25]];
        let ex = Examples {
            inputs: xs.iter().map(|v| v.as_slice()).collect(),
            targets: vec![
                SensorimotorVector::splat(0.1),
                SensorimotorVector::splat(0.2),
                SensorimotorVector::splat(0.3),
            ],
        };
        let m = ProjectionModel::Knn(KnnModel::fit(&ex, 2, 2).unwrap());
        let (back, _) = load_model(&save_model(&m, &json!({}))).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn corrupted_weight_byte_fails_checksum() {
        let bytes = save_model(&ProjectionModel::Mlp(random_mlp(3)), &json!({}));
        let mut bad = bytes.clone();
        let i = bad.len() - CHECKSUM_LEN - 100;
        bad[i] ^= 0x01;
        assert!(matches!(load_model(&bad), Err(ModelError::Checksum)));
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = save_model(
            &ProjectionModel::Baseline(BaselineModel { dim: 2, mean_norms: SensorimotorVector::ZERO }),
            &json!({}),
        );
        bytes[8] = 9;
        let n = bytes.len() - CHECKSUM_LEN;
        let digest = Sha256::digest(&bytes[..n]);
        bytes[n..].copy_from_slice(&digest);
        assert!(matches!(load_model(&bytes), Err(ModelError::Version { found: 9, expected: 1 })));
    }

    #[test]
    fn save_is_deterministic() {
        let m = ProjectionModel::Mlp(random_mlp(4));
        assert_eq!(save_model(&m, &json!({"a": 1})), save_model(&m, &json!({"a": 1})));
    }

    #[test]
    fn truncated_and_foreign_input() {
        assert!(load_model(b"hello").is_err());
        let bytes = save_model(&ProjectionModel::Mlp(random_mlp(5)), &json!({}));
        assert!(load_model(&bytes[..bytes.len() - 1]).is_err());
    }
}
