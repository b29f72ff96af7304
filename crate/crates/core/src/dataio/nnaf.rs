//! NNAF feature files: precomputed feature vectors with labels.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "NNAF"
//! 4       4     version (u32 LE, = 1)
//! 8       4     sample_count (u32 LE)
//! 12      4     feature_dim (u32 LE)
//! 16      4     class_count (u32 LE)
//! 20      ...   sample_count records of feature_dim f32 LE + u16 LE label
//! ```

use std::io::Write;
use std::path::Path;

use super::{read_file, Sample};
use crate::error::{NnaError, Result};

const MAGIC: &[u8; 4] = b"NNAF";
const VERSION: u32 = 1;
const HEADER: usize = 20;

/// Contents of one NNAF file.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub samples: Vec<Sample>,
    pub feature_dim: usize,
    pub class_count: usize,
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

pub fn read_features(bytes: &[u8]) -> Result<FeatureFile> {
    if bytes.len() < HEADER {
        return Err(NnaError::Truncated {
            what: "NNAF header",
            needed: HEADER,
            available: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(NnaError::BadMagic {
            what: "NNAF file",
            expected: u32::from_be_bytes(*MAGIC),
            found: le_u32(bytes, 0).swap_bytes(),
        });
    }
    let version = le_u32(bytes, 4);
    if version != VERSION {
        return Err(NnaError::UnsupportedVersion(version));
    }
    let count = le_u32(bytes, 8) as usize;
    let dim = le_u32(bytes, 12) as usize;
    let class_count = le_u32(bytes, 16) as usize;

    let record = dim * 4 + 2;
    let payload = &bytes[HEADER..];
    let held = payload.len() / record;
    if held < count {
        return Err(NnaError::TruncatedPayload {
            declared: count,
            actual: held,
        });
    }
    let extra = payload.len() - count * record;
    if extra != 0 {
        return Err(NnaError::TrailingBytes(extra));
    }

    let mut samples = Vec::with_capacity(count);
    for (n, rec) in payload.chunks_exact(record).enumerate() {
        let mut features = Vec::with_capacity(dim);
        for (i, chunk) in rec[..dim * 4].chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                return Err(NnaError::NonFinite { sample: n, index: i });
            }
            features.push(v);
        }
        let label = usize::from(u16::from_le_bytes([rec[dim * 4], rec[dim * 4 + 1]]));
        if label >= class_count {
            return Err(NnaError::LabelOutOfRange {
                label,
                classes: class_count,
            });
        }
        samples.push(Sample::new(features, label));
    }
    Ok(FeatureFile {
        samples,
        feature_dim: dim,
        class_count,
    })
}

pub fn write_features<W: Write>(mut out: W, samples: &[Sample], class_count: usize) -> Result<()> {
    let dim = samples.first().map(|s| s.features.len()).unwrap_or(0);
    let ser = |e: std::io::Error| NnaError::Serialization(e.to_string());
    let mut buf = Vec::with_capacity(HEADER + samples.len() * (dim * 4 + 2));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(dim as u32).to_le_bytes());
    buf.extend_from_slice(&(class_count as u32).to_le_bytes());
    for (n, s) in samples.iter().enumerate() {
        if s.features.len() != dim {
            return Err(NnaError::DimensionMismatch {
                expected: dim,
                actual: s.features.len(),
            });
        }
        if s.label >= class_count || s.label > usize::from(u16::MAX) {
            return Err(NnaError::LabelOutOfRange {
                label: s.label,
                classes: class_count,
            });
        }
        for (i, v) in s.features.iter().enumerate() {
            if !v.is_finite() {
                return Err(NnaError::NonFinite { sample: n, index: i });
            }
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&(s.label as u16).to_le_bytes());
    }
    out.write_all(&buf).map_err(ser)
}

pub fn load_feature_file(path: &Path) -> Result<FeatureFile> {
    read_features(&read_file(path)?)
}

pub fn write_feature_file(path: &Path, samples: &[Sample], class_count: usize) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| NnaError::io(path, e))?;
    write_features(std::io::BufWriter::new(file), samples, class_count)
}
