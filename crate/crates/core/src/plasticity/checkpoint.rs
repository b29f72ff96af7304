//! Learner checkpoints.
//!
//! ```text
//! "NNAC" | u32 version=1 | u32 outputs | u32 inputs | f64 lr | u32 n
//!        | n bytes of JSON rule config | outputs*inputs f32 weights (row-major)
//! ```
//! All integers and floats little-endian. Weights are stored at single
//! precision, so a restored learner matches the original to f32 rounding.

use std::path::Path;

use super::{Learner, RuleConfig};
use crate::error::{NnaError, Result};

const MAGIC: &[u8; 4] = b"NNAC";
const VERSION: u32 = 1;

pub fn write_checkpoint(path: &Path, learner: &Learner) -> Result<()> {
    let json = serde_json::to_vec(&learner.config).map_err(|e| NnaError::Serialization(e.to_string()))?;
    let mut buf = Vec::with_capacity(28 + json.len() + learner.weights.len() * 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(learner.outputs as u32).to_le_bytes());
    buf.extend_from_slice(&(learner.inputs as u32).to_le_bytes());
    buf.extend_from_slice(&learner.lr.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&json);
    for w in &learner.weights {
        buf.extend_from_slice(&(*w as f32).to_le_bytes());
    }
    std::fs::write(path, buf).map_err(|e| NnaError::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Learner> {
    let b = std::fs::read(path).map_err(|e| NnaError::io(path, e))?;
    let trunc = |needed: usize| NnaError::Truncated {
        what: "checkpoint",
        needed,
        available: b.len(),
    };
    if b.len() < 28 {
        return Err(trunc(28));
    }
    if &b[..4] != MAGIC {
        return Err(NnaError::BadMagic {
            what: "checkpoint",
            expected: u32::from_be_bytes(*MAGIC),
            found: u32::from_be_bytes([b[0], b[1], b[2], b[3]]),
        });
    }
    let u32_at = |at: usize| u32::from_le_bytes(b[at..at + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(NnaError::UnsupportedVersion(version));
    }
    let outputs = u32_at(8) as usize;
    let inputs = u32_at(12) as usize;
    let lr = f64::from_le_bytes(b[16..24].try_into().unwrap());
    let json_len = u32_at(24) as usize;
    let body = 28 + json_len;
    let needed = body + outputs * inputs * 4;
    if b.len() < needed {
        return Err(trunc(needed));
    }
    let config: RuleConfig = serde_json::from_slice(&b[28..body]).map_err(|e| NnaError::Malformed {
        what: "checkpoint rule config",
        detail: e.to_string(),
    })?;
    let weights = b[body..needed]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Learner::from_parts(config, outputs, inputs, weights, Some(lr))
}
