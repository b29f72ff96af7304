use std::path::Path;

use super::{read_file, Sample};
use crate::error::{NnaError, Result};

const PIXELS: usize = 3072;

/// CIFAR binary batch flavour. CIFAR-100 records carry a coarse and a fine
/// label byte; the fine label is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CifarKind {
    Cifar10,
    Cifar100,
}

impl CifarKind {
    fn label_bytes(self) -> usize {
        match self {
            CifarKind::Cifar10 => 1,
            CifarKind::Cifar100 => 2,
        }
    }

    fn classes(self) -> usize {
        match self {
            CifarKind::Cifar10 => 10,
            CifarKind::Cifar100 => 100,
        }
    }
}

/// Parse one CIFAR binary batch. Pixels keep the file's channel-major order
/// (1024 red, 1024 green, 1024 blue) and are scaled to `[0, 1]`.
pub fn parse_cifar(bytes: &[u8], kind: CifarKind) -> Result<Vec<Sample>> {
    let record = kind.label_bytes() + PIXELS;
    if !bytes.len().is_multiple_of(record) {
        return Err(NnaError::Truncated {
            what: "CIFAR batch",
            needed: (bytes.len() / record + 1) * record,
            available: bytes.len(),
        });
    }
    bytes
        .chunks_exact(record)
        .map(|rec| {
            let label = usize::from(rec[kind.label_bytes() - 1]);
            if label >= kind.classes() {
                return Err(NnaError::LabelOutOfRange {
                    label,
                    classes: kind.classes(),
                });
            }
            let features = rec[kind.label_bytes()..]
                .iter()
                .map(|&b| f32::from(b) / 255.0)
                .collect();
            Ok(Sample::new(features, label))
        })
        .collect()
}

pub fn load_cifar_batches<P: AsRef<Path>>(paths: &[P], kind: CifarKind) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(parse_cifar(&read_file(p.as_ref())?, kind)?);
    }
    Ok(out)
}
