use std::path::Path;

use super::{read_file, Sample};
use crate::error::{NnaError, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, what: &'static str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(NnaError::Truncated {
            what,
            needed: at + 4,
            available: bytes.len(),
        })
}

/// Parse an IDX image file (`ubyte`, 3 dims) and its IDX label file.
///
/// Pixels are scaled to `[0, 1]`. Each image becomes a flat row-major vector.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<Vec<Sample>> {
    let magic = be_u32(images, 0, "IDX image header")?;
    if magic != IMAGE_MAGIC {
        return Err(NnaError::BadMagic {
            what: "IDX image file",
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let n_images = be_u32(images, 4, "IDX image header")? as usize;
    let rows = be_u32(images, 8, "IDX image header")? as usize;
    let cols = be_u32(images, 12, "IDX image header")? as usize;

    let magic = be_u32(labels, 0, "IDX label header")?;
    if magic != LABEL_MAGIC {
        return Err(NnaError::BadMagic {
            what: "IDX label file",
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let n_labels = be_u32(labels, 4, "IDX label header")? as usize;
    if n_images != n_labels {
        return Err(NnaError::CountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }

    let dim = rows * cols;
    let needed = 16 + n_images * dim;
    if images.len() < needed {
        return Err(NnaError::Truncated {
            what: "IDX image payload",
            needed,
            available: images.len(),
        });
    }
    if labels.len() < 8 + n_labels {
        return Err(NnaError::Truncated {
            what: "IDX label payload",
            needed: 8 + n_labels,
            available: labels.len(),
        });
    }

    let pixels = &images[16..needed];
    let samples = pixels
        .chunks_exact(dim.max(1))
        .take(n_images)
        .zip(&labels[8..8 + n_labels])
        .map(|(px, &label)| {
            Sample::new(
                px.iter().map(|&b| f32::from(b) / 255.0).collect(),
                usize::from(label),
            )
        })
        .collect();
    Ok(samples)
}

/// Read an IDX image/label file pair from disk.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Vec<Sample>> {
    let images = read_file(images_path)?;
    let labels = read_file(labels_path)?;
    parse_idx(&images, &labels)
}

#[cfg(test)]
pub(crate) fn encode_idx(images: &[Vec<u8>], labels: &[u8], rows: u32, cols: u32) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::new();
    img.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    img.extend_from_slice(&(images.len() as u32).to_be_bytes());
    img.extend_from_slice(&rows.to_be_bytes());
    img.extend_from_slice(&cols.to_be_bytes());
    for im in images {
        img.extend_from_slice(im);
    }
    let mut lab = Vec::new();
    lab.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    (img, lab)
}
